// Command line front end: annotate scenes, validate and evaluate bundles,
// generate synthetic fixtures, render overlays, and cut dataset splits.
// Exit codes: 0 success, 1 failed validation or evaluation, 2 bad input.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rigidtrack/bundle.hpp"
#include "rigidtrack/error.hpp"
#include "rigidtrack/pipeline.hpp"
#include "rigidtrack/render.hpp"
#include "rigidtrack/scene.hpp"
#include "rigidtrack/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rigidtrack;

namespace {

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::validation:
    case ErrorKind::evaluation:
      return 1;
    default:
      return 2;
  }
}

std::vector<std::string> read_id_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ingestion, "cannot read " + path.string());
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
      line.pop_back();
    }
    if (!line.empty()) ids.push_back(line);
  }
  return ids;
}

struct AnnotateArgs {
  std::string scene, out, config;
  RunConfig cfg;
  std::vector<std::string> cameras;
};

void add_annotate(CLI::App& app, AnnotateArgs& a) {
  CLI::App* cmd = app.add_subcommand(
      "annotate", "Build rigid point tracks with occlusion labels");
  cmd->add_option("--scene", a.scene, "Scene bundle directory")->required();
  cmd->add_option("--out", a.out, "Output bundle directory")->required();
  cmd->add_option("--config", a.config,
                  "Key/value settings file; flags override it");
  cmd->add_option("--stride", a.cfg.stride, "Source frame spacing");
  cmd->add_option("--workers", a.cfg.workers, "Worker threads");
  cmd->add_option("--seed", a.cfg.seed, "Subsampling seed");
  cmd->add_option("--max-points", a.cfg.max_points_per_frame,
                  "Cap on box points per source frame (0 = keep all)");
  cmd->add_option("--occlusion-tolerance", a.cfg.occlusion_tolerance,
                  "Relative depth slack before a point counts occluded");
  cmd->add_option("--min-frames", a.cfg.min_frames,
                  "Contiguous in-view frames required for eligibility");
  cmd->add_option("--max-min-distance", a.cfg.max_min_distance,
                  "Box must approach the camera this close (meters)");
  cmd->add_flag("--drop-ineligible", a.cfg.drop_ineligible,
                "Skip objects ineligible on every camera");
  cmd->add_option("--max-speed-error", a.cfg.max_speed_error,
                  "Drop tracks whose speed error exceeds this (m/s, 0 = off)");
  cmd->add_option("--external-depth", a.cfg.external_depth,
                  "Directory of precompleted depth maps");
  cmd->add_option("--cameras", a.cameras, "Cameras to annotate")
      ->delimiter(',');
}

int run_annotate(const CLI::App& app, AnnotateArgs& a) {
  const CLI::App* cmd = app.get_subcommand("annotate");
  if (!a.config.empty()) {
    RunConfig from_file =
        RunConfig::from_doc(KeyValueDoc::parse_file(a.config));
    // Explicit flags win over the file.
    RunConfig flags = a.cfg;
    a.cfg = from_file;
    if (cmd->count("--stride")) a.cfg.stride = flags.stride;
    if (cmd->count("--workers")) a.cfg.workers = flags.workers;
    if (cmd->count("--seed")) a.cfg.seed = flags.seed;
    if (cmd->count("--max-points")) {
      a.cfg.max_points_per_frame = flags.max_points_per_frame;
    }
    if (cmd->count("--occlusion-tolerance")) {
      a.cfg.occlusion_tolerance = flags.occlusion_tolerance;
    }
    if (cmd->count("--min-frames")) a.cfg.min_frames = flags.min_frames;
    if (cmd->count("--max-min-distance")) {
      a.cfg.max_min_distance = flags.max_min_distance;
    }
    if (cmd->count("--drop-ineligible")) {
      a.cfg.drop_ineligible = flags.drop_ineligible;
    }
    if (cmd->count("--max-speed-error")) {
      a.cfg.max_speed_error = flags.max_speed_error;
    }
    if (cmd->count("--external-depth")) {
      a.cfg.external_depth = flags.external_depth;
    }
  }
  if (cmd->count("--cameras")) a.cfg.cameras = a.cameras;

  SceneBundle scene = load_scene_bundle(a.scene);
  TrackBundle bundle = annotate_scene(scene, a.cfg, a.scene);
  write_track_bundle(a.out, bundle);

  size_t tracks = 0;
  for (const auto& ob : bundle.objects) tracks += ob.tracks.track_count();
  std::printf("annotated %zu object(s), %zu track(s) over %d frames -> %s\n",
              bundle.objects.size(), tracks, bundle.frame_count,
              a.out.c_str());
  for (const auto& [id, reason] : bundle.skipped) {
    std::printf("skipped %s: %s\n", id.c_str(), reason.c_str());
  }
  return 0;
}

struct ValidateArgs {
  std::string bundle, scene;
};

int run_validate(ValidateArgs& a) {
  TrackBundle bundle = read_track_bundle(a.bundle);
  SceneBundle scene = load_scene_bundle(a.scene);
  ValidationReport rep = validate_bundle(bundle, scene);
  for (const auto& c : rep.checks) {
    std::printf("%s %-24s %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                c.detail.c_str());
  }
  return rep.all_pass() ? 0 : 1;
}

struct EvaluateArgs {
  std::string gt, pred, json_path;
  EvalOptions opts;
};

int run_evaluate(EvaluateArgs& a) {
  TrackBundle gt = read_track_bundle(a.gt);
  PredictionSet pred = read_predictions(a.pred);
  EvalSummary sum = evaluate_against(gt, pred, a.opts);

  json doc;
  doc["width"] = sum.width;
  doc["height"] = sum.height;
  json deltas = json::object();
  for (const auto& [thr, frac] : sum.delta) {
    char key[32];
    std::snprintf(key, sizeof(key), "%g", thr);
    deltas[key] = frac;
  }
  doc["delta"] = deltas;
  doc["delta_avg"] = sum.delta_avg;
  doc["occlusion_accuracy"] =
      sum.occlusion_accuracy ? json(*sum.occlusion_accuracy) : json();
  doc["average_jaccard"] =
      sum.average_jaccard ? json(*sum.average_jaccard) : json();
  doc["pairs"] = json::array();
  for (const auto& p : sum.pairs) {
    json pj;
    pj["object"] = p.object_id;
    pj["camera"] = p.camera;
    pj["queried_points"] = p.queried_points;
    pj["delta_avg"] = p.report.delta_avg;
    if (p.report.occlusion_accuracy) {
      pj["occlusion_accuracy"] = *p.report.occlusion_accuracy;
    }
    if (p.report.average_jaccard) {
      pj["average_jaccard"] = *p.report.average_jaccard;
    }
    doc["pairs"].push_back(pj);
  }

  if (!a.json_path.empty()) {
    std::ofstream out(a.json_path);
    if (!out) fail(ErrorKind::ingestion, "cannot write " + a.json_path);
    out << doc.dump(2) << "\n";
  }

  std::printf("pairs: %zu\n", sum.pairs.size());
  for (const auto& [thr, frac] : sum.delta) {
    std::printf("delta@%-4g %.6f\n", thr, frac);
  }
  std::printf("delta_avg %.6f\n", sum.delta_avg);
  if (sum.occlusion_accuracy) {
    std::printf("occlusion_accuracy %.6f\n", *sum.occlusion_accuracy);
  }
  if (sum.average_jaccard) {
    std::printf("average_jaccard %.6f\n", *sum.average_jaccard);
  }
  return 0;
}

struct SynthArgs {
  std::string scenario, out, oracle;
};

int run_synth(SynthArgs& a) {
  SyntheticScenario sc = SyntheticScenario::parse_file(a.scenario);
  SceneBundle scene = generate_scene(sc);
  write_scene_bundle(a.out, scene);
  size_t points = 0;
  for (const auto& s : scene.sweeps) points += s.points.size();
  std::printf("wrote %d frames, %zu sweep points, %zu object(s) -> %s\n",
              scene.frame_count, points, scene.box_tracks.size(),
              a.out.c_str());
  if (!a.oracle.empty()) {
    export_oracle(a.oracle, sc, scene);
    std::printf("oracle tracks -> %s\n", a.oracle.c_str());
  }
  return 0;
}

struct RenderArgs {
  std::string scene, bundle, camera = "front", out;
  int frame = 1;
  bool blank = false;
};

int run_render(RenderArgs& a) {
  SceneBundle scene = load_scene_bundle(a.scene);
  TrackBundle bundle = read_track_bundle(a.bundle);
  Image img = render_frame(scene, bundle, a.camera, a.frame, a.blank);
  write_ppm(a.out, img);
  std::printf("wrote %dx%d overlay -> %s\n", img.width, img.height,
              a.out.c_str());
  return 0;
}

struct SplitArgs {
  std::string ids, out;
  std::vector<double> fractions;
  std::vector<std::string> names;
  uint64_t seed = 1;
};

int run_split(SplitArgs& a) {
  std::vector<std::string> ids = read_id_lines(a.ids);
  if (a.names.empty()) {
    for (size_t i = 0; i < a.fractions.size(); ++i) {
      a.names.push_back("split" + std::to_string(i));
    }
  }
  if (a.names.size() != a.fractions.size()) {
    fail(ErrorKind::config, "--names and --fractions differ in length");
  }
  auto parts = split_ids(ids, a.fractions, a.seed);
  fs::create_directories(a.out);
  for (size_t i = 0; i < parts.size(); ++i) {
    fs::path path = fs::path(a.out) / (a.names[i] + ".txt");
    std::ofstream out(path);
    if (!out) fail(ErrorKind::ingestion, "cannot write " + path.string());
    for (const auto& id : parts[i]) out << id << "\n";
    std::printf("%s: %zu id(s)\n", path.c_str(), parts[i].size());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rigid object point track annotation and evaluation"};
  app.require_subcommand(1);

  AnnotateArgs annotate_args;
  add_annotate(app, annotate_args);

  ValidateArgs validate_args;
  CLI::App* validate_cmd = app.add_subcommand(
      "validate", "Check a track bundle against its source scene");
  validate_cmd->add_option("--bundle", validate_args.bundle, "Track bundle")
      ->required();
  validate_cmd->add_option("--scene", validate_args.scene, "Scene bundle")
      ->required();

  EvaluateArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand(
      "evaluate", "Score predicted tracks against a ground truth bundle");
  eval_cmd->add_option("--gt", eval_args.gt, "Ground truth bundle")
      ->required();
  eval_cmd->add_option("--pred", eval_args.pred, "Prediction bundle")
      ->required();
  eval_cmd->add_option("--query-frame", eval_args.opts.query_frame,
                       "Frame whose visible points become queries");
  eval_cmd->add_option("--queries", eval_args.opts.query_count,
                       "Queries sampled per (object, camera)");
  eval_cmd->add_option("--seed", eval_args.opts.seed, "Query sampling seed");
  eval_cmd->add_option("--width", eval_args.opts.width,
                       "Evaluation resolution width");
  eval_cmd->add_option("--height", eval_args.opts.height,
                       "Evaluation resolution height");
  eval_cmd->add_option("--json", eval_args.json_path,
                       "Write the summary as JSON to this file");

  SynthArgs synth_args;
  CLI::App* synth_cmd = app.add_subcommand(
      "synth", "Generate a synthetic scene from a scenario file");
  synth_cmd->add_option("--scenario", synth_args.scenario, "Scenario file")
      ->required();
  synth_cmd->add_option("--out", synth_args.out, "Scene output directory")
      ->required();
  synth_cmd->add_option("--oracle", synth_args.oracle,
                        "Also export closed-form tracks here");

  RenderArgs render_args;
  CLI::App* render_cmd = app.add_subcommand(
      "render", "Draw annotated points over a camera frame");
  render_cmd->add_option("--scene", render_args.scene, "Scene bundle")
      ->required();
  render_cmd->add_option("--bundle", render_args.bundle, "Track bundle")
      ->required();
  render_cmd->add_option("--camera", render_args.camera, "Camera name");
  render_cmd->add_option("--frame", render_args.frame, "1-based frame");
  render_cmd->add_option("--out", render_args.out, "Output PPM path")
      ->required();
  render_cmd->add_flag("--blank", render_args.blank,
                       "Draw on a black canvas instead of camera images");

  SplitArgs split_args;
  CLI::App* split_cmd =
      app.add_subcommand("split", "Cut an id list into seeded subsets");
  split_cmd->add_option("--ids", split_args.ids, "File with one id per line")
      ->required();
  split_cmd->add_option("--fractions", split_args.fractions,
                        "Subset fractions, must sum to 1")
      ->required()
      ->delimiter(',');
  split_cmd->add_option("--names", split_args.names, "Subset names")
      ->delimiter(',');
  split_cmd->add_option("--seed", split_args.seed, "Shuffle seed");
  split_cmd->add_option("--out", split_args.out, "Output directory")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Usage problems are input errors; --help and --version exit cleanly.
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand("annotate")) return run_annotate(app, annotate_args);
    if (app.got_subcommand("validate")) return run_validate(validate_args);
    if (app.got_subcommand("evaluate")) return run_evaluate(eval_args);
    if (app.got_subcommand("synth")) return run_synth(synth_args);
    if (app.got_subcommand("render")) return run_render(render_args);
    if (app.got_subcommand("split")) return run_split(split_args);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
