#include "rigidtrack/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string_view>

#include "rigidtrack/binio.hpp"
#include "rigidtrack/error.hpp"
#include "rigidtrack/occlusion.hpp"
#include "rigidtrack/parallel.hpp"
#include "rigidtrack/quality.hpp"
#include "rigidtrack/rng.hpp"
#include "rigidtrack/tracks.hpp"

namespace rigidtrack {

namespace fs = std::filesystem;

namespace {

uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

double q32(double v) { return static_cast<double>(static_cast<float>(v)); }

std::string frame_file(const char* stem, int frame, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s%05d%s", stem, frame - 1, ext);
  return buf;
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

RunConfig RunConfig::from_doc(const KeyValueDoc& doc) {
  RunConfig cfg;
  cfg.stride = static_cast<int>(doc.get_int_or("stride", cfg.stride));
  cfg.workers = static_cast<int>(doc.get_int_or("workers", cfg.workers));
  cfg.seed = static_cast<uint64_t>(
      doc.get_int_or("seed", static_cast<int64_t>(cfg.seed)));
  cfg.max_points_per_frame = static_cast<size_t>(doc.get_int_or(
      "max_points_per_frame", static_cast<int64_t>(cfg.max_points_per_frame)));
  cfg.occlusion_tolerance =
      doc.get_double_or("occlusion_tolerance", cfg.occlusion_tolerance);
  cfg.min_frames = static_cast<int>(doc.get_int_or("min_frames",
                                                   cfg.min_frames));
  cfg.max_min_distance =
      doc.get_double_or("max_min_distance", cfg.max_min_distance);
  cfg.drop_ineligible = doc.get_bool_or("drop_ineligible", cfg.drop_ineligible);
  cfg.max_speed_error = doc.get_double_or("max_speed_error",
                                          cfg.max_speed_error);
  cfg.external_depth = doc.get_or("external_depth", cfg.external_depth);
  if (doc.has("cameras")) cfg.cameras = doc.get_strings("cameras");
  cfg.check();
  return cfg;
}

void RunConfig::check() const {
  if (stride < 1) fail(ErrorKind::config, "stride must be >= 1");
  if (workers < 1) fail(ErrorKind::config, "workers must be >= 1");
  if (!(occlusion_tolerance >= 0) || !std::isfinite(occlusion_tolerance)) {
    fail(ErrorKind::config, "occlusion_tolerance must be non-negative");
  }
  if (min_frames < 1) fail(ErrorKind::config, "min_frames must be >= 1");
  if (!(max_min_distance > 0)) {
    fail(ErrorKind::config, "max_min_distance must be positive");
  }
  if (!(max_speed_error >= 0)) {
    fail(ErrorKind::config, "max_speed_error must be non-negative");
  }
}

std::vector<DenseDepthMap> build_depth_maps(
    const SceneBundle& scene, const CameraCalibration& calib, int workers,
    const std::string& external_depth_dir) {
  size_t frames = static_cast<size_t>(scene.frame_count);
  std::vector<DenseDepthMap> out(frames);
  std::string cam = to_string(calib.camera_id);
  if (!external_depth_dir.empty()) {
    for (size_t f = 0; f < frames; ++f) {
      fs::path path = fs::path(external_depth_dir) / cam /
                      frame_file("depth_", static_cast<int>(f) + 1, ".f32le");
      out[f] = import_external_depth(path, static_cast<int>(f) + 1, calib);
    }
    return out;
  }
  parallel_for(frames, workers, [&](size_t f) {
    try {
      out[f] = nn_complete(project_sweep_to_sparse(scene.sweeps[f], calib));
    } catch (const Error& e) {
      throw Error(e.kind(), "camera " + cam + ": " + e.what());
    }
  });
  return out;
}

namespace {

// The exact point selection the annotator uses for one source frame, also
// re-derived verbatim by validate_bundle: box membership in input order,
// then a seeded partial shuffle that keeps the survivors in input order.
PointSet select_box_points(const SceneBundle& scene, const BoxEntry& entry,
                           int frame, uint64_t seed, const std::string& id,
                           size_t max_points) {
  PointSet pts =
      points_in_box(scene.sweeps[static_cast<size_t>(frame - 1)], entry.pose,
                    entry.dims, scene.ego_poses[static_cast<size_t>(frame - 1)]);
  if (max_points == 0 || pts.size() <= max_points) return pts;
  std::vector<size_t> idx(pts.size());
  std::iota(idx.begin(), idx.end(), size_t{0});
  Rng rng = Rng(seed ^ fnv1a64(id)).fork(static_cast<uint64_t>(frame));
  for (size_t i = 0; i < max_points; ++i) {
    size_t j = i + static_cast<size_t>(rng.next_below(idx.size() - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(max_points);
  std::sort(idx.begin(), idx.end());
  PointSet out;
  out.reserve(max_points);
  for (size_t i : idx) out.push_back(pts.at(i));
  return out;
}

void quantize_tracks(TrackSet3D& t) {
  for (double& v : t.x) v = q32(v);
  for (double& v : t.y) v = q32(v);
  for (double& v : t.z) v = q32(v);
}

void quantize_view(TrackSet2D& t) {
  for (double& v : t.px) v = q32(v);
  for (double& v : t.py) v = q32(v);
  for (double& v : t.range) v = q32(v);
}

TrackSet3D keep_rows(const TrackSet3D& in, const std::vector<size_t>& rows) {
  TrackSet3D out;
  out.object_id = in.object_id;
  out.frame_count = in.frame_count;
  size_t f = static_cast<size_t>(in.frame_count);
  for (size_t i : rows) {
    out.source_frames.push_back(in.source_frames[i]);
    out.x.insert(out.x.end(), in.x.begin() + static_cast<long>(i * f),
                 in.x.begin() + static_cast<long>((i + 1) * f));
    out.y.insert(out.y.end(), in.y.begin() + static_cast<long>(i * f),
                 in.y.begin() + static_cast<long>((i + 1) * f));
    out.z.insert(out.z.end(), in.z.begin() + static_cast<long>(i * f),
                 in.z.begin() + static_cast<long>((i + 1) * f));
  }
  return out;
}

}  // namespace

TrackBundle annotate_scene(const SceneBundle& scene, const RunConfig& cfg,
                           const std::string& scene_path) {
  cfg.check();
  scene.validate();

  std::vector<const CameraCalibration*> cams;
  if (cfg.cameras.empty()) {
    for (const auto& c : scene.cameras) {
      if (is_front_facing(c.camera_id)) cams.push_back(&c);
    }
    if (cams.empty()) {
      fail(ErrorKind::config,
           "scene has no front-facing cameras; name cameras explicitly");
    }
  } else {
    for (const auto& name : cfg.cameras) {
      auto id = camera_id_from_string(name);
      if (!id) fail(ErrorKind::config, "unknown camera '" + name + "'");
      const CameraCalibration* c = scene.camera(*id);
      if (!c) fail(ErrorKind::config, "scene has no camera '" + name + "'");
      for (const auto* seen : cams) {
        if (seen == c) fail(ErrorKind::config, "camera '" + name + "' listed twice");
      }
      cams.push_back(c);
    }
  }

  TrackBundle bundle;
  bundle.frame_count = scene.frame_count;
  bundle.frame_rate = scene.frame_rate;
  bundle.scene = scene_path;
  bundle.stride = cfg.stride;
  bundle.seed = cfg.seed;
  bundle.max_points_per_frame = cfg.max_points_per_frame;
  bundle.occlusion_tolerance = cfg.occlusion_tolerance;
  bundle.min_frames = cfg.min_frames;
  bundle.max_min_distance = cfg.max_min_distance;
  bundle.drop_ineligible = cfg.drop_ineligible;
  bundle.max_speed_error = cfg.max_speed_error;
  bundle.external_depth = cfg.external_depth;
  for (const auto* c : cams) {
    bundle.camera_names.push_back(to_string(c->camera_id));
    bundle.camera_sizes.emplace_back(c->width, c->height);
  }

  std::vector<std::vector<DenseDepthMap>> depth;
  depth.reserve(cams.size());
  for (const auto* c : cams) {
    depth.push_back(
        build_depth_maps(scene, *c, cfg.workers, cfg.external_depth));
  }

  int f = scene.frame_count;
  for (const BoxTrack& box : scene.box_tracks) {
    const std::string& id = box.object_id;
    try {
      if (static_cast<int>(box.entries.size()) != f) {
        fail(ErrorKind::propagation,
             "box poses cover " + std::to_string(box.entries.size()) + " of " +
                 std::to_string(f) + " frames");
      }

      std::vector<PointSet> per_frame(static_cast<size_t>(f));
      for (int t = 1; t <= f; t += cfg.stride) {
        per_frame[static_cast<size_t>(t - 1)] =
            select_box_points(scene, box.entries[static_cast<size_t>(t - 1)],
                              t, cfg.seed, id, cfg.max_points_per_frame);
      }

      ObjectAnnotation ob;
      ob.tracks = build_tracks(id, per_frame, scene.ego_poses, box,
                               cfg.stride, cfg.workers);
      quantize_tracks(ob.tracks);

      bool can_speed = box.has_velocities() && f >= 2;
      if (cfg.max_speed_error > 0 && !can_speed) {
        fail(ErrorKind::validation,
             "speed filter needs annotated velocities and at least 2 frames");
      }
      if (can_speed) {
        SpeedErrorStats stats = speed_error_stats(ob.tracks, scene.ego_poses,
                                                  box, scene.frame_rate);
        if (cfg.max_speed_error > 0) {
          std::vector<size_t> keep;
          for (size_t i = 0; i < stats.per_track_error.size(); ++i) {
            if (stats.per_track_error[i] <= cfg.max_speed_error) {
              keep.push_back(i);
            }
          }
          if (keep.empty()) {
            fail(ErrorKind::validation,
                 "speed filter removed every track at " +
                     format_double(cfg.max_speed_error) + " m/s");
          }
          if (keep.size() < ob.tracks.track_count()) {
            ob.rejected_tracks = ob.tracks.track_count() - keep.size();
            ob.tracks = keep_rows(ob.tracks, keep);
            stats = speed_error_stats(ob.tracks, scene.ego_poses, box,
                                      scene.frame_rate);
          }
        }
        ob.speed = std::move(stats);
      }

      size_t eligible_views = 0;
      for (size_t k = 0; k < cams.size(); ++k) {
        TrackSet2D view = project_to_image(ob.tracks, *cams[k]);
        quantize_view(view);
        OcclusionMap occ =
            occlusion_map(view, depth[k], cfg.occlusion_tolerance);
        EligibilityReport rep =
            eligibility(box, view, scene.ego_poses, *cams[k], cfg.min_frames,
                        cfg.max_min_distance);
        if (rep.eligible) ++eligible_views;
        ob.views.push_back(std::move(view));
        ob.occlusion.push_back(std::move(occ));
        ob.eligibility.push_back(std::move(rep));
      }
      if (cfg.drop_ineligible && eligible_views == 0) {
        fail(ErrorKind::validation, "ineligible on every camera");
      }

      bundle.objects.push_back(std::move(ob));
    } catch (const Error& e) {
      bundle.skipped.emplace_back(id, e.what());
    }
  }

  if (bundle.objects.empty()) {
    std::string detail;
    for (const auto& [id, reason] : bundle.skipped) {
      detail += "\n  " + id + ": " + reason;
    }
    fail(ErrorKind::empty_object, "no object could be annotated" + detail);
  }
  return bundle;
}

// ---------------------------------------------------------------------------
// Validation

bool ValidationReport::all_pass() const {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

namespace {

struct CheckState {
  size_t failures = 0;
  std::string first;

  void flag(const std::string& what) {
    if (failures == 0) first = what;
    ++failures;
  }
  ValidationCheck done(const std::string& name, const std::string& ok_detail) {
    ValidationCheck c;
    c.name = name;
    c.pass = failures == 0;
    c.detail = c.pass ? ok_detail
                      : first + (failures > 1
                                     ? " (+" + std::to_string(failures - 1) +
                                           " more)"
                                     : "");
    return c;
  }
};

}  // namespace

ValidationReport validate_bundle(const TrackBundle& b,
                                 const SceneBundle& scene) {
  ValidationReport rep;

  // Scene alignment: the bundle must describe this scene.
  {
    CheckState st;
    if (b.frame_count != scene.frame_count) {
      st.flag("bundle spans " + std::to_string(b.frame_count) +
              " frames, scene has " + std::to_string(scene.frame_count));
    }
    if (b.frame_rate != scene.frame_rate) {
      st.flag("frame rate mismatch");
    }
    std::vector<const CameraCalibration*> cams;
    for (size_t k = 0; k < b.camera_names.size(); ++k) {
      auto id = camera_id_from_string(b.camera_names[k]);
      const CameraCalibration* c = id ? scene.camera(*id) : nullptr;
      if (!c) {
        st.flag("scene has no camera '" + b.camera_names[k] + "'");
      } else if (c->width != b.camera_sizes[k].first ||
                 c->height != b.camera_sizes[k].second) {
        st.flag("camera '" + b.camera_names[k] + "' size differs from scene");
      }
      cams.push_back(c);
    }
    for (const auto& ob : b.objects) {
      const BoxTrack* box = scene.box(ob.tracks.object_id);
      if (!box) {
        st.flag("scene has no object '" + ob.tracks.object_id + "'");
      } else if (static_cast<int>(box->entries.size()) != scene.frame_count) {
        st.flag("object '" + ob.tracks.object_id +
                "': box poses no longer cover every frame");
      }
    }
    rep.checks.push_back(st.done(
        "scene_alignment", std::to_string(b.objects.size()) + " objects, " +
                               std::to_string(b.camera_names.size()) +
                               " cameras"));
    if (!rep.checks.back().pass) return rep;  // later checks dereference these
  }

  size_t cells_total = 0;

  // Flag consistency: bits are 0/1 and out-of-view entries are occluded.
  {
    CheckState st;
    for (const auto& ob : b.objects) {
      size_t cells =
          ob.tracks.track_count() * static_cast<size_t>(b.frame_count);
      cells_total += cells * b.camera_names.size();
      for (size_t k = 0; k < ob.views.size(); ++k) {
        const auto& fov = ob.views[k].in_fov;
        const auto& occ = ob.occlusion[k].occluded;
        if (ob.occlusion[k].fov != fov) {
          st.flag("object '" + ob.tracks.object_id +
                  "': stored FOV channels disagree");
          continue;
        }
        for (size_t c = 0; c < cells; ++c) {
          if (fov[c] > 1 || occ[c] > 1 || (!fov[c] && !occ[c])) {
            st.flag("object '" + ob.tracks.object_id + "' camera '" +
                    b.camera_names[k] + "': visible entry outside the view");
            break;
          }
        }
      }
    }
    rep.checks.push_back(st.done(
        "flag_consistency", std::to_string(cells_total) + " entries"));
  }

  // Source identity: rows re-derive exactly from the scene with the echoed
  // settings. With the speed filter off the row set must match completely;
  // with it on, stored rows must be an ordered subset and the rejected
  // count must cover the difference.
  {
    CheckState st;
    for (const auto& ob : b.objects) {
      const std::string& id = ob.tracks.object_id;
      const BoxTrack* box = scene.box(id);
      std::vector<int> cand_frames;
      std::vector<Vec3> cand_points;
      for (int t = 1; t <= b.frame_count; t += b.stride) {
        PointSet pts =
            select_box_points(scene, box->entries[static_cast<size_t>(t - 1)],
                              t, b.seed, id, b.max_points_per_frame);
        for (size_t i = 0; i < pts.size(); ++i) {
          cand_frames.push_back(t);
          cand_points.push_back(pts.at(i));
        }
      }
      size_t n = ob.tracks.track_count();
      bool filtered = b.max_speed_error > 0;
      if (!filtered && n != cand_points.size()) {
        st.flag("object '" + id + "': " + std::to_string(n) +
                " stored rows, re-derivation yields " +
                std::to_string(cand_points.size()));
        continue;
      }
      if (filtered && n + ob.rejected_tracks != cand_points.size()) {
        st.flag("object '" + id + "': stored plus rejected rows differ from " +
                std::to_string(cand_points.size()) + " candidates");
        continue;
      }
      size_t c = 0;
      bool ok = true;
      for (size_t i = 0; i < n && ok; ++i) {
        int src = ob.tracks.source_frames[i];
        size_t at = ob.tracks.index(i, src);
        Vec3 p{ob.tracks.x[at], ob.tracks.y[at], ob.tracks.z[at]};
        if (!filtered) {
          ok = src == cand_frames[i] && p.x == cand_points[i].x &&
               p.y == cand_points[i].y && p.z == cand_points[i].z;
        } else {
          while (c < cand_points.size() &&
                 !(cand_frames[c] == src && cand_points[c].x == p.x &&
                   cand_points[c].y == p.y && cand_points[c].z == p.z)) {
            ++c;
          }
          ok = c < cand_points.size();
          ++c;
        }
      }
      if (!ok) {
        st.flag("object '" + id +
                "': stored rows do not re-derive from the scene");
      }
    }
    rep.checks.push_back(
        st.done("source_identity",
                std::to_string(b.objects.size()) + " objects re-derived"));
  }

  // Projection consistency: pixels, ranges, and FOV bits reproduce exactly
  // from the stored 3d tracks.
  {
    CheckState st;
    for (const auto& ob : b.objects) {
      for (size_t k = 0; k < ob.views.size(); ++k) {
        const CameraCalibration* calib =
            scene.camera(*camera_id_from_string(b.camera_names[k]));
        TrackSet2D redo = project_to_image(ob.tracks, *calib);
        quantize_view(redo);
        const TrackSet2D& v = ob.views[k];
        if (redo.in_fov != v.in_fov) {
          st.flag("object '" + ob.tracks.object_id + "' camera '" +
                  b.camera_names[k] + "': FOV bits do not reproduce");
          continue;
        }
        size_t cells = v.px.size();
        for (size_t c = 0; c < cells; ++c) {
          // Compare as stored: NaN (behind the camera) must stay NaN.
          bool same_px = redo.px[c] == v.px[c] ||
                         (std::isnan(redo.px[c]) && std::isnan(v.px[c]));
          bool same_py = redo.py[c] == v.py[c] ||
                         (std::isnan(redo.py[c]) && std::isnan(v.py[c]));
          if (!same_px || !same_py || redo.range[c] != v.range[c]) {
            st.flag("object '" + ob.tracks.object_id + "' camera '" +
                    b.camera_names[k] + "': projection does not reproduce");
            break;
          }
        }
      }
    }
    rep.checks.push_back(
        st.done("projection_consistency", "pixels, ranges, and FOV bits"));
  }

  // Speed statistics: recompute from stored rows and compare the echo.
  {
    CheckState st;
    size_t with_stats = 0;
    for (const auto& ob : b.objects) {
      const std::string& id = ob.tracks.object_id;
      const BoxTrack* box = scene.box(id);
      bool can = box->has_velocities() && b.frame_count >= 2;
      if (!ob.speed) {
        if (can) st.flag("object '" + id + "': speed statistics are missing");
        continue;
      }
      if (!can) {
        st.flag("object '" + id +
                "': speed statistics present without velocities");
        continue;
      }
      ++with_stats;
      SpeedErrorStats redo = speed_error_stats(ob.tracks, scene.ego_poses,
                                               *box, b.frame_rate);
      auto close = [](double a, double x) { return std::fabs(a - x) <= 1e-9; };
      if (!close(redo.p25, ob.speed->p25) || !close(redo.p50, ob.speed->p50) ||
          !close(redo.p75, ob.speed->p75) || !close(redo.p95, ob.speed->p95) ||
          !close(redo.p99, ob.speed->p99)) {
        st.flag("object '" + id + "': speed percentiles do not reproduce");
      }
      if (b.max_speed_error > 0) {
        for (double e : redo.per_track_error) {
          if (e > b.max_speed_error) {
            st.flag("object '" + id +
                    "': a stored track violates the speed filter");
            break;
          }
        }
      }
    }
    rep.checks.push_back(st.done(
        "speed_stats", std::to_string(with_stats) + " objects with statistics"));
  }

  // Eligibility echo: recompute the filters from stored FOV bits.
  {
    CheckState st;
    size_t eligible_objects = 0;
    for (const auto& ob : b.objects) {
      const BoxTrack* box = scene.box(ob.tracks.object_id);
      bool any = false;
      for (size_t k = 0; k < ob.views.size(); ++k) {
        const CameraCalibration* calib =
            scene.camera(*camera_id_from_string(b.camera_names[k]));
        EligibilityReport redo =
            eligibility(*box, ob.views[k], scene.ego_poses, *calib,
                        b.min_frames, b.max_min_distance);
        const EligibilityReport& have = ob.eligibility[k];
        if (redo.eligible != have.eligible || redo.reasons != have.reasons ||
            redo.longest_in_fov_run != have.longest_in_fov_run ||
            redo.total_in_fov_frames != have.total_in_fov_frames ||
            std::fabs(redo.min_distance - have.min_distance) > 1e-9) {
          st.flag("object '" + ob.tracks.object_id + "' camera '" +
                  b.camera_names[k] + "': eligibility does not reproduce");
        }
        any = any || have.eligible;
      }
      if (any) ++eligible_objects;
      if (b.drop_ineligible && !any) {
        st.flag("object '" + ob.tracks.object_id +
                "' should have been dropped as ineligible");
      }
    }
    rep.checks.push_back(st.done(
        "eligibility_echo",
        std::to_string(eligible_objects) + " objects eligible somewhere"));
  }

  return rep;
}

// ---------------------------------------------------------------------------
// Predictions

const PredictionEntry* PredictionSet::entry(const std::string& object_id,
                                            const std::string& camera) const {
  for (const auto& e : entries) {
    if (e.object_id == object_id && e.camera == camera) return &e;
  }
  return nullptr;
}

namespace {

constexpr const char* kPredFormat = "rigidtrack-predictions";

void check_prediction_set(const PredictionSet& p) {
  if (p.frame_count < 1) {
    fail(ErrorKind::validation, "prediction set has no frames");
  }
  for (const auto& e : p.entries) {
    size_t cells = e.rows * static_cast<size_t>(p.frame_count);
    if (e.object_id.empty() || e.rows == 0 || e.px.size() != cells ||
        e.py.size() != cells ||
        (p.has_occlusion ? e.occluded.size() != cells : !e.occluded.empty())) {
      fail(ErrorKind::validation, "prediction entry '" + e.object_id + "/" +
                                      e.camera + "' is malformed");
    }
    if (!camera_id_from_string(e.camera)) {
      fail(ErrorKind::validation,
           "prediction entry names unknown camera '" + e.camera + "'");
    }
  }
}

}  // namespace

void write_predictions(const fs::path& dir, const PredictionSet& pred) {
  check_prediction_set(pred);
  KeyValueDoc doc;
  doc.set("format", kPredFormat);
  doc.set_int("version", 1);
  doc.set_int("frames", pred.frame_count);
  doc.set_bool("has_occlusion", pred.has_occlusion);

  std::vector<std::string> ids;
  for (const auto& e : pred.entries) {
    if (std::find(ids.begin(), ids.end(), e.object_id) == ids.end()) {
      ids.push_back(e.object_id);
    }
  }
  doc.set("objects", join(ids, " "));
  for (const auto& id : ids) {
    std::vector<std::string> cams;
    size_t rows = 0;
    for (const auto& e : pred.entries) {
      if (e.object_id != id) continue;
      cams.push_back(e.camera);
      if (rows && rows != e.rows) {
        fail(ErrorKind::validation,
             "object '" + id + "': cameras disagree on the row count");
      }
      rows = e.rows;
    }
    doc.set("object." + id + ".cameras", join(cams, " "));
    doc.set_int("object." + id + ".tracks", static_cast<int64_t>(rows));
  }

  for (const auto& e : pred.entries) {
    fs::path cdir = dir / "objects" / e.object_id / e.camera;
    fs::create_directories(cdir);
    size_t cells = e.rows * static_cast<size_t>(pred.frame_count);
    std::vector<float> pix(cells * 2);
    for (size_t c = 0; c < cells; ++c) {
      pix[2 * c] = static_cast<float>(e.px[c]);
      pix[2 * c + 1] = static_cast<float>(e.py[c]);
    }
    write_f32_file(cdir / "tracks_2d.f32le", pix);
    if (pred.has_occlusion) {
      write_u8_file(cdir / "occlusion.u8", e.occluded);
    }
  }
  doc.write_file(dir / "manifest.txt");
}

PredictionSet read_predictions(const fs::path& dir) {
  fs::path manifest = dir / "manifest.txt";
  if (!fs::exists(manifest)) {
    fail(ErrorKind::ingestion, "missing manifest: " + manifest.string());
  }
  KeyValueDoc doc = KeyValueDoc::parse_file(manifest);
  if (doc.get("format") != kPredFormat) {
    fail(ErrorKind::ingestion,
         "not a prediction bundle: format = '" + doc.get("format") + "'");
  }
  if (doc.get_int("version") != 1) {
    fail(ErrorKind::ingestion, "unsupported prediction version");
  }
  PredictionSet p;
  p.frame_count = static_cast<int>(doc.get_int("frames"));
  p.has_occlusion = doc.get_bool("has_occlusion");
  if (p.frame_count < 1) {
    fail(ErrorKind::corruption, "prediction bundle has no frames");
  }
  for (const auto& id : doc.get_strings("objects")) {
    auto rows =
        static_cast<size_t>(doc.get_int("object." + id + ".tracks"));
    size_t cells = rows * static_cast<size_t>(p.frame_count);
    for (const auto& cam : doc.get_strings("object." + id + ".cameras")) {
      if (!camera_id_from_string(cam)) {
        fail(ErrorKind::corruption,
             "prediction bundle names unknown camera '" + cam + "'");
      }
      PredictionEntry e;
      e.object_id = id;
      e.camera = cam;
      e.rows = rows;
      fs::path cdir = dir / "objects" / id / cam;
      auto pix = read_f32_file(cdir / "tracks_2d.f32le", cells * 2);
      e.px.resize(cells);
      e.py.resize(cells);
      for (size_t c = 0; c < cells; ++c) {
        e.px[c] = pix[2 * c];
        e.py[c] = pix[2 * c + 1];
      }
      if (p.has_occlusion) {
        e.occluded = read_u8_file(cdir / "occlusion.u8", cells);
        for (uint8_t bit : e.occluded) {
          if (bit > 1) {
            fail(ErrorKind::corruption,
                 "prediction occlusion bytes must be 0 or 1");
          }
        }
      }
      p.entries.push_back(std::move(e));
    }
  }
  check_prediction_set(p);
  return p;
}

void export_oracle(const fs::path& dir, const SyntheticScenario& sc,
                   const SceneBundle& scene) {
  PredictionSet pred;
  pred.frame_count = scene.frame_count;
  pred.has_occlusion = true;

  struct Sidecar {
    std::string id;
    OracleTracks tracks;
    std::vector<std::pair<std::string, std::vector<uint8_t>>> stable;
  };
  std::vector<Sidecar> sidecars;

  for (const BoxTrack& box : scene.box_tracks) {
    PointSet seeds = points_in_box(scene.sweeps[0], box.entries[0].pose,
                                   box.entries[0].dims, scene.ego_poses[0]);
    if (seeds.empty()) {
      fail(ErrorKind::generation,
           "object '" + box.object_id + "' has no points in frame 1");
    }
    Sidecar side;
    side.id = box.object_id;
    side.tracks = analytic_tracks(sc, box.object_id, seeds, 1);
    for (const auto& calib : scene.cameras) {
      OracleOcclusion occ = analytic_occlusion(sc, box.object_id, seeds, 1,
                                               calib.camera_id);
      PredictionEntry e;
      e.object_id = box.object_id;
      e.camera = to_string(calib.camera_id);
      e.rows = seeds.size();
      e.px = occ.px;
      e.py = occ.py;
      e.occluded = occ.occluded;
      pred.entries.push_back(std::move(e));
      side.stable.emplace_back(to_string(calib.camera_id),
                               std::move(occ.stable));
    }
    sidecars.push_back(std::move(side));
  }

  write_predictions(dir, pred);

  for (const auto& side : sidecars) {
    fs::path odir = dir / "objects" / side.id;
    size_t n = side.tracks.x.size() / static_cast<size_t>(scene.frame_count);
    std::vector<int64_t> sources(n, 0);  // all rows seeded at frame 1
    write_i64_file(odir / "source_frames.i64le", sources);
    std::vector<double> xyz(side.tracks.x.size() * 3);
    for (size_t c = 0; c < side.tracks.x.size(); ++c) {
      xyz[3 * c] = side.tracks.x[c];
      xyz[3 * c + 1] = side.tracks.y[c];
      xyz[3 * c + 2] = side.tracks.z[c];
    }
    write_f64_file(odir / "tracks_3d.f64le", xyz);
    for (const auto& [cam, stable] : side.stable) {
      write_u8_file(odir / cam / "stable.u8", stable);
    }
  }

  KeyValueDoc doc = KeyValueDoc::parse_file(dir / "manifest.txt");
  doc.set_bool("oracle", true);
  doc.set_int("source_frame", 1);
  doc.write_file(dir / "manifest.txt");
}

// ---------------------------------------------------------------------------
// Evaluation

EvalSummary evaluate_against(const TrackBundle& gt, const PredictionSet& pred,
                             const EvalOptions& opts) {
  if (opts.width < 1 || opts.height < 1) {
    fail(ErrorKind::evaluation, "evaluation resolution must be positive");
  }
  if (opts.query_count < 1) {
    fail(ErrorKind::evaluation, "query count must be positive");
  }
  if (pred.frame_count != gt.frame_count) {
    fail(ErrorKind::evaluation,
         "predictions span " + std::to_string(pred.frame_count) +
             " frames, ground truth has " + std::to_string(gt.frame_count));
  }

  EvalSummary sum;
  sum.width = opts.width;
  sum.height = opts.height;
  int f = gt.frame_count;

  for (const PredictionEntry& e : pred.entries) {
    const ObjectAnnotation* ob = gt.object(e.object_id);
    if (!ob) continue;
    size_t k = 0;
    while (k < gt.camera_names.size() && gt.camera_names[k] != e.camera) ++k;
    if (k == gt.camera_names.size()) continue;

    size_t rows = ob->tracks.track_count();
    if (e.rows != rows) {
      fail(ErrorKind::evaluation,
           "object '" + e.object_id + "' camera '" + e.camera + "': " +
               std::to_string(e.rows) + " prediction rows, ground truth has " +
               std::to_string(rows));
    }

    const TrackSet2D& view = ob->views[k];
    const std::vector<uint8_t>& occ = ob->occlusion[k].occluded;
    auto queries = sample_visible_queries(
        occ, rows, f, opts.query_frame, opts.query_count,
        opts.seed ^ fnv1a64(e.object_id + "/" + e.camera));
    if (queries.empty()) continue;  // nothing visible at the query frame

    std::vector<size_t> picked;
    picked.reserve(queries.size());
    for (const auto& [i, tau] : queries) picked.push_back(i);
    std::sort(picked.begin(), picked.end());

    double sx = static_cast<double>(opts.width) /
                static_cast<double>(gt.camera_sizes[k].first);
    double sy = static_cast<double>(opts.height) /
                static_cast<double>(gt.camera_sizes[k].second);

    EvalInput in;
    in.point_count = picked.size();
    in.frame_count = f;
    in.width = opts.width;
    in.height = opts.height;
    size_t cells = picked.size() * static_cast<size_t>(f);
    in.pred_x.reserve(cells);
    in.pred_y.reserve(cells);
    in.gt_x.reserve(cells);
    in.gt_y.reserve(cells);
    in.gt_occluded.reserve(cells);
    if (pred.has_occlusion) in.pred_occluded.emplace();
    for (size_t row : picked) {
      for (int tau = 1; tau <= f; ++tau) {
        size_t at = view.index(row, tau);
        in.pred_x.push_back(e.px[at] * sx);
        in.pred_y.push_back(e.py[at] * sy);
        in.gt_x.push_back(view.px[at] * sx);
        in.gt_y.push_back(view.py[at] * sy);
        in.gt_occluded.push_back(occ[at]);
        if (pred.has_occlusion) in.pred_occluded->push_back(e.occluded[at]);
      }
    }
    for (size_t q = 0; q < picked.size(); ++q) {
      in.queries.emplace_back(q, opts.query_frame);
    }

    PairEvaluation pe;
    pe.object_id = e.object_id;
    pe.camera = e.camera;
    pe.queried_points = picked.size();
    pe.report = evaluate_tracks(in);
    sum.pairs.push_back(std::move(pe));
  }

  if (sum.pairs.empty()) {
    fail(ErrorKind::evaluation,
         "no overlapping (object, camera) pair has visible query points");
  }

  size_t np = sum.pairs.size();
  for (size_t d = 0; d < kEvalThresholds.size(); ++d) {
    double acc = 0;
    for (const auto& p : sum.pairs) acc += p.report.delta[d].second;
    sum.delta.emplace_back(kEvalThresholds[d], acc / static_cast<double>(np));
  }
  double avg = 0;
  for (const auto& p : sum.pairs) avg += p.report.delta_avg;
  sum.delta_avg = avg / static_cast<double>(np);
  if (pred.has_occlusion) {
    double oa = 0, aj = 0;
    for (const auto& p : sum.pairs) {
      oa += *p.report.occlusion_accuracy;
      aj += *p.report.average_jaccard;
    }
    sum.occlusion_accuracy = oa / static_cast<double>(np);
    sum.average_jaccard = aj / static_cast<double>(np);
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Splits

std::vector<std::vector<std::string>> split_ids(
    const std::vector<std::string>& ids, const std::vector<double>& fractions,
    uint64_t seed) {
  if (fractions.empty()) {
    fail(ErrorKind::config, "at least one split fraction is required");
  }
  double total = 0;
  for (double frac : fractions) {
    if (!(frac >= 0) || !std::isfinite(frac)) {
      fail(ErrorKind::config, "split fractions must be non-negative");
    }
    total += frac;
  }
  if (std::fabs(total - 1.0) > 1e-9) {
    fail(ErrorKind::config,
         "split fractions sum to " + format_double(total) + ", expected 1");
  }

  std::vector<std::string> pool = ids;
  Rng rng(seed);
  for (size_t i = 0; i + 1 < pool.size(); ++i) {
    size_t j = i + static_cast<size_t>(rng.next_below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }

  size_t n = pool.size();
  std::vector<size_t> counts(fractions.size());
  std::vector<double> remainders(fractions.size());
  size_t assigned = 0;
  for (size_t s = 0; s < fractions.size(); ++s) {
    double exact = fractions[s] * static_cast<double>(n);
    counts[s] = static_cast<size_t>(std::floor(exact));
    remainders[s] = exact - std::floor(exact);
    assigned += counts[s];
  }
  // Hand the leftovers to the largest remainders, earlier splits first on
  // ties.
  std::vector<size_t> order(fractions.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return remainders[a] > remainders[b];
  });
  for (size_t r = 0; assigned < n; ++r) {
    ++counts[order[r % order.size()]];
    ++assigned;
  }

  std::vector<std::vector<std::string>> out(fractions.size());
  size_t at = 0;
  for (size_t s = 0; s < fractions.size(); ++s) {
    out[s].assign(pool.begin() + static_cast<long>(at),
                  pool.begin() + static_cast<long>(at + counts[s]));
    at += counts[s];
  }
  return out;
}

}  // namespace rigidtrack
