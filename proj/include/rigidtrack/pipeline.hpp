#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rigidtrack/bundle.hpp"
#include "rigidtrack/depth.hpp"
#include "rigidtrack/kvdoc.hpp"
#include "rigidtrack/metrics.hpp"
#include "rigidtrack/scene.hpp"
#include "rigidtrack/synthetic.hpp"

namespace rigidtrack {

// Settings for one annotation run. The worker count changes wall time only,
// never output, which is why it is not echoed into bundles.
struct RunConfig {
  int stride = 1;
  int workers = 1;
  uint64_t seed = 1;
  size_t max_points_per_frame = 0;  // 0 keeps every box point
  double occlusion_tolerance = kDefaultOcclusionTolerance;
  int min_frames = kDefaultMinFrames;
  double max_min_distance = kDefaultMaxMinDistance;
  bool drop_ineligible = false;  // skip objects ineligible on every camera
  double max_speed_error = 0;    // m/s; 0 disables the track filter
  std::string external_depth;    // per-camera depth map dir; empty = compute
  std::vector<std::string> cameras;  // empty = every front-facing camera

  // Reads any subset of the fields above by name; absent keys keep their
  // defaults. `cameras` is a space-separated list.
  static RunConfig from_doc(const KeyValueDoc& doc);
  void check() const;  // throws Error(config) on out-of-range settings
};

// Dense depth for every frame through one camera: sparse sweep projection
// plus nearest-sample completion, or a stack of imported files named
// <dir>/<camera>/depth_%05d.f32le when an external directory is given.
std::vector<DenseDepthMap> build_depth_maps(
    const SceneBundle& scene, const CameraCalibration& calib, int workers,
    const std::string& external_depth_dir = "");

// Runs the full annotation over every object with a complete box track:
// extract box points per source frame, propagate rigidly to all frames,
// filter by speed agreement when asked, project into each camera, and label
// occlusion against the completed depth. Objects that fail are recorded in
// the bundle's skipped list without stopping the run; only a run in which
// every object fails throws.
TrackBundle annotate_scene(const SceneBundle& scene, const RunConfig& config,
                           const std::string& scene_path = "");

struct ValidationCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};
struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool all_pass() const;
};

// Integrity checks of a stored bundle against its source scene: alignment,
// flag consistency, exact re-derivation of source rows, projection and
// range agreement, speed statistics, and the eligibility echo.
ValidationReport validate_bundle(const TrackBundle& bundle,
                                 const SceneBundle& scene);

// External tracker output for evaluation: per (object, camera) pixel tracks
// over all frames, row-aligned with the ground-truth bundle, plus an
// optional occlusion channel.
struct PredictionEntry {
  std::string object_id;
  std::string camera;
  size_t rows = 0;
  std::vector<double> px, py;     // rows * frames
  std::vector<uint8_t> occluded;  // rows * frames, only with has_occlusion
};
struct PredictionSet {
  int frame_count = 0;
  bool has_occlusion = false;
  std::vector<PredictionEntry> entries;

  const PredictionEntry* entry(const std::string& object_id,
                               const std::string& camera) const;
};

void write_predictions(const std::filesystem::path& dir,
                       const PredictionSet& pred);
PredictionSet read_predictions(const std::filesystem::path& dir);

// Writes the closed-form ground truth of a synthetic scenario as a
// predictions bundle rooted at frame-1 box points, with extra sidecars
// (tracks_3d.f64le, source_frames.i64le, per-camera stable.u8) for
// debugging. Pairs row-for-row with `annotate --stride <frames>`.
void export_oracle(const std::filesystem::path& dir,
                   const SyntheticScenario& scenario,
                   const SceneBundle& scene);

struct EvalOptions {
  int query_frame = 1;
  int query_count = kDefaultQueryCount;  // sampled per (object, camera)
  uint64_t seed = 1;
  int width = kDefaultEvalSize;  // evaluation resolution
  int height = kDefaultEvalSize;
};

struct PairEvaluation {
  std::string object_id;
  std::string camera;
  size_t queried_points = 0;
  EvalReport report;
};

// Per-pair scores plus their unweighted means. Pairs are the intersection
// of prediction entries and ground-truth (object, camera) combinations;
// row-count disagreement on a shared pair is an error, not a skip.
struct EvalSummary {
  int width = 0, height = 0;
  std::vector<PairEvaluation> pairs;
  std::vector<std::pair<double, double>> delta;  // threshold, mean fraction
  double delta_avg = 0;
  std::optional<double> occlusion_accuracy;
  std::optional<double> average_jaccard;
};

EvalSummary evaluate_against(const TrackBundle& gt, const PredictionSet& pred,
                             const EvalOptions& options);

// Shuffles ids with the seed and cuts them into len(fractions) groups by
// largest-remainder apportionment. Fractions must be non-negative and sum
// to 1 within 1e-9.
std::vector<std::vector<std::string>> split_ids(
    const std::vector<std::string>& ids, const std::vector<double>& fractions,
    uint64_t seed);

}  // namespace rigidtrack
