#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace rigidtrack {

inline constexpr std::array<double, 5> kEvalThresholds{1, 2, 4, 8, 16};
inline constexpr int kDefaultEvalSize = 256;
inline constexpr int kDefaultQueryCount = 50;

// Prediction/ground-truth pair for one video, coordinates already scaled to
// the evaluation resolution. Arrays are N*F row-major like TrackSet2D.
struct EvalInput {
  size_t point_count = 0;
  int frame_count = 0;
  std::vector<double> pred_x, pred_y;
  std::optional<std::vector<uint8_t>> pred_occluded;  // trackers may omit it
  std::vector<double> gt_x, gt_y;
  std::vector<uint8_t> gt_occluded;
  std::vector<std::pair<size_t, int>> queries;  // (point, 1-based frame)
  int width = kDefaultEvalSize;
  int height = kDefaultEvalSize;

  size_t index(size_t i, int tau) const {
    return i * static_cast<size_t>(frame_count) +
           static_cast<size_t>(tau - 1);
  }
  // Shape agreement and query visibility.
  void validate() const;
};

struct EvalReport {
  std::vector<std::pair<double, double>> delta;  // (threshold, fraction)
  double delta_avg = 0;
  std::optional<double> occlusion_accuracy;  // absent without pred occlusion
  std::optional<double> average_jaccard;     // likewise
  std::vector<double> per_point_mean_error;  // pixels; NaN if never visible
  int width = 0, height = 0;
};

// Fraction of ground-truth-visible pairs with pixel error <= threshold.
// Throws Error(evaluation) when no pair is visible.
double position_accuracy(const EvalInput& input, double threshold);

// Fraction of all pairs whose predicted occlusion bit matches ground truth.
// Requires the predicted occlusion channel.
double occlusion_accuracy(const EvalInput& input);

// Jaccard at one threshold: TP / (TP + FP + FN) with TP = both visible and
// close, FP = predicted visible but ground-truth occluded or far, FN =
// ground-truth visible but predicted occluded or far. A visible-visible
// pair with error > threshold counts as both FP and FN.
double jaccard(const EvalInput& input, double threshold);

// Per-point mean pixel error over ground-truth-visible frames (NaN for
// points never visible), plus counts over fixed-width bins. Points whose
// mean is not finite (NaN predictions) are excluded from the counts.
struct ErrorHistogram {
  double bin_width = 0;
  std::vector<size_t> counts;         // bin b covers [b*w, (b+1)*w)
  std::vector<double> per_point_mean;  // pixels, NaN when undefined
};
ErrorHistogram error_histogram(const EvalInput& input, double bin_width);

// delta per threshold, delta_avg, and (when predictions carry occlusion)
// OA and AJ averaged over kEvalThresholds.
EvalReport evaluate_tracks(const EvalInput& input);

// Uniformly samples up to `count` distinct points visible at query_frame.
std::vector<std::pair<size_t, int>> sample_visible_queries(
    const std::vector<uint8_t>& gt_occluded, size_t point_count,
    int frame_count, int query_frame, int count, uint64_t seed);

}  // namespace rigidtrack
