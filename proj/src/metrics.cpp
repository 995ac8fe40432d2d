#include "rigidtrack/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rigidtrack/error.hpp"
#include "rigidtrack/rng.hpp"

namespace rigidtrack {

void EvalInput::validate() const {
  size_t cells = point_count * static_cast<size_t>(frame_count);
  if (pred_x.size() != cells || pred_y.size() != cells ||
      gt_x.size() != cells || gt_y.size() != cells ||
      gt_occluded.size() != cells ||
      (pred_occluded && pred_occluded->size() != cells)) {
    fail(ErrorKind::evaluation,
         "prediction and ground-truth arrays disagree with N=" +
             std::to_string(point_count) +
             ", F=" + std::to_string(frame_count));
  }
  if (width <= 0 || height <= 0) {
    fail(ErrorKind::evaluation, "evaluation resolution must be positive");
  }
  for (const auto& [i, tau] : queries) {
    if (i >= point_count || tau < 1 || tau > frame_count) {
      fail(ErrorKind::evaluation, "query out of range");
    }
    if (gt_occluded[index(i, tau)]) {
      fail(ErrorKind::evaluation,
           "query point " + std::to_string(i) + " is occluded at frame " +
               std::to_string(tau));
    }
  }
}

namespace {

inline double pixel_error(const EvalInput& in, size_t idx) {
  double dx = in.pred_x[idx] - in.gt_x[idx];
  double dy = in.pred_y[idx] - in.gt_y[idx];
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

double position_accuracy(const EvalInput& input, double threshold) {
  size_t visible = 0, close = 0;
  size_t cells = input.point_count * static_cast<size_t>(input.frame_count);
  for (size_t idx = 0; idx < cells; ++idx) {
    if (input.gt_occluded[idx]) continue;
    ++visible;
    if (pixel_error(input, idx) <= threshold) ++close;
  }
  if (visible == 0) {
    fail(ErrorKind::evaluation,
         "position accuracy undefined: no ground-truth-visible pairs");
  }
  return static_cast<double>(close) / static_cast<double>(visible);
}

double occlusion_accuracy(const EvalInput& input) {
  if (!input.pred_occluded) {
    fail(ErrorKind::evaluation,
         "occlusion accuracy needs a predicted occlusion channel");
  }
  size_t cells = input.point_count * static_cast<size_t>(input.frame_count);
  if (cells == 0) {
    fail(ErrorKind::evaluation, "occlusion accuracy undefined: no pairs");
  }
  size_t agree = 0;
  for (size_t idx = 0; idx < cells; ++idx) {
    bool pred = (*input.pred_occluded)[idx] != 0;
    bool gt = input.gt_occluded[idx] != 0;
    if (pred == gt) ++agree;
  }
  return static_cast<double>(agree) / static_cast<double>(cells);
}

double jaccard(const EvalInput& input, double threshold) {
  if (!input.pred_occluded) {
    fail(ErrorKind::evaluation,
         "Jaccard needs a predicted occlusion channel");
  }
  size_t tp = 0, fp = 0, fn = 0;
  size_t cells = input.point_count * static_cast<size_t>(input.frame_count);
  for (size_t idx = 0; idx < cells; ++idx) {
    bool pred_vis = (*input.pred_occluded)[idx] == 0;
    bool gt_vis = input.gt_occluded[idx] == 0;
    bool close = gt_vis && pred_vis && pixel_error(input, idx) <= threshold;
    if (pred_vis && gt_vis && close) ++tp;
    if (pred_vis && !(gt_vis && close)) ++fp;
    if (gt_vis && !(pred_vis && close)) ++fn;
  }
  if (tp + fp + fn == 0) {
    fail(ErrorKind::evaluation,
         "Jaccard undefined at threshold " + std::to_string(threshold) +
             ": no positives in either channel");
  }
  return static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
}

ErrorHistogram error_histogram(const EvalInput& input, double bin_width) {
  if (!(bin_width > 0)) {
    fail(ErrorKind::evaluation, "histogram bin width must be positive");
  }
  ErrorHistogram hist;
  hist.bin_width = bin_width;
  hist.per_point_mean.resize(input.point_count,
                             std::numeric_limits<double>::quiet_NaN());
  for (size_t i = 0; i < input.point_count; ++i) {
    double sum = 0;
    size_t visible = 0;
    for (int tau = 1; tau <= input.frame_count; ++tau) {
      size_t idx = input.index(i, tau);
      if (input.gt_occluded[idx]) continue;
      sum += pixel_error(input, idx);
      ++visible;
    }
    if (visible == 0) continue;  // mean undefined, excluded from counts
    double mean = sum / static_cast<double>(visible);
    hist.per_point_mean[i] = mean;
    // NaN predictions make the mean non-finite; report it but keep it out
    // of the bins.
    if (!std::isfinite(mean)) continue;
    auto bin = static_cast<size_t>(mean / bin_width);
    if (hist.counts.size() <= bin) hist.counts.resize(bin + 1, 0);
    ++hist.counts[bin];
  }
  return hist;
}

EvalReport evaluate_tracks(const EvalInput& input) {
  input.validate();
  EvalReport rep;
  rep.width = input.width;
  rep.height = input.height;
  double delta_sum = 0;
  for (double threshold : kEvalThresholds) {
    double frac = position_accuracy(input, threshold);
    rep.delta.emplace_back(threshold, frac);
    delta_sum += frac;
  }
  rep.delta_avg = delta_sum / static_cast<double>(kEvalThresholds.size());
  if (input.pred_occluded) {
    rep.occlusion_accuracy = occlusion_accuracy(input);
    double aj_sum = 0;
    for (double threshold : kEvalThresholds) {
      aj_sum += jaccard(input, threshold);
    }
    rep.average_jaccard =
        aj_sum / static_cast<double>(kEvalThresholds.size());
  }
  rep.per_point_mean_error =
      error_histogram(input, 1.0).per_point_mean;
  return rep;
}

std::vector<std::pair<size_t, int>> sample_visible_queries(
    const std::vector<uint8_t>& gt_occluded, size_t point_count,
    int frame_count, int query_frame, int count, uint64_t seed) {
  if (query_frame < 1 || query_frame > frame_count) {
    fail(ErrorKind::evaluation,
         "query frame " + std::to_string(query_frame) + " outside [1, " +
             std::to_string(frame_count) + "]");
  }
  std::vector<size_t> visible;
  for (size_t i = 0; i < point_count; ++i) {
    size_t idx = i * static_cast<size_t>(frame_count) +
                 static_cast<size_t>(query_frame - 1);
    if (!gt_occluded[idx]) visible.push_back(i);
  }
  Rng rng(seed);
  // Partial Fisher-Yates: the first `take` slots are a uniform sample.
  size_t take = std::min<size_t>(static_cast<size_t>(count), visible.size());
  for (size_t i = 0; i < take; ++i) {
    size_t j = i + rng.next_below(visible.size() - i);
    std::swap(visible[i], visible[j]);
  }
  std::vector<std::pair<size_t, int>> out;
  out.reserve(take);
  for (size_t i = 0; i < take; ++i) out.emplace_back(visible[i], query_frame);
  return out;
}

}  // namespace rigidtrack
