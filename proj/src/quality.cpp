#include "rigidtrack/quality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rigidtrack/error.hpp"

namespace rigidtrack {

EligibilityReport eligibility(const BoxTrack& box_track,
                              const TrackSet2D& tracks2d,
                              const std::vector<RigidTransform>& ego_poses,
                              const CameraCalibration& calib,
                              int min_frames, double max_min_distance) {
  if (min_frames < 1 || !(max_min_distance > 0)) {
    fail(ErrorKind::config, "eligibility thresholds must be positive");
  }
  EligibilityReport rep;
  rep.object_id = box_track.object_id;
  rep.camera_id = tracks2d.camera_id;

  int frames = tracks2d.frame_count;
  size_t n = tracks2d.track_count();
  int runs = 0, current = 0;
  for (int tau = 1; tau <= frames; ++tau) {
    bool any = false;
    for (size_t i = 0; i < n && !any; ++i) {
      any = tracks2d.in_fov[tracks2d.index(i, tau)] != 0;
    }
    if (any) {
      if (current == 0) ++runs;
      ++current;
      rep.longest_in_fov_run = std::max(rep.longest_in_fov_run, current);
      ++rep.total_in_fov_frames;
    } else {
      current = 0;
    }
  }

  rep.min_distance = std::numeric_limits<double>::infinity();
  for (const BoxEntry& e : box_track.entries) {
    if (e.frame < 1 || e.frame > static_cast<int>(ego_poses.size())) continue;
    Vec3 cam_center =
        (ego_poses[static_cast<size_t>(e.frame - 1)] * calib.extrinsic)
            .translation_part();
    rep.min_distance =
        std::min(rep.min_distance,
                 (e.pose.translation_part() - cam_center).norm());
  }

  if (!is_front_facing(tracks2d.camera_id)) rep.reasons.push_back("camera");
  if (rep.longest_in_fov_run < min_frames) {
    rep.reasons.push_back("min_frames");
  }
  if (!(rep.min_distance <= max_min_distance)) {
    rep.reasons.push_back("min_distance");
  }
  if (runs > 1) rep.reasons.push_back("leaves_and_returns");
  rep.eligible = rep.reasons.empty();
  return rep;
}

double percentile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) {
    fail(ErrorKind::validation, "percentile of an empty sample");
  }
  double rank = p / 100.0 * static_cast<double>(sorted.size() - 1);
  auto lo = static_cast<size_t>(rank);
  if (lo + 1 >= sorted.size()) return sorted.back();
  double frac = rank - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

SpeedErrorStats speed_error_stats(const TrackSet3D& tracks,
                                  const std::vector<RigidTransform>& ego_poses,
                                  const BoxTrack& box_track,
                                  double frame_rate) {
  int frames = tracks.frame_count;
  if (frames < 2) {
    fail(ErrorKind::validation,
         "speed statistics need at least 2 frames, got " +
             std::to_string(frames));
  }
  if (!(frame_rate > 0)) {
    fail(ErrorKind::validation, "frame_rate must be positive");
  }
  if (!box_track.has_velocities()) {
    fail(ErrorKind::validation,
         "object " + box_track.object_id +
             ": speed statistics need annotated velocities on every frame");
  }

  double annotated = 0;
  for (const BoxEntry& e : box_track.entries) annotated += e.velocity->norm();
  annotated /= static_cast<double>(box_track.entries.size());

  SpeedErrorStats stats;
  stats.object_id = tracks.object_id;
  size_t n = tracks.track_count();
  stats.per_track_error.resize(n);
  for (size_t i = 0; i < n; ++i) {
    double sum = 0;
    Vec3 prev;
    for (int tau = 1; tau <= frames; ++tau) {
      size_t idx = tracks.index(i, tau);
      Vec3 world = ego_poses[static_cast<size_t>(tau - 1)].apply(
          {tracks.x[idx], tracks.y[idx], tracks.z[idx]});
      if (tau > 1) sum += (world - prev).norm();
      prev = world;
    }
    double mean_speed = sum * frame_rate / static_cast<double>(frames - 1);
    stats.per_track_error[i] = std::fabs(mean_speed - annotated);
  }

  std::vector<double> sorted = stats.per_track_error;
  std::sort(sorted.begin(), sorted.end());
  stats.p25 = percentile(sorted, 25);
  stats.p50 = percentile(sorted, 50);
  stats.p75 = percentile(sorted, 75);
  stats.p95 = percentile(sorted, 95);
  stats.p99 = percentile(sorted, 99);
  return stats;
}

}  // namespace rigidtrack
