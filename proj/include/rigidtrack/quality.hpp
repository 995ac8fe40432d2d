#pragma once

#include <string>
#include <vector>

#include "rigidtrack/scene.hpp"
#include "rigidtrack/tracks.hpp"

namespace rigidtrack {

inline constexpr int kDefaultMinFrames = 24;
inline constexpr double kDefaultMaxMinDistance = 20.0;  // meters

struct EligibilityReport {
  std::string object_id;
  CameraId camera_id = CameraId::front;
  bool eligible = false;
  // Failed-filter identifiers, in check order: "camera", "min_frames",
  // "min_distance", "leaves_and_returns". Empty iff eligible.
  std::vector<std::string> reasons;
  int longest_in_fov_run = 0;   // frames, used for the min_frames filter
  int total_in_fov_frames = 0;  // reported alongside (the laxer reading)
  double min_distance = 0;      // meters, box centroid to camera center
};

// Applies the object filters for one camera: front-facing camera only, at
// least min_frames contiguous frames with a point in FOV, box centroid
// within max_min_distance of the camera at some frame, and no
// leave-and-return (the in-FOV frame set must be one run).
EligibilityReport eligibility(const BoxTrack& box_track,
                              const TrackSet2D& tracks2d,
                              const std::vector<RigidTransform>& ego_poses,
                              const CameraCalibration& calib,
                              int min_frames = kDefaultMinFrames,
                              double max_min_distance =
                                  kDefaultMaxMinDistance);

struct SpeedErrorStats {
  std::string object_id;
  std::vector<double> per_track_error;  // m/s, one per track, input order
  double p25 = 0, p50 = 0, p75 = 0, p95 = 0, p99 = 0;
};

// Per track: mean world-frame speed over consecutive frames, compared with
// the mean annotated speed; percentiles over the per-track absolute errors.
// Throws Error(validation) when any box entry lacks a velocity or F < 2.
SpeedErrorStats speed_error_stats(const TrackSet3D& tracks,
                                  const std::vector<RigidTransform>& ego_poses,
                                  const BoxTrack& box_track,
                                  double frame_rate);

// Linear interpolation between closest ranks: rank = p/100 * (n-1).
// `sorted` must be ascending and nonempty; p in [0, 100].
double percentile(const std::vector<double>& sorted, double p);

}  // namespace rigidtrack
