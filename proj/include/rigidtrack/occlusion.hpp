#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rigidtrack/depth.hpp"
#include "rigidtrack/tracks.hpp"

namespace rigidtrack {

// Per-(track, frame) visibility verdicts for one camera. occluded covers
// both depth-test failures and out-of-FOV entries; fov is carried alongside
// so consumers can tell the two apart.
struct OcclusionMap {
  std::string object_id;
  CameraId camera_id = CameraId::front;
  int frame_count = 0;
  std::vector<uint8_t> occluded;  // N*F, 1 = occluded
  std::vector<uint8_t> fov;       // N*F, 1 = in field of view

  size_t index(size_t i, int tau) const {
    return i * static_cast<size_t>(frame_count) + static_cast<size_t>(tau - 1);
  }
};

inline constexpr double kDefaultOcclusionTolerance = 0.02;

// True iff the point sits behind the completed depth surface: range >
// (1 + tolerance) * sample_depth(dense, pixel).
bool occlusion_flag(double range, const DenseDepthMap& dense, double px,
                    double py, double tolerance);

// Applies the depth test to every in-FOV entry; out-of-FOV entries are
// occluded by definition. depth_maps[tau-1] must cover every frame; a
// missing frame raises an error naming it.
OcclusionMap occlusion_map(const TrackSet2D& tracks2d,
                           const std::vector<DenseDepthMap>& depth_maps,
                           double tolerance = kDefaultOcclusionTolerance);

}  // namespace rigidtrack
