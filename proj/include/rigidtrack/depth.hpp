#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "rigidtrack/geometry.hpp"
#include "rigidtrack/scene.hpp"

namespace rigidtrack {

// Per-pixel minimum camera range of the projected sweep; +inf where no
// point landed.
struct SparseDepthMap {
  int t = 0;
  int width = 0;
  int height = 0;
  std::vector<double> range;  // width*height, row-major
  size_t sample_count = 0;

  bool has_sample(int x, int y) const {
    return range[static_cast<size_t>(y) * width + x] !=
           std::numeric_limits<double>::infinity();
  }
};

struct DenseDepthMap {
  enum class Provenance { nearest_neighbor, external };

  int t = 0;
  int width = 0;
  int height = 0;
  Provenance provenance = Provenance::nearest_neighbor;
  std::vector<float> values;  // width*height, row-major, meters
};

// Projects every sweep point with positive camera z and in-bounds pixel to
// the floor of its pixel coordinates; pixels hit more than once keep the
// minimum range (nearest surface).
SparseDepthMap project_sweep_to_sparse(const LidarSweep& sweep,
                                       const CameraCalibration& calib);

// Exact nearest-sample completion: every pixel takes the range of its
// nearest sample by Euclidean distance on the pixel grid, ties broken by
// lowest (y, then x) sample coordinate. Throws Error(completion) when the
// map has no samples. Supports maps up to 16384 on a side.
DenseDepthMap nn_complete(const SparseDepthMap& sparse);

// Max over the four corner pixels around (x, y), corners clamped to bounds.
double sample_depth(const DenseDepthMap& dense, double x, double y);

// Reads a width*height float32 grid produced by an external completion
// model. Throws Error(import) on byte-count mismatch.
DenseDepthMap import_external_depth(const std::filesystem::path& path,
                                    int t, const CameraCalibration& calib);

}  // namespace rigidtrack
