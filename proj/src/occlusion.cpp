#include "rigidtrack/occlusion.hpp"

#include "rigidtrack/error.hpp"
#include "rigidtrack/kernels.hpp"

namespace rigidtrack {

bool occlusion_flag(double range, const DenseDepthMap& dense, double px,
                    double py, double tolerance) {
  double depth = sample_depth(dense, px, py);
  uint8_t occ;
  kernels::active().occlusion_compare(&range, &depth, 1, tolerance, &occ);
  return occ != 0;
}

OcclusionMap occlusion_map(const TrackSet2D& tracks2d,
                           const std::vector<DenseDepthMap>& depth_maps,
                           double tolerance) {
  int frames = tracks2d.frame_count;
  if (static_cast<int>(depth_maps.size()) != frames) {
    fail(ErrorKind::alignment,
         "depth maps cover " + std::to_string(depth_maps.size()) +
             " frames, tracks span " + std::to_string(frames));
  }
  OcclusionMap out;
  out.object_id = tracks2d.object_id;
  out.camera_id = tracks2d.camera_id;
  out.frame_count = frames;
  out.fov = tracks2d.in_fov;
  out.occluded.assign(tracks2d.in_fov.size(), 0);

  size_t n = tracks2d.track_count();
  std::vector<double> px(n), py(n), range(n), depth(n);
  std::vector<uint8_t> occ(n);
  for (int tau = 1; tau <= frames; ++tau) {
    const DenseDepthMap& dense = depth_maps[static_cast<size_t>(tau - 1)];
    if (dense.t != tau) {
      fail(ErrorKind::alignment,
           "missing depth map for frame " + std::to_string(tau));
    }
    for (size_t i = 0; i < n; ++i) {
      size_t idx = tracks2d.index(i, tau);
      px[i] = tracks2d.px[idx];
      py[i] = tracks2d.py[idx];
      range[i] = tracks2d.range[idx];
    }
    // Out-of-FOV pixels can be anywhere (or NaN); sampling stays in bounds
    // via corner clamping, and the verdict below overrides them anyway.
    kernels::active().maxpool_sample(dense.values.data(), dense.width,
                                     dense.height, px.data(), py.data(), n,
                                     depth.data());
    kernels::active().occlusion_compare(range.data(), depth.data(), n,
                                        tolerance, occ.data());
    for (size_t i = 0; i < n; ++i) {
      size_t idx = tracks2d.index(i, tau);
      out.occluded[idx] = tracks2d.in_fov[idx] ? occ[i] : 1;
    }
  }
  return out;
}

}  // namespace rigidtrack
