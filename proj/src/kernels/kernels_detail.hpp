#pragma once

#include <cmath>
#include <cstdint>

#include "rigidtrack/kernels.hpp"

// Per-element reference bodies, shared between the scalar dispatch table and
// the SIMD variants' tail loops. The fma chains and the min/max/compare
// orderings here define the exact arithmetic the SIMD code must reproduce.

namespace rigidtrack::kernels::detail {

inline void rigid_apply_one(const double m[12], double x, double y, double z,
                            double& ox, double& oy, double& oz) {
  ox = std::fma(m[0], x, std::fma(m[1], y, std::fma(m[2], z, m[3])));
  oy = std::fma(m[4], x, std::fma(m[5], y, std::fma(m[6], z, m[7])));
  oz = std::fma(m[8], x, std::fma(m[9], y, std::fma(m[10], z, m[11])));
}

inline uint8_t box_select_one(const double m[12], const double half[3],
                              double x, double y, double z) {
  double lx, ly, lz;
  rigid_apply_one(m, x, y, z, lx, ly, lz);
  bool in = std::fabs(lx) <= half[0];
  in = in & (std::fabs(ly) <= half[1]);
  in = in & (std::fabs(lz) <= half[2]);
  return in ? 1 : 0;
}

inline void pinhole_project_one(const PinholeParams& cam, double x, double y,
                                double z, double& px, double& py,
                                double& range, uint8_t& in_fov) {
  double u = std::fma(cam.fx, x, std::fma(cam.skew, y, cam.cx * z));
  double v = std::fma(cam.fy, y, cam.cy * z);
  px = u / z;
  py = v / z;
  range = std::sqrt(std::fma(x, x, std::fma(y, y, z * z)));
  bool ok = z > 0.0;
  ok = ok & (px >= 0.0) & (px < cam.width);
  ok = ok & (py >= 0.0) & (py < cam.height);
  in_fov = ok ? 1 : 0;
}

// vmaxpd/vminpd semantics: the second operand wins ties and NaNs. Spelled
// out here so the scalar path matches the vector instructions bit for bit.
inline double max_pd(double a, double b) { return a > b ? a : b; }
inline double min_pd(double a, double b) { return a < b ? a : b; }
inline float max_ps(float a, float b) { return a > b ? a : b; }

inline double maxpool_sample_one(const float* grid, int64_t w, int64_t h,
                                 double px, double py) {
  double fx0 = std::floor(px);
  double fy0 = std::floor(py);
  double wm = static_cast<double>(w - 1);
  double hm = static_cast<double>(h - 1);
  // Clamping in the double domain keeps the int conversion in range even
  // for coordinates far outside the grid.
  auto ix0 = static_cast<int64_t>(min_pd(max_pd(fx0, 0.0), wm));
  auto ix1 = static_cast<int64_t>(min_pd(max_pd(fx0 + 1.0, 0.0), wm));
  auto iy0 = static_cast<int64_t>(min_pd(max_pd(fy0, 0.0), hm));
  auto iy1 = static_cast<int64_t>(min_pd(max_pd(fy0 + 1.0, 0.0), hm));
  float m = grid[iy0 * w + ix0];
  m = max_ps(m, grid[iy0 * w + ix1]);
  m = max_ps(m, grid[iy1 * w + ix0]);
  m = max_ps(m, grid[iy1 * w + ix1]);
  return static_cast<double>(m);
}

inline uint8_t occlusion_compare_one(double range, double depth, double tol) {
  return range > (1.0 + tol) * depth ? 1 : 0;
}

// Down/up column scan for one column. Ties prefer the smaller row because
// the up pass only replaces on strictly smaller distance.
inline void edt_vertical_column(const uint8_t* occupied, int64_t w, int64_t h,
                                int64_t x, int32_t* dist, int32_t* row) {
  int32_t d = kEdtUnreached;
  int32_t r = -1;
  for (int64_t y = 0; y < h; ++y) {
    int32_t stepped = d + 1;
    d = stepped < kEdtUnreached ? stepped : kEdtUnreached;
    if (occupied[y * w + x]) {
      d = 0;
      r = static_cast<int32_t>(y);
    }
    dist[y * w + x] = d;
    row[y * w + x] = r;
  }
  for (int64_t y = h - 2; y >= 0; --y) {
    int32_t below = dist[(y + 1) * w + x];
    int32_t stepped = below + 1;
    int32_t cand = stepped < kEdtUnreached ? stepped : kEdtUnreached;
    if (cand < dist[y * w + x]) {
      dist[y * w + x] = cand;
      row[y * w + x] = row[(y + 1) * w + x];
    }
  }
}

}  // namespace rigidtrack::kernels::detail
