#pragma once

#include <cstddef>
#include <cstdint>

// Batch geometry kernels in structure-of-arrays form. Every kernel has a
// scalar reference implementation and, on capable hosts, a SIMD variant that
// performs the same operations in the same order, so the two produce
// bitwise-identical output (the build disables FP contraction; the scalar
// code spells out its fma chains explicitly).

namespace rigidtrack::kernels {

// Distance reported for pixels whose column holds no occupied cell. Large
// enough that +height never overflows, small enough that squaring fits i64.
inline constexpr int32_t kEdtUnreached = 1 << 28;

struct PinholeParams {
  double fx = 0, skew = 0, cx = 0;
  double fy = 0, cy = 0;
  double width = 0, height = 0;
};

struct Dispatch {
  const char* name;

  // out = M * [x y z 1], M the top 3 rows of a rigid transform, row-major.
  void (*rigid_apply)(const double m[12], const double* xs, const double* ys,
                      const double* zs, size_t n, double* ox, double* oy,
                      double* oz);

  // mask[i] = 1 iff every axis of M*[p 1] lies in the closed interval
  // [-half[a], +half[a]].
  void (*box_select)(const double m[12], const double half[3],
                     const double* xs, const double* ys, const double* zs,
                     size_t n, uint8_t* mask);

  // Camera-frame points (+z forward, +x right, +y down) to pixel coords,
  // Euclidean range and FOV flag. px/py are always written; they are only
  // meaningful where in_fov (or at least z > 0) holds.
  void (*pinhole_project)(const PinholeParams& cam, const double* xs,
                          const double* ys, const double* zs, size_t n,
                          double* px, double* py, double* range,
                          uint8_t* in_fov);

  // out[i] = max over the 2x2 pixel neighborhood (floor(p), floor(p)+1 per
  // axis, each corner clamped to the grid) of a w*h row-major float grid.
  void (*maxpool_sample)(const float* grid, int64_t w, int64_t h,
                         const double* px, const double* py, size_t n,
                         double* out);

  // occ[i] = 1 iff range[i] > (1 + tol) * depth[i].
  void (*occlusion_compare)(const double* range, const double* depth,
                            size_t n, double tol, uint8_t* occ);

  // Per-column nearest occupied cell (nonzero byte) in a w*h row-major
  // grid. dist[y*w+x] = |y - y*|, row[y*w+x] = y*, where y* is the nearest
  // occupied row in column x (ties: smaller y*). Empty column: dist =
  // kEdtUnreached, row = -1.
  void (*edt_vertical)(const uint8_t* occupied, int64_t w, int64_t h,
                       int32_t* dist, int32_t* row);
};

const Dispatch& scalar();

// True when the SIMD variant was compiled in and this CPU supports it.
bool simd_available();
const Dispatch& simd();  // only valid when simd_available()

// simd() when available, unless RIGIDTRACK_FORCE_SCALAR=1 is set in the
// environment; scalar() otherwise. Resolved once at first call.
const Dispatch& active();

}  // namespace rigidtrack::kernels
