#include "kernels_detail.hpp"
#include "rigidtrack/kernels.hpp"

namespace rigidtrack::kernels {

namespace {

void rigid_apply_scalar(const double m[12], const double* xs,
                        const double* ys, const double* zs, size_t n,
                        double* ox, double* oy, double* oz) {
  for (size_t i = 0; i < n; ++i) {
    detail::rigid_apply_one(m, xs[i], ys[i], zs[i], ox[i], oy[i], oz[i]);
  }
}

void box_select_scalar(const double m[12], const double half[3],
                       const double* xs, const double* ys, const double* zs,
                       size_t n, uint8_t* mask) {
  for (size_t i = 0; i < n; ++i) {
    mask[i] = detail::box_select_one(m, half, xs[i], ys[i], zs[i]);
  }
}

void pinhole_project_scalar(const PinholeParams& cam, const double* xs,
                            const double* ys, const double* zs, size_t n,
                            double* px, double* py, double* range,
                            uint8_t* in_fov) {
  for (size_t i = 0; i < n; ++i) {
    detail::pinhole_project_one(cam, xs[i], ys[i], zs[i], px[i], py[i],
                                range[i], in_fov[i]);
  }
}

void maxpool_sample_scalar(const float* grid, int64_t w, int64_t h,
                           const double* px, const double* py, size_t n,
                           double* out) {
  for (size_t i = 0; i < n; ++i) {
    out[i] = detail::maxpool_sample_one(grid, w, h, px[i], py[i]);
  }
}

void occlusion_compare_scalar(const double* range, const double* depth,
                              size_t n, double tol, uint8_t* occ) {
  for (size_t i = 0; i < n; ++i) {
    occ[i] = detail::occlusion_compare_one(range[i], depth[i], tol);
  }
}

void edt_vertical_scalar(const uint8_t* occupied, int64_t w, int64_t h,
                         int32_t* dist, int32_t* row) {
  for (int64_t x = 0; x < w; ++x) {
    detail::edt_vertical_column(occupied, w, h, x, dist, row);
  }
}

}  // namespace

const Dispatch& scalar() {
  static const Dispatch table{
      "scalar",
      rigid_apply_scalar,
      box_select_scalar,
      pinhole_project_scalar,
      maxpool_sample_scalar,
      occlusion_compare_scalar,
      edt_vertical_scalar,
  };
  return table;
}

}  // namespace rigidtrack::kernels
