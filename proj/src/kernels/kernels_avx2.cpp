// Compiled with -mavx2 -mfma on x86_64 (see src/CMakeLists.txt); on other
// targets this file collapses to a null table.

#include "kernels_detail.hpp"
#include "rigidtrack/kernels.hpp"

namespace rigidtrack::kernels {
const Dispatch* avx2_table();
}

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

namespace rigidtrack::kernels {

namespace {

// Mask layout from _CMP_*_OQ compares: all-ones per 64-bit lane. movemask
// turns that into one bit per lane for the uint8 outputs.
inline void write_mask4(uint8_t* out, int bits, size_t n) {
  for (size_t k = 0; k < n; ++k) out[k] = (bits >> k) & 1;
}

void rigid_apply_avx2(const double m[12], const double* xs, const double* ys,
                      const double* zs, size_t n, double* ox, double* oy,
                      double* oz) {
  const __m256d m0 = _mm256_set1_pd(m[0]), m1 = _mm256_set1_pd(m[1]),
                m2 = _mm256_set1_pd(m[2]), m3 = _mm256_set1_pd(m[3]);
  const __m256d m4 = _mm256_set1_pd(m[4]), m5 = _mm256_set1_pd(m[5]),
                m6 = _mm256_set1_pd(m[6]), m7 = _mm256_set1_pd(m[7]);
  const __m256d m8 = _mm256_set1_pd(m[8]), m9 = _mm256_set1_pd(m[9]),
                mA = _mm256_set1_pd(m[10]), mB = _mm256_set1_pd(m[11]);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d x = _mm256_loadu_pd(xs + i);
    __m256d y = _mm256_loadu_pd(ys + i);
    __m256d z = _mm256_loadu_pd(zs + i);
    _mm256_storeu_pd(
        ox + i,
        _mm256_fmadd_pd(m0, x,
                        _mm256_fmadd_pd(m1, y, _mm256_fmadd_pd(m2, z, m3))));
    _mm256_storeu_pd(
        oy + i,
        _mm256_fmadd_pd(m4, x,
                        _mm256_fmadd_pd(m5, y, _mm256_fmadd_pd(m6, z, m7))));
    _mm256_storeu_pd(
        oz + i,
        _mm256_fmadd_pd(m8, x,
                        _mm256_fmadd_pd(m9, y, _mm256_fmadd_pd(mA, z, mB))));
  }
  for (; i < n; ++i) {
    detail::rigid_apply_one(m, xs[i], ys[i], zs[i], ox[i], oy[i], oz[i]);
  }
}

void box_select_avx2(const double m[12], const double half[3],
                     const double* xs, const double* ys, const double* zs,
                     size_t n, uint8_t* mask) {
  const __m256d m0 = _mm256_set1_pd(m[0]), m1 = _mm256_set1_pd(m[1]),
                m2 = _mm256_set1_pd(m[2]), m3 = _mm256_set1_pd(m[3]);
  const __m256d m4 = _mm256_set1_pd(m[4]), m5 = _mm256_set1_pd(m[5]),
                m6 = _mm256_set1_pd(m[6]), m7 = _mm256_set1_pd(m[7]);
  const __m256d m8 = _mm256_set1_pd(m[8]), m9 = _mm256_set1_pd(m[9]),
                mA = _mm256_set1_pd(m[10]), mB = _mm256_set1_pd(m[11]);
  const __m256d hx = _mm256_set1_pd(half[0]);
  const __m256d hy = _mm256_set1_pd(half[1]);
  const __m256d hz = _mm256_set1_pd(half[2]);
  const __m256d abs_mask = _mm256_castsi256_pd(
      _mm256_set1_epi64x(0x7fffffffffffffffLL));
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d x = _mm256_loadu_pd(xs + i);
    __m256d y = _mm256_loadu_pd(ys + i);
    __m256d z = _mm256_loadu_pd(zs + i);
    __m256d lx = _mm256_fmadd_pd(
        m0, x, _mm256_fmadd_pd(m1, y, _mm256_fmadd_pd(m2, z, m3)));
    __m256d ly = _mm256_fmadd_pd(
        m4, x, _mm256_fmadd_pd(m5, y, _mm256_fmadd_pd(m6, z, m7)));
    __m256d lz = _mm256_fmadd_pd(
        m8, x, _mm256_fmadd_pd(m9, y, _mm256_fmadd_pd(mA, z, mB)));
    __m256d in = _mm256_cmp_pd(_mm256_and_pd(lx, abs_mask), hx, _CMP_LE_OQ);
    in = _mm256_and_pd(
        in, _mm256_cmp_pd(_mm256_and_pd(ly, abs_mask), hy, _CMP_LE_OQ));
    in = _mm256_and_pd(
        in, _mm256_cmp_pd(_mm256_and_pd(lz, abs_mask), hz, _CMP_LE_OQ));
    write_mask4(mask + i, _mm256_movemask_pd(in), 4);
  }
  for (; i < n; ++i) {
    mask[i] = detail::box_select_one(m, half, xs[i], ys[i], zs[i]);
  }
}

void pinhole_project_avx2(const PinholeParams& cam, const double* xs,
                          const double* ys, const double* zs, size_t n,
                          double* px, double* py, double* range,
                          uint8_t* in_fov) {
  const __m256d fx = _mm256_set1_pd(cam.fx), skew = _mm256_set1_pd(cam.skew),
                cx = _mm256_set1_pd(cam.cx), fy = _mm256_set1_pd(cam.fy),
                cy = _mm256_set1_pd(cam.cy);
  const __m256d wlim = _mm256_set1_pd(cam.width);
  const __m256d hlim = _mm256_set1_pd(cam.height);
  const __m256d zero = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d x = _mm256_loadu_pd(xs + i);
    __m256d y = _mm256_loadu_pd(ys + i);
    __m256d z = _mm256_loadu_pd(zs + i);
    __m256d u = _mm256_fmadd_pd(
        fx, x, _mm256_fmadd_pd(skew, y, _mm256_mul_pd(cx, z)));
    __m256d v = _mm256_fmadd_pd(fy, y, _mm256_mul_pd(cy, z));
    __m256d pxv = _mm256_div_pd(u, z);
    __m256d pyv = _mm256_div_pd(v, z);
    __m256d r2 = _mm256_fmadd_pd(
        x, x, _mm256_fmadd_pd(y, y, _mm256_mul_pd(z, z)));
    _mm256_storeu_pd(px + i, pxv);
    _mm256_storeu_pd(py + i, pyv);
    _mm256_storeu_pd(range + i, _mm256_sqrt_pd(r2));
    __m256d ok = _mm256_cmp_pd(z, zero, _CMP_GT_OQ);
    ok = _mm256_and_pd(ok, _mm256_cmp_pd(pxv, zero, _CMP_GE_OQ));
    ok = _mm256_and_pd(ok, _mm256_cmp_pd(pxv, wlim, _CMP_LT_OQ));
    ok = _mm256_and_pd(ok, _mm256_cmp_pd(pyv, zero, _CMP_GE_OQ));
    ok = _mm256_and_pd(ok, _mm256_cmp_pd(pyv, hlim, _CMP_LT_OQ));
    write_mask4(in_fov + i, _mm256_movemask_pd(ok), 4);
  }
  for (; i < n; ++i) {
    detail::pinhole_project_one(cam, xs[i], ys[i], zs[i], px[i], py[i],
                                range[i], in_fov[i]);
  }
}

void maxpool_sample_avx2(const float* grid, int64_t w, int64_t h,
                         const double* px, const double* py, size_t n,
                         double* out) {
  if (w * h > INT32_MAX) {
    // Gather indices would not fit in epi32 lanes.
    for (size_t i = 0; i < n; ++i) {
      out[i] = detail::maxpool_sample_one(grid, w, h, px[i], py[i]);
    }
    return;
  }
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d wm = _mm256_set1_pd(static_cast<double>(w - 1));
  const __m256d hm = _mm256_set1_pd(static_cast<double>(h - 1));
  const __m128i wvec = _mm_set1_epi32(static_cast<int32_t>(w));
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d fx0 = _mm256_floor_pd(_mm256_loadu_pd(px + i));
    __m256d fy0 = _mm256_floor_pd(_mm256_loadu_pd(py + i));
    __m256d cx0 = _mm256_min_pd(_mm256_max_pd(fx0, zero), wm);
    __m256d cx1 =
        _mm256_min_pd(_mm256_max_pd(_mm256_add_pd(fx0, one), zero), wm);
    __m256d cy0 = _mm256_min_pd(_mm256_max_pd(fy0, zero), hm);
    __m256d cy1 =
        _mm256_min_pd(_mm256_max_pd(_mm256_add_pd(fy0, one), zero), hm);
    __m128i ix0 = _mm256_cvttpd_epi32(cx0);
    __m128i ix1 = _mm256_cvttpd_epi32(cx1);
    __m128i iy0 = _mm_mullo_epi32(_mm256_cvttpd_epi32(cy0), wvec);
    __m128i iy1 = _mm_mullo_epi32(_mm256_cvttpd_epi32(cy1), wvec);
    __m128 g00 = _mm_i32gather_ps(grid, _mm_add_epi32(iy0, ix0), 4);
    __m128 g01 = _mm_i32gather_ps(grid, _mm_add_epi32(iy0, ix1), 4);
    __m128 g10 = _mm_i32gather_ps(grid, _mm_add_epi32(iy1, ix0), 4);
    __m128 g11 = _mm_i32gather_ps(grid, _mm_add_epi32(iy1, ix1), 4);
    __m128 m = _mm_max_ps(g00, g01);
    m = _mm_max_ps(m, g10);
    m = _mm_max_ps(m, g11);
    _mm256_storeu_pd(out + i, _mm256_cvtps_pd(m));
  }
  for (; i < n; ++i) {
    out[i] = detail::maxpool_sample_one(grid, w, h, px[i], py[i]);
  }
}

void occlusion_compare_avx2(const double* range, const double* depth,
                            size_t n, double tol, uint8_t* occ) {
  const __m256d factor = _mm256_set1_pd(1.0 + tol);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d r = _mm256_loadu_pd(range + i);
    __m256d lim = _mm256_mul_pd(factor, _mm256_loadu_pd(depth + i));
    write_mask4(occ + i,
                _mm256_movemask_pd(_mm256_cmp_pd(r, lim, _CMP_GT_OQ)), 4);
  }
  for (; i < n; ++i) {
    occ[i] = detail::occlusion_compare_one(range[i], depth[i], tol);
  }
}

void edt_vertical_avx2(const uint8_t* occupied, int64_t w, int64_t h,
                       int32_t* dist, int32_t* row) {
  const __m256i zero = _mm256_setzero_si256();
  const __m256i one = _mm256_set1_epi32(1);
  const __m256i big = _mm256_set1_epi32(kEdtUnreached);
  const __m256i minus1 = _mm256_set1_epi32(-1);
  int64_t x = 0;
  for (; x + 8 <= w; x += 8) {
    __m256i d = big;
    __m256i r = minus1;
    for (int64_t y = 0; y < h; ++y) {
      __m256i occ = _mm256_cvtepu8_epi32(_mm_loadl_epi64(
          reinterpret_cast<const __m128i*>(occupied + y * w + x)));
      __m256i hit = _mm256_cmpgt_epi32(occ, zero);
      d = _mm256_min_epi32(_mm256_add_epi32(d, one), big);
      d = _mm256_blendv_epi8(d, zero, hit);
      r = _mm256_blendv_epi8(r, _mm256_set1_epi32(static_cast<int32_t>(y)),
                             hit);
      _mm256_storeu_si256(reinterpret_cast<__m256i*>(dist + y * w + x), d);
      _mm256_storeu_si256(reinterpret_cast<__m256i*>(row + y * w + x), r);
    }
    for (int64_t y = h - 2; y >= 0; --y) {
      __m256i below = _mm256_loadu_si256(
          reinterpret_cast<const __m256i*>(dist + (y + 1) * w + x));
      __m256i cand = _mm256_min_epi32(_mm256_add_epi32(below, one), big);
      __m256i cur = _mm256_loadu_si256(
          reinterpret_cast<const __m256i*>(dist + y * w + x));
      __m256i take = _mm256_cmpgt_epi32(cur, cand);
      __m256i rbelow = _mm256_loadu_si256(
          reinterpret_cast<const __m256i*>(row + (y + 1) * w + x));
      __m256i rcur = _mm256_loadu_si256(
          reinterpret_cast<const __m256i*>(row + y * w + x));
      _mm256_storeu_si256(reinterpret_cast<__m256i*>(dist + y * w + x),
                          _mm256_blendv_epi8(cur, cand, take));
      _mm256_storeu_si256(reinterpret_cast<__m256i*>(row + y * w + x),
                          _mm256_blendv_epi8(rcur, rbelow, take));
    }
  }
  for (; x < w; ++x) {
    detail::edt_vertical_column(occupied, w, h, x, dist, row);
  }
}

}  // namespace

const Dispatch* avx2_table() {
  static const Dispatch table{
      "avx2",
      rigid_apply_avx2,
      box_select_avx2,
      pinhole_project_avx2,
      maxpool_sample_avx2,
      occlusion_compare_avx2,
      edt_vertical_avx2,
  };
  return &table;
}

}  // namespace rigidtrack::kernels

#else

namespace rigidtrack::kernels {
const Dispatch* avx2_table() { return nullptr; }
}  // namespace rigidtrack::kernels

#endif
