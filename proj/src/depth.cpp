#include "rigidtrack/depth.hpp"

#include <cmath>
#include <cstdint>
#include <limits>

#include "rigidtrack/binio.hpp"
#include "rigidtrack/error.hpp"
#include "rigidtrack/kernels.hpp"

namespace rigidtrack {

namespace {

constexpr int64_t kMaxSide = 1 << 14;

// Packed comparison key: distance² in the high bits, (sample row, sample
// column) tie-break in the low bits. Minimizing the key minimizes
// (d², y, x) lexicographically.
constexpr int64_t kKeyScale = int64_t{1} << 32;

inline int64_t tie_bits(int64_t row, int64_t col) {
  return (row << 14) | col;
}

}  // namespace

SparseDepthMap project_sweep_to_sparse(const LidarSweep& sweep,
                                       const CameraCalibration& calib) {
  calib.validate();
  SparseDepthMap sparse;
  sparse.t = sweep.t;
  sparse.width = calib.width;
  sparse.height = calib.height;
  sparse.range.assign(
      static_cast<size_t>(calib.width) * static_cast<size_t>(calib.height),
      std::numeric_limits<double>::infinity());

  size_t n = sweep.points.size();
  if (n == 0) return sparse;

  auto rows = calib.extrinsic.inverse().rows3x4();
  std::vector<double> cx(n), cy(n), cz(n);
  kernels::active().rigid_apply(rows.data(), sweep.points.x.data(),
                                sweep.points.y.data(), sweep.points.z.data(),
                                n, cx.data(), cy.data(), cz.data());
  kernels::PinholeParams cam;
  cam.fx = calib.intrinsics[0];
  cam.skew = calib.intrinsics[1];
  cam.cx = calib.intrinsics[2];
  cam.fy = calib.intrinsics[4];
  cam.cy = calib.intrinsics[5];
  cam.width = static_cast<double>(calib.width);
  cam.height = static_cast<double>(calib.height);
  std::vector<double> px(n), py(n), range(n);
  std::vector<uint8_t> fov(n);
  kernels::active().pinhole_project(cam, cx.data(), cy.data(), cz.data(), n,
                                    px.data(), py.data(), range.data(),
                                    fov.data());
  for (size_t i = 0; i < n; ++i) {
    if (!fov[i]) continue;
    auto ix = static_cast<int64_t>(std::floor(px[i]));
    auto iy = static_cast<int64_t>(std::floor(py[i]));
    size_t cell = static_cast<size_t>(iy) * sparse.width +
                  static_cast<size_t>(ix);
    if (range[i] < sparse.range[cell]) sparse.range[cell] = range[i];
  }
  size_t count = 0;
  for (double r : sparse.range) {
    if (r != std::numeric_limits<double>::infinity()) ++count;
  }
  sparse.sample_count = count;
  return sparse;
}

DenseDepthMap nn_complete(const SparseDepthMap& sparse) {
  int64_t w = sparse.width;
  int64_t h = sparse.height;
  if (sparse.sample_count == 0) {
    fail(ErrorKind::completion,
         "frame " + std::to_string(sparse.t) +
             ": cannot complete a depth map with no samples");
  }
  if (w > kMaxSide || h > kMaxSide) {
    fail(ErrorKind::completion, "depth map exceeds the supported " +
                                    std::to_string(kMaxSide) + " px side");
  }

  std::vector<uint8_t> occupied(sparse.range.size());
  for (size_t i = 0; i < sparse.range.size(); ++i) {
    occupied[i] =
        sparse.range[i] != std::numeric_limits<double>::infinity() ? 1 : 0;
  }

  // Phase 1: nearest occupied row per column (ties -> smaller row). Phase 2
  // runs the lower-envelope scan per row over integer parabolas
  //   f_c(q) = ((q-c)² + g_c²) * 2^32 + (row_c << 14 | c),
  // whose minimum at integer q reproduces the exact lexicographic
  // (distance², sample y, sample x) order; the tie bits make keys of
  // distinct samples unequal, so envelope boundaries never fall on integer
  // pixels and strict/non-strict comparisons agree.
  std::vector<int32_t> vdist(sparse.range.size());
  std::vector<int32_t> vrow(sparse.range.size());
  kernels::active().edt_vertical(occupied.data(), w, h, vdist.data(),
                                 vrow.data());

  DenseDepthMap dense;
  dense.t = sparse.t;
  dense.width = sparse.width;
  dense.height = sparse.height;
  dense.provenance = DenseDepthMap::Provenance::nearest_neighbor;
  dense.values.resize(sparse.range.size());

  std::vector<int64_t> env_v(w), env_c(w), env_row(w);
  std::vector<int64_t> bnum(w + 1), bden(w + 1);
  for (int64_t y = 0; y < h; ++y) {
    const int32_t* gdist = vdist.data() + y * w;
    const int32_t* grow = vrow.data() + y * w;
    int64_t top = -1;
    for (int64_t x = 0; x < w; ++x) {
      if (grow[x] < 0) continue;  // column holds no sample
      int64_t g = gdist[x];
      int64_t c = g * g * kKeyScale + tie_bits(grow[x], x);
      int64_t fx = c + x * x * kKeyScale;  // f at q=0 plus vertex shift term
      while (top >= 0) {
        // Intersection of the new parabola with the envelope top.
        int64_t ftop = env_c[top] + env_v[top] * env_v[top] * kKeyScale;
        int64_t num = fx - ftop;
        int64_t den = 2 * kKeyScale * (x - env_v[top]);
        if (top == 0 ||
            static_cast<__int128>(num) * bden[top] >
                static_cast<__int128>(bnum[top]) * den) {
          bnum[top + 1] = num;
          bden[top + 1] = den;
          break;
        }
        --top;
      }
      ++top;
      env_v[top] = x;
      env_c[top] = c;
      env_row[top] = grow[x];
      if (top == 0) {
        bnum[0] = -(int64_t{1} << 40);  // effectively -infinity
        bden[0] = 1;
      }
    }
    int64_t k = 0;
    for (int64_t q = 0; q < w; ++q) {
      while (k < top && bnum[k + 1] <= q * bden[k + 1]) ++k;
      size_t sample =
          static_cast<size_t>(env_row[k]) * w + static_cast<size_t>(env_v[k]);
      dense.values[y * w + q] = static_cast<float>(sparse.range[sample]);
    }
  }
  return dense;
}

double sample_depth(const DenseDepthMap& dense, double x, double y) {
  double out;
  kernels::active().maxpool_sample(dense.values.data(), dense.width,
                                   dense.height, &x, &y, 1, &out);
  return out;
}

DenseDepthMap import_external_depth(const std::filesystem::path& path,
                                    int t, const CameraCalibration& calib) {
  calib.validate();
  std::vector<float> raw;
  try {
    raw = read_f32_file(path);
  } catch (const Error& e) {
    fail(ErrorKind::import, e.what());
  }
  size_t expected =
      static_cast<size_t>(calib.width) * static_cast<size_t>(calib.height);
  if (raw.size() != expected) {
    fail(ErrorKind::import,
         path.string() + ": expected " + std::to_string(expected * 4) +
             " bytes (" + std::to_string(calib.width) + "x" +
             std::to_string(calib.height) + "), found " +
             std::to_string(raw.size() * 4));
  }
  DenseDepthMap dense;
  dense.t = t;
  dense.width = calib.width;
  dense.height = calib.height;
  dense.provenance = DenseDepthMap::Provenance::external;
  dense.values = std::move(raw);
  return dense;
}

}  // namespace rigidtrack
