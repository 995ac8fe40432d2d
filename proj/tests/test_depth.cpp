#include "rigidtrack/depth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>

#include "doctest.h"
#include "rigidtrack/binio.hpp"
#include "rigidtrack/error.hpp"
#include "rigidtrack/rng.hpp"

using namespace rigidtrack;
namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SparseDepthMap make_sparse(int w, int h) {
  SparseDepthMap s;
  s.t = 1;
  s.width = w;
  s.height = h;
  s.range.assign(static_cast<size_t>(w) * h, kInf);
  return s;
}

void put(SparseDepthMap& s, int x, int y, double r) {
  size_t cell = static_cast<size_t>(y) * s.width + x;
  if (s.range[cell] == kInf) ++s.sample_count;
  s.range[cell] = r;
}

// Independent answer: scan every sample for every pixel, minimizing
// (distance², sample y, sample x) lexicographically.
std::vector<float> brute_nn(const SparseDepthMap& s) {
  std::vector<float> out(s.range.size());
  for (int y = 0; y < s.height; ++y) {
    for (int x = 0; x < s.width; ++x) {
      long best_d = -1;
      int best_y = 0, best_x = 0;
      for (int sy = 0; sy < s.height; ++sy) {
        for (int sx = 0; sx < s.width; ++sx) {
          if (s.range[static_cast<size_t>(sy) * s.width + sx] == kInf) {
            continue;
          }
          long d = static_cast<long>(sx - x) * (sx - x) +
                   static_cast<long>(sy - y) * (sy - y);
          if (best_d < 0 || d < best_d ||
              (d == best_d &&
               (sy < best_y || (sy == best_y && sx < best_x)))) {
            best_d = d;
            best_y = sy;
            best_x = sx;
          }
        }
      }
      out[static_cast<size_t>(y) * s.width + x] = static_cast<float>(
          s.range[static_cast<size_t>(best_y) * s.width + best_x]);
    }
  }
  return out;
}

CameraCalibration tiny_camera() {
  CameraCalibration cal;
  cal.camera_id = CameraId::front;
  cal.intrinsics = {1, 0, 2, 0, 1, 2, 0, 0, 1};
  cal.extrinsic = RigidTransform::identity();
  cal.width = 4;
  cal.height = 4;
  return cal;
}

}  // namespace

TEST_CASE("sparse projection floors pixels and keeps the nearest range") {
  LidarSweep sweep;
  sweep.t = 3;
  sweep.points.push_back({0.2, -0.4, 2});    // pixel (2.1, 1.8) -> (2, 1)
  sweep.points.push_back({0.3, -0.5, 2.5});  // same pixel, farther
  sweep.points.push_back({0, 0, -1});        // behind the camera
  sweep.points.push_back({100, 0, 1});       // far outside the image

  SparseDepthMap s = project_sweep_to_sparse(sweep, tiny_camera());
  CHECK(s.t == 3);
  CHECK(s.width == 4);
  CHECK(s.sample_count == 1);
  REQUIRE(s.has_sample(2, 1));
  double r0 = std::sqrt(0.2 * 0.2 + 0.4 * 0.4 + 2 * 2);
  CHECK(s.range[1 * 4 + 2] == doctest::Approx(r0).epsilon(1e-15));
  CHECK_FALSE(s.has_sample(0, 0));
}

TEST_CASE("empty sweep projects to an empty map") {
  LidarSweep sweep;
  sweep.t = 1;
  SparseDepthMap s = project_sweep_to_sparse(sweep, tiny_camera());
  CHECK(s.sample_count == 0);
  CHECK_THROWS_AS(nn_complete(s), Error);
}

TEST_CASE("completion error names the frame") {
  SparseDepthMap s = make_sparse(2, 2);
  s.t = 42;
  try {
    nn_complete(s);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::completion);
    CHECK(std::string(e.what()).find("42") != std::string::npos);
  }
}

TEST_CASE("two samples on a strip split it at the midpoint") {
  SparseDepthMap s = make_sparse(10, 1);
  put(s, 0, 0, 2);
  put(s, 9, 0, 8);
  DenseDepthMap d = nn_complete(s);
  for (int x = 0; x <= 4; ++x) CHECK(d.values[x] == 2.0f);
  for (int x = 5; x <= 9; ++x) CHECK(d.values[x] == 8.0f);
  CHECK(d.provenance == DenseDepthMap::Provenance::nearest_neighbor);
}

TEST_CASE("a single sample floods the whole map") {
  SparseDepthMap s = make_sparse(7, 5);
  put(s, 3, 2, 7);
  DenseDepthMap d = nn_complete(s);
  for (float v : d.values) CHECK(v == 7.0f);
}

TEST_CASE("distance ties go to the lower row, then lower column") {
  SUBCASE("horizontal tie") {
    SparseDepthMap s = make_sparse(3, 1);
    put(s, 0, 0, 1);
    put(s, 2, 0, 9);
    DenseDepthMap d = nn_complete(s);
    CHECK(d.values[1] == 1.0f);  // both at distance 1, lower x wins
  }
  SUBCASE("vertical tie") {
    SparseDepthMap s = make_sparse(1, 3);
    put(s, 0, 0, 1);
    put(s, 0, 2, 9);
    DenseDepthMap d = nn_complete(s);
    CHECK(d.values[1] == 1.0f);  // lower y wins
  }
  SUBCASE("row beats column") {
    SparseDepthMap s = make_sparse(2, 2);
    put(s, 1, 0, 5);  // (x=1, y=0)
    put(s, 0, 1, 3);  // (x=0, y=1)
    DenseDepthMap d = nn_complete(s);
    // Pixel (0,0) is at distance 1 from both; the sample with smaller y
    // wins even though the other has smaller x.
    CHECK(d.values[0] == 5.0f);
  }
}

TEST_CASE("completion equals the brute force oracle") {
  Rng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    int w = 1 + static_cast<int>(rng.next_below(32));
    int h = 1 + static_cast<int>(rng.next_below(32));
    SparseDepthMap s = make_sparse(w, h);
    int samples = 1 + static_cast<int>(rng.next_below(50));
    for (int i = 0; i < samples; ++i) {
      put(s, static_cast<int>(rng.next_below(w)),
          static_cast<int>(rng.next_below(h)), rng.uniform(0.5, 99));
    }
    DenseDepthMap d = nn_complete(s);
    CHECK(d.values == brute_nn(s));
  }
}

TEST_CASE("completion of a full map copies it") {
  Rng rng(5);
  SparseDepthMap s = make_sparse(9, 6);
  for (int y = 0; y < 6; ++y) {
    for (int x = 0; x < 9; ++x) put(s, x, y, rng.uniform(1, 50));
  }
  DenseDepthMap d = nn_complete(s);
  for (size_t i = 0; i < s.range.size(); ++i) {
    CHECK(d.values[i] == static_cast<float>(s.range[i]));
  }
}

TEST_CASE("sample_depth pools the max of the four surrounding pixels") {
  DenseDepthMap d;
  d.width = 2;
  d.height = 2;
  d.values = {1, 2, 3, 4};
  CHECK(sample_depth(d, 0.5, 0.5) == 4.0);
  CHECK(sample_depth(d, 0.0, 0.0) == 4.0);  // corners still cover all four
  SUBCASE("clamping far outside the grid") {
    CHECK(sample_depth(d, -5, -5) == 1.0);
    CHECK(sample_depth(d, 9, 9) == 4.0);
    CHECK(sample_depth(d, 9, -5) == 2.0);
  }
  SUBCASE("one-pixel map") {
    DenseDepthMap one;
    one.width = 1;
    one.height = 1;
    one.values = {6};
    CHECK(sample_depth(one, 0.2, 0.9) == 6.0);
  }
}

TEST_CASE("bilinear interpolation never exceeds the pooled max") {
  Rng rng(31);
  DenseDepthMap d;
  d.width = 8;
  d.height = 8;
  for (int i = 0; i < 64; ++i) {
    d.values.push_back(static_cast<float>(rng.uniform(1, 20)));
  }
  auto at = [&](int x, int y) {
    x = std::clamp(x, 0, d.width - 1);
    y = std::clamp(y, 0, d.height - 1);
    return static_cast<double>(d.values[static_cast<size_t>(y) * d.width + x]);
  };
  for (int trial = 0; trial < 500; ++trial) {
    double x = rng.uniform(-1, 9), y = rng.uniform(-1, 9);
    int x0 = static_cast<int>(std::floor(x));
    int y0 = static_cast<int>(std::floor(y));
    double fx = x - x0, fy = y - y0;
    double bilinear =
        (1 - fy) * ((1 - fx) * at(x0, y0) + fx * at(x0 + 1, y0)) +
        fy * ((1 - fx) * at(x0, y0 + 1) + fx * at(x0 + 1, y0 + 1));
    CHECK(bilinear <= sample_depth(d, x, y) + 1e-12);
  }
}

TEST_CASE("external depth import round trips and checks its size") {
  fs::path dir = fs::temp_directory_path() / "rigidtrack_depth_import";
  fs::remove_all(dir);
  fs::create_directories(dir);
  CameraCalibration cal = tiny_camera();

  std::vector<float> grid(16);
  for (int i = 0; i < 16; ++i) grid[i] = 0.25f * static_cast<float>(i + 1);
  write_f32_file(dir / "depth_00000.f32le", grid);

  DenseDepthMap d = import_external_depth(dir / "depth_00000.f32le", 1, cal);
  CHECK(d.provenance == DenseDepthMap::Provenance::external);
  CHECK(d.t == 1);
  CHECK(d.values == grid);

  SUBCASE("wrong element count") {
    write_f32_file(dir / "short.f32le", std::vector<float>(15, 1.0f));
    try {
      import_external_depth(dir / "short.f32le", 1, cal);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::import);
      CHECK(std::string(e.what()).find("4x4") != std::string::npos);
    }
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(import_external_depth(dir / "absent.f32le", 1, cal),
                    Error);
    try {
      import_external_depth(dir / "absent.f32le", 1, cal);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::import);
    }
  }
}

TEST_CASE("oversized maps are refused") {
  SparseDepthMap s = make_sparse(1, 1);
  put(s, 0, 0, 1);
  s.width = (1 << 14) + 1;  // side limit guard, no allocation needed
  CHECK_THROWS_AS(nn_complete(s), Error);
}
