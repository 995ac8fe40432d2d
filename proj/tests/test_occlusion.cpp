#include "rigidtrack/occlusion.hpp"

#include <cmath>

#include "doctest.h"
#include "rigidtrack/error.hpp"

using namespace rigidtrack;

namespace {

DenseDepthMap flat_map(int t, double depth) {
  DenseDepthMap d;
  d.t = t;
  d.width = 8;
  d.height = 8;
  d.values.assign(64, static_cast<float>(depth));
  return d;
}

TrackSet2D one_track(int frames) {
  TrackSet2D t2;
  t2.object_id = "obj";
  t2.camera_id = CameraId::front;
  t2.frame_count = frames;
  t2.px.assign(frames, 4.0);
  t2.py.assign(frames, 4.0);
  t2.range.assign(frames, 5.0);
  t2.in_fov.assign(frames, 1);
  return t2;
}

}  // namespace

TEST_CASE("default tolerance is two percent") {
  CHECK(kDefaultOcclusionTolerance == 0.02);
}

TEST_CASE("the depth test is strict at the tolerance boundary") {
  DenseDepthMap d = flat_map(1, 10.0);
  CHECK_FALSE(occlusion_flag(10.0, d, 4, 4, 0.02));
  CHECK_FALSE(occlusion_flag(10.2, d, 4, 4, 0.02));  // exactly (1+tol)*depth
  CHECK(occlusion_flag(std::nextafter(10.2, 11.0), d, 4, 4, 0.02));
  CHECK(occlusion_flag(12.0, d, 4, 4, 0.02));
  // In front of the surface is always visible.
  CHECK_FALSE(occlusion_flag(3.0, d, 4, 4, 0.02));
}

TEST_CASE("larger tolerances only reveal points") {
  DenseDepthMap d = flat_map(1, 10.0);
  for (double range : {9.0, 10.1, 10.5, 11.0, 15.0}) {
    bool strict = occlusion_flag(range, d, 4, 4, 0.0);
    bool loose = occlusion_flag(range, d, 4, 4, 0.05);
    // loose occluded implies strict occluded
    CHECK((!loose || strict));
  }
}

TEST_CASE("occlusion map folds FOV and applies the depth test per frame") {
  TrackSet2D t2 = one_track(3);
  t2.range[t2.index(0, 2)] = 20.0;  // behind the surface at frame 2
  t2.in_fov[t2.index(0, 3)] = 0;    // out of frame at frame 3
  t2.range[t2.index(0, 3)] = 0.1;   // would pass the depth test

  std::vector<DenseDepthMap> maps = {flat_map(1, 10), flat_map(2, 10),
                                     flat_map(3, 10)};
  OcclusionMap occ = occlusion_map(t2, maps, 0.02);
  CHECK(occ.object_id == "obj");
  CHECK(occ.frame_count == 3);
  CHECK(occ.occluded[occ.index(0, 1)] == 0);
  CHECK(occ.occluded[occ.index(0, 2)] == 1);
  CHECK(occ.occluded[occ.index(0, 3)] == 1);  // out of FOV is occluded
  CHECK(occ.fov == t2.in_fov);
}

TEST_CASE("a point sitting on its own surface sample stays visible") {
  TrackSet2D t2 = one_track(1);
  std::vector<DenseDepthMap> maps = {flat_map(1, 5.0)};  // depth == range
  OcclusionMap occ = occlusion_map(t2, maps);
  CHECK(occ.occluded[0] == 0);
}

TEST_CASE("depth map misalignment is reported") {
  TrackSet2D t2 = one_track(2);
  SUBCASE("wrong count") {
    std::vector<DenseDepthMap> maps = {flat_map(1, 10)};
    try {
      occlusion_map(t2, maps);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::alignment);
    }
  }
  SUBCASE("wrong frame stamp") {
    std::vector<DenseDepthMap> maps = {flat_map(1, 10), flat_map(5, 10)};
    try {
      occlusion_map(t2, maps);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::alignment);
      CHECK(std::string(e.what()) == "missing depth map for frame 2");
    }
  }
}

TEST_CASE("occlusion uses the pooled maximum around the pixel") {
  DenseDepthMap d = flat_map(1, 4.0);
  d.values[3 * 8 + 4] = 10.0f;  // one deep pixel adjacent to (4,4)
  // Pixel (4.0, 3.5): corners pick up the deep sample, so a range of 9
  // stays in front of the pooled depth.
  CHECK_FALSE(occlusion_flag(9.0, d, 4.0, 3.5, 0.02));
  // Far from the deep pixel the flat depth rules.
  CHECK(occlusion_flag(9.0, d, 6.5, 6.5, 0.02));
}
