#include "rigidtrack/quality.hpp"

#include <cmath>

#include "doctest.h"
#include "rigidtrack/error.hpp"
#include "rigidtrack/rng.hpp"

using namespace rigidtrack;

namespace {

CameraCalibration camera(CameraId id, Vec3 offset = {0, 0, 0}) {
  CameraCalibration cal;
  cal.camera_id = id;
  cal.intrinsics = {100, 0, 32, 0, 100, 24, 0, 0, 1};
  cal.extrinsic = RigidTransform::translation(offset);
  cal.width = 64;
  cal.height = 48;
  return cal;
}

// One-track 2D set whose in-FOV bits are handed in directly; eligibility
// only reads those bits, the pixels are irrelevant.
TrackSet2D fov_pattern(CameraId id, const std::vector<uint8_t>& bits) {
  TrackSet2D t2;
  t2.object_id = "obj";
  t2.camera_id = id;
  t2.frame_count = static_cast<int>(bits.size());
  t2.px.assign(bits.size(), 10.0);
  t2.py.assign(bits.size(), 10.0);
  t2.range.assign(bits.size(), 5.0);
  t2.in_fov = bits;
  return t2;
}

BoxTrack box_at_distance(double x, int frames) {
  BoxTrack track;
  track.object_id = "obj";
  for (int f = 1; f <= frames; ++f) {
    BoxEntry e;
    e.frame = f;
    e.pose = RigidTransform::translation({x, 0, 0});
    e.dims = {2, 2, 2};
    e.velocity = Vec3{0, 0, 0};
    track.entries.push_back(e);
  }
  return track;
}

std::vector<uint8_t> runs(std::initializer_list<std::pair<int, int>> spec) {
  // Pairs of (bit, count).
  std::vector<uint8_t> bits;
  for (auto [bit, count] : spec) {
    bits.insert(bits.end(), count, static_cast<uint8_t>(bit));
  }
  return bits;
}

}  // namespace

TEST_CASE("defaults match the published filter settings") {
  CHECK(kDefaultMinFrames == 24);
  CHECK(kDefaultMaxMinDistance == 20.0);
}

TEST_CASE("percentiles interpolate between closest ranks") {
  std::vector<double> v{1, 2, 3, 4, 5};
  CHECK(percentile(v, 50) == 3.0);
  CHECK(percentile(v, 25) == 2.0);
  CHECK(percentile(v, 0) == 1.0);
  CHECK(percentile(v, 100) == 5.0);
  CHECK(percentile({1, 2}, 50) == 1.5);
  CHECK(percentile({7}, 99) == 7.0);
  // rank = 0.99 * 3 = 2.97 -> 30 + 0.97 * 10
  CHECK(percentile({10, 20, 30, 40}, 99) == doctest::Approx(39.7).epsilon(1e-12));
  CHECK_THROWS_AS(percentile({}, 50), Error);
}

TEST_CASE("an object visible long enough and close enough is eligible") {
  int f = 30;
  std::vector<RigidTransform> ego(f, RigidTransform::identity());
  auto rep = eligibility(box_at_distance(10, f),
                         fov_pattern(CameraId::front, runs({{1, 30}})), ego,
                         camera(CameraId::front));
  CHECK(rep.eligible);
  CHECK(rep.reasons.empty());
  CHECK(rep.longest_in_fov_run == 30);
  CHECK(rep.total_in_fov_frames == 30);
  CHECK(rep.min_distance == doctest::Approx(10).epsilon(1e-12));
}

TEST_CASE("23 contiguous frames miss the 24-frame default") {
  int f = 30;
  std::vector<RigidTransform> ego(f, RigidTransform::identity());
  auto rep = eligibility(box_at_distance(10, f),
                         fov_pattern(CameraId::front, runs({{1, 23}, {0, 7}})),
                         ego, camera(CameraId::front));
  CHECK_FALSE(rep.eligible);
  CHECK(rep.reasons == std::vector<std::string>{"min_frames"});
  CHECK(rep.longest_in_fov_run == 23);
  // A laxer threshold admits the same object.
  auto lax = eligibility(box_at_distance(10, f),
                         fov_pattern(CameraId::front, runs({{1, 23}, {0, 7}})),
                         ego, camera(CameraId::front), 23);
  CHECK(lax.eligible);
}

TEST_CASE("leaving and returning is rejected even with long runs") {
  int f = 60;
  std::vector<RigidTransform> ego(f, RigidTransform::identity());
  auto rep = eligibility(
      box_at_distance(10, f),
      fov_pattern(CameraId::front, runs({{1, 25}, {0, 5}, {1, 30}})), ego,
      camera(CameraId::front));
  CHECK_FALSE(rep.eligible);
  CHECK(rep.reasons == std::vector<std::string>{"leaves_and_returns"});
  CHECK(rep.longest_in_fov_run == 30);
  CHECK(rep.total_in_fov_frames == 55);
}

TEST_CASE("short gapped visibility stacks both reasons in order") {
  int f = 40;
  std::vector<RigidTransform> ego(f, RigidTransform::identity());
  auto rep = eligibility(
      box_at_distance(10, f),
      fov_pattern(CameraId::front, runs({{1, 10}, {0, 5}, {1, 10}, {0, 15}})),
      ego, camera(CameraId::front));
  CHECK(rep.reasons ==
        std::vector<std::string>{"min_frames", "leaves_and_returns"});
}

TEST_CASE("side cameras are filtered out by name") {
  int f = 30;
  std::vector<RigidTransform> ego(f, RigidTransform::identity());
  auto rep = eligibility(box_at_distance(10, f),
                         fov_pattern(CameraId::side_left, runs({{1, 30}})),
                         ego, camera(CameraId::side_left));
  CHECK_FALSE(rep.eligible);
  CHECK(rep.reasons == std::vector<std::string>{"camera"});
  // Front-left and front-right pass the camera filter.
  auto fl = eligibility(box_at_distance(10, f),
                        fov_pattern(CameraId::front_left, runs({{1, 30}})),
                        ego, camera(CameraId::front_left));
  CHECK(fl.eligible);
}

TEST_CASE("distance is measured from box centroid to camera center") {
  int f = 30;
  std::vector<RigidTransform> ego(f, RigidTransform::identity());
  // Camera sits 1 m ahead of the ego origin; box centroid at x = 11.
  auto rep = eligibility(box_at_distance(11, f),
                         fov_pattern(CameraId::front, runs({{1, 30}})), ego,
                         camera(CameraId::front, {1, 0, 0}));
  CHECK(rep.min_distance == doctest::Approx(10).epsilon(1e-12));
  CHECK(rep.eligible);

  auto far = eligibility(box_at_distance(25, f),
                         fov_pattern(CameraId::front, runs({{1, 30}})), ego,
                         camera(CameraId::front));
  CHECK_FALSE(far.eligible);
  CHECK(far.reasons == std::vector<std::string>{"min_distance"});

  // The minimum over frames decides: drifting inside 20 m at any frame
  // clears the filter.
  BoxTrack drifting = box_at_distance(25, f);
  drifting.entries[7].pose = RigidTransform::translation({19, 0, 0});
  auto close = eligibility(drifting,
                           fov_pattern(CameraId::front, runs({{1, 30}})), ego,
                           camera(CameraId::front));
  CHECK(close.min_distance == doctest::Approx(19).epsilon(1e-12));
  CHECK(close.eligible);
}

TEST_CASE("exactly 20 m qualifies; beyond does not") {
  int f = 30;
  std::vector<RigidTransform> ego(f, RigidTransform::identity());
  auto at20 = eligibility(box_at_distance(20, f),
                          fov_pattern(CameraId::front, runs({{1, 30}})), ego,
                          camera(CameraId::front));
  CHECK(at20.eligible);
  auto past = eligibility(box_at_distance(std::nextafter(20.0, 21.0), f),
                          fov_pattern(CameraId::front, runs({{1, 30}})), ego,
                          camera(CameraId::front));
  CHECK_FALSE(past.eligible);
}

TEST_CASE("an object never in view fails the frame filter") {
  int f = 30;
  std::vector<RigidTransform> ego(f, RigidTransform::identity());
  auto rep = eligibility(box_at_distance(10, f),
                         fov_pattern(CameraId::front, runs({{0, 30}})), ego,
                         camera(CameraId::front));
  CHECK_FALSE(rep.eligible);
  CHECK(rep.longest_in_fov_run == 0);
  CHECK(rep.reasons == std::vector<std::string>{"min_frames"});
}

namespace {

// Builds a track set whose world positions follow box motion exactly, so
// the per-track speed has a closed form.
TrackSet3D tracks_from_world(
    const std::vector<std::vector<Vec3>>& world_per_track,
    const std::vector<RigidTransform>& ego) {
  TrackSet3D ts;
  ts.object_id = "obj";
  ts.frame_count = static_cast<int>(ego.size());
  size_t n = world_per_track.size();
  ts.source_frames.assign(n, 1);
  ts.x.resize(n * ego.size());
  ts.y.resize(n * ego.size());
  ts.z.resize(n * ego.size());
  for (size_t i = 0; i < n; ++i) {
    for (int tau = 1; tau <= ts.frame_count; ++tau) {
      Vec3 p = ego[static_cast<size_t>(tau - 1)].inverse().apply(
          world_per_track[i][static_cast<size_t>(tau - 1)]);
      size_t idx = ts.index(i, tau);
      ts.x[idx] = p.x;
      ts.y[idx] = p.y;
      ts.z[idx] = p.z;
    }
  }
  return ts;
}

BoxTrack box_with_speed(double speed, int frames) {
  BoxTrack track = box_at_distance(0, frames);
  for (auto& e : track.entries) e.velocity = Vec3{speed, 0, 0};
  return track;
}

}  // namespace

TEST_CASE("constant motion matching the annotation gives zero error") {
  int f = 5;
  std::vector<RigidTransform> ego(f, RigidTransform::identity());
  std::vector<std::vector<Vec3>> world(3);
  for (int i = 0; i < 3; ++i) {
    for (int tau = 0; tau < f; ++tau) {
      world[i].push_back({0.1 * tau + i, 2.0 * i, 0});  // 0.1 m per frame
    }
  }
  // 0.1 m/frame at 10 fps = 1 m/s, annotated 1 m/s.
  auto stats = speed_error_stats(tracks_from_world(world, ego), ego,
                                 box_with_speed(1.0, f), 10.0);
  REQUIRE(stats.per_track_error.size() == 3);
  for (double e : stats.per_track_error) CHECK(e < 1e-12);
  CHECK(stats.p99 < 1e-12);
}

TEST_CASE("speed error reports the gap to the annotated magnitude") {
  int f = 3;
  std::vector<RigidTransform> ego(f, RigidTransform::identity());
  std::vector<std::vector<Vec3>> world(1);
  for (int tau = 0; tau < f; ++tau) world[0].push_back({0.1 * tau, 0, 0});
  auto stats = speed_error_stats(tracks_from_world(world, ego), ego,
                                 box_with_speed(3.0, f), 10.0);
  CHECK(stats.per_track_error[0] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("speed statistics are measured in the world frame") {
  // Same world motion, once under a parked ego and once under an ego that
  // translates and yaws; the ego-frame tracks differ but the statistics
  // must not.
  int f = 6;
  std::vector<std::vector<Vec3>> world(4);
  Rng rng(3);
  for (auto& track : world) {
    Vec3 start{rng.uniform(-5, 5), rng.uniform(-5, 5), 0};
    for (int tau = 0; tau < f; ++tau) {
      track.push_back(start + Vec3{0.25 * tau, -0.1 * tau, 0});
    }
  }
  std::vector<RigidTransform> parked(f, RigidTransform::identity());
  std::vector<RigidTransform> moving;
  for (int tau = 0; tau < f; ++tau) {
    moving.push_back(RigidTransform::rotation_z(0.2 * tau) *
                     RigidTransform::translation({1.5 * tau, -3, 0.1}));
  }
  BoxTrack box = box_with_speed(2.0, f);
  auto a = speed_error_stats(tracks_from_world(world, parked), parked, box,
                             10.0);
  auto b = speed_error_stats(tracks_from_world(world, moving), moving, box,
                             10.0);
  REQUIRE(a.per_track_error.size() == b.per_track_error.size());
  for (size_t i = 0; i < a.per_track_error.size(); ++i) {
    CHECK(a.per_track_error[i] ==
          doctest::Approx(b.per_track_error[i]).epsilon(1e-9));
  }
  CHECK(a.p50 == doctest::Approx(b.p50).epsilon(1e-9));
}

TEST_CASE("percentile fields summarize the per-track distribution") {
  int f = 2;
  std::vector<RigidTransform> ego(f, RigidTransform::identity());
  // Five tracks moving 0..4 m per frame at 1 fps -> speeds 0..4, annotated
  // 0 -> errors 0..4.
  std::vector<std::vector<Vec3>> world(5);
  for (int i = 0; i < 5; ++i) {
    world[i] = {{10.0 * i, 0, 0}, {10.0 * i + i, 0, 0}};
  }
  auto stats = speed_error_stats(tracks_from_world(world, ego), ego,
                                 box_with_speed(0.0, f), 1.0);
  CHECK(stats.p25 == 1.0);
  CHECK(stats.p50 == 2.0);
  CHECK(stats.p75 == 3.0);
  CHECK(stats.p99 == doctest::Approx(3.96).epsilon(1e-12));
}

TEST_CASE("speed statistics preconditions") {
  std::vector<RigidTransform> ego(1, RigidTransform::identity());
  std::vector<std::vector<Vec3>> world(1);
  world[0] = {{0, 0, 0}};
  SUBCASE("needs two frames") {
    CHECK_THROWS_AS(speed_error_stats(tracks_from_world(world, ego), ego,
                                      box_with_speed(1, 1), 10.0),
                    Error);
  }
  SUBCASE("needs velocities on every entry") {
    std::vector<RigidTransform> ego2(2, RigidTransform::identity());
    std::vector<std::vector<Vec3>> world2(1);
    world2[0] = {{0, 0, 0}, {1, 0, 0}};
    BoxTrack box = box_with_speed(1, 2);
    box.entries[1].velocity.reset();
    try {
      speed_error_stats(tracks_from_world(world2, ego2), ego2, box, 10.0);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::validation);
      CHECK(std::string(e.what()).find("obj") != std::string::npos);
    }
  }
  SUBCASE("needs a positive frame rate") {
    std::vector<RigidTransform> ego2(2, RigidTransform::identity());
    std::vector<std::vector<Vec3>> world2(1);
    world2[0] = {{0, 0, 0}, {1, 0, 0}};
    CHECK_THROWS_AS(speed_error_stats(tracks_from_world(world2, ego2), ego2,
                                      box_with_speed(1, 2), 0.0),
                    Error);
  }
}
