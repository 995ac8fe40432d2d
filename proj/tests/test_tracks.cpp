#include "rigidtrack/tracks.hpp"

#include <cmath>

#include "doctest.h"
#include "rigidtrack/error.hpp"
#include "rigidtrack/rng.hpp"

using namespace rigidtrack;

namespace {

BoxTrack track_from_poses(const std::vector<RigidTransform>& poses) {
  BoxTrack track;
  track.object_id = "obj";
  for (size_t i = 0; i < poses.size(); ++i) {
    BoxEntry e;
    e.frame = static_cast<int>(i) + 1;
    e.pose = poses[i];
    e.dims = {2, 2, 2};
    track.entries.push_back(e);
  }
  return track;
}

RigidTransform random_rigid(Rng& rng) {
  Vec3 axis{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
  double n = axis.norm();
  if (n < 1e-6) axis = {0, 0, 1}, n = 1;
  axis = axis * (1.0 / n);
  return RigidTransform::rotation_axis_angle(axis, rng.uniform(-3, 3)) *
         RigidTransform::translation({rng.uniform(-20, 20),
                                      rng.uniform(-20, 20),
                                      rng.uniform(-5, 5)});
}

CameraCalibration pinhole(double f, double cx, double cy, int w, int h) {
  CameraCalibration cal;
  cal.camera_id = CameraId::front;
  cal.intrinsics = {f, 0, cx, 0, f, cy, 0, 0, 1};
  cal.extrinsic = RigidTransform::identity();
  cal.width = w;
  cal.height = h;
  return cal;
}

}  // namespace

TEST_CASE("a point on a translating object advances with it") {
  // Ego parked at the origin; the object slides +1 m per frame along x.
  std::vector<RigidTransform> ego(4, RigidTransform::identity());
  std::vector<RigidTransform> boxes;
  for (int f = 0; f < 4; ++f) {
    boxes.push_back(RigidTransform::translation({static_cast<double>(f), 0, 0}));
  }
  PointSet pts;
  pts.push_back({5, 0, 0});
  PointSet out = propagate(pts, 1, 4, ego, track_from_poses(boxes));
  REQUIRE(out.size() == 1);
  CHECK(out.at(0).x == doctest::Approx(8).epsilon(1e-12));
  CHECK(std::fabs(out.at(0).y) < 1e-12);
  CHECK(std::fabs(out.at(0).z) < 1e-12);
}

TEST_CASE("a static object recedes in the frame of a moving ego") {
  // Ego advances 2 m per frame; the object sits still at world x = 10.
  std::vector<RigidTransform> ego;
  for (int f = 0; f < 4; ++f) {
    ego.push_back(RigidTransform::translation({2.0 * f, 0, 0}));
  }
  std::vector<RigidTransform> boxes(4, RigidTransform::translation({10, 0, 0}));
  PointSet pts;
  pts.push_back({10, 0, 0});
  PointSet out = propagate(pts, 1, 4, ego, track_from_poses(boxes));
  REQUIRE(out.size() == 1);
  CHECK(out.at(0).x == doctest::Approx(4).epsilon(1e-12));
}

TEST_CASE("propagation matches a step-by-step transform chain") {
  Rng rng(101);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<RigidTransform> ego = {random_rigid(rng), random_rigid(rng)};
    std::vector<RigidTransform> boxes = {random_rigid(rng),
                                         random_rigid(rng)};
    PointSet pts;
    for (int i = 0; i < 5; ++i) {
      pts.push_back({rng.uniform(-10, 10), rng.uniform(-10, 10),
                     rng.uniform(-10, 10)});
    }
    PointSet out = propagate(pts, 1, 2, ego, track_from_poses(boxes));
    for (size_t i = 0; i < pts.size(); ++i) {
      // Apply each pose one at a time instead of composing matrices.
      Vec3 world_t = ego[0].apply(pts.at(i));
      Vec3 local = boxes[0].inverse().apply(world_t);
      Vec3 world_tau = boxes[1].apply(local);
      Vec3 expect = ego[1].inverse().apply(world_tau);
      CHECK(std::fabs(out.at(i).x - expect.x) < 1e-9);
      CHECK(std::fabs(out.at(i).y - expect.y) < 1e-9);
      CHECK(std::fabs(out.at(i).z - expect.z) < 1e-9);
    }
  }
}

TEST_CASE("propagating a frame onto itself is the identity") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<RigidTransform> ego = {random_rigid(rng)};
    std::vector<RigidTransform> boxes = {random_rigid(rng)};
    PointSet pts;
    pts.push_back({rng.uniform(-50, 50), rng.uniform(-50, 50),
                   rng.uniform(-50, 50)});
    PointSet out = propagate(pts, 1, 1, ego, track_from_poses(boxes));
    CHECK(std::fabs(out.at(0).x - pts.at(0).x) <= 1e-12);
    CHECK(std::fabs(out.at(0).y - pts.at(0).y) <= 1e-12);
    CHECK(std::fabs(out.at(0).z - pts.at(0).z) <= 1e-12);
  }
}

TEST_CASE("two single steps agree with one direct step") {
  Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<RigidTransform> ego = {random_rigid(rng), random_rigid(rng),
                                       random_rigid(rng)};
    std::vector<RigidTransform> boxes = {random_rigid(rng), random_rigid(rng),
                                         random_rigid(rng)};
    BoxTrack track = track_from_poses(boxes);
    PointSet pts;
    for (int i = 0; i < 3; ++i) {
      pts.push_back({rng.uniform(-10, 10), rng.uniform(-10, 10),
                     rng.uniform(-10, 10)});
    }
    PointSet direct = propagate(pts, 1, 3, ego, track);
    PointSet stepped = propagate(propagate(pts, 1, 2, ego, track), 2, 3, ego,
                                 track);
    for (size_t i = 0; i < pts.size(); ++i) {
      CHECK(std::fabs(direct.at(i).x - stepped.at(i).x) <= 1e-9);
      CHECK(std::fabs(direct.at(i).y - stepped.at(i).y) <= 1e-9);
      CHECK(std::fabs(direct.at(i).z - stepped.at(i).z) <= 1e-9);
    }
  }
}

TEST_CASE("propagation preserves pairwise distances") {
  Rng rng(29);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<RigidTransform> ego = {random_rigid(rng), random_rigid(rng)};
    std::vector<RigidTransform> boxes = {random_rigid(rng),
                                         random_rigid(rng)};
    PointSet pts;
    for (int i = 0; i < 4; ++i) {
      pts.push_back({rng.uniform(-10, 10), rng.uniform(-10, 10),
                     rng.uniform(-10, 10)});
    }
    PointSet out = propagate(pts, 1, 2, ego, track_from_poses(boxes));
    for (size_t i = 0; i < pts.size(); ++i) {
      for (size_t j = i + 1; j < pts.size(); ++j) {
        double before = (pts.at(i) - pts.at(j)).norm();
        double after = (out.at(i) - out.at(j)).norm();
        CHECK(std::fabs(after - before) <= 1e-9 * std::max(1.0, before));
      }
    }
  }
}

TEST_CASE("a missing box pose names the frame") {
  std::vector<RigidTransform> ego(3, RigidTransform::identity());
  BoxTrack track = track_from_poses({RigidTransform::identity()});
  track.object_id = "car_7";
  PointSet pts;
  pts.push_back({1, 0, 0});
  try {
    propagate(pts, 1, 3, ego, track);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::propagation);
    CHECK(std::string(e.what()) == "object car_7: no box pose at frame 3");
  }
}

TEST_CASE("build_tracks stacks source frames in order") {
  std::vector<RigidTransform> ego(3, RigidTransform::identity());
  std::vector<RigidTransform> boxes;
  for (int f = 0; f < 3; ++f) {
    boxes.push_back(RigidTransform::translation({static_cast<double>(f), 0, 0}));
  }
  BoxTrack track = track_from_poses(boxes);

  std::vector<PointSet> per_frame(3);
  per_frame[0].push_back({1, 2, 3});
  per_frame[0].push_back({4, 5, 6});
  // frame 2 has no points and contributes no rows
  per_frame[2].push_back({7, 8, 9});

  TrackSet3D ts = build_tracks("obj", per_frame, ego, track);
  REQUIRE(ts.track_count() == 3);
  CHECK(ts.source_frames == std::vector<int>{1, 1, 3});
  CHECK(ts.frame_count == 3);

  // Source-frame entries carry the inputs through unchanged.
  CHECK(ts.x[ts.index(0, 1)] == 1.0);
  CHECK(ts.y[ts.index(1, 1)] == 5.0);
  CHECK(ts.z[ts.index(2, 3)] == 9.0);

  // Rows equal standalone propagation of their source frame.
  for (int tau = 1; tau <= 3; ++tau) {
    PointSet from1 = propagate(per_frame[0], 1, tau, ego, track);
    for (size_t i = 0; i < 2; ++i) {
      CHECK(std::fabs(ts.x[ts.index(i, tau)] - from1.at(i).x) < 1e-12);
      CHECK(std::fabs(ts.y[ts.index(i, tau)] - from1.at(i).y) < 1e-12);
      CHECK(std::fabs(ts.z[ts.index(i, tau)] - from1.at(i).z) < 1e-12);
    }
  }
}

TEST_CASE("build_tracks honors the stride") {
  std::vector<RigidTransform> ego(5, RigidTransform::identity());
  std::vector<RigidTransform> boxes(5, RigidTransform::identity());
  std::vector<PointSet> per_frame(5);
  for (auto& p : per_frame) p.push_back({1, 1, 1});

  TrackSet3D ts = build_tracks("obj", per_frame, ego,
                               track_from_poses(boxes), 2);
  CHECK(ts.source_frames == std::vector<int>{1, 3, 5});
  CHECK_THROWS_AS(build_tracks("obj", per_frame, ego,
                               track_from_poses(boxes), 0),
                  Error);
}

TEST_CASE("build_tracks with no points anywhere reports the object") {
  std::vector<RigidTransform> ego(2, RigidTransform::identity());
  std::vector<PointSet> per_frame(2);
  try {
    build_tracks("ghost", per_frame, ego,
                 track_from_poses({RigidTransform::identity(),
                                   RigidTransform::identity()}));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::empty_object);
    CHECK(std::string(e.what()).find("ghost") != std::string::npos);
  }
}

TEST_CASE("build_tracks output is identical for any worker count") {
  Rng rng(55);
  int frames = 6;
  std::vector<RigidTransform> ego, boxes;
  for (int f = 0; f < frames; ++f) {
    ego.push_back(random_rigid(rng));
    boxes.push_back(random_rigid(rng));
  }
  std::vector<PointSet> per_frame(frames);
  for (auto& p : per_frame) {
    for (int i = 0; i < 17; ++i) {
      p.push_back({rng.uniform(-5, 5), rng.uniform(-5, 5),
                   rng.uniform(-5, 5)});
    }
  }
  BoxTrack track = track_from_poses(boxes);
  TrackSet3D one = build_tracks("obj", per_frame, ego, track, 1, 1);
  for (int workers : {2, 8}) {
    TrackSet3D many = build_tracks("obj", per_frame, ego, track, 1, workers);
    CHECK(many.x == one.x);
    CHECK(many.y == one.y);
    CHECK(many.z == one.z);
    CHECK(many.source_frames == one.source_frames);
  }
}

TEST_CASE("projection matches the worked pinhole examples") {
  std::vector<RigidTransform> ego(1, RigidTransform::identity());
  TrackSet3D ts;
  ts.object_id = "obj";
  ts.frame_count = 1;
  ts.source_frames = {1, 1, 1, 1};
  ts.x = {0, 1, -400, 0};
  ts.y = {0, 0, 0, 0};
  ts.z = {5, 10, 10, -5};

  SUBCASE("identity intrinsics center on the optical axis") {
    TrackSet2D t2 = project_to_image(ts, pinhole(1, 0, 0, 2, 2));
    CHECK(t2.px[0] == 0.0);
    CHECK(t2.py[0] == 0.0);
    CHECK(t2.in_fov[0] == 1);
    CHECK(t2.range[0] == 5.0);
  }
  SUBCASE("offset principal point and focal length") {
    TrackSet2D t2 = project_to_image(ts, pinhole(100, 320, 240, 640, 480));
    CHECK(t2.px[1] == doctest::Approx(330).epsilon(1e-14));
    CHECK(t2.py[1] == doctest::Approx(240).epsilon(1e-14));
    CHECK(t2.range[1] == doctest::Approx(std::sqrt(101.0)).epsilon(1e-15));
    CHECK(t2.in_fov[1] == 1);
    CHECK(t2.in_fov[2] == 0);  // projects far left of the image
    CHECK(t2.in_fov[3] == 0);  // behind the camera
    CHECK(t2.camera_id == CameraId::front);
    CHECK(t2.track_count() == 4);
  }
}

TEST_CASE("image bounds are half-open") {
  TrackSet3D ts;
  ts.frame_count = 1;
  ts.source_frames = {1, 1};
  // Pixel lands exactly on 0 (in) and exactly on width (out).
  ts.x = {0, 100};
  ts.y = {0, 0};
  ts.z = {1, 1};
  TrackSet2D t2 = project_to_image(ts, pinhole(1, 0, 50, 100, 100));
  CHECK(t2.px[0] == 0.0);
  CHECK(t2.in_fov[0] == 1);
  CHECK(t2.px[1] == 100.0);
  CHECK(t2.in_fov[1] == 0);
}

TEST_CASE("projection through a mounted camera uses the extrinsic") {
  // Camera looks along ego +x: camera z -> ego x, camera x -> ego -y,
  // camera y -> ego -z.
  CameraCalibration cal = pinhole(100, 50, 50, 100, 100);
  cal.extrinsic = RigidTransform::from_rotation_translation(
      {0, 0, 1, -1, 0, 0, 0, -1, 0}, {0, 0, 0});
  TrackSet3D ts;
  ts.frame_count = 1;
  ts.source_frames = {1};
  ts.x = {10};
  ts.y = {0};
  ts.z = {0};
  TrackSet2D t2 = project_to_image(ts, cal);
  CHECK(t2.px[0] == doctest::Approx(50).epsilon(1e-13));
  CHECK(t2.py[0] == doctest::Approx(50).epsilon(1e-13));
  CHECK(t2.range[0] == doctest::Approx(10).epsilon(1e-14));
  CHECK(t2.in_fov[0] == 1);
}

TEST_CASE("unproject inverts projection on in-FOV points") {
  Rng rng(91);
  CameraCalibration cal = pinhole(85, 32, 24, 64, 48);
  cal.extrinsic = RigidTransform::rotation_z(0.4) *
                  RigidTransform::translation({0.3, -0.1, 0.9});
  for (int trial = 0; trial < 200; ++trial) {
    TrackSet3D ts;
    ts.frame_count = 1;
    ts.source_frames = {1};
    Vec3 cam_pt{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(1, 30)};
    Vec3 ego_pt = cal.extrinsic.apply(cam_pt);
    ts.x = {ego_pt.x};
    ts.y = {ego_pt.y};
    ts.z = {ego_pt.z};
    TrackSet2D t2 = project_to_image(ts, cal);
    if (!t2.in_fov[0]) continue;
    Vec3 back = unproject(t2.px[0], t2.py[0], t2.range[0], cal);
    CHECK(std::fabs(back.x - ego_pt.x) < 1e-9);
    CHECK(std::fabs(back.y - ego_pt.y) < 1e-9);
    CHECK(std::fabs(back.z - ego_pt.z) < 1e-9);
  }
}
