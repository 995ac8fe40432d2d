#include "rigidtrack/bundle.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "rigidtrack/binio.hpp"
#include "rigidtrack/error.hpp"
#include "rigidtrack/kvdoc.hpp"
#include "rigidtrack/rng.hpp"

using namespace rigidtrack;
namespace fs = std::filesystem;

namespace {

double q32(double v) { return static_cast<double>(static_cast<float>(v)); }

fs::path fresh_dir(const std::string& tag) {
  auto dir = fs::temp_directory_path() / ("rt_bundle_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::map<std::string, std::vector<uint8_t>> dir_bytes(const fs::path& root) {
  std::map<std::string, std::vector<uint8_t>> out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    out[fs::relative(entry.path(), root).generic_string()] =
        read_u8_file(entry.path());
  }
  return out;
}

ObjectAnnotation make_object(const std::string& id, size_t n, int frames,
                             const std::vector<std::string>& cams,
                             uint64_t salt, bool with_speed) {
  Rng rng(salt);
  ObjectAnnotation ob;
  ob.tracks.object_id = id;
  ob.tracks.frame_count = frames;
  size_t cells = n * static_cast<size_t>(frames);
  for (size_t i = 0; i < n; ++i) {
    ob.tracks.source_frames.push_back(
        1 + static_cast<int>(rng.next_below(static_cast<uint64_t>(frames))));
  }
  for (size_t c = 0; c < cells; ++c) {
    ob.tracks.x.push_back(q32(rng.uniform(-30, 30)));
    ob.tracks.y.push_back(q32(rng.uniform(-30, 30)));
    ob.tracks.z.push_back(q32(rng.uniform(-2, 4)));
  }
  for (const auto& cam : cams) {
    TrackSet2D v;
    v.object_id = id;
    v.camera_id = *camera_id_from_string(cam);
    v.frame_count = frames;
    OcclusionMap occ;
    occ.object_id = id;
    occ.camera_id = v.camera_id;
    occ.frame_count = frames;
    for (size_t c = 0; c < cells; ++c) {
      v.px.push_back(q32(rng.uniform(-10, 330)));
      v.py.push_back(q32(rng.uniform(-10, 250)));
      v.range.push_back(q32(rng.uniform(1, 60)));
      uint8_t fov = rng.next_below(5) != 0 ? 1 : 0;
      v.in_fov.push_back(fov);
      occ.fov.push_back(fov);
      occ.occluded.push_back(!fov || rng.next_below(4) == 0 ? 1 : 0);
    }
    EligibilityReport rep;
    rep.object_id = id;
    rep.camera_id = v.camera_id;
    rep.eligible = salt % 2 == 0;
    if (!rep.eligible) rep.reasons = {"min_frames", "leaves_and_returns"};
    rep.longest_in_fov_run = static_cast<int>(salt % 7) + 1;
    rep.total_in_fov_frames = rep.longest_in_fov_run + 2;
    rep.min_distance = 7.25 + static_cast<double>(salt);
    ob.views.push_back(std::move(v));
    ob.occlusion.push_back(std::move(occ));
    ob.eligibility.push_back(std::move(rep));
  }
  if (with_speed) {
    SpeedErrorStats s;
    s.object_id = id;
    s.p25 = 0.001;
    s.p50 = 0.0025;
    s.p75 = 0.004;
    s.p95 = 0.0075;
    s.p99 = 0.009;
    ob.speed = std::move(s);
    ob.rejected_tracks = 3;
  }
  return ob;
}

TrackBundle demo_bundle() {
  TrackBundle b;
  b.frame_count = 4;
  b.frame_rate = 10;
  b.scene = "scenes/demo";
  b.stride = 2;
  b.seed = 99;
  b.max_points_per_frame = 128;
  b.occlusion_tolerance = 0.02;
  b.min_frames = 24;
  b.max_min_distance = 20;
  b.drop_ineligible = true;
  b.max_speed_error = 0.5;
  b.external_depth = "depth/model_a";
  b.camera_names = {"front", "front_left"};
  b.camera_sizes = {{320, 240}, {320, 240}};
  b.objects.push_back(
      make_object("car_3", 3, 4, b.camera_names, 2, true));
  b.objects.push_back(
      make_object("bike", 2, 4, b.camera_names, 5, false));
  b.skipped = {{"ghost", "no points in any source frame"},
               {"mist", "speed filter removed every track"}};
  return b;
}

}  // namespace

TEST_CASE("track bundles survive a disk round trip field by field") {
  TrackBundle b = demo_bundle();
  auto dir = fresh_dir("roundtrip");
  write_track_bundle(dir, b);
  TrackBundle r = read_track_bundle(dir);

  CHECK(r.frame_count == b.frame_count);
  CHECK(r.frame_rate == b.frame_rate);
  CHECK(r.scene == b.scene);
  CHECK(r.stride == b.stride);
  CHECK(r.seed == b.seed);
  CHECK(r.max_points_per_frame == b.max_points_per_frame);
  CHECK(r.occlusion_tolerance == b.occlusion_tolerance);
  CHECK(r.min_frames == b.min_frames);
  CHECK(r.max_min_distance == b.max_min_distance);
  CHECK(r.drop_ineligible == b.drop_ineligible);
  CHECK(r.max_speed_error == b.max_speed_error);
  CHECK(r.external_depth == b.external_depth);
  CHECK(r.camera_names == b.camera_names);
  CHECK(r.camera_sizes == b.camera_sizes);
  CHECK(r.skipped == b.skipped);
  REQUIRE(r.objects.size() == b.objects.size());

  for (size_t o = 0; o < b.objects.size(); ++o) {
    const ObjectAnnotation& in = b.objects[o];
    const ObjectAnnotation& out = r.objects[o];
    CHECK(out.tracks.object_id == in.tracks.object_id);
    CHECK(out.tracks.source_frames == in.tracks.source_frames);
    CHECK(out.tracks.x == in.tracks.x);
    CHECK(out.tracks.y == in.tracks.y);
    CHECK(out.tracks.z == in.tracks.z);
    CHECK(out.rejected_tracks == in.rejected_tracks);
    REQUIRE(out.views.size() == in.views.size());
    for (size_t k = 0; k < in.views.size(); ++k) {
      CHECK(out.views[k].camera_id == in.views[k].camera_id);
      CHECK(out.views[k].px == in.views[k].px);
      CHECK(out.views[k].py == in.views[k].py);
      CHECK(out.views[k].range == in.views[k].range);
      CHECK(out.views[k].in_fov == in.views[k].in_fov);
      CHECK(out.occlusion[k].occluded == in.occlusion[k].occluded);
      CHECK(out.occlusion[k].fov == in.occlusion[k].fov);
      CHECK(out.eligibility[k].eligible == in.eligibility[k].eligible);
      CHECK(out.eligibility[k].reasons == in.eligibility[k].reasons);
      CHECK(out.eligibility[k].longest_in_fov_run ==
            in.eligibility[k].longest_in_fov_run);
      CHECK(out.eligibility[k].total_in_fov_frames ==
            in.eligibility[k].total_in_fov_frames);
      CHECK(out.eligibility[k].min_distance == in.eligibility[k].min_distance);
    }
    REQUIRE(out.speed.has_value() == in.speed.has_value());
    if (in.speed) {
      CHECK(out.speed->p25 == in.speed->p25);
      CHECK(out.speed->p50 == in.speed->p50);
      CHECK(out.speed->p75 == in.speed->p75);
      CHECK(out.speed->p95 == in.speed->p95);
      CHECK(out.speed->p99 == in.speed->p99);
    }
  }

  const ObjectAnnotation* bike = r.object("bike");
  REQUIRE(bike != nullptr);
  CHECK_FALSE(bike->speed.has_value());
  CHECK(r.object("nobody") == nullptr);
  fs::remove_all(dir);
}

TEST_CASE("writing is deterministic and stable across a read cycle") {
  TrackBundle b = demo_bundle();
  auto d1 = fresh_dir("det1");
  auto d2 = fresh_dir("det2");
  auto d3 = fresh_dir("det3");
  write_track_bundle(d1, b);
  write_track_bundle(d2, b);
  CHECK(dir_bytes(d1) == dir_bytes(d2));
  write_track_bundle(d3, read_track_bundle(d1));
  CHECK(dir_bytes(d1) == dir_bytes(d3));
  fs::remove_all(d1);
  fs::remove_all(d2);
  fs::remove_all(d3);
}

TEST_CASE("the writer rejects inconsistent bundles") {
  SUBCASE("missing per-camera outputs") {
    TrackBundle b = demo_bundle();
    b.objects[0].views.pop_back();
    CHECK_THROWS_AS(write_track_bundle(fresh_dir("bad1"), b), Error);
  }
  SUBCASE("camera order mismatch") {
    TrackBundle b = demo_bundle();
    std::swap(b.objects[0].views[0], b.objects[0].views[1]);
    CHECK_THROWS_AS(write_track_bundle(fresh_dir("bad2"), b), Error);
  }
  SUBCASE("frame count mismatch") {
    TrackBundle b = demo_bundle();
    b.objects[1].tracks.frame_count = 3;
    CHECK_THROWS_AS(write_track_bundle(fresh_dir("bad3"), b), Error);
  }
  SUBCASE("sizes disagreeing with names") {
    TrackBundle b = demo_bundle();
    b.camera_sizes.pop_back();
    CHECK_THROWS_AS(write_track_bundle(fresh_dir("bad4"), b), Error);
  }
}

TEST_CASE("the reader flags missing or damaged pieces") {
  TrackBundle b = demo_bundle();
  auto dir = fresh_dir("damage");
  write_track_bundle(dir, b);

  SUBCASE("missing manifest") {
    fs::remove(dir / "manifest.txt");
    try {
      read_track_bundle(dir);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ingestion);
      CHECK(std::string(e.what()).find("manifest") != std::string::npos);
    }
  }
  SUBCASE("foreign format") {
    KeyValueDoc doc = KeyValueDoc::parse_file(dir / "manifest.txt");
    doc.set("format", "rigidtrack-scene");
    doc.write_file(dir / "manifest.txt");
    try {
      read_track_bundle(dir);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ingestion);
      CHECK(std::string(e.what()).find("not a track bundle") !=
            std::string::npos);
    }
  }
  SUBCASE("truncated track payload") {
    auto path = dir / "objects" / "car_3" / "tracks_3d.f32le";
    auto bytes = read_u8_file(path);
    bytes.resize(bytes.size() - 4);
    write_u8_file(path, bytes);
    try {
      read_track_bundle(dir);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::corruption);
    }
  }
  SUBCASE("missing camera file") {
    fs::remove(dir / "objects" / "bike" / "front_left" / "range.f32le");
    CHECK_THROWS_AS(read_track_bundle(dir), Error);
  }
  SUBCASE("source frame outside the scene") {
    auto path = dir / "objects" / "car_3" / "source_frames.i64le";
    auto vals = read_i64_file(path);
    vals[0] = 4;  // scene has frames 0..3 on disk
    write_i64_file(path, vals);
    try {
      read_track_bundle(dir);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::corruption);
      CHECK(std::string(e.what()).find("source frame") != std::string::npos);
    }
  }
  SUBCASE("flag byte outside 0/1") {
    auto path = dir / "objects" / "car_3" / "front" / "occlusion.u8";
    auto bits = read_u8_file(path);
    bits[0] = 2;
    write_u8_file(path, bits);
    CHECK_THROWS_AS(read_track_bundle(dir), Error);
  }
  SUBCASE("visible entry outside the field of view") {
    auto opath = dir / "objects" / "car_3" / "front" / "occlusion.u8";
    auto fpath = dir / "objects" / "car_3" / "front" / "fov.u8";
    auto occ = read_u8_file(opath);
    auto fov = read_u8_file(fpath);
    size_t pick = 0;
    while (fov[pick] != 0) ++pick;
    occ[pick] = 0;  // claims visibility outside the image
    write_u8_file(opath, occ);
    try {
      read_track_bundle(dir);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::corruption);
      CHECK(std::string(e.what()).find("out-of-view") != std::string::npos);
    }
  }
  SUBCASE("eligibility flag contradicting reasons") {
    // car_3 was written eligible with no reasons; flipping the flag alone
    // leaves the pair inconsistent.
    KeyValueDoc doc = KeyValueDoc::parse_file(dir / "manifest.txt");
    doc.set_bool("object.car_3.camera.front.eligible", false);
    doc.write_file(dir / "manifest.txt");
    CHECK_THROWS_AS(read_track_bundle(dir), Error);
  }
  fs::remove_all(dir);
}
