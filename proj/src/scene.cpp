#include "rigidtrack/scene.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <set>

#include "rigidtrack/binio.hpp"
#include "rigidtrack/error.hpp"
#include "rigidtrack/kernels.hpp"
#include "rigidtrack/kvdoc.hpp"

namespace rigidtrack {

namespace fs = std::filesystem;

void PointSet::reserve(size_t n) {
  x.reserve(n);
  y.reserve(n);
  z.reserve(n);
}

void PointSet::push_back(const Vec3& p) {
  x.push_back(p.x);
  y.push_back(p.y);
  z.push_back(p.z);
}

const BoxEntry* BoxTrack::find(int frame) const {
  for (const BoxEntry& e : entries) {
    if (e.frame == frame) return &e;
  }
  return nullptr;
}

bool BoxTrack::has_velocities() const {
  if (entries.empty()) return false;
  for (const BoxEntry& e : entries) {
    if (!e.velocity) return false;
  }
  return true;
}

const CameraCalibration* SceneBundle::camera(CameraId id) const {
  for (const CameraCalibration& c : cameras) {
    if (c.camera_id == id) return &c;
  }
  return nullptr;
}

const BoxTrack* SceneBundle::box(const std::string& object_id) const {
  for (const BoxTrack& b : box_tracks) {
    if (b.object_id == object_id) return &b;
  }
  return nullptr;
}

void SceneBundle::validate() const {
  if (frame_count <= 0) {
    fail(ErrorKind::validation, "frame_count must be positive");
  }
  if (!(frame_rate > 0)) {
    fail(ErrorKind::validation, "frame_rate must be positive");
  }
  if (static_cast<int>(ego_poses.size()) != frame_count) {
    fail(ErrorKind::alignment,
         "ego_poses holds " + std::to_string(ego_poses.size()) +
             " frames, expected " + std::to_string(frame_count));
  }
  if (static_cast<int>(sweeps.size()) != frame_count) {
    fail(ErrorKind::alignment,
         "sweeps hold " + std::to_string(sweeps.size()) +
             " frames, expected " + std::to_string(frame_count));
  }
  for (int t = 1; t <= frame_count; ++t) {
    const LidarSweep& s = sweeps[t - 1];
    if (s.t != t) {
      fail(ErrorKind::alignment,
           "sweep at slot " + std::to_string(t - 1) + " carries frame " +
               std::to_string(s.t));
    }
    for (size_t i = 0; i < s.points.size(); ++i) {
      if (!std::isfinite(s.points.x[i]) || !std::isfinite(s.points.y[i]) ||
          !std::isfinite(s.points.z[i])) {
        fail(ErrorKind::validation, "sweep frame " + std::to_string(t) +
                                        " contains a non-finite point");
      }
    }
  }
  for (const CameraCalibration& c : cameras) c.validate();
  for (const BoxTrack& b : box_tracks) {
    int prev = 0;
    for (const BoxEntry& e : b.entries) {
      if (e.frame <= prev) {
        fail(ErrorKind::validation,
             "box track " + b.object_id + ": frame indices must increase");
      }
      prev = e.frame;
      if (e.frame < 1 || e.frame > frame_count) {
        fail(ErrorKind::validation,
             "box track " + b.object_id + ": frame " +
                 std::to_string(e.frame) + " outside [1, " +
                 std::to_string(frame_count) + "]");
      }
      if (!(e.dims.x > 0 && e.dims.y > 0 && e.dims.z > 0)) {
        fail(ErrorKind::validation,
             "box track " + b.object_id + ": non-positive dims at frame " +
                 std::to_string(e.frame));
      }
    }
  }
}

std::string expand_frame_pattern(const std::string& pattern, int frame) {
  size_t pos = pattern.find("%05d");
  if (pos == std::string::npos) {
    fail(ErrorKind::config,
         "file pattern '" + pattern + "' lacks the %05d frame token");
  }
  char num[16];
  std::snprintf(num, sizeof(num), "%05d", frame - 1);
  std::string out = pattern;
  out.replace(pos, 4, num);
  return out;
}

namespace {

constexpr int kBoxRecordValues = 23;  // frame + 16 pose + 3 dims + 3 velocity
constexpr size_t kCalibBytes = (9 + 16) * 8 + 2 * 8;

RigidTransform pose_from_doubles(const double* m, const std::string& what) {
  std::array<double, 16> a;
  std::memcpy(a.data(), m, sizeof(a));
  try {
    return RigidTransform::from_matrix(a);
  } catch (const Error& e) {
    fail(ErrorKind::validation, what + ": " + e.what());
  }
}

CameraCalibration read_calibration(const fs::path& path, CameraId id) {
  std::vector<uint8_t> raw = read_u8_file(path);
  if (raw.size() != kCalibBytes) {
    fail(ErrorKind::corruption,
         path.string() + ": expected " + std::to_string(kCalibBytes) +
             " bytes, found " + std::to_string(raw.size()));
  }
  CameraCalibration cal;
  cal.camera_id = id;
  double ext[16];
  int64_t wh[2];
  std::memcpy(cal.intrinsics.data(), raw.data(), 9 * 8);
  std::memcpy(ext, raw.data() + 9 * 8, 16 * 8);
  std::memcpy(wh, raw.data() + 25 * 8, 2 * 8);
  cal.extrinsic = pose_from_doubles(ext, path.string() + " extrinsic");
  cal.width = static_cast<int>(wh[0]);
  cal.height = static_cast<int>(wh[1]);
  cal.validate();
  return cal;
}

void write_calibration(const fs::path& path, const CameraCalibration& cal) {
  std::vector<uint8_t> raw(kCalibBytes);
  int64_t wh[2] = {cal.width, cal.height};
  std::memcpy(raw.data(), cal.intrinsics.data(), 9 * 8);
  std::memcpy(raw.data() + 9 * 8, cal.extrinsic.matrix().data(), 16 * 8);
  std::memcpy(raw.data() + 25 * 8, wh, 2 * 8);
  write_u8_file(path, raw);
}

BoxTrack read_box_track(const fs::path& path, const std::string& object_id,
                        int frame_count) {
  std::vector<double> raw = read_f64_file(path);
  if (raw.size() % kBoxRecordValues != 0) {
    fail(ErrorKind::corruption,
         path.string() + ": " + std::to_string(raw.size() * 8) +
             " bytes is not a whole number of " +
             std::to_string(kBoxRecordValues * 8) + "-byte records");
  }
  BoxTrack track;
  track.object_id = object_id;
  size_t records = raw.size() / kBoxRecordValues;
  track.entries.reserve(records);
  int prev = 0;
  for (size_t r = 0; r < records; ++r) {
    const double* rec = raw.data() + r * kBoxRecordValues;
    BoxEntry e;
    int64_t stored;
    std::memcpy(&stored, rec, 8);  // frame index stored as i64, 0-based
    e.frame = static_cast<int>(stored) + 1;
    if (e.frame <= prev) {
      fail(ErrorKind::validation,
           path.string() + ": record " + std::to_string(r) +
               " breaks strictly increasing frame order");
    }
    if (e.frame < 1 || e.frame > frame_count) {
      fail(ErrorKind::validation,
           path.string() + ": frame " + std::to_string(e.frame) +
               " outside [1, " + std::to_string(frame_count) + "]");
    }
    prev = e.frame;
    e.pose = pose_from_doubles(
        rec + 1, path.string() + " record " + std::to_string(r));
    e.dims = {rec[17], rec[18], rec[19]};
    bool nan0 = std::isnan(rec[20]), nan1 = std::isnan(rec[21]),
         nan2 = std::isnan(rec[22]);
    if (nan0 != nan1 || nan1 != nan2) {
      fail(ErrorKind::validation,
           path.string() + ": record " + std::to_string(r) +
               " has a partially absent velocity");
    }
    if (!nan0) e.velocity = Vec3{rec[20], rec[21], rec[22]};
    track.entries.push_back(e);
  }
  return track;
}

void write_box_track(const fs::path& path, const BoxTrack& track) {
  std::vector<double> raw;
  raw.reserve(track.entries.size() * kBoxRecordValues);
  for (const BoxEntry& e : track.entries) {
    double frame_bits;
    int64_t stored = e.frame - 1;
    std::memcpy(&frame_bits, &stored, 8);
    raw.push_back(frame_bits);
    for (double v : e.pose.matrix()) raw.push_back(v);
    raw.push_back(e.dims.x);
    raw.push_back(e.dims.y);
    raw.push_back(e.dims.z);
    Vec3 vel = e.velocity.value_or(
        Vec3{std::nan(""), std::nan(""), std::nan("")});
    raw.push_back(vel.x);
    raw.push_back(vel.y);
    raw.push_back(vel.z);
  }
  write_f64_file(path, raw);
}

}  // namespace

SceneBundle load_scene_bundle(const fs::path& dir) {
  fs::path manifest_path = dir / "manifest.txt";
  if (!fs::exists(manifest_path)) {
    fail(ErrorKind::ingestion, "missing manifest: " + manifest_path.string());
  }
  KeyValueDoc man = KeyValueDoc::parse_file(manifest_path);
  if (man.get_or("format", "") != "rigidtrack-scene") {
    fail(ErrorKind::ingestion,
         manifest_path.string() + ": not a scene bundle manifest");
  }
  if (man.get_int("version") != 1) {
    fail(ErrorKind::ingestion,
         manifest_path.string() + ": unsupported version " +
             man.get("version"));
  }

  SceneBundle scene;
  scene.origin = dir;
  scene.frame_count = static_cast<int>(man.get_int("frames"));
  scene.frame_rate = man.get_double_or("frame_rate", 10.0);
  scene.image_pattern = man.get_or("images", "");

  for (const std::string& name : man.get_strings("cameras")) {
    auto id = camera_id_from_string(name);
    if (!id) {
      fail(ErrorKind::config,
           manifest_path.string() + ": unknown camera '" + name + "'");
    }
    fs::path calib_path = dir / man.get_or("calib." + name, "calib/" + name);
    if (!fs::exists(calib_path)) {
      fail(ErrorKind::ingestion, "missing file: " + calib_path.string());
    }
    scene.cameras.push_back(read_calibration(calib_path, *id));
  }

  fs::path ego_path = dir / man.get_or("ego_poses", "ego_poses.f64le");
  if (!fs::exists(ego_path)) {
    fail(ErrorKind::ingestion, "missing file: " + ego_path.string());
  }
  std::vector<double> ego_raw = read_f64_file(ego_path);
  if (ego_raw.size() != static_cast<size_t>(scene.frame_count) * 16) {
    fail(ErrorKind::alignment,
         "ego_poses: " + std::to_string(ego_raw.size() / 16) +
             " poses for " + std::to_string(scene.frame_count) + " frames");
  }
  scene.ego_poses.reserve(scene.frame_count);
  for (int t = 1; t <= scene.frame_count; ++t) {
    scene.ego_poses.push_back(pose_from_doubles(
        ego_raw.data() + static_cast<size_t>(t - 1) * 16,
        "ego pose at frame " + std::to_string(t)));
  }

  std::string sweep_pattern =
      man.get_or("sweeps", "sweeps/frame_%05d.xyz.f32le");
  scene.sweeps.reserve(scene.frame_count);
  for (int t = 1; t <= scene.frame_count; ++t) {
    fs::path sweep_path = dir / expand_frame_pattern(sweep_pattern, t);
    if (!fs::exists(sweep_path)) {
      fail(ErrorKind::ingestion, "missing file: " + sweep_path.string());
    }
    std::vector<float> raw = read_f32_file(sweep_path);
    if (raw.size() % 3 != 0) {
      fail(ErrorKind::corruption,
           sweep_path.string() + ": " + std::to_string(raw.size() * 4) +
               " bytes is not a multiple of 12 (x,y,z per point)");
    }
    LidarSweep sweep;
    sweep.t = t;
    size_t n = raw.size() / 3;
    sweep.points.reserve(n);
    for (size_t i = 0; i < n; ++i) {
      sweep.points.push_back({static_cast<double>(raw[i * 3]),
                              static_cast<double>(raw[i * 3 + 1]),
                              static_cast<double>(raw[i * 3 + 2])});
    }
    scene.sweeps.push_back(std::move(sweep));
  }

  if (man.has("objects")) {
    std::set<std::string> seen;
    for (const std::string& id : man.get_strings("objects")) {
      if (!seen.insert(id).second) {
        fail(ErrorKind::config,
             manifest_path.string() + ": duplicate object '" + id + "'");
      }
      fs::path box_path =
          dir / man.get_or("box." + id, "boxes/" + id + ".f64le");
      if (!fs::exists(box_path)) {
        fail(ErrorKind::ingestion, "missing file: " + box_path.string());
      }
      scene.box_tracks.push_back(
          read_box_track(box_path, id, scene.frame_count));
    }
  }

  scene.validate();
  return scene;
}

void write_scene_bundle(const fs::path& dir, const SceneBundle& scene) {
  scene.validate();
  fs::create_directories(dir / "sweeps");
  fs::create_directories(dir / "calib");
  if (!scene.box_tracks.empty()) fs::create_directories(dir / "boxes");

  KeyValueDoc man;
  man.set("format", "rigidtrack-scene");
  man.set_int("version", 1);
  man.set_int("frames", scene.frame_count);
  man.set_double("frame_rate", scene.frame_rate);
  if (!scene.image_pattern.empty()) man.set("images", scene.image_pattern);

  std::vector<std::string> camera_names;
  for (const CameraCalibration& cal : scene.cameras) {
    std::string name = to_string(cal.camera_id);
    camera_names.push_back(name);
    man.set("calib." + name, "calib/" + name);
    write_calibration(dir / "calib" / name, cal);
  }
  man.set_strings("cameras", camera_names);

  man.set("ego_poses", "ego_poses.f64le");
  std::vector<double> ego_raw;
  ego_raw.reserve(scene.ego_poses.size() * 16);
  for (const RigidTransform& w : scene.ego_poses) {
    for (double v : w.matrix()) ego_raw.push_back(v);
  }
  write_f64_file(dir / "ego_poses.f64le", ego_raw);

  man.set("sweeps", "sweeps/frame_%05d.xyz.f32le");
  for (const LidarSweep& sweep : scene.sweeps) {
    std::vector<float> raw;
    raw.reserve(sweep.points.size() * 3);
    for (size_t i = 0; i < sweep.points.size(); ++i) {
      raw.push_back(static_cast<float>(sweep.points.x[i]));
      raw.push_back(static_cast<float>(sweep.points.y[i]));
      raw.push_back(static_cast<float>(sweep.points.z[i]));
    }
    write_f32_file(
        dir / expand_frame_pattern("sweeps/frame_%05d.xyz.f32le", sweep.t),
        raw);
  }

  std::vector<std::string> object_ids;
  for (const BoxTrack& track : scene.box_tracks) {
    object_ids.push_back(track.object_id);
    man.set("box." + track.object_id, "boxes/" + track.object_id + ".f64le");
    write_box_track(dir / "boxes" / (track.object_id + ".f64le"), track);
  }
  if (!object_ids.empty()) man.set_strings("objects", object_ids);

  man.write_file(dir / "manifest.txt");
}

PointSet points_in_box(const LidarSweep& sweep,
                       const RigidTransform& box_pose, const Vec3& dims,
                       const RigidTransform& ego_pose) {
  PointSet out;
  size_t n = sweep.points.size();
  if (n == 0) return out;
  // World = W * p, box local = B^{-1} * world; one fused matrix.
  auto m = (box_pose.inverse() * ego_pose).rows3x4();
  double half[3] = {dims.x / 2, dims.y / 2, dims.z / 2};
  std::vector<uint8_t> mask(n);
  kernels::active().box_select(m.data(), half, sweep.points.x.data(),
                               sweep.points.y.data(), sweep.points.z.data(),
                               n, mask.data());
  for (size_t i = 0; i < n; ++i) {
    if (mask[i]) out.push_back(sweep.points.at(i));
  }
  return out;
}

}  // namespace rigidtrack
