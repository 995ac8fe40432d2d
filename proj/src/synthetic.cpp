#include "rigidtrack/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rigidtrack/error.hpp"
#include "rigidtrack/occlusion.hpp"
#include "rigidtrack/rng.hpp"

namespace rigidtrack {

namespace {

struct YawPose {
  double yaw = 0;
  Vec3 pos;
};

// The curve's defining data at `time`; both the bundle builder and the
// oracle start from this, then diverge into unrelated matrix code.
YawPose eval_curve(const PoseCurve& c, double time) {
  switch (c.kind) {
    case PoseCurve::Kind::fixed:
      return {c.start_yaw, c.start_pos};
    case PoseCurve::Kind::line:
      return {c.start_yaw + c.yaw_rate * time, c.start_pos + c.velocity * time};
    case PoseCurve::Kind::spin: {
      double phi = c.spin_rate * time;
      double cs = std::cos(phi), sn = std::sin(phi);
      double dx = c.start_pos.x - c.spin_center.x;
      double dy = c.start_pos.y - c.spin_center.y;
      Vec3 pos{c.spin_center.x + cs * dx - sn * dy,
               c.spin_center.y + sn * dx + cs * dy, c.start_pos.z};
      return {c.start_yaw + phi, pos};
    }
  }
  fail(ErrorKind::generation, "pose curve has an unknown kind");
}

constexpr double kWallDropMargin = 0.01;  // meters, guards f32 rounding

}  // namespace

std::array<double, 16> PoseCurve::pose_at(double time) const {
  YawPose yp = eval_curve(*this, time);
  double c = std::cos(yp.yaw), s = std::sin(yp.yaw);
  return {c, -s, 0, yp.pos.x,  //
          s, c,  0, yp.pos.y,  //
          0, 0,  1, yp.pos.z,  //
          0, 0,  0, 1};
}

Vec3 PoseCurve::velocity_at(double time) const {
  switch (kind) {
    case Kind::fixed:
      return {0, 0, 0};
    case Kind::line:
      return velocity;
    case Kind::spin: {
      // d/dt of the revolved position: spin_rate * z x (p(t) - center).
      YawPose yp = eval_curve(*this, time);
      double dx = yp.pos.x - spin_center.x;
      double dy = yp.pos.y - spin_center.y;
      return {-spin_rate * dy, spin_rate * dx, 0};
    }
  }
  fail(ErrorKind::generation, "pose curve has an unknown kind");
}

CameraCalibration CameraSpec::calibration() const {
  CameraCalibration cal;
  cal.camera_id = id;
  cal.intrinsics = {fx, 0, cx, 0, fy, cy, 0, 0, 1};
  cal.width = width;
  cal.height = height;
  // Mount axes: camera +z looks along ego +x, camera +x along ego -y,
  // camera +y along ego -z; then yaw about ego z and the offset.
  double c = std::cos(yaw), s = std::sin(yaw);
  std::array<double, 9> r = {s,  0, c,  //
                             -c, 0, s,  //
                             0,  -1, 0};
  cal.extrinsic = RigidTransform::from_rotation_translation(r, position);
  return cal;
}

const ObjectSpec& SyntheticScenario::object(const std::string& id) const {
  for (const auto& ob : objects)
    if (ob.id == id) return ob;
  fail(ErrorKind::config, "scenario has no object named '" + id + "'");
}

namespace {

double default_camera_yaw(CameraId id) {
  switch (id) {
    case CameraId::front:
      return 0;
    case CameraId::front_left:
      return 0.7853981633974483;  // pi/4
    case CameraId::front_right:
      return -0.7853981633974483;
    case CameraId::side_left:
      return 1.5707963267948966;  // pi/2
    case CameraId::side_right:
      return -1.5707963267948966;
  }
  return 0;
}

Vec3 get_vec3(const KeyValueDoc& doc, const std::string& key,
              const Vec3& fallback) {
  if (!doc.has(key)) return fallback;
  auto v = doc.get_doubles(key);
  if (v.size() != 3)
    fail(ErrorKind::config, key + ": expected 3 values, got " +
                                std::to_string(v.size()));
  return {v[0], v[1], v[2]};
}

PoseCurve parse_curve(const KeyValueDoc& doc, const std::string& prefix) {
  PoseCurve c;
  std::string kind = doc.get_or(prefix + ".kind", "fixed");
  if (kind == "fixed")
    c.kind = PoseCurve::Kind::fixed;
  else if (kind == "line")
    c.kind = PoseCurve::Kind::line;
  else if (kind == "spin")
    c.kind = PoseCurve::Kind::spin;
  else
    fail(ErrorKind::config,
         prefix + ".kind: unknown motion '" + kind + "'");
  if (doc.has(prefix + ".start")) {
    auto v = doc.get_doubles(prefix + ".start");
    if (v.size() != 4)
      fail(ErrorKind::config, prefix + ".start: expected 4 values (x y z yaw)");
    c.start_pos = {v[0], v[1], v[2]};
    c.start_yaw = v[3];
  }
  c.velocity = get_vec3(doc, prefix + ".velocity", {0, 0, 0});
  c.yaw_rate = doc.get_double_or(prefix + ".yaw_rate", 0);
  c.spin_center = get_vec3(doc, prefix + ".center", {0, 0, 0});
  c.spin_rate = doc.get_double_or(prefix + ".rate", 0);
  return c;
}

void check_finite(const PoseCurve& c, const std::string& prefix) {
  double all[] = {c.start_pos.x, c.start_pos.y, c.start_pos.z, c.start_yaw,
                  c.velocity.x,  c.velocity.y,  c.velocity.z,  c.yaw_rate,
                  c.spin_center.x, c.spin_center.y, c.spin_center.z,
                  c.spin_rate};
  for (double v : all)
    if (!std::isfinite(v))
      fail(ErrorKind::config, prefix + ": motion parameters must be finite");
}

void validate_scenario(const SyntheticScenario& sc) {
  if (sc.frames < 1)
    fail(ErrorKind::config, "frames: must be at least 1");
  if (!(sc.frame_rate > 0))
    fail(ErrorKind::config, "frame_rate: must be positive");
  if (!(sc.noise_sigma >= 0))
    fail(ErrorKind::config, "noise_sigma: must be non-negative");
  check_finite(sc.ego, "ego");
  if (sc.objects.empty())
    fail(ErrorKind::config, "scenario defines no objects");
  for (size_t i = 0; i < sc.objects.size(); ++i) {
    const auto& ob = sc.objects[i];
    if (ob.id.empty())
      fail(ErrorKind::config, "objects: ids must be non-empty");
    for (size_t j = 0; j < i; ++j)
      if (sc.objects[j].id == ob.id)
        fail(ErrorKind::config, "objects: duplicate id '" + ob.id + "'");
    std::string prefix = "object." + ob.id;
    if (!(ob.dims.x > 0 && ob.dims.y > 0 && ob.dims.z > 0))
      fail(ErrorKind::config, prefix + ".dims: values must be positive");
    if (!(ob.density > 0))
      fail(ErrorKind::config, prefix + ".density: must be positive");
    check_finite(ob.curve, prefix);
  }
  for (const auto& w : sc.walls) {
    std::string prefix = "wall." + w.id;
    if (w.id.empty())
      fail(ErrorKind::config, "walls: ids must be non-empty");
    if (!(w.density > 0))
      fail(ErrorKind::config, prefix + ".density: must be positive");
    if (w.u.cross(w.v).norm() <= 0)
      fail(ErrorKind::config, prefix + ": u and v must span a plane");
  }
  if (sc.cameras.empty())
    fail(ErrorKind::config, "scenario defines no cameras");
  for (size_t i = 0; i < sc.cameras.size(); ++i)
    for (size_t j = 0; j < i; ++j)
      if (sc.cameras[j].id == sc.cameras[i].id)
        fail(ErrorKind::config, "cameras: duplicate id '" +
                                    to_string(sc.cameras[i].id) + "'");
}

}  // namespace

SyntheticScenario SyntheticScenario::parse(const KeyValueDoc& doc) {
  SyntheticScenario sc;
  sc.seed = static_cast<uint64_t>(doc.get_int_or("seed", 1));
  sc.frames = static_cast<int>(doc.get_int("frames"));
  sc.frame_rate = doc.get_double("frame_rate");
  sc.noise_sigma = doc.get_double_or("noise_sigma", 0);
  sc.ego = parse_curve(doc, "ego");

  for (const auto& name : doc.get_strings("cameras")) {
    CameraSpec cam;
    auto id = camera_id_from_string(name);
    if (!id)
      fail(ErrorKind::config, "cameras: unknown camera '" + name + "'");
    cam.id = *id;
    std::string prefix = "camera." + name;
    auto intr = doc.get_doubles(prefix + ".intrinsics");
    if (intr.size() != 4)
      fail(ErrorKind::config,
           prefix + ".intrinsics: expected 4 values (fx fy cx cy)");
    cam.fx = intr[0];
    cam.fy = intr[1];
    cam.cx = intr[2];
    cam.cy = intr[3];
    auto size = doc.get_doubles(prefix + ".size");
    if (size.size() != 2 || size[0] != std::floor(size[0]) ||
        size[1] != std::floor(size[1]) || size[0] < 1 || size[1] < 1)
      fail(ErrorKind::config, prefix + ".size: expected two positive integers");
    cam.width = static_cast<int>(size[0]);
    cam.height = static_cast<int>(size[1]);
    cam.position = get_vec3(doc, prefix + ".position", {0, 0, 0});
    cam.yaw = doc.get_double_or(prefix + ".yaw", default_camera_yaw(cam.id));
    sc.cameras.push_back(cam);
  }

  for (const auto& id : doc.get_strings("objects")) {
    ObjectSpec ob;
    ob.id = id;
    std::string prefix = "object." + id;
    std::string shape = doc.get_or(prefix + ".shape", "box");
    if (shape == "box")
      ob.shape = ObjectSpec::Shape::box;
    else if (shape == "cylinder")
      ob.shape = ObjectSpec::Shape::cylinder;
    else
      fail(ErrorKind::config, prefix + ".shape: unknown shape '" + shape + "'");
    auto dims = doc.get_doubles(prefix + ".dims");
    if (dims.size() != 3)
      fail(ErrorKind::config, prefix + ".dims: expected 3 values");
    ob.dims = {dims[0], dims[1], dims[2]};
    if (ob.shape == ObjectSpec::Shape::cylinder)
      ob.dims.y = ob.dims.x;  // diameter twice; the box is the bounding box
    ob.density = doc.get_double_or(prefix + ".density", 100);
    ob.curve = parse_curve(doc, prefix);
    ob.annotate_velocity = doc.get_bool_or(prefix + ".velocity_annotated", true);
    sc.objects.push_back(ob);
  }

  if (doc.has("walls")) {
    for (const auto& id : doc.get_strings("walls")) {
      WallSpec w;
      w.id = id;
      std::string prefix = "wall." + id;
      w.center = get_vec3(doc, prefix + ".center", {0, 0, 0});
      w.u = get_vec3(doc, prefix + ".u", {0, 0, 0});
      w.v = get_vec3(doc, prefix + ".v", {0, 0, 0});
      w.velocity = get_vec3(doc, prefix + ".velocity", {0, 0, 0});
      w.density = doc.get_double_or(prefix + ".density", 400);
      sc.walls.push_back(w);
    }
  }

  validate_scenario(sc);
  return sc;
}

SyntheticScenario SyntheticScenario::parse_file(
    const std::filesystem::path& path) {
  return parse(KeyValueDoc::parse_file(path));
}

namespace {

void sample_box_surface(Rng& rng, const Vec3& dims, double density,
                        PointSet& out) {
  double hx = dims.x / 2, hy = dims.y / 2, hz = dims.z / 2;
  // axis: fixed coordinate; sign: which of the two parallel faces.
  struct Face {
    int axis;
    double area;
  };
  Face faces[3] = {{0, dims.y * dims.z}, {1, dims.x * dims.z},
                   {2, dims.x * dims.y}};
  for (const Face& f : faces) {
    for (int sign = -1; sign <= 1; sign += 2) {
      auto count = std::max<long long>(1, std::llround(f.area * density));
      for (long long i = 0; i < count; ++i) {
        double a = rng.uniform(-1, 1), b = rng.uniform(-1, 1);
        Vec3 p;
        if (f.axis == 0)
          p = {sign * hx, a * hy, b * hz};
        else if (f.axis == 1)
          p = {a * hx, sign * hy, b * hz};
        else
          p = {a * hx, b * hy, sign * hz};
        out.push_back(p);
      }
    }
  }
}

void sample_cylinder_surface(Rng& rng, double radius, double height,
                             double density, PointSet& out) {
  constexpr double kTau = 6.283185307179586;
  auto side = std::max<long long>(
      1, std::llround(kTau * radius * height * density));
  for (long long i = 0; i < side; ++i) {
    double th = rng.uniform(0, kTau);
    out.push_back({radius * std::cos(th), radius * std::sin(th),
                   rng.uniform(-height / 2, height / 2)});
  }
  auto cap = std::max<long long>(
      1, std::llround(kTau / 2 * radius * radius * density));
  for (int sign = -1; sign <= 1; sign += 2) {
    for (long long i = 0; i < cap; ++i) {
      double r = radius * std::sqrt(rng.next_double());
      double th = rng.uniform(0, kTau);
      out.push_back({r * std::cos(th), r * std::sin(th), sign * height / 2});
    }
  }
}

double quantize(double v) { return static_cast<double>(static_cast<float>(v)); }

double gaussian(Rng& rng) {
  // Box-Muller; the log argument is kept away from zero.
  double u = (static_cast<double>(rng.next_u64() >> 11) + 1) * 0x1.0p-53;
  double v = rng.next_double();
  return std::sqrt(-2 * std::log(u)) * std::cos(6.283185307179586 * v);
}

}  // namespace


// ---------------------------------------------------------------------------
// Oracle. Everything below works in plain 3x3 + offset form and never calls
// RigidTransform composition, so the two paths can disagree.

namespace {

struct OPose {
  double r[9];  // row-major
  double t[3];
};

OPose opose(const YawPose& yp) {
  double c = std::cos(yp.yaw), s = std::sin(yp.yaw);
  return {{c, -s, 0, s, c, 0, 0, 0, 1}, {yp.pos.x, yp.pos.y, yp.pos.z}};
}

OPose opose_at(const PoseCurve& curve, double time) {
  return opose(eval_curve(curve, time));
}

OPose omul(const OPose& a, const OPose& b) {
  OPose out{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double s = 0;
      for (int k = 0; k < 3; ++k) s += a.r[i * 3 + k] * b.r[k * 3 + j];
      out.r[i * 3 + j] = s;
    }
    out.t[i] = a.r[i * 3] * b.t[0] + a.r[i * 3 + 1] * b.t[1] +
               a.r[i * 3 + 2] * b.t[2] + a.t[i];
  }
  return out;
}

OPose oinv(const OPose& a) {
  OPose out{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out.r[i * 3 + j] = a.r[j * 3 + i];
  for (int i = 0; i < 3; ++i)
    out.t[i] = -(out.r[i * 3] * a.t[0] + out.r[i * 3 + 1] * a.t[1] +
                 out.r[i * 3 + 2] * a.t[2]);
  return out;
}

Vec3 oapply(const OPose& a, const Vec3& p) {
  return {a.r[0] * p.x + a.r[1] * p.y + a.r[2] * p.z + a.t[0],
          a.r[3] * p.x + a.r[4] * p.y + a.r[5] * p.z + a.t[1],
          a.r[6] * p.x + a.r[7] * p.y + a.r[8] * p.z + a.t[2]};
}

Vec3 orotate(const OPose& a, const Vec3& p) {
  return {a.r[0] * p.x + a.r[1] * p.y + a.r[2] * p.z,
          a.r[3] * p.x + a.r[4] * p.y + a.r[5] * p.z,
          a.r[6] * p.x + a.r[7] * p.y + a.r[8] * p.z};
}

OPose camera_opose(const CameraSpec& cs) {
  // Same mount convention as CameraSpec::calibration, assembled here from
  // scratch: yaw rotation times the fixed axis mapping.
  OPose mount{{0, 0, 1, -1, 0, 0, 0, -1, 0}, {0, 0, 0}};
  OPose yaw = opose({cs.yaw, {cs.position.x, cs.position.y, cs.position.z}});
  return omul(yaw, mount);
}

// Blocking margins: a surface counts as blocking only when it sits at less
// than (1 - kRelMargin) of the way to the point, so the point's own surface
// (and float fuzz around it) never blocks. Scenarios keep real occluders
// and self-occlusion chords well clear of this band.
constexpr double kRayEps = 1e-9;
constexpr double kRelMargin = 0.005;

struct FrameSolids {
  // Per object: world->local pose, half dims, shape.
  struct Solid {
    OPose world_to_local;
    Vec3 half;
    ObjectSpec::Shape shape;
  };
  std::vector<Solid> solids;
  struct Rect {
    Vec3 center, u, v;
  };
  std::vector<Rect> rects;
};

FrameSolids frame_solids(const SyntheticScenario& sc, double time) {
  FrameSolids out;
  for (const auto& ob : sc.objects) {
    FrameSolids::Solid s;
    s.world_to_local = oinv(opose_at(ob.curve, time));
    s.half = {ob.dims.x / 2, ob.dims.y / 2, ob.dims.z / 2};
    s.shape = ob.shape;
    out.solids.push_back(s);
  }
  for (const auto& w : sc.walls)
    out.rects.push_back({w.center + w.velocity * time, w.u, w.v});
  return out;
}

constexpr double kNoHit = std::numeric_limits<double>::infinity();

// Entry parameter of the blocking interval, or no hit when the interval is
// empty after the margins.
double interval_entry(double lo, double hi) {
  double entry = std::max(lo, kRayEps);
  return entry <= std::min(hi, 1.0 - kRelMargin) ? entry : kNoHit;
}

// Segment C -> C+D against one solid, in the solid's local frame. Returns
// the entry parameter along the segment, or no hit.
double segment_hit_solid(const FrameSolids::Solid& s, const Vec3& c_world,
                         const Vec3& d_world) {
  Vec3 c = oapply(s.world_to_local, c_world);
  Vec3 d = orotate(s.world_to_local, d_world);
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  auto clip_slab = [&](double oc, double od, double h) {
    if (std::fabs(od) < 1e-300) {
      if (std::fabs(oc) > h) lo = 1, hi = 0;  // parallel and outside
      return;
    }
    double t1 = (-h - oc) / od, t2 = (h - oc) / od;
    if (t1 > t2) std::swap(t1, t2);
    lo = std::max(lo, t1);
    hi = std::min(hi, t2);
  };
  clip_slab(c.z, d.z, s.half.z);
  if (lo > hi) return kNoHit;
  if (s.shape == ObjectSpec::Shape::box) {
    clip_slab(c.x, d.x, s.half.x);
    clip_slab(c.y, d.y, s.half.y);
  } else {
    double r = s.half.x;
    double a = d.x * d.x + d.y * d.y;
    double b = 2 * (c.x * d.x + c.y * d.y);
    double q = c.x * c.x + c.y * c.y - r * r;
    if (a < 1e-300) {
      if (q > 0) return kNoHit;  // vertical ray outside the circle
    } else {
      double disc = b * b - 4 * a * q;
      if (disc < 0) return kNoHit;
      double sq = std::sqrt(disc);
      lo = std::max(lo, (-b - sq) / (2 * a));
      hi = std::min(hi, (-b + sq) / (2 * a));
    }
  }
  return interval_entry(lo, hi);
}

double segment_hit_rect(const FrameSolids::Rect& rect, const Vec3& c,
                        const Vec3& d) {
  Vec3 n = rect.u.cross(rect.v);
  double denom = n.dot(d);
  if (std::fabs(denom) < 1e-300) return kNoHit;  // grazing, by design unused
  double s = n.dot(rect.center - c) / denom;
  if (!(s >= kRayEps && s <= 1.0 - kRelMargin)) return kNoHit;
  Vec3 w = c + d * s - rect.center;
  double a = w.dot(rect.u) / rect.u.dot(rect.u);
  double b = w.dot(rect.v) / rect.v.dot(rect.v);
  return std::fabs(a) <= 1 && std::fabs(b) <= 1 ? s : kNoHit;
}

// Entry parameter of the nearest blocking surface in (0, 1 - margin], or
// no hit. The parameter times the segment length is the surface distance.
double ray_first_hit(const FrameSolids& fs, const Vec3& c,
                     const Vec3& target) {
  Vec3 d = target - c;
  double best = kNoHit;
  for (const auto& r : fs.rects)
    best = std::min(best, segment_hit_rect(r, c, d));
  for (const auto& s : fs.solids)
    best = std::min(best, segment_hit_solid(s, c, d));
  return best;
}

bool ray_blocked(const FrameSolids& fs, const Vec3& c, const Vec3& target) {
  Vec3 d = target - c;
  for (const auto& r : fs.rects)
    if (segment_hit_rect(r, c, d) != kNoHit) return true;
  for (const auto& s : fs.solids)
    if (segment_hit_solid(s, c, d) != kNoHit) return true;
  return false;
}

}  // namespace

SceneBundle generate_scene(const SyntheticScenario& sc) {
  validate_scenario(sc);
  SceneBundle scene;
  scene.frame_count = sc.frames;
  scene.frame_rate = sc.frame_rate;
  for (const auto& cs : sc.cameras) {
    CameraCalibration cal = cs.calibration();
    cal.validate();
    scene.cameras.push_back(cal);
  }

  std::vector<RigidTransform> object_poses(sc.objects.size());
  for (int tau = 1; tau <= sc.frames; ++tau) {
    double time = sc.time_of(tau);
    scene.ego_poses.push_back(
        RigidTransform::from_matrix(sc.ego.pose_at(time)));
  }
  for (size_t k = 0; k < sc.objects.size(); ++k) {
    const ObjectSpec& ob = sc.objects[k];
    BoxTrack track;
    track.object_id = ob.id;
    for (int tau = 1; tau <= sc.frames; ++tau) {
      double time = sc.time_of(tau);
      BoxEntry e;
      e.frame = tau;
      e.pose = RigidTransform::from_matrix(ob.curve.pose_at(time));
      e.dims = ob.dims;
      if (ob.annotate_velocity) e.velocity = ob.curve.velocity_at(time);
      track.entries.push_back(e);
    }
    scene.box_tracks.push_back(std::move(track));
  }

  Rng root(sc.seed);
  for (int tau = 1; tau <= sc.frames; ++tau) {
    double time = sc.time_of(tau);
    RigidTransform w_inv = scene.ego_poses[tau - 1].inverse();
    Rng frame_rng = root.fork(static_cast<uint64_t>(tau));
    LidarSweep sweep;
    sweep.t = tau;

    // A spinning sensor only returns the first surface along each beam, so
    // candidates hidden from the sensor center (the ego origin) are culled.
    // Culling runs on the crisp positions, before any jitter.
    FrameSolids solids = frame_solids(sc, time);
    Vec3 sensor = scene.ego_poses[tau - 1].apply(Vec3{0, 0, 0});

    for (size_t k = 0; k < sc.objects.size(); ++k) {
      const ObjectSpec& ob = sc.objects[k];
      object_poses[k] = scene.box_tracks[k].entries[tau - 1].pose;
      Rng rng = frame_rng.fork(k);
      PointSet local;
      if (ob.shape == ObjectSpec::Shape::box)
        sample_box_surface(rng, ob.dims, ob.density, local);
      else
        sample_cylinder_surface(rng, ob.dims.x / 2, ob.dims.z, ob.density,
                                local);
      for (size_t i = 0; i < local.size(); ++i) {
        Vec3 p = object_poses[k].apply(local.at(i));
        if (!ray_blocked(solids, sensor, p)) {
          sweep.points.push_back(w_inv.apply(p));
        }
      }
    }

    for (size_t k = 0; k < sc.walls.size(); ++k) {
      const WallSpec& w = sc.walls[k];
      Vec3 center = w.center + w.velocity * time;
      double area = 4 * w.u.cross(w.v).norm();
      auto count = std::max<long long>(1, std::llround(area * w.density));
      Rng rng = frame_rng.fork(1000000 + k);
      for (long long i = 0; i < count; ++i) {
        double a = rng.uniform(-1, 1), b = rng.uniform(-1, 1);
        Vec3 p = center + w.u * a + w.v * b;
        // Occluder samples falling inside an annotated box (inflated to
        // absorb float rounding) would ride along as phantom track points.
        // The visibility cull alone cannot be trusted with them: its
        // blocking margin forgives surfaces within 0.5% of the range, so
        // shallowly buried samples would slip through.
        bool inside = false;
        for (size_t m = 0; m < sc.objects.size() && !inside; ++m) {
          Vec3 q = object_poses[m].inverse().apply(p);
          const Vec3& d = sc.objects[m].dims;
          inside = std::fabs(q.x) <= d.x / 2 + kWallDropMargin &&
                   std::fabs(q.y) <= d.y / 2 + kWallDropMargin &&
                   std::fabs(q.z) <= d.z / 2 + kWallDropMargin;
        }
        if (!inside && !ray_blocked(solids, sensor, p)) {
          sweep.points.push_back(w_inv.apply(p));
        }
      }
    }

    if (sc.noise_sigma > 0) {
      Rng rng = frame_rng.fork(2000000);
      for (size_t i = 0; i < sweep.points.size(); ++i) {
        sweep.points.x[i] += sc.noise_sigma * gaussian(rng);
        sweep.points.y[i] += sc.noise_sigma * gaussian(rng);
        sweep.points.z[i] += sc.noise_sigma * gaussian(rng);
      }
    }
    for (size_t i = 0; i < sweep.points.size(); ++i) {
      sweep.points.x[i] = quantize(sweep.points.x[i]);
      sweep.points.y[i] = quantize(sweep.points.y[i]);
      sweep.points.z[i] = quantize(sweep.points.z[i]);
    }
    scene.sweeps.push_back(std::move(sweep));
  }

  scene.validate();
  return scene;
}

OracleTracks analytic_tracks(const SyntheticScenario& sc,
                             const std::string& object_id,
                             const PointSet& source_points_ego,
                             int source_frame) {
  if (source_frame < 1 || source_frame > sc.frames)
    fail(ErrorKind::config, "source frame " + std::to_string(source_frame) +
                                " outside 1.." + std::to_string(sc.frames));
  const ObjectSpec& ob = sc.object(object_id);
  double t_time = sc.time_of(source_frame);
  OPose to_box = omul(oinv(opose_at(ob.curve, t_time)),
                      opose_at(sc.ego, t_time));

  OracleTracks out;
  out.frame_count = sc.frames;
  size_t n = source_points_ego.size();
  out.x.resize(n * sc.frames);
  out.y.resize(n * sc.frames);
  out.z.resize(n * sc.frames);
  for (int tau = 1; tau <= sc.frames; ++tau) {
    double time = sc.time_of(tau);
    OPose m = omul(oinv(opose_at(sc.ego, time)),
                   omul(opose_at(ob.curve, time), to_box));
    for (size_t i = 0; i < n; ++i) {
      Vec3 p = oapply(m, source_points_ego.at(i));
      size_t idx = out.index(i, tau);
      out.x[idx] = p.x;
      out.y[idx] = p.y;
      out.z[idx] = p.z;
    }
  }
  return out;
}

OracleOcclusion analytic_occlusion(const SyntheticScenario& sc,
                                   const std::string& object_id,
                                   const PointSet& source_points_ego,
                                   int source_frame, CameraId camera) {
  const CameraSpec* cs = nullptr;
  for (const auto& c : sc.cameras)
    if (c.id == camera) cs = &c;
  if (!cs)
    fail(ErrorKind::config,
         "scenario has no camera named '" + to_string(camera) + "'");
  const ObjectSpec& ob = sc.object(object_id);

  double t_time = sc.time_of(source_frame);
  OPose to_box = omul(oinv(opose_at(ob.curve, t_time)),
                      opose_at(sc.ego, t_time));
  OPose cam_mount = camera_opose(*cs);

  OracleOcclusion out;
  out.frame_count = sc.frames;
  size_t n = source_points_ego.size();
  double nan = std::numeric_limits<double>::quiet_NaN();
  out.px.assign(n * sc.frames, nan);
  out.py.assign(n * sc.frames, nan);
  out.occluded.assign(n * sc.frames, 0);
  out.fov.assign(n * sc.frames, 0);
  out.stable.assign(n * sc.frames, 1);

  for (int tau = 1; tau <= sc.frames; ++tau) {
    double time = sc.time_of(tau);
    OPose w_tau = opose_at(sc.ego, time);
    OPose to_world = omul(opose_at(ob.curve, time), to_box);
    OPose cam_to_world = omul(w_tau, cam_mount);
    OPose world_to_cam = oinv(cam_to_world);
    Vec3 center{cam_to_world.t[0], cam_to_world.t[1], cam_to_world.t[2]};
    FrameSolids fs = frame_solids(sc, time);

    for (size_t i = 0; i < n; ++i) {
      size_t idx = out.index(i, tau);
      Vec3 pw = oapply(to_world, source_points_ego.at(i));
      Vec3 c = oapply(world_to_cam, pw);
      if (!(c.z > 0)) {
        out.occluded[idx] = 1;  // fov stays 0, verdict stable
        continue;
      }
      double px = (cs->fx * c.x + cs->cx * c.z) / c.z;
      double py = (cs->fy * c.y + cs->cy * c.z) / c.z;
      bool fov = px >= 0 && px < cs->width && py >= 0 && py < cs->height;
      double range = c.norm();
      out.px[idx] = px;
      out.py[idx] = py;
      out.fov[idx] = fov ? 1 : 0;
      bool center_blocked = ray_blocked(fs, center, pw);
      out.occluded[idx] = (!fov || center_blocked) ? 1 : 0;

      // A depth-test pipeline compares the point's range against completed
      // depth read at the four corner pixels around its projection; each
      // corner's value belongs to a sample that can sit another pixel away
      // inside its cell, so the test consults surfaces up to two pixels
      // from the true ray. The verdict is stable only when an exact
      // depth test at the default tolerance returns the physical verdict
      // for every ray within that reach: a flip marks a depth edge, a
      // silhouette, or an image boundary, where discretized pipelines may
      // legitimately differ. A hit beyond 1/(1+tolerance) of the range is
      // inside the tolerance band and does not count as cover.
      auto depth_verdict = [&](double qx, double qy) {
        if (!(qx >= 0 && qx < cs->width && qy >= 0 && qy < cs->height)) {
          return true;  // out of image, occluded by definition
        }
        Vec3 dir{(qx - cs->cx) / cs->fx, (qy - cs->cy) / cs->fy, 1};
        Vec3 world_dir = orotate(cam_to_world, dir);
        Vec3 target = center + world_dir * (range / dir.norm());
        double hit = ray_first_hit(fs, center, target);
        return hit * (1 + kDefaultOcclusionTolerance) < 1.0;
      };
      bool want = out.occluded[idx] != 0;
      bool stable = true;
      for (int dy = -2; dy <= 2 && stable; ++dy) {
        for (int dx = -2; dx <= 2 && stable; ++dx) {
          if (depth_verdict(px + dx, py + dy) != want) stable = false;
        }
      }
      out.stable[idx] = stable ? 1 : 0;
    }
  }
  return out;
}

}  // namespace rigidtrack
