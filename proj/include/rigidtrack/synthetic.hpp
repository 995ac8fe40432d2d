#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rigidtrack/geometry.hpp"
#include "rigidtrack/kvdoc.hpp"
#include "rigidtrack/scene.hpp"

namespace rigidtrack {

// Closed-form world pose curve: position plus yaw about world z, evaluated
// directly from the parameters at any time (seconds).
struct PoseCurve {
  enum class Kind { fixed, line, spin };

  Kind kind = Kind::fixed;
  Vec3 start_pos;
  double start_yaw = 0;
  Vec3 velocity;           // line: m/s
  double yaw_rate = 0;     // line: rad/s
  Vec3 spin_center;        // spin: revolve about the vertical through here
  double spin_rate = 0;    // spin: rad/s

  std::array<double, 16> pose_at(double time) const;
  Vec3 velocity_at(double time) const;  // of the curve's own origin
};

struct ObjectSpec {
  enum class Shape { box, cylinder };

  std::string id;
  Shape shape = Shape::box;
  Vec3 dims;       // box: length/width/height; cylinder: diameter twice + height
  double density = 100;  // surface samples per square meter
  PoseCurve curve;
  bool annotate_velocity = true;
};

// Rectangular occluder: corners at center +/- u +/- v, translating rigidly.
struct WallSpec {
  std::string id;
  Vec3 center;
  Vec3 u, v;       // in-plane half-axis vectors, world frame
  Vec3 velocity;
  double density = 400;
};

struct CameraSpec {
  CameraId id = CameraId::front;
  double fx = 200, fy = 200, cx = 160, cy = 120;
  int width = 320, height = 240;
  Vec3 position;   // in the ego frame
  double yaw = 0;  // mount rotation about ego z, radians

  CameraCalibration calibration() const;
};

struct SyntheticScenario {
  uint64_t seed = 1;
  int frames = 48;
  double frame_rate = 10;
  double noise_sigma = 0;  // optional Gaussian jitter on sweep points
  PoseCurve ego;
  std::vector<ObjectSpec> objects;
  std::vector<WallSpec> walls;
  std::vector<CameraSpec> cameras;

  double time_of(int frame) const {
    return static_cast<double>(frame - 1) / frame_rate;
  }
  const ObjectSpec& object(const std::string& id) const;

  static SyntheticScenario parse(const KeyValueDoc& doc);
  static SyntheticScenario parse_file(const std::filesystem::path& path);
};

// Samples object and wall surfaces per frame (independent resampling each
// frame), keeps only samples with a clear line of sight from the sensor at
// the ego origin (a sweep is made of first returns, so hidden surfaces
// leave no points), assembles sweeps in the ego frame, and emits a
// conforming scene bundle with full box tracks. Deterministic in the seed;
// sweep coordinates are quantized to 32-bit floats so the in-memory bundle
// equals its on-disk round trip.
SceneBundle generate_scene(const SyntheticScenario& scenario);

// Ground truth computed from the closed-form curves with the oracle's own
// 3x3 matrix arithmetic (deliberately not RigidTransform composition), so
// agreement with the engine is evidence rather than tautology.
struct OracleTracks {
  int frame_count = 0;
  std::vector<double> x, y, z;  // N*F, ego frame per target frame
  size_t index(size_t i, int tau) const {
    return i * static_cast<size_t>(frame_count) + static_cast<size_t>(tau - 1);
  }
};

OracleTracks analytic_tracks(const SyntheticScenario& scenario,
                             const std::string& object_id,
                             const PointSet& source_points_ego,
                             int source_frame);

// Exact ray-cast visibility against every wall and solid, plus FOV. stable
// marks points whose verdict is reproduced by an exact-geometry depth test
// at the default occlusion tolerance for every viewing ray within two
// pixels of the true one, the reach of a corner-sampled depth lookup;
// unstable points sit on a depth edge, silhouette, or image boundary where
// discretized pipelines may legitimately differ.
struct OracleOcclusion {
  int frame_count = 0;
  std::vector<double> px, py;     // N*F; NaN when behind the camera
  std::vector<uint8_t> occluded;  // N*F, FOV folded in
  std::vector<uint8_t> fov;       // N*F
  std::vector<uint8_t> stable;    // N*F
  size_t index(size_t i, int tau) const {
    return i * static_cast<size_t>(frame_count) + static_cast<size_t>(tau - 1);
  }
};

OracleOcclusion analytic_occlusion(const SyntheticScenario& scenario,
                                   const std::string& object_id,
                                   const PointSet& source_points_ego,
                                   int source_frame, CameraId camera);

}  // namespace rigidtrack
