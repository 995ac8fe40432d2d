#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rigidtrack/geometry.hpp"

namespace rigidtrack {

// Structure-of-arrays point set, the layout the batch kernels consume.
struct PointSet {
  std::vector<double> x, y, z;

  size_t size() const { return x.size(); }
  bool empty() const { return x.empty(); }
  void reserve(size_t n);
  void push_back(const Vec3& p);
  Vec3 at(size_t i) const { return {x[i], y[i], z[i]}; }
};

// One LiDAR capture in the ego frame at frame t (1-based).
struct LidarSweep {
  int t = 0;
  PointSet points;
};

struct BoxEntry {
  int frame = 0;                  // 1-based
  RigidTransform pose;            // box local frame -> world
  Vec3 dims;                      // length, width, height (meters)
  std::optional<Vec3> velocity;   // world frame, m/s
};

struct BoxTrack {
  std::string object_id;
  std::vector<BoxEntry> entries;  // frame indices strictly increasing

  const BoxEntry* find(int frame) const;
  bool has_velocities() const;    // true when every entry carries one
};

// A fully joined scene: every per-frame collection has exactly frame_count
// entries indexed by frame-1. Immutable after load; safe to share across
// worker threads.
struct SceneBundle {
  int frame_count = 0;
  double frame_rate = 10.0;
  std::vector<CameraCalibration> cameras;
  std::vector<RigidTransform> ego_poses;  // W_t, ego -> world
  std::vector<LidarSweep> sweeps;
  std::vector<BoxTrack> box_tracks;
  std::string image_pattern;  // may be empty; synthetic scenes have no RGB
  std::filesystem::path origin;

  const CameraCalibration* camera(CameraId id) const;
  const BoxTrack* box(const std::string& object_id) const;
  double timestamp(int frame) const {
    return static_cast<double>(frame - 1) / frame_rate;
  }
  // Checks the cross-modality alignment and type invariants.
  void validate() const;
};

// Expands a file pattern containing the literal token %05d with the 0-based
// frame offset (frame 1 -> 00000).
std::string expand_frame_pattern(const std::string& pattern, int frame);

SceneBundle load_scene_bundle(const std::filesystem::path& dir);
void write_scene_bundle(const std::filesystem::path& dir,
                        const SceneBundle& scene);

// Returns the sweep points (ego frame, original coordinates and order) whose
// world position falls inside the closed box [-dims/2, +dims/2] expressed in
// the box frame.
PointSet points_in_box(const LidarSweep& sweep,
                       const RigidTransform& box_pose, const Vec3& dims,
                       const RigidTransform& ego_pose);

}  // namespace rigidtrack
