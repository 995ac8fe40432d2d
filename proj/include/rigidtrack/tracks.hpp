#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rigidtrack/geometry.hpp"
#include "rigidtrack/scene.hpp"

namespace rigidtrack {

// N point tracks over F frames in the ego frame of each target frame.
// Flattened row-major: value for track i at frame tau sits at i*F + (tau-1).
struct TrackSet3D {
  std::string object_id;
  int frame_count = 0;
  std::vector<int> source_frames;  // per track, 1-based
  std::vector<double> x, y, z;     // each N*F

  size_t track_count() const { return source_frames.size(); }
  size_t index(size_t i, int tau) const {
    return i * static_cast<size_t>(frame_count) + static_cast<size_t>(tau - 1);
  }
};

// Image-space view of a TrackSet3D through one camera. Pixels are recorded
// even out of frame or behind the camera; in_fov gates their use.
struct TrackSet2D {
  std::string object_id;
  CameraId camera_id = CameraId::front;
  int frame_count = 0;
  std::vector<double> px, py;   // N*F
  std::vector<double> range;    // N*F, Euclidean camera distance
  std::vector<uint8_t> in_fov;  // N*F

  size_t track_count() const {
    return frame_count ? px.size() / static_cast<size_t>(frame_count) : 0;
  }
  size_t index(size_t i, int tau) const {
    return i * static_cast<size_t>(frame_count) + static_cast<size_t>(tau - 1);
  }
};

// Moves ego-frame points captured at frame t into the ego frame at frame
// tau, assuming they ride rigidly on the object: out = W_tau^{-1} B_tau
// B_t^{-1} W_t p. Throws Error(propagation) naming the frame whose box pose
// is missing.
PointSet propagate(const PointSet& points_at_t, int t, int tau,
                   const std::vector<RigidTransform>& ego_poses,
                   const BoxTrack& box_track);

// Stacks per-source-frame propagations into one track set. Source frames
// run 1, 1+stride, 1+2*stride, ...; frames without object points contribute
// nothing. Rows are ordered by ascending source frame, preserving point
// order within a frame; the entry at the source frame is the input point
// copied verbatim. Throws Error(empty_object) when no source frame has
// points.
TrackSet3D build_tracks(const std::string& object_id,
                        const std::vector<PointSet>& object_points_per_frame,
                        const std::vector<RigidTransform>& ego_poses,
                        const BoxTrack& box_track, int stride = 1,
                        int workers = 1);

// Projects every (track, frame) entry through the camera: c = R^{-1} x,
// pixel = ((Kc)_x/(Kc)_z, (Kc)_y/(Kc)_z), range = |c|, in_fov = c_z > 0 and
// pixel inside [0,width) x [0,height).
TrackSet2D project_to_image(const TrackSet3D& tracks,
                            const CameraCalibration& calib);

// Inverse of the projection for in-FOV entries: pixel + range back to the
// ego frame.
Vec3 unproject(double px, double py, double range,
               const CameraCalibration& calib);

}  // namespace rigidtrack
