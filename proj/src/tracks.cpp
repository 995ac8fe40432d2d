#include "rigidtrack/tracks.hpp"

#include <cmath>

#include "rigidtrack/error.hpp"
#include "rigidtrack/kernels.hpp"
#include "rigidtrack/parallel.hpp"

namespace rigidtrack {

namespace {

const BoxEntry& box_at(const BoxTrack& track, int frame) {
  const BoxEntry* e = track.find(frame);
  if (!e) {
    fail(ErrorKind::propagation, "object " + track.object_id +
                                     ": no box pose at frame " +
                                     std::to_string(frame));
  }
  return *e;
}

const RigidTransform& ego_at(const std::vector<RigidTransform>& ego_poses,
                             int frame) {
  if (frame < 1 || frame > static_cast<int>(ego_poses.size())) {
    fail(ErrorKind::propagation,
         "frame " + std::to_string(frame) + " outside [1, " +
             std::to_string(ego_poses.size()) + "]");
  }
  return ego_poses[static_cast<size_t>(frame - 1)];
}

}  // namespace

PointSet propagate(const PointSet& points_at_t, int t, int tau,
                   const std::vector<RigidTransform>& ego_poses,
                   const BoxTrack& box_track) {
  const RigidTransform& w_t = ego_at(ego_poses, t);
  const RigidTransform& w_tau = ego_at(ego_poses, tau);
  const RigidTransform& b_t = box_at(box_track, t).pose;
  const RigidTransform& b_tau = box_at(box_track, tau).pose;

  RigidTransform m = w_tau.inverse() * b_tau * b_t.inverse() * w_t;
  auto rows = m.rows3x4();
  PointSet out;
  size_t n = points_at_t.size();
  out.x.resize(n);
  out.y.resize(n);
  out.z.resize(n);
  kernels::active().rigid_apply(rows.data(), points_at_t.x.data(),
                                points_at_t.y.data(), points_at_t.z.data(), n,
                                out.x.data(), out.y.data(), out.z.data());
  return out;
}

TrackSet3D build_tracks(const std::string& object_id,
                        const std::vector<PointSet>& object_points_per_frame,
                        const std::vector<RigidTransform>& ego_poses,
                        const BoxTrack& box_track, int stride, int workers) {
  int frame_count = static_cast<int>(object_points_per_frame.size());
  if (frame_count == 0 ||
      ego_poses.size() != static_cast<size_t>(frame_count)) {
    fail(ErrorKind::alignment,
         "object " + object_id +
             ": per-frame points and ego poses must both cover all frames");
  }
  if (stride < 1) {
    fail(ErrorKind::config, "stride must be >= 1");
  }

  std::vector<int> sources;
  std::vector<size_t> row_offsets;
  size_t total = 0;
  for (int t = 1; t <= frame_count; t += stride) {
    size_t n = object_points_per_frame[static_cast<size_t>(t - 1)].size();
    if (n == 0) continue;
    sources.push_back(t);
    row_offsets.push_back(total);
    total += n;
  }
  if (total == 0) {
    fail(ErrorKind::empty_object,
         "object " + object_id + ": no points in any source frame");
  }

  TrackSet3D out;
  out.object_id = object_id;
  out.frame_count = frame_count;
  out.source_frames.resize(total);
  size_t cells = total * static_cast<size_t>(frame_count);
  out.x.resize(cells);
  out.y.resize(cells);
  out.z.resize(cells);

  // Each job fills a disjoint row block, so output is identical for any
  // worker count.
  parallel_for(sources.size(), workers, [&](size_t si) {
    int t = sources[si];
    const PointSet& pts = object_points_per_frame[static_cast<size_t>(t - 1)];
    size_t n = pts.size();
    size_t row0 = row_offsets[si];
    for (size_t i = 0; i < n; ++i) out.source_frames[row0 + i] = t;

    const RigidTransform& w_t = ego_at(ego_poses, t);
    RigidTransform b_t_inv_w_t = box_at(box_track, t).pose.inverse() * w_t;

    std::vector<double> tx(n), ty(n), tz(n);
    for (int tau = 1; tau <= frame_count; ++tau) {
      const double* sx;
      const double* sy;
      const double* sz;
      if (tau == t) {
        // Identity composition: carry the source points over exactly.
        sx = pts.x.data();
        sy = pts.y.data();
        sz = pts.z.data();
      } else {
        RigidTransform m = ego_at(ego_poses, tau).inverse() *
                           box_at(box_track, tau).pose * b_t_inv_w_t;
        auto rows = m.rows3x4();
        kernels::active().rigid_apply(rows.data(), pts.x.data(),
                                      pts.y.data(), pts.z.data(), n,
                                      tx.data(), ty.data(), tz.data());
        sx = tx.data();
        sy = ty.data();
        sz = tz.data();
      }
      for (size_t i = 0; i < n; ++i) {
        size_t idx = out.index(row0 + i, tau);
        out.x[idx] = sx[i];
        out.y[idx] = sy[i];
        out.z[idx] = sz[i];
      }
    }
  });
  return out;
}

TrackSet2D project_to_image(const TrackSet3D& tracks,
                            const CameraCalibration& calib) {
  calib.validate();
  TrackSet2D out;
  out.object_id = tracks.object_id;
  out.camera_id = calib.camera_id;
  out.frame_count = tracks.frame_count;

  size_t cells = tracks.x.size();
  out.px.resize(cells);
  out.py.resize(cells);
  out.range.resize(cells);
  out.in_fov.resize(cells);

  // Ego -> camera for every cell in one batch; frame layout is irrelevant
  // to the per-point math.
  auto rows = calib.extrinsic.inverse().rows3x4();
  std::vector<double> cx(cells), cy(cells), cz(cells);
  kernels::active().rigid_apply(rows.data(), tracks.x.data(),
                                tracks.y.data(), tracks.z.data(), cells,
                                cx.data(), cy.data(), cz.data());

  kernels::PinholeParams cam;
  cam.fx = calib.intrinsics[0];
  cam.skew = calib.intrinsics[1];
  cam.cx = calib.intrinsics[2];
  cam.fy = calib.intrinsics[4];
  cam.cy = calib.intrinsics[5];
  cam.width = static_cast<double>(calib.width);
  cam.height = static_cast<double>(calib.height);
  kernels::active().pinhole_project(cam, cx.data(), cy.data(), cz.data(),
                                    cells, out.px.data(), out.py.data(),
                                    out.range.data(), out.in_fov.data());
  return out;
}

Vec3 unproject(double px, double py, double range,
               const CameraCalibration& calib) {
  const auto& k = calib.intrinsics;
  // Invert the upper-triangular K, then scale the ray to the given range.
  double dz = 1.0;
  double dy = (py - k[5]) / k[4];
  double dx = (px - k[2] - k[1] * dy) / k[0];
  double norm = std::sqrt(dx * dx + dy * dy + dz * dz);
  double s = range / norm;
  return calib.extrinsic.apply({dx * s, dy * s, dz * s});
}

}  // namespace rigidtrack
