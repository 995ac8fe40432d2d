#include "rigidtrack/geometry.hpp"

#include <cmath>

#include "rigidtrack/error.hpp"

namespace rigidtrack {

bool RigidTransform::is_rigid(const std::array<double, 16>& m, double tol) {
  for (double v : m) {
    if (!std::isfinite(v)) return false;
  }
  if (m[12] != 0.0 || m[13] != 0.0 || m[14] != 0.0 || m[15] != 1.0) {
    return false;
  }
  // R^T R == I
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double dot = 0;
      for (int k = 0; k < 3; ++k) dot += m[k * 4 + i] * m[k * 4 + j];
      double expect = (i == j) ? 1.0 : 0.0;
      if (std::abs(dot - expect) > tol) return false;
    }
  }
  double det = m[0] * (m[5] * m[10] - m[6] * m[9]) -
               m[1] * (m[4] * m[10] - m[6] * m[8]) +
               m[2] * (m[4] * m[9] - m[5] * m[8]);
  return std::abs(det - 1.0) <= 1e2 * tol;
}

RigidTransform RigidTransform::from_matrix(const std::array<double, 16>& m,
                                           double tol) {
  if (!is_rigid(m, tol)) {
    fail(ErrorKind::validation, "matrix is not a rigid transform");
  }
  return RigidTransform(m);
}

RigidTransform RigidTransform::from_rotation_translation(
    const std::array<double, 9>& r, const Vec3& t, double tol) {
  std::array<double, 16> m{r[0], r[1], r[2], t.x,  //
                           r[3], r[4], r[5], t.y,  //
                           r[6], r[7], r[8], t.z,  //
                           0,    0,    0,    1};
  return from_matrix(m, tol);
}

RigidTransform RigidTransform::translation(const Vec3& t) {
  std::array<double, 16> m{1, 0, 0, t.x,  //
                           0, 1, 0, t.y,  //
                           0, 0, 1, t.z,  //
                           0, 0, 0, 1};
  return RigidTransform(m);
}

RigidTransform RigidTransform::rotation_z(double radians) {
  double c = std::cos(radians);
  double s = std::sin(radians);
  std::array<double, 16> m{c, -s, 0, 0,  //
                           s, c,  0, 0,  //
                           0, 0,  1, 0,  //
                           0, 0,  0, 1};
  return RigidTransform(m);
}

RigidTransform RigidTransform::rotation_axis_angle(const Vec3& unit_axis,
                                                   double radians) {
  double c = std::cos(radians);
  double s = std::sin(radians);
  double t = 1.0 - c;
  double ux = unit_axis.x, uy = unit_axis.y, uz = unit_axis.z;
  std::array<double, 16> m{
      t * ux * ux + c,      t * ux * uy - s * uz, t * ux * uz + s * uy, 0,  //
      t * ux * uy + s * uz, t * uy * uy + c,      t * uy * uz - s * ux, 0,  //
      t * ux * uz - s * uy, t * uy * uz + s * ux, t * uz * uz + c,      0,  //
      0,                    0,                    0,                    1};
  return RigidTransform(m);
}

RigidTransform RigidTransform::inverse() const {
  // [R t; 0 1]^-1 = [R^T  -R^T t; 0 1]
  std::array<double, 16> inv{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) inv[i * 4 + j] = m_[j * 4 + i];
  }
  for (int i = 0; i < 3; ++i) {
    inv[i * 4 + 3] = -(inv[i * 4 + 0] * m_[3] + inv[i * 4 + 1] * m_[7] +
                       inv[i * 4 + 2] * m_[11]);
  }
  inv[15] = 1.0;
  return RigidTransform(inv);
}

RigidTransform RigidTransform::operator*(const RigidTransform& rhs) const {
  std::array<double, 16> out{};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      double acc = 0;
      for (int k = 0; k < 4; ++k) acc += m_[i * 4 + k] * rhs.m_[k * 4 + j];
      out[i * 4 + j] = acc;
    }
  }
  out[12] = out[13] = out[14] = 0.0;
  out[15] = 1.0;
  return RigidTransform(out);
}

Vec3 RigidTransform::apply(const Vec3& p) const {
  return {m_[0] * p.x + m_[1] * p.y + m_[2] * p.z + m_[3],
          m_[4] * p.x + m_[5] * p.y + m_[6] * p.z + m_[7],
          m_[8] * p.x + m_[9] * p.y + m_[10] * p.z + m_[11]};
}

std::array<double, 12> RigidTransform::rows3x4() const {
  return {m_[0], m_[1], m_[2],  m_[3], m_[4], m_[5],
          m_[6], m_[7], m_[8],  m_[9], m_[10], m_[11]};
}

std::string to_string(CameraId id) {
  switch (id) {
    case CameraId::front: return "front";
    case CameraId::front_left: return "front_left";
    case CameraId::front_right: return "front_right";
    case CameraId::side_left: return "side_left";
    case CameraId::side_right: return "side_right";
  }
  return "front";
}

std::optional<CameraId> camera_id_from_string(std::string_view name) {
  if (name == "front") return CameraId::front;
  if (name == "front_left") return CameraId::front_left;
  if (name == "front_right") return CameraId::front_right;
  if (name == "side_left") return CameraId::side_left;
  if (name == "side_right") return CameraId::side_right;
  return std::nullopt;
}

bool is_front_facing(CameraId id) {
  return id == CameraId::front || id == CameraId::front_left ||
         id == CameraId::front_right;
}

void CameraCalibration::validate() const {
  const auto& k = intrinsics;
  if (k[3] != 0.0 || k[6] != 0.0 || k[7] != 0.0) {
    fail(ErrorKind::validation,
         "camera " + to_string(camera_id) + ": intrinsics not upper-triangular");
  }
  if (!(k[0] > 0.0) || !(k[4] > 0.0)) {
    fail(ErrorKind::validation,
         "camera " + to_string(camera_id) + ": focal lengths must be positive");
  }
  if (k[8] != 1.0) {
    // Projection divides by the camera z coordinate directly, which assumes
    // the homogeneous scale row is (0,0,1).
    fail(ErrorKind::validation,
         "camera " + to_string(camera_id) + ": intrinsic scale must be 1");
  }
  if (width <= 0 || height <= 0) {
    fail(ErrorKind::validation,
         "camera " + to_string(camera_id) + ": image size must be positive");
  }
}

}  // namespace rigidtrack
