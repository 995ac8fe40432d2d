#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>

namespace rigidtrack {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

// 4x4 homogeneous rigid transform, row-major storage. Rotation block is
// orthonormal with determinant +1, last row is exactly (0,0,0,1).
class RigidTransform {
 public:
  RigidTransform() : m_{1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1} {}

  static RigidTransform identity() { return RigidTransform(); }

  // Validates and wraps a row-major 4x4 matrix; throws Error(validation)
  // when the matrix is not rigid within `tol`.
  static RigidTransform from_matrix(const std::array<double, 16>& m,
                                    double tol = 1e-9);

  // Row-major 3x3 rotation plus translation; validated like from_matrix.
  static RigidTransform from_rotation_translation(
      const std::array<double, 9>& r, const Vec3& t, double tol = 1e-9);

  static RigidTransform translation(const Vec3& t);
  static RigidTransform rotation_z(double radians);
  static RigidTransform rotation_axis_angle(const Vec3& unit_axis,
                                            double radians);

  RigidTransform inverse() const;
  RigidTransform operator*(const RigidTransform& rhs) const;
  Vec3 apply(const Vec3& p) const;

  double at(int row, int col) const { return m_[row * 4 + col]; }
  const std::array<double, 16>& matrix() const { return m_; }
  Vec3 translation_part() const { return {m_[3], m_[7], m_[11]}; }

  // Upper 3x4 block in row-major order, the layout the batch kernels take.
  std::array<double, 12> rows3x4() const;

  static bool is_rigid(const std::array<double, 16>& m, double tol = 1e-9);

 private:
  explicit RigidTransform(const std::array<double, 16>& m) : m_(m) {}

  std::array<double, 16> m_;
};

enum class CameraId { front, front_left, front_right, side_left, side_right };

std::string to_string(CameraId id);
std::optional<CameraId> camera_id_from_string(std::string_view name);
bool is_front_facing(CameraId id);

struct CameraCalibration {
  CameraId camera_id = CameraId::front;
  // Row-major 3x3 intrinsic matrix; upper-triangular, positive focals.
  std::array<double, 9> intrinsics{};
  // Maps camera frame (+z forward, +x right, +y down) to the ego frame.
  RigidTransform extrinsic;
  int width = 0;
  int height = 0;

  // Throws Error(validation) when an invariant is broken.
  void validate() const;
};

}  // namespace rigidtrack
