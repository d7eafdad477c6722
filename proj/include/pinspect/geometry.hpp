#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>

#include "pinspect/errors.hpp"

namespace pinspect {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

constexpr double kPi = 3.14159265358979323846;

inline double deg(double radians) { return radians * 180.0 / kPi; }
inline double rad(double degrees) { return degrees * kPi / 180.0; }

// Normalizes an angle to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a <= 0.0) a += 2.0 * kPi;
  return a - kPi;
}

// Proper rigid transform: x_out = rotation * x_in + translation.
// Rotation stays orthonormal with det +1; meters throughout.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }

  static RigidTransform from_parts(const Mat3& r, const Vec3& t) {
    return RigidTransform{r, t};
  }

  static RigidTransform translate(const Vec3& t) {
    return RigidTransform{Mat3::Identity(), t};
  }

  static RigidTransform rot_x(double a) {
    return from_parts(Eigen::AngleAxisd(a, Vec3::UnitX()).toRotationMatrix(), Vec3::Zero());
  }
  static RigidTransform rot_y(double a) {
    return from_parts(Eigen::AngleAxisd(a, Vec3::UnitY()).toRotationMatrix(), Vec3::Zero());
  }
  static RigidTransform rot_z(double a) {
    return from_parts(Eigen::AngleAxisd(a, Vec3::UnitZ()).toRotationMatrix(), Vec3::Zero());
  }
  static RigidTransform axis_angle(const Vec3& axis, double a) {
    return from_parts(Eigen::AngleAxisd(a, axis.normalized()).toRotationMatrix(), Vec3::Zero());
  }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Vec3 apply_dir(const Vec3& d) const { return rotation * d; }

  Mat4 matrix() const {
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() = rotation;
    m.topRightCorner<3, 1>() = translation;
    return m;
  }

  static RigidTransform from_matrix(const Mat4& m);

  // Max |R^T R - I| entry; 0 for a perfectly orthonormal rotation.
  double orthonormality_error() const {
    return (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  }

  bool is_valid(double tol = 1e-9) const {
    return orthonormality_error() <= tol && std::abs(rotation.determinant() - 1.0) <= tol;
  }

  // Nearest rotation via SVD, for drift control in long composition chains.
  RigidTransform orthonormalized() const;
};

RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform invert(const RigidTransform& t);

inline RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) {
  return compose(a, b);
}

// Rotation angle (radians) between the rotations of a and b.
double rotation_angle_between(const RigidTransform& a, const RigidTransform& b);

// Pinhole camera, square pixels, no distortion. Pixel (0,0) has its center
// at continuous coordinate (0.5, 0.5).
struct PinholeCamera {
  double focal_length = 1733.0;  // pixels
  Vec2 principal_point = Vec2(512.0, 512.0);
  int width = 1024;
  int height = 1024;

  void validate() const;
};

// Perspective projection of a camera-frame point; throws NonPositiveDepth
// when point.z() <= 0.
Vec2 project(const Vec3& point, const PinholeCamera& cam);

// Inverse of project at a fixed depth z.
Vec3 unproject(const Vec2& px, double z, const PinholeCamera& cam);

// In-plane pose used by the template matcher: pixel position of the anchor
// plus rotation about the grasp-plane normal. theta normalized to (-pi, pi].
struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Pose2D() = default;
  Pose2D(double px, double py, double t) : x(px), y(py), theta(wrap_angle(t)) {}
};

// Transform files hold the 4x4 row-major homogeneous matrix; meters/radians.
void save_transform(const RigidTransform& t, const std::filesystem::path& path);
RigidTransform load_transform(const std::filesystem::path& path);

}  // namespace pinspect
