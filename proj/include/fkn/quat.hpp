#pragma once

#include <random>

#include <Eigen/Core>

namespace fkn {

using Vector3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;
using Matrix4x3 = Eigen::Matrix<double, 4, 3>;
using Rng = std::mt19937_64;

/// Scalar-first Hamilton quaternion.
struct Quaternion {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  static Quaternion identity() { return {}; }
  static Quaternion pure(const Vector3& v) { return {0.0, v.x(), v.y(), v.z()}; }

  Vector3 vec() const { return {x, y, z}; }
  double squared_norm() const { return w * w + x * x + y * y + z * z; }
  double norm() const;
  double dot(const Quaternion& o) const { return w * o.w + x * o.x + y * o.y + z * o.z; }
  bool is_unit(double tol = 1e-9) const;

  Quaternion operator-() const { return {-w, -x, -y, -z}; }
  friend Quaternion operator+(const Quaternion& a, const Quaternion& b) {
    return {a.w + b.w, a.x + b.x, a.y + b.y, a.z + b.z};
  }
  friend Quaternion operator*(double s, const Quaternion& q) {
    return {s * q.w, s * q.x, s * q.y, s * q.z};
  }
  friend bool operator==(const Quaternion&, const Quaternion&) = default;
};

/// Axis-angle exponential coordinates; the angle is the Euclidean norm.
struct RotationVector {
  double vx = 0.0;
  double vy = 0.0;
  double vz = 0.0;

  static RotationVector from(const Vector3& v) { return {v.x(), v.y(), v.z()}; }
  Vector3 vec() const { return {vx, vy, vz}; }
  double angle() const { return vec().norm(); }
};

struct DualQuaternion {
  Quaternion real;
  Quaternion dual;
};

Quaternion normalize(const Quaternion& q);
Quaternion hamilton_product(const Quaternion& q1, const Quaternion& q2);
Quaternion conjugate(const Quaternion& q);

/// Maps world-frame angular velocity onto the quaternion derivative:
/// q_dot = 0.5 * theta_world(q) * omega.
Matrix4x3 theta_world(const Quaternion& q);

/// Rotation matrix of a unit quaternion (active, world <- body).
Matrix3 rotation_matrix(const Quaternion& q);

Quaternion exp_rotation_vector(const RotationVector& v);

/// Left-multiplies q by an error rotation whose rotation vector has iid
/// N(0, sigma^2) components.
Quaternion apply_rotation_noise(const Quaternion& q, double sigma, Rng& rng);

/// Angle of the relative rotation between two unit quaternions, in [0, pi].
double geodesic_angle(const Quaternion& q1, const Quaternion& q2);

/// Pose in the world-frame convention: dual = 0.5 * [0, r] (x) q.
DualQuaternion to_dual_pose(const Quaternion& q, const Vector3& r);

/// Twist: real = [0, omega], dual = 0.5 * [0, v] (x) [0, omega].
DualQuaternion to_dual_twist(const Vector3& omega, const Vector3& v);

}  // namespace fkn
