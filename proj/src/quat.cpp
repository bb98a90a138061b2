#include "fkn/quat.hpp"

#include <cmath>

#include "fkn/errors.hpp"

namespace fkn {

double Quaternion::norm() const { return std::sqrt(squared_norm()); }

bool Quaternion::is_unit(double tol) const { return std::abs(squared_norm() - 1.0) <= tol; }

Quaternion normalize(const Quaternion& q) {
  const double n = q.norm();
  if (!(n > 0.0)) throw DomainError("cannot normalize zero quaternion");
  return {q.w / n, q.x / n, q.y / n, q.z / n};
}

Quaternion hamilton_product(const Quaternion& a, const Quaternion& b) {
  return {
      a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
      a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
      a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
      a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
  };
}

Quaternion conjugate(const Quaternion& q) { return {q.w, -q.x, -q.y, -q.z}; }

Matrix4x3 theta_world(const Quaternion& q) {
  Matrix4x3 m;
  m << -q.x, -q.y, -q.z,
        q.w,  q.z, -q.y,
       -q.z,  q.w,  q.x,
        q.y, -q.x,  q.w;
  return m;
}

Matrix3 rotation_matrix(const Quaternion& q) {
  const double w = q.w, x = q.x, y = q.y, z = q.z;
  Matrix3 r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
       2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
       2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

Quaternion exp_rotation_vector(const RotationVector& v) {
  const double theta = v.angle();
  if (theta < 1e-12) {
    return normalize({1.0, 0.5 * v.vx, 0.5 * v.vy, 0.5 * v.vz});
  }
  const double s = std::sin(0.5 * theta) / theta;
  return {std::cos(0.5 * theta), s * v.vx, s * v.vy, s * v.vz};
}

Quaternion apply_rotation_noise(const Quaternion& q, double sigma, Rng& rng) {
  if (sigma < 0.0) throw DomainError("rotation noise sigma must be nonnegative");
  if (sigma == 0.0) return q;
  std::normal_distribution<double> standard(0.0, 1.0);
  RotationVector err;
  err.vx = sigma * standard(rng);
  err.vy = sigma * standard(rng);
  err.vz = sigma * standard(rng);
  return normalize(hamilton_product(exp_rotation_vector(err), q));
}

double geodesic_angle(const Quaternion& q1, const Quaternion& q2) {
  if (!q1.is_unit() || !q2.is_unit()) throw DomainError("geodesic_angle requires unit quaternions");
  const Quaternion rel = hamilton_product(conjugate(q1), q2);
  return 2.0 * std::atan2(rel.vec().norm(), std::abs(rel.w));
}

DualQuaternion to_dual_pose(const Quaternion& q, const Vector3& r) {
  if (!q.is_unit()) throw DomainError("to_dual_pose requires a unit quaternion");
  return {q, 0.5 * hamilton_product(Quaternion::pure(r), q)};
}

DualQuaternion to_dual_twist(const Vector3& omega, const Vector3& v) {
  const Quaternion w = Quaternion::pure(omega);
  return {w, 0.5 * hamilton_product(Quaternion::pure(v), w)};
}

}  // namespace fkn
