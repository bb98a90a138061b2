#include "fkn/dynamics.hpp"

#include "fkn/errors.hpp"

namespace fkn {

StateVector13 make_state(const Quaternion& q, const Vector3& r, const Vector3& omega,
                         const Vector3& v) {
  StateVector13 x;
  set_quat(x, q);
  x.segment<3>(idx::kR) = r;
  x.segment<3>(idx::kOmega) = omega;
  x.segment<3>(idx::kV) = v;
  return x;
}

MeasurementVector7 make_measurement(const Quaternion& q, const Vector3& r) {
  MeasurementVector7 y;
  set_quat(y, q);
  y.segment<3>(idx::kR) = r;
  return y;
}

Vector20 SigmaParams::flat() const {
  Vector20 s;
  s << sigma_r, sigma_q;
  return s;
}

SigmaParams SigmaParams::from_flat(const Vector20& s) {
  SigmaParams p;
  p.sigma_r = s.head<kMeasDim>();
  p.sigma_q = s.tail<kStateDim>();
  return p;
}

bool SigmaParams::in_legal_box() const {
  const Vector20 s = flat();
  return (s.array() >= kSigmaFloor).all() && (s.array() <= kSigmaCeiling).all();
}

StateVector13 state_transition(const StateVector13& x, const StepConfig& cfg) {
  const double dt = cfg.dt;
  StateVector13 next = x;
  next.segment<3>(idx::kR) += dt * x.segment<3>(idx::kV);
  next.segment<4>(idx::kQ) += 0.5 * dt * theta_world(quat_of(x)) * x.segment<3>(idx::kOmega);
  return next;
}

Matrix13 state_jacobian(const StateVector13& x, const StepConfig& cfg) {
  const double h = 0.5 * cfg.dt;
  const double wx = x(idx::kOmega), wy = x(idx::kOmega + 1), wz = x(idx::kOmega + 2);

  Matrix13 f = Matrix13::Identity();
  // d q' / d q = I + (dt/2) * Omega_W(omega)
  Eigen::Matrix4d omega_w;
  omega_w << 0, -wx, -wy, -wz,
             wx, 0, -wz, wy,
             wy, wz, 0, -wx,
             wz, -wy, wx, 0;
  f.block<4, 4>(idx::kQ, idx::kQ) += h * omega_w;
  f.block<4, 3>(idx::kQ, idx::kOmega) = h * theta_world(quat_of(x));
  f.block<3, 3>(idx::kR, idx::kV) = cfg.dt * Matrix3::Identity();
  return f;
}

MeasurementVector7 observe(const StateVector13& x) { return x.head<kMeasDim>(); }

const Matrix7x13& observation_jacobian() {
  static const Matrix7x13 h = [] {
    Matrix7x13 m = Matrix7x13::Zero();
    m.leftCols<kMeasDim>().setIdentity();
    return m;
  }();
  return h;
}

namespace {
template <int N>
Eigen::Matrix<double, N, N> diagonal_covariance(const Eigen::Matrix<double, N, 1>& sigma,
                                                const char* what) {
  if ((sigma.array() < 0.0).any()) throw DomainError(std::string(what) + ": negative sigma");
  return sigma.array().square().matrix().asDiagonal();
}
}  // namespace

Matrix13 process_noise(const StateVector13& sigma_q) {
  return diagonal_covariance<kStateDim>(sigma_q, "process_noise");
}

Matrix7 measurement_noise(const MeasurementVector7& sigma_r) {
  return diagonal_covariance<kMeasDim>(sigma_r, "measurement_noise");
}

}  // namespace fkn
