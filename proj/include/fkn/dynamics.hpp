#pragma once

#include <Eigen/Core>

#include "fkn/quat.hpp"

namespace fkn {

inline constexpr int kStateDim = 13;
inline constexpr int kMeasDim = 7;
inline constexpr int kSigmaDim = kMeasDim + kStateDim;

// Offsets of the blocks in the state [q, r, omega, v].
namespace idx {
inline constexpr int kQ = 0;
inline constexpr int kR = 4;
inline constexpr int kOmega = 7;
inline constexpr int kV = 10;
}  // namespace idx

using StateVector13 = Eigen::Matrix<double, kStateDim, 1>;
using MeasurementVector7 = Eigen::Matrix<double, kMeasDim, 1>;
using Matrix13 = Eigen::Matrix<double, kStateDim, kStateDim>;
using Matrix7 = Eigen::Matrix<double, kMeasDim, kMeasDim>;
using Matrix7x13 = Eigen::Matrix<double, kMeasDim, kStateDim>;
using Vector20 = Eigen::Matrix<double, kSigmaDim, 1>;

StateVector13 make_state(const Quaternion& q, const Vector3& r, const Vector3& omega,
                         const Vector3& v);
MeasurementVector7 make_measurement(const Quaternion& q, const Vector3& r);

template <typename Derived>
Quaternion quat_of(const Eigen::MatrixBase<Derived>& x) {
  return {x(idx::kQ), x(idx::kQ + 1), x(idx::kQ + 2), x(idx::kQ + 3)};
}
template <typename Derived>
void set_quat(Eigen::MatrixBase<Derived>& x, const Quaternion& q) {
  x(idx::kQ) = q.w;
  x(idx::kQ + 1) = q.x;
  x(idx::kQ + 2) = q.y;
  x(idx::kQ + 3) = q.z;
}
inline Vector3 position_of(const StateVector13& x) { return x.segment<3>(idx::kR); }
inline Vector3 omega_of(const StateVector13& x) { return x.segment<3>(idx::kOmega); }
inline Vector3 velocity_of(const StateVector13& x) { return x.segment<3>(idx::kV); }

inline constexpr double kSigmaFloor = 1e-8;
inline constexpr double kSigmaCeiling = 1.0;

/// Standard deviations behind the diagonal R (measurement) and Q (process).
/// The flat 20-vector layout is [sigma_r(7), sigma_q(13)].
struct SigmaParams {
  MeasurementVector7 sigma_r = MeasurementVector7::Constant(0.1);
  StateVector13 sigma_q = StateVector13::Constant(0.005);

  Vector20 flat() const;
  static SigmaParams from_flat(const Vector20& s);
  bool in_legal_box() const;
};

struct StepConfig {
  double dt = 0.1;
};

/// One step of the discrete motion model. The quaternion is propagated to
/// first order and left unnormalized.
StateVector13 state_transition(const StateVector13& x, const StepConfig& cfg);

Matrix13 state_jacobian(const StateVector13& x, const StepConfig& cfg);

MeasurementVector7 observe(const StateVector13& x);

const Matrix7x13& observation_jacobian();

Matrix13 process_noise(const StateVector13& sigma_q);
Matrix7 measurement_noise(const MeasurementVector7& sigma_r);

}  // namespace fkn
