#include "fkn/ekf.hpp"

#include <string>

#include <Eigen/Cholesky>

#include "fkn/errors.hpp"

namespace fkn {

namespace {

void symmetrize(Matrix13& p) { p = 0.5 * (p + p.transpose()).eval(); }

void clamp_diagonal(Matrix13& p) {
  for (int i = 0; i < kStateDim; ++i) {
    if (p(i, i) < 0.0) p(i, i) = 0.0;
  }
}

void renormalize_quat(StateVector13& x) { set_quat(x, normalize(quat_of(x))); }

}  // namespace

FilterTrace Filter::run_sequence(std::span<const MeasurementVector7> measurements,
                                 const SigmaParams& sigmas, const FilterRunConfig& run_cfg,
                                 const FilterState& init) const {
  if (measurements.empty()) throw ConfigError("run_sequence: empty measurement sequence");
  if (run_cfg.correction_step < 1) throw ConfigError("run_sequence: correction_step must be >= 1");
  if (!(run_cfg.dt > 0.0)) throw ConfigError("run_sequence: dt must be positive");

  const StepConfig step{run_cfg.dt};
  const std::size_t n = measurements.size();
  FilterTrace trace;
  trace.states.reserve(n);
  trace.cov_diagonals.reserve(n);
  trace.corrected.reserve(n);

  FilterState s = init;
  for (std::size_t k = 0; k < n; ++k) {
    s = predict(s, sigmas, step);
    const bool do_correct = k % static_cast<std::size_t>(run_cfg.correction_step) == 0;
    if (do_correct) {
      try {
        s = correct(s, measurements[k], sigmas, run_cfg.renormalize_quaternion);
      } catch (const NumericalError& e) {
        throw NumericalError("step " + std::to_string(k) + ": " + e.what());
      }
    } else if (run_cfg.renormalize_quaternion) {
      renormalize_quat(s.x);
    }
    trace.states.push_back(s.x);
    trace.cov_diagonals.push_back(s.P.diagonal());
    trace.corrected.push_back(do_correct);
  }
  return trace;
}

FilterState Ekf::init_from_measurement(const MeasurementVector7& y0, double p0_scale) const {
  if (!(p0_scale > 0.0)) throw DomainError("init_from_measurement: p0_scale must be positive");
  FilterState s;
  s.x.setZero();
  set_quat(s.x, normalize(quat_of(y0)));
  s.x.segment<3>(idx::kR) = y0.segment<3>(idx::kR);
  s.P = p0_scale * Matrix13::Identity();
  return s;
}

FilterState Ekf::predict(const FilterState& s, const SigmaParams& sigmas,
                         const StepConfig& cfg) const {
  const Matrix13 f = state_jacobian(s.x, cfg);
  FilterState out;
  out.x = state_transition(s.x, cfg);
  out.P = f * s.P * f.transpose() + process_noise(sigmas.sigma_q);
  symmetrize(out.P);
  return out;
}

FilterState Ekf::correct(const FilterState& s, const MeasurementVector7& y,
                         const SigmaParams& sigmas, bool renormalize) const {
  // With H = [I7 | 0], H P H^T is the leading 7x7 block and P H^T the
  // leading 7 columns.
  const Matrix7 innov_cov =
      s.P.topLeftCorner<kMeasDim, kMeasDim>() + measurement_noise(sigmas.sigma_r);
  const Eigen::LLT<Matrix7> llt(innov_cov);
  if (llt.info() != Eigen::Success || !(llt.rcond() >= kMinInnovationRcond)) {
    throw NumericalError("singular innovation covariance");
  }
  const Eigen::Matrix<double, kMeasDim, kStateDim> p_top = s.P.topRows<kMeasDim>();
  // K^T = S^{-1} (P H^T)^T
  const Eigen::Matrix<double, kStateDim, kMeasDim> gain = llt.solve(p_top).transpose();

  FilterState out;
  out.x = s.x + gain * (y - observe(s.x));
  out.P = s.P - gain * p_top;
  symmetrize(out.P);
  clamp_diagonal(out.P);
  if (renormalize) renormalize_quat(out.x);
  if (!out.x.allFinite() || !out.P.allFinite()) throw NumericalError("non-finite filter state");
  return out;
}

}  // namespace fkn
