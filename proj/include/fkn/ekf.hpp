#pragma once

#include <span>
#include <vector>

#include "fkn/dynamics.hpp"

namespace fkn {

struct FilterState {
  StateVector13 x = StateVector13::Zero();
  Matrix13 P = Matrix13::Identity();
};

struct FilterRunConfig {
  double dt = 0.1;
  // A correction is applied at step k iff k % correction_step == 0.
  int correction_step = 1;
  bool renormalize_quaternion = true;
};

/// Per-step record of a filter run. All three sequences share one length.
struct FilterTrace {
  std::vector<StateVector13> states;
  std::vector<StateVector13> cov_diagonals;
  std::vector<bool> corrected;

  std::size_t size() const { return states.size(); }
};

inline constexpr double kDefaultP0Scale = 0.1;

/// Common interface of filter variants driven by the trainer and the
/// evaluation tools. Implementations must be stateless; run_sequence is the
/// shared driver loop.
class Filter {
 public:
  virtual ~Filter() = default;

  virtual FilterState init_from_measurement(const MeasurementVector7& y0,
                                            double p0_scale = kDefaultP0Scale) const = 0;
  virtual FilterState predict(const FilterState& s, const SigmaParams& sigmas,
                              const StepConfig& cfg) const = 0;
  virtual FilterState correct(const FilterState& s, const MeasurementVector7& y,
                              const SigmaParams& sigmas, bool renormalize = true) const = 0;

  FilterTrace run_sequence(std::span<const MeasurementVector7> measurements,
                           const SigmaParams& sigmas, const FilterRunConfig& run_cfg,
                           const FilterState& init) const;
};

/// Extended Kalman filter over the 13-state constant-twist model.
class Ekf final : public Filter {
 public:
  FilterState init_from_measurement(const MeasurementVector7& y0,
                                    double p0_scale = kDefaultP0Scale) const override;
  FilterState predict(const FilterState& s, const SigmaParams& sigmas,
                      const StepConfig& cfg) const override;
  FilterState correct(const FilterState& s, const MeasurementVector7& y,
                      const SigmaParams& sigmas, bool renormalize = true) const override;
};

// Innovation covariances with a reciprocal condition estimate below this are
// rejected as singular.
inline constexpr double kMinInnovationRcond = 1e-12;

}  // namespace fkn
