#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fkn/datagen.hpp"
#include "fkn/ekf.hpp"

namespace fkn::eval {

using FeatureArray = std::array<double, kStateDim>;

/// Short names of the 13 state features, in state order.
const std::array<std::string, kStateDim>& feature_names();

/// Manually tuned reference: R from the true measurement noise, Q split into
/// rotational and translational levels.
SigmaParams baseline_sigmas();

struct MetricsReport {
  FeatureArray rmse{};  // physical units, window [window_start, N)
  double overall_rmse = 0.0;
  std::size_t window_start = 0;
  std::size_t settling_step = 0;
  FeatureArray rmse_post_settling{};
  double overall_rmse_post_settling = 0.0;
  nlohmann::json metadata;  // sigmas, correction_step, noise scale, seeds
};

/// Per-feature RMSE; position and velocity errors are mapped back to physical
/// units with the dataset's norm_std.
MetricsReport rmse_per_feature(const FilterTrace& trace, const Dataset& ds,
                               std::size_t window_start = 0);

/// Same statistic, standardized units, over an arbitrary window. Used for the
/// "final 50%" checks.
FeatureArray rmse_window(const FilterTrace& trace, const Dataset& ds, std::size_t begin,
                         std::size_t end, bool physical = true);

/// 2-sigma half widths per step.
std::vector<StateVector13> uncertainty_bands(const FilterTrace& trace);

/// First step where the band norm falls below threshold_frac times its value
/// at step 0 and stays there for 50 consecutive steps; trace length if never.
std::size_t settling_time(const FilterTrace& trace, double threshold_frac = 0.1);
inline constexpr std::size_t kSettlingHold = 50;

/// Fraction of steps in [begin, N) where |error| <= 2 sigma band per feature.
FeatureArray band_coverage(const FilterTrace& trace, const Dataset& ds, std::size_t begin);

struct RobustnessSpec {
  double noise_scale = 1.0;
  int correction_step = 10;
  std::size_t window_start = 0;
  NoiseConfig base_noise{};  // base sigmas; seed used for regeneration
  bool regenerate_noise = true;
  double p0_scale = kDefaultP0Scale;

  void validate() const;
  nlohmann::json to_json() const;
};

struct EvalRun {
  Dataset dataset;  // dataset the filter actually ran on
  FilterTrace trace;
  MetricsReport metrics;
};

/// Runs the filter over the whole dataset. With regenerate_noise, fresh
/// measurements are drawn at noise_scale times the base sigmas first.
EvalRun run_evaluation(const Filter& filter, const SigmaParams& sigmas, const Dataset& ds,
                       const RobustnessSpec& spec);

MetricsReport run_robustness(const SigmaParams& sigmas, const Dataset& ds,
                             const RobustnessSpec& spec);

enum class Winner { kTrained, kBaseline, kTie };
std::string to_string(Winner w);

struct ComparisonReport {
  MetricsReport trained;
  MetricsReport baseline;
  std::array<Winner, kStateDim> winners{};

  std::string table_text() const;
  std::string table_csv() const;
  nlohmann::json to_json() const;
};

ComparisonReport compare(const SigmaParams& trained, const SigmaParams& baseline,
                         const Dataset& ds, const RobustnessSpec& spec);

nlohmann::json to_json(const MetricsReport& m);
nlohmann::json sigmas_to_json(const SigmaParams& s);
SigmaParams sigmas_from_json(const nlohmann::json& j);

/// Trace CSV: t, 13 estimates, 13 band half widths, corrected flag.
std::string trace_csv(const FilterTrace& trace, const Dataset& ds);
FilterTrace read_trace_csv(const std::filesystem::path& path);

}  // namespace fkn::eval
