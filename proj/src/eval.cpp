#include "fkn/eval.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "fkn/errors.hpp"
#include "fkn/io.hpp"

namespace fkn::eval {

const std::array<std::string, kStateDim>& feature_names() {
  static const std::array<std::string, kStateDim> names = {
      "qw", "qx", "qy", "qz", "rx", "ry", "rz", "wx", "wy", "wz", "vx", "vy", "vz"};
  return names;
}

SigmaParams baseline_sigmas() {
  constexpr double kR = 0.1;
  constexpr double kRot = 0.005;
  constexpr double kTrans = 0.0001;
  SigmaParams s;
  s.sigma_r.setConstant(kR);
  s.sigma_q.segment<4>(idx::kQ).setConstant(kRot);
  s.sigma_q.segment<3>(idx::kR).setConstant(kTrans);
  s.sigma_q.segment<3>(idx::kOmega).setConstant(kRot);
  s.sigma_q.segment<3>(idx::kV).setConstant(kTrans);
  return s;
}

namespace {

// Scale that maps a working-coordinate error of feature i to physical units.
double physical_scale(const Dataset& ds, int i) {
  if (i >= idx::kR && i < idx::kR + 3) return ds.norm.std(i - idx::kR);
  if (i >= idx::kV && i < idx::kV + 3) return ds.norm.std(i - idx::kV);
  return 1.0;
}

double overall(const FeatureArray& rmse) {
  double s = 0.0;
  for (double r : rmse) s += r * r;
  return std::sqrt(s / kStateDim);
}

}  // namespace

FeatureArray rmse_window(const FilterTrace& trace, const Dataset& ds, std::size_t begin,
                         std::size_t end, bool physical) {
  if (trace.size() != ds.size()) throw ConfigError("trace and dataset lengths differ");
  if (begin >= end || end > trace.size()) throw ConfigError("empty or out-of-range RMSE window");
  FeatureArray out{};
  for (int i = 0; i < kStateDim; ++i) {
    const double scale = physical ? physical_scale(ds, i) : 1.0;
    double sum = 0.0;
    for (std::size_t k = begin; k < end; ++k) {
      const double e = (trace.states[k](i) - ds.ground_truth[k](i)) * scale;
      sum += e * e;
    }
    out[static_cast<std::size_t>(i)] = std::sqrt(sum / static_cast<double>(end - begin));
  }
  return out;
}

MetricsReport rmse_per_feature(const FilterTrace& trace, const Dataset& ds,
                               std::size_t window_start) {
  if (window_start >= trace.size()) throw ConfigError("window_start must be < trace length");
  MetricsReport m;
  m.window_start = window_start;
  m.rmse = rmse_window(trace, ds, window_start, trace.size());
  m.overall_rmse = overall(m.rmse);
  m.settling_step = trace.size() >= 10 ? settling_time(trace) : trace.size();
  const std::size_t post = std::max(m.settling_step, window_start);
  if (post < trace.size()) {
    m.rmse_post_settling = rmse_window(trace, ds, post, trace.size());
    m.overall_rmse_post_settling = overall(m.rmse_post_settling);
  } else {
    m.rmse_post_settling.fill(std::nan(""));
    m.overall_rmse_post_settling = std::nan("");
  }
  return m;
}

std::vector<StateVector13> uncertainty_bands(const FilterTrace& trace) {
  std::vector<StateVector13> bands;
  bands.reserve(trace.size());
  for (const auto& d : trace.cov_diagonals) bands.push_back(2.0 * d.cwiseMax(0.0).cwiseSqrt());
  return bands;
}

std::size_t settling_time(const FilterTrace& trace, double threshold_frac) {
  const std::size_t n = trace.size();
  if (n < 10) throw ConfigError("settling_time needs at least 10 steps");
  const auto bands = uncertainty_bands(trace);
  const double threshold = threshold_frac * bands.front().norm();
  std::size_t run = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (bands[k].norm() < threshold) {
      if (++run == kSettlingHold) return k + 1 - kSettlingHold;
    } else {
      run = 0;
    }
  }
  return n;
}

FeatureArray band_coverage(const FilterTrace& trace, const Dataset& ds, std::size_t begin) {
  if (trace.size() != ds.size() || begin >= trace.size()) {
    throw ConfigError("band_coverage: bad window");
  }
  const auto bands = uncertainty_bands(trace);
  FeatureArray cov{};
  for (int i = 0; i < kStateDim; ++i) {
    std::size_t inside = 0;
    for (std::size_t k = begin; k < trace.size(); ++k) {
      if (std::abs(trace.states[k](i) - ds.ground_truth[k](i)) <= bands[k](i)) ++inside;
    }
    cov[static_cast<std::size_t>(i)] =
        static_cast<double>(inside) / static_cast<double>(trace.size() - begin);
  }
  return cov;
}

void RobustnessSpec::validate() const {
  if (noise_scale < 0.0) throw ConfigError("noise_scale must be >= 0");
  if (correction_step < 1) throw ConfigError("correction_step must be >= 1");
  if (!(p0_scale > 0.0)) throw ConfigError("p0_scale must be positive");
}

nlohmann::json RobustnessSpec::to_json() const {
  return {{"noise_scale", noise_scale},
          {"correction_step", correction_step},
          {"window_start", window_start},
          {"regenerate_noise", regenerate_noise},
          {"noise_seed", base_noise.seed},
          {"base_sigma_pos", base_noise.sigma_pos},
          {"base_sigma_rot", base_noise.sigma_rot},
          {"p0_scale", p0_scale}};
}

EvalRun run_evaluation(const Filter& filter, const SigmaParams& sigmas, const Dataset& ds,
                       const RobustnessSpec& spec) {
  spec.validate();
  if (ds.size() == 0) throw ConfigError("run_evaluation: empty dataset");
  EvalRun run;
  if (spec.regenerate_noise) {
    NoiseConfig noise = spec.base_noise;
    noise.sigma_pos *= spec.noise_scale;
    noise.sigma_rot *= spec.noise_scale;
    run.dataset = add_noise(ds, noise);
  } else {
    run.dataset = ds;
  }
  const FilterState init =
      filter.init_from_measurement(run.dataset.measurements.front(), spec.p0_scale);
  const FilterRunConfig cfg{run.dataset.dt, spec.correction_step, true};
  run.trace = filter.run_sequence(run.dataset.measurements, sigmas, cfg, init);
  run.metrics = rmse_per_feature(run.trace, run.dataset, spec.window_start);
  run.metrics.metadata = {{"sigmas", sigmas_to_json(sigmas)}, {"spec", spec.to_json()}};
  return run;
}

MetricsReport run_robustness(const SigmaParams& sigmas, const Dataset& ds,
                             const RobustnessSpec& spec) {
  return run_evaluation(Ekf{}, sigmas, ds, spec).metrics;
}

std::string to_string(Winner w) {
  switch (w) {
    case Winner::kTrained: return "trained";
    case Winner::kBaseline: return "baseline";
    case Winner::kTie: return "tie";
  }
  return "?";
}

ComparisonReport compare(const SigmaParams& trained, const SigmaParams& baseline,
                         const Dataset& ds, const RobustnessSpec& spec) {
  ComparisonReport rep;
  rep.trained = run_robustness(trained, ds, spec);
  rep.baseline = run_robustness(baseline, ds, spec);
  for (std::size_t i = 0; i < kStateDim; ++i) {
    const double t = rep.trained.rmse[i];
    const double b = rep.baseline.rmse[i];
    rep.winners[i] = std::abs(t - b) <= 1e-12 ? Winner::kTie
                     : t < b                  ? Winner::kTrained
                                              : Winner::kBaseline;
  }
  return rep;
}

std::string ComparisonReport::table_text() const {
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof line, "%-8s %14s %14s  %s\n", "feature", "trained", "baseline",
                "winner");
  out << line;
  for (std::size_t i = 0; i < kStateDim; ++i) {
    std::snprintf(line, sizeof line, "%-8s %14.6g %14.6g  %s\n", feature_names()[i].c_str(),
                  trained.rmse[i], baseline.rmse[i], to_string(winners[i]).c_str());
    out << line;
  }
  return out.str();
}

std::string ComparisonReport::table_csv() const {
  std::ostringstream out;
  out << "feature,trained_rmse,baseline_rmse,winner\n";
  for (std::size_t i = 0; i < kStateDim; ++i) {
    out << feature_names()[i] << ',' << io::format_double(trained.rmse[i]) << ','
        << io::format_double(baseline.rmse[i]) << ',' << to_string(winners[i]) << "\n";
  }
  return out.str();
}

nlohmann::json ComparisonReport::to_json() const {
  nlohmann::json w = nlohmann::json::object();
  for (std::size_t i = 0; i < kStateDim; ++i) w[feature_names()[i]] = to_string(winners[i]);
  return {{"trained", eval::to_json(trained)}, {"baseline", eval::to_json(baseline)},
          {"winners", w}};
}

namespace {
nlohmann::json feature_json(const FeatureArray& a) {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t i = 0; i < kStateDim; ++i) {
    // NaN (no post-settling window) is emitted as null.
    j[feature_names()[i]] = std::isfinite(a[i]) ? nlohmann::json(a[i]) : nlohmann::json(nullptr);
  }
  return j;
}
nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}
}  // namespace

nlohmann::json to_json(const MetricsReport& m) {
  return {{"rmse", feature_json(m.rmse)},
          {"overall_rmse", m.overall_rmse},
          {"window_start", m.window_start},
          {"settling_step", m.settling_step},
          {"rmse_post_settling", feature_json(m.rmse_post_settling)},
          {"overall_rmse_post_settling", number_or_null(m.overall_rmse_post_settling)},
          {"metadata", m.metadata}};
}

nlohmann::json sigmas_to_json(const SigmaParams& s) {
  return {{"sigma_r", std::vector<double>(s.sigma_r.data(), s.sigma_r.data() + kMeasDim)},
          {"sigma_q", std::vector<double>(s.sigma_q.data(), s.sigma_q.data() + kStateDim)}};
}

SigmaParams sigmas_from_json(const nlohmann::json& j) {
  Vector20 flat;
  if (j.is_array()) {
    if (j.size() != kSigmaDim) throw ConfigError("expected 20 sigma values");
    for (int i = 0; i < kSigmaDim; ++i) flat(i) = j.at(static_cast<std::size_t>(i)).get<double>();
    return SigmaParams::from_flat(flat);
  }
  const auto r = j.at("sigma_r").get<std::vector<double>>();
  const auto q = j.at("sigma_q").get<std::vector<double>>();
  if (r.size() != kMeasDim || q.size() != kStateDim) throw ConfigError("bad sigma sizes");
  SigmaParams s;
  for (int i = 0; i < kMeasDim; ++i) s.sigma_r(i) = r[static_cast<std::size_t>(i)];
  for (int i = 0; i < kStateDim; ++i) s.sigma_q(i) = q[static_cast<std::size_t>(i)];
  return s;
}

std::string trace_csv(const FilterTrace& trace, const Dataset& ds) {
  if (trace.size() != ds.size()) throw ConfigError("trace and dataset lengths differ");
  const auto bands = uncertainty_bands(trace);
  std::ostringstream out;
  out << 't';
  for (const auto& n : feature_names()) out << ",est_" << n;
  for (const auto& n : feature_names()) out << ",band_" << n;
  out << ",corrected\n";
  for (std::size_t k = 0; k < trace.size(); ++k) {
    out << io::format_double(ds.time[k]);
    for (int i = 0; i < kStateDim; ++i) out << ',' << io::format_double(trace.states[k](i));
    for (int i = 0; i < kStateDim; ++i) out << ',' << io::format_double(bands[k](i));
    out << ',' << (trace.corrected[k] ? 1 : 0) << "\n";
  }
  return out.str();
}

FilterTrace read_trace_csv(const std::filesystem::path& path) {
  const io::CsvTable t = io::read_csv_table(path);
  const int first_est = t.column("est_qw");
  const int first_band = t.column("band_qw");
  const int flag = t.column("corrected");
  if (first_est < 0 || first_band < 0 || flag < 0 ||
      t.header.size() != static_cast<std::size_t>(2 + 2 * kStateDim)) {
    throw ParseError("not a trace CSV (expected t, est_*, band_*, corrected)", 2);
  }
  FilterTrace trace;
  for (const auto& row : t.rows) {
    StateVector13 x, d;
    for (int i = 0; i < kStateDim; ++i) {
      x(i) = row[static_cast<std::size_t>(first_est + i)];
      const double half = 0.5 * row[static_cast<std::size_t>(first_band + i)];
      d(i) = half * half;
    }
    trace.states.push_back(x);
    trace.cov_diagonals.push_back(d);
    trace.corrected.push_back(row[static_cast<std::size_t>(flag)] != 0.0);
  }
  return trace;
}

}  // namespace fkn::eval
