#include "fkn/datagen.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "fkn/errors.hpp"
#include "fkn/io.hpp"

namespace fkn {

TrajectoryConfig TrajectoryConfig::ds1(std::size_t n) {
  TrajectoryConfig cfg;
  cfg.omega_world = Vector3(0.02, 0.04, 0.06);
  cfg.n_samples = n;
  return cfg;
}

TrajectoryConfig TrajectoryConfig::ds2(std::size_t n) {
  TrajectoryConfig cfg;
  cfg.omega_world = Vector3(0.10, 0.20, 0.30);
  cfg.n_samples = n;
  return cfg;
}

void SplitSpec::validate() const {
  if (!(train_frac > 0 && val_frac > 0 && test_frac > 0)) {
    throw ConfigError("split fractions must be positive");
  }
  if (std::abs(train_frac + val_frac + test_frac - 1.0) > 1e-12) {
    throw ConfigError("split fractions must sum to 1");
  }
}

namespace {
// floor() with slack for products such as 16000 * 0.9 that land a hair
// below the intended integer.
std::size_t floor_count(double x) { return static_cast<std::size_t>(std::floor(x + 1e-9)); }
}  // namespace

std::size_t SplitSpec::train_end(std::size_t n) const {
  return floor_count(static_cast<double>(n) * train_frac);
}

std::size_t SplitSpec::val_end(std::size_t n) const {
  return floor_count(static_cast<double>(n) * (train_frac + val_frac));
}

Dataset Dataset::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > size()) throw ConfigError("dataset slice out of range");
  Dataset out;
  out.dt = dt;
  out.norm = norm;
  out.time.assign(time.begin() + begin, time.begin() + end);
  out.measurements.assign(measurements.begin() + begin, measurements.begin() + end);
  out.ground_truth.assign(ground_truth.begin() + begin, ground_truth.begin() + end);
  return out;
}

Dataset generate_truth(const TrajectoryConfig& cfg) {
  if (cfg.n_samples < 2) throw ConfigError("trajectory needs at least 2 samples");
  if (!(cfg.rate_hz > 0.0)) throw ConfigError("rate_hz must be positive");
  if (!cfg.q0.is_unit()) throw DomainError("q0 must be a unit quaternion");

  Dataset ds;
  ds.dt = 1.0 / cfg.rate_hz;
  ds.time.reserve(cfg.n_samples);
  ds.measurements.reserve(cfg.n_samples);
  ds.ground_truth.reserve(cfg.n_samples);
  for (std::size_t k = 0; k < cfg.n_samples; ++k) {
    const double t = static_cast<double>(k) / cfg.rate_hz;
    const Quaternion q =
        hamilton_product(exp_rotation_vector(RotationVector::from(cfg.omega_world * t)), cfg.q0);
    const Vector3 r = cfg.r0 + cfg.v * t;
    ds.time.push_back(t);
    ds.ground_truth.push_back(make_state(q, r, cfg.omega_world, cfg.v));
    ds.measurements.push_back(make_measurement(q, r));
  }
  return ds;
}

Dataset add_noise(const Dataset& ds, const NoiseConfig& noise) {
  if (noise.sigma_pos < 0.0 || noise.sigma_rot < 0.0) throw DomainError("noise sigmas must be >= 0");
  Dataset out = ds;
  Rng rng(noise.seed);
  std::normal_distribution<double> standard(0.0, 1.0);
  for (std::size_t k = 0; k < ds.size(); ++k) {
    const StateVector13& gt = ds.ground_truth[k];
    Vector3 r = position_of(gt);
    for (int a = 0; a < 3; ++a) {
      r(a) += noise.sigma_pos * standard(rng) / ds.norm.std(a);
    }
    const Quaternion q = apply_rotation_noise(quat_of(gt), noise.sigma_rot, rng);
    out.measurements[k] = make_measurement(q, r);
  }
  return out;
}

Dataset standardize_positions(const Dataset& ds, const SplitSpec& stats_from) {
  stats_from.validate();
  const std::size_t n_train = std::max<std::size_t>(stats_from.train_end(ds.size()), 1);

  Vector3 mean = Vector3::Zero();
  for (std::size_t k = 0; k < n_train; ++k) mean += ds.measurements[k].segment<3>(idx::kR);
  mean /= static_cast<double>(n_train);
  Vector3 var = Vector3::Zero();
  for (std::size_t k = 0; k < n_train; ++k) {
    var += (ds.measurements[k].segment<3>(idx::kR) - mean).array().square().matrix();
  }
  var /= static_cast<double>(n_train);
  Vector3 std = var.cwiseSqrt();
  for (int a = 0; a < 3; ++a) {
    if (std(a) < 1e-9) std(a) = 1.0;
  }

  Dataset out = ds;
  for (std::size_t k = 0; k < ds.size(); ++k) {
    auto& y = out.measurements[k];
    y.segment<3>(idx::kR) = (y.segment<3>(idx::kR) - mean).cwiseQuotient(std);
    auto& x = out.ground_truth[k];
    x.segment<3>(idx::kR) = (x.segment<3>(idx::kR) - mean).cwiseQuotient(std);
    x.segment<3>(idx::kV) = x.segment<3>(idx::kV).cwiseQuotient(std);
  }
  out.norm.mean = ds.norm.mean + ds.norm.std.cwiseProduct(mean);
  out.norm.std = ds.norm.std.cwiseProduct(std);
  return out;
}

DatasetSplit split_dataset(const Dataset& ds, const SplitSpec& spec) {
  spec.validate();
  const std::size_t a = spec.train_end(ds.size());
  const std::size_t b = spec.val_end(ds.size());
  return {ds.slice(0, a), ds.slice(a, b), ds.slice(b, ds.size())};
}

const std::vector<std::string>& dataset_csv_columns() {
  static const std::vector<std::string> cols = {
      "t",       "meas_qw", "meas_qx", "meas_qy", "meas_qz", "meas_rx", "meas_ry",
      "meas_rz", "gt_qw",   "gt_qx",   "gt_qy",   "gt_qz",   "gt_rx",   "gt_ry",
      "gt_rz",   "gt_wx",   "gt_wy",   "gt_wz",   "gt_vx",   "gt_vy",   "gt_vz"};
  return cols;
}

namespace {

std::string join3(const Vector3& v) {
  return io::format_double(v.x()) + "," + io::format_double(v.y()) + "," +
         io::format_double(v.z());
}

Vector3 parse3(const std::string& s, std::size_t line) {
  const auto parts = io::split(s, ',');
  if (parts.size() != 3) throw ParseError("expected 3 comma-separated values in '" + s + "'", line);
  return {io::parse_double(parts[0], line), io::parse_double(parts[1], line),
          io::parse_double(parts[2], line)};
}

}  // namespace

void write_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "# norm_mean=" << join3(ds.norm.mean) << " norm_std=" << join3(ds.norm.std)
      << " dt=" << io::format_double(ds.dt) << "\n";
  const auto& cols = dataset_csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  for (std::size_t k = 0; k < ds.size(); ++k) {
    out << io::format_double(ds.time[k]);
    for (int i = 0; i < kMeasDim; ++i) out << ',' << io::format_double(ds.measurements[k](i));
    for (int i = 0; i < kStateDim; ++i) out << ',' << io::format_double(ds.ground_truth[k](i));
    out << "\n";
  }
  io::write_file_atomic(path, out.str());
}

Dataset read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string(), 0);

  Dataset ds;
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) {
    throw ParseError("expected '# norm_mean=... norm_std=... dt=...' comment", lineno);
  }
  bool have_mean = false, have_std = false, have_dt = false;
  for (const auto& tok : io::split(line.substr(2), ' ')) {
    if (tok.rfind("norm_mean=", 0) == 0) {
      ds.norm.mean = parse3(tok.substr(10), lineno);
      have_mean = true;
    } else if (tok.rfind("norm_std=", 0) == 0) {
      ds.norm.std = parse3(tok.substr(9), lineno);
      have_std = true;
    } else if (tok.rfind("dt=", 0) == 0) {
      ds.dt = io::parse_double(tok.substr(3), lineno);
      have_dt = true;
    } else if (!tok.empty()) {
      throw ParseError("unknown header field '" + tok + "'", lineno);
    }
  }
  if (!have_mean || !have_std || !have_dt) {
    throw ParseError("header comment must carry norm_mean, norm_std and dt", lineno);
  }

  ++lineno;
  if (!std::getline(in, line)) throw ParseError("missing column header", lineno);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = io::split(line, ',');
  const auto& expected = dataset_csv_columns();
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (i >= header.size() || header[i] != expected[i]) {
      throw ParseError("missing or misplaced column '" + expected[i] + "'", lineno);
    }
  }
  if (header.size() != expected.size()) {
    throw ParseError("unexpected extra column '" + header[expected.size()] + "'", lineno);
  }

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = io::split(line, ',');
    if (cells.size() != expected.size()) {
      throw ParseError("row has " + std::to_string(cells.size()) + " values, expected " +
                           std::to_string(expected.size()),
                       lineno);
    }
    ds.time.push_back(io::parse_double(cells[0], lineno));
    MeasurementVector7 y;
    for (int i = 0; i < kMeasDim; ++i) y(i) = io::parse_double(cells[1 + i], lineno);
    StateVector13 x;
    for (int i = 0; i < kStateDim; ++i) x(i) = io::parse_double(cells[1 + kMeasDim + i], lineno);
    ds.measurements.push_back(y);
    ds.ground_truth.push_back(x);
  }
  return ds;
}

}  // namespace fkn
