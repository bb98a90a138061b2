#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "fkn/dynamics.hpp"

namespace fkn {

struct TrajectoryConfig {
  Vector3 omega_world = Vector3::Zero();  // rad/s, constant, world frame
  Quaternion q0 = Quaternion::identity();
  Vector3 r0 = Vector3::Zero();
  Vector3 v = Vector3::Zero();
  std::size_t n_samples = 16000;
  double rate_hz = 10.0;

  static TrajectoryConfig ds1(std::size_t n = 16000);
  static TrajectoryConfig ds2(std::size_t n = 16000);
};

struct NoiseConfig {
  double sigma_pos = 0.1;  // m
  double sigma_rot = 0.1;  // rad per rotation-vector axis
  std::uint64_t seed = 0;
};

/// Per-axis affine map from physical positions onto working coordinates:
/// r_work = (r - mean) / std, v_work = v / std.
struct NormStats {
  Vector3 mean = Vector3::Zero();
  Vector3 std = Vector3::Ones();
};

struct SplitSpec {
  double train_frac = 0.8;
  double val_frac = 0.1;
  double test_frac = 0.1;

  void validate() const;
  std::size_t train_end(std::size_t n) const;
  std::size_t val_end(std::size_t n) const;
};

struct Dataset {
  double dt = 0.1;
  std::vector<double> time;
  std::vector<MeasurementVector7> measurements;
  std::vector<StateVector13> ground_truth;
  NormStats norm;

  std::size_t size() const { return time.size(); }
  Dataset slice(std::size_t begin, std::size_t end) const;
  std::span<const MeasurementVector7> meas_span(std::size_t begin, std::size_t end) const {
    return std::span(measurements).subspan(begin, end - begin);
  }
  std::span<const StateVector13> truth_span(std::size_t begin, std::size_t end) const {
    return std::span(ground_truth).subspan(begin, end - begin);
  }
};

/// Closed-form constant-twist trajectory. Measurements are the noise-free
/// pose until add_noise is applied.
Dataset generate_truth(const TrajectoryConfig& cfg);

/// Replaces the measurements with noisy copies of the ground-truth pose.
/// Noise sigmas are physical; position noise is divided by norm.std so that
/// standardized datasets receive noise of the same physical size.
Dataset add_noise(const Dataset& ds, const NoiseConfig& noise);

/// Standard-score positions with statistics from the training portion of the
/// measured positions. Statistics compose with any already stored.
Dataset standardize_positions(const Dataset& ds, const SplitSpec& stats_from = {});

struct DatasetSplit {
  Dataset train;
  Dataset val;
  Dataset test;
};
DatasetSplit split_dataset(const Dataset& ds, const SplitSpec& spec = {});

void write_csv(const Dataset& ds, const std::filesystem::path& path);
Dataset read_csv(const std::filesystem::path& path);

/// Header row of the dataset CSV (second line of the file).
const std::vector<std::string>& dataset_csv_columns();

}  // namespace fkn
