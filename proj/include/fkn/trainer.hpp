#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fkn/datagen.hpp"
#include "fkn/ekf.hpp"
#include "fkn/net.hpp"

namespace fkn::train {

struct TrainConfig {
  std::uint64_t seed = 0;
  int batch_size = 512;
  int hidden_size = 512;
  int num_layers = 7;
  double learning_rate = 1e-5;
  double dropout = 0.0;
  double weight_decay = 0.0;
  std::string loss = "mse";
  int loss_cut = 100;
  int epochs = 100;
  int early_stop = 20;

  int correction_step_train = 1;
  double fd_step_rel = 1e-3;
  double fd_step_abs_floor = 1e-6;
  double p0_scale = kDefaultP0Scale;
  double leaky_slope = 0.01;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double plateau_factor = 0.5;
  int plateau_patience = 5;
  double min_lr = 1e-8;
  bool shuffle_batches = false;
  net::InitScheme init = net::InitScheme::kTorchDefault;

  void validate() const;
  net::NetworkConfig network_config() const;
  net::OptimizerConfig optimizer_config() const;
  FilterRunConfig filter_config(double dt) const;
};

nlohmann::json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

struct LossValue {
  double mse = 0.0;
  double rmse = 0.0;
};

/// MSE over all 13 features for steps k >= loss_cut.
LossValue sequence_loss(const FilterTrace& trace, std::span<const StateVector13> truth,
                        int loss_cut);

/// One contiguous time window of a dataset.
struct Batch {
  std::span<const MeasurementVector7> measurements;
  std::span<const StateVector13> truth;
  double dt = 0.1;

  net::MatrixXd network_input() const;  // N x 7
};

/// Splits into contiguous non-overlapping windows of batch_size. A trailing
/// remainder is kept as a shorter window only when `keep_remainder` is set
/// and it is longer than loss_cut.
std::vector<Batch> make_batches(const Dataset& ds, int batch_size, int loss_cut,
                                bool keep_remainder);

/// Filter loss for one batch: init from the first measurement, run the
/// sequence, apply sequence_loss.
LossValue batch_loss(const Filter& filter, const Batch& batch, const SigmaParams& sigmas,
                     const TrainConfig& cfg);

struct FdGradient {
  Vector20 grad = Vector20::Zero();
  double loss = 0.0;  // MSE at the unperturbed sigmas
  int filter_runs = 0;
};

/// Central differences of the batch MSE across the 20 sigmas.
FdGradient sigma_gradient_fd(const Filter& filter, const Batch& batch, const SigmaParams& sigmas,
                             const TrainConfig& cfg);

struct EpochReport {
  int epoch = 0;  // 1-based
  double train_rmse = 0.0;
  double val_rmse = 0.0;
  double lr = 0.0;
  Vector20 sigmas = Vector20::Zero();
  bool ceiling_warning = false;  // all 20 sigmas pinned at the clip ceiling
  double wall_seconds = 0.0;
};

struct CheckpointRecord {
  double best_val_rmse = 0.0;
  int best_epoch = 0;
  net::NetworkParams best_params;
  SigmaParams best_sigmas;
};

/// Best-model retention and early stopping over epochs.
class TrainingMonitor {
 public:
  explicit TrainingMonitor(int early_stop) : early_stop_(early_stop) {}

  /// Returns true when `val` improves on the best seen.
  bool record(int epoch, double val);
  bool should_stop(int epoch) const { return epoch - best_epoch_ >= early_stop_; }
  int best_epoch() const { return best_epoch_; }
  double best() const { return best_; }

 private:
  int early_stop_;
  int best_epoch_ = 0;
  double best_ = std::numeric_limits<double>::infinity();
};

struct EpochResult {
  double rmse = 0.0;
  Vector20 mean_sigmas = Vector20::Zero();
};

/// One pass over the training batches with parameter updates.
double train_epoch(net::NetworkParams& params, std::span<const Batch> batches,
                   const TrainConfig& cfg, double learning_rate, Rng& rng,
                   const Filter& filter);

/// Evaluation-mode pass without updates; mean batch RMSE and mean sigmas.
EpochResult evaluate_batches(const net::NetworkParams& params, std::span<const Batch> batches,
                             const TrainConfig& cfg, const Filter& filter);

struct FitResult {
  CheckpointRecord checkpoint;
  std::vector<EpochReport> epochs;
  double test_rmse = 0.0;
  Rng rng;  // state after training, stored with the checkpoint
};

using EpochCallback = std::function<void(const EpochReport&)>;

FitResult fit(const DatasetSplit& data, const TrainConfig& cfg, const Filter& filter,
              const EpochCallback& on_epoch = {});

/// Writes config.json, epochs.csv, sigmas.csv, timing.csv, checkpoint.json
/// and result.json into `dir`.
void write_run_outputs(const FitResult& result, const TrainConfig& cfg,
                       const std::filesystem::path& dir);

struct GridSpec {
  std::vector<int> hidden_size = {512, 1024};
  std::vector<int> num_layers = {6, 7, 8};
  std::vector<double> dropout = {0.0, 0.5};
  std::vector<double> weight_decay = {0.0, 1e-3};

  std::size_t size() const {
    return hidden_size.size() * num_layers.size() * dropout.size() * weight_decay.size();
  }
};

nlohmann::json to_json(const GridSpec& grid);
GridSpec grid_spec_from_json(const nlohmann::json& j);

struct SweepRow {
  int hidden_size = 0;
  int num_layers = 0;
  double dropout = 0.0;
  double weight_decay = 0.0;
  int epochs_run = 0;
  int best_epoch = 0;
  double best_val_rmse = 0.0;
  double test_rmse = 0.0;
  std::vector<double> max_sigma_per_epoch;
  bool overfit_flag = false;  // some epoch's max sigma hit the ceiling exactly
};

std::vector<SweepRow> grid_sweep(const GridSpec& grid, const TrainConfig& base,
                                 const DatasetSplit& data, const Filter& filter,
                                 const std::function<void(const SweepRow&)>& on_row = {});

std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace fkn::train
