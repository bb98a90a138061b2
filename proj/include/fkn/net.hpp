#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "fkn/dynamics.hpp"

namespace fkn::net {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class InitScheme {
  kHeUniform,     // W ~ U(+-sqrt(6 / fan_in)), b = 0
  kTorchDefault,  // W, b ~ U(+-1 / sqrt(fan_in))
};

const char* to_string(InitScheme s);
/// Accepts "he_uniform" or "torch_default".
InitScheme init_scheme_from_string(const std::string& s);

struct NetworkConfig {
  int input_size = kMeasDim;
  int output_size = kSigmaDim;
  int hidden_size = 512;
  // num_layers - 1 hidden blocks (affine, LeakyReLU, dropout) plus the
  // affine output layer.
  int num_layers = 7;
  double dropout_p = 0.0;
  double leaky_slope = 0.01;
  std::uint64_t seed = 0;
  InitScheme init = InitScheme::kHeUniform;

  void validate() const;
};

struct Layer {
  MatrixXd weight;  // out x in
  VectorXd bias;
};

struct AdamMoments {
  MatrixXd m_weight, v_weight;
  VectorXd m_bias, v_bias;
};

struct NetworkParams {
  NetworkConfig config;
  std::vector<Layer> layers;
  std::vector<AdamMoments> moments;
  std::int64_t step = 0;

  std::size_t parameter_count() const;
};

struct Gradients {
  std::vector<Layer> layers;
};

/// Activations are stored feature-major (features x batch).
struct ForwardCache {
  bool training = false;
  std::vector<MatrixXd> inputs;  // input to each affine layer
  std::vector<MatrixXd> pre;     // pre-activations of hidden layers
  std::vector<MatrixXd> masks;   // scaled dropout masks of hidden layers
  MatrixXd output;               // batch x output_size
};

struct OptimizerConfig {
  double learning_rate = 1e-5;
  double weight_decay = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double plateau_factor = 0.5;
  int plateau_patience = 5;
  double min_lr = 1e-8;

  void validate() const;
};

NetworkParams init_params(const NetworkConfig& cfg);

/// batch: N x input_size (one sample per row). Returns Y (N x output_size)
/// and, in training mode, the cache needed by backward.
std::pair<MatrixXd, ForwardCache> forward(const NetworkParams& params, const MatrixXd& batch,
                                          bool training, Rng& rng);

/// Column means of |Y| before clipping.
Vector20 column_abs_mean(const MatrixXd& y);

/// Column-wise mean of |Y| clipped to [kSigmaFloor, kSigmaCeiling]; the
/// first 7 entries become sigma_r, the remaining 13 sigma_q.
SigmaParams reduce_to_sigmas(const MatrixXd& y);

Gradients backward(const NetworkParams& params, const ForwardCache& cache,
                   const Vector20& dloss_dsigma, const Vector20& sigma_pre_clip,
                   double weight_decay = 0.0);

void adam_step(NetworkParams& params, const Gradients& grads, const OptimizerConfig& opt,
               double learning_rate);

struct PlateauScheduler {
  double lr = 1e-5;
  double factor = 0.5;
  int patience = 5;
  double min_lr = 1e-8;
  double best = std::numeric_limits<double>::infinity();
  int bad_calls = 0;

  static PlateauScheduler from(const OptimizerConfig& opt);
};

PlateauScheduler lr_plateau_update(PlateauScheduler state, double val_loss);

/// JSON checkpoint: config, layer arrays (row-major), Adam state and the
/// serialized RNG engine. Floating-point values round-trip exactly.
nlohmann::json checkpoint_json(const NetworkParams& params, const Rng& rng);
NetworkParams params_from_json(const nlohmann::json& j, Rng* rng = nullptr);
void write_checkpoint(const NetworkParams& params, const Rng& rng,
                      const std::filesystem::path& path);
NetworkParams read_checkpoint(const std::filesystem::path& path, Rng* rng = nullptr);

}  // namespace fkn::net
