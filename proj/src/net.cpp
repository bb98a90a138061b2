#include "fkn/net.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "fkn/errors.hpp"
#include "fkn/io.hpp"

namespace fkn::net {

void NetworkConfig::validate() const {
  if (input_size != kMeasDim) throw ConfigError("network input_size must be 7");
  if (output_size != kSigmaDim) throw ConfigError("network output_size must be 20");
  if (num_layers < 1) throw ConfigError("num_layers must be >= 1");
  if (num_layers > 1 && hidden_size < 1) throw ConfigError("hidden_size must be >= 1");
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw ConfigError("dropout_p must be in [0, 1)");
  if (!(leaky_slope >= 0.0)) throw ConfigError("leaky_slope must be >= 0");
}

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(plateau_factor > 0.0 && plateau_factor < 1.0)) {
    throw ConfigError("plateau factor must be in (0, 1)");
  }
  if (weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
}

std::size_t NetworkParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

const char* to_string(InitScheme s) {
  return s == InitScheme::kTorchDefault ? "torch_default" : "he_uniform";
}

InitScheme init_scheme_from_string(const std::string& s) {
  if (s == "he_uniform") return InitScheme::kHeUniform;
  if (s == "torch_default") return InitScheme::kTorchDefault;
  throw ConfigError("unknown init scheme '" + s + "'");
}

NetworkParams init_params(const NetworkConfig& cfg) {
  cfg.validate();
  NetworkParams p;
  p.config = cfg;
  Rng rng(cfg.seed);
  int fan_in = cfg.input_size;
  for (int l = 0; l < cfg.num_layers; ++l) {
    const bool last = l == cfg.num_layers - 1;
    const int fan_out = last ? cfg.output_size : cfg.hidden_size;
    const bool torch = cfg.init == InitScheme::kTorchDefault;
    const double bound = torch ? 1.0 / std::sqrt(fan_in) : std::sqrt(6.0 / fan_in);
    std::uniform_real_distribution<double> uni(-bound, bound);
    Layer layer;
    layer.weight.resize(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r) {
      for (int c = 0; c < fan_in; ++c) layer.weight(r, c) = uni(rng);
    }
    layer.bias = VectorXd::Zero(fan_out);
    if (torch) {
      for (int r = 0; r < fan_out; ++r) layer.bias(r) = uni(rng);
    }
    AdamMoments m;
    m.m_weight = m.v_weight = MatrixXd::Zero(fan_out, fan_in);
    m.m_bias = m.v_bias = VectorXd::Zero(fan_out);
    p.layers.push_back(std::move(layer));
    p.moments.push_back(std::move(m));
    fan_in = fan_out;
  }
  return p;
}

std::pair<MatrixXd, ForwardCache> forward(const NetworkParams& params, const MatrixXd& batch,
                                          bool training, Rng& rng) {
  const NetworkConfig& cfg = params.config;
  if (batch.cols() != cfg.input_size) throw ConfigError("forward: batch must have 7 columns");
  if (!batch.allFinite()) throw NumericalError("forward: non-finite input");

  ForwardCache cache;
  cache.training = training;
  const double keep = 1.0 - cfg.dropout_p;
  const bool use_dropout = training && cfg.dropout_p > 0.0;
  std::bernoulli_distribution bern(keep);

  MatrixXd a = batch.transpose();
  const std::size_t n_layers = params.layers.size();
  for (std::size_t l = 0; l < n_layers; ++l) {
    const Layer& layer = params.layers[l];
    if (training) cache.inputs.push_back(a);
    MatrixXd z = layer.weight * a;
    z.colwise() += layer.bias;
    if (l + 1 == n_layers) {
      a = std::move(z);
      break;
    }
    MatrixXd h = z.unaryExpr([s = cfg.leaky_slope](double v) { return v >= 0.0 ? v : s * v; });
    if (use_dropout) {
      MatrixXd mask(h.rows(), h.cols());
      for (Eigen::Index j = 0; j < mask.cols(); ++j) {
        for (Eigen::Index i = 0; i < mask.rows(); ++i) mask(i, j) = bern(rng) ? 1.0 / keep : 0.0;
      }
      h.array() *= mask.array();
      if (training) cache.masks.push_back(std::move(mask));
    } else if (training) {
      cache.masks.push_back(MatrixXd::Ones(h.rows(), h.cols()));
    }
    if (training) cache.pre.push_back(std::move(z));
    a = std::move(h);
  }
  if (!a.allFinite()) throw NumericalError("forward: non-finite network output");
  MatrixXd y = a.transpose();
  if (training) cache.output = y;
  return {std::move(y), std::move(cache)};
}

Vector20 column_abs_mean(const MatrixXd& y) {
  if (y.rows() < 1 || y.cols() != kSigmaDim) throw ConfigError("expected an N x 20 output");
  return y.cwiseAbs().colwise().mean().transpose();
}

SigmaParams reduce_to_sigmas(const MatrixXd& y) {
  const Vector20 s = column_abs_mean(y).cwiseMax(kSigmaFloor).cwiseMin(kSigmaCeiling);
  return SigmaParams::from_flat(s);
}

Gradients backward(const NetworkParams& params, const ForwardCache& cache,
                   const Vector20& dloss_dsigma, const Vector20& sigma_pre_clip,
                   double weight_decay) {
  if (!cache.training || cache.inputs.size() != params.layers.size()) {
    throw UsageError("backward requires the cache of a training-mode forward pass");
  }
  const auto n = static_cast<double>(cache.output.rows());

  // d sigma_j / d Y_ij = sign(Y_ij) / N inside the clip range, 0 outside.
  Vector20 coeff;
  for (int j = 0; j < kSigmaDim; ++j) {
    const bool open = sigma_pre_clip(j) > kSigmaFloor && sigma_pre_clip(j) < kSigmaCeiling;
    coeff(j) = open ? dloss_dsigma(j) / n : 0.0;
  }
  MatrixXd dz(kSigmaDim, cache.output.rows());
  for (Eigen::Index i = 0; i < cache.output.rows(); ++i) {
    for (int j = 0; j < kSigmaDim; ++j) {
      const double yij = cache.output(i, j);
      const double sign = yij > 0.0 ? 1.0 : (yij < 0.0 ? -1.0 : 0.0);
      dz(j, i) = coeff(j) * sign;
    }
  }

  const double slope = params.config.leaky_slope;
  Gradients g;
  g.layers.resize(params.layers.size());
  for (std::size_t l = params.layers.size(); l-- > 0;) {
    const Layer& layer = params.layers[l];
    g.layers[l].weight = dz * cache.inputs[l].transpose();
    if (weight_decay != 0.0) g.layers[l].weight += weight_decay * layer.weight;
    g.layers[l].bias = dz.rowwise().sum();
    if (l == 0) break;
    MatrixXd da = layer.weight.transpose() * dz;
    const MatrixXd& pre = cache.pre[l - 1];
    da.array() *= cache.masks[l - 1].array();
    dz = da.binaryExpr(pre, [slope](double d, double z) { return z >= 0.0 ? d : slope * d; });
  }
  return g;
}

void adam_step(NetworkParams& params, const Gradients& grads, const OptimizerConfig& opt,
               double learning_rate) {
  if (grads.layers.size() != params.layers.size()) throw UsageError("gradient shape mismatch");
  params.step += 1;
  const double t = static_cast<double>(params.step);
  const double bc1 = 1.0 - std::pow(opt.beta1, t);
  const double bc2 = 1.0 - std::pow(opt.beta2, t);
  auto update = [&](auto& value, auto& m, auto& v, const auto& g) {
    m = opt.beta1 * m + (1.0 - opt.beta1) * g;
    v = opt.beta2 * v + (1.0 - opt.beta2) * g.cwiseProduct(g);
    value.array() -= learning_rate * (m.array() / bc1) / ((v.array() / bc2).sqrt() + opt.eps);
  };
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    Layer& layer = params.layers[l];
    AdamMoments& mom = params.moments[l];
    const Layer& g = grads.layers[l];
    if (g.weight.rows() != layer.weight.rows() || g.weight.cols() != layer.weight.cols() ||
        g.bias.size() != layer.bias.size()) {
      throw UsageError("gradient shape mismatch");
    }
    update(layer.weight, mom.m_weight, mom.v_weight, g.weight);
    update(layer.bias, mom.m_bias, mom.v_bias, g.bias);
  }
}

PlateauScheduler PlateauScheduler::from(const OptimizerConfig& opt) {
  PlateauScheduler s;
  s.lr = opt.learning_rate;
  s.factor = opt.plateau_factor;
  s.patience = opt.plateau_patience;
  s.min_lr = opt.min_lr;
  return s;
}

PlateauScheduler lr_plateau_update(PlateauScheduler s, double val_loss) {
  if (val_loss < s.best - 1e-12) {
    s.best = val_loss;
    s.bad_calls = 0;
    return s;
  }
  if (++s.bad_calls >= s.patience) {
    s.lr = std::max(s.lr * s.factor, s.min_lr);
    s.bad_calls = 0;
  }
  return s;
}

namespace {

nlohmann::json matrix_json(const MatrixXd& m) {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", flat}};
}

MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw ParseError("checkpoint matrix size mismatch", 0);
  }
  MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[static_cast<std::size_t>(r * cols + c)];
  }
  return m;
}

nlohmann::json vector_json(const VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

VectorXd vector_from_json(const nlohmann::json& j) {
  const auto vals = j.get<std::vector<double>>();
  return Eigen::Map<const VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

}  // namespace

nlohmann::json checkpoint_json(const NetworkParams& params, const Rng& rng) {
  const NetworkConfig& c = params.config;
  nlohmann::json j;
  j["config"] = {{"input_size", c.input_size},   {"output_size", c.output_size},
                 {"hidden_size", c.hidden_size}, {"num_layers", c.num_layers},
                 {"dropout_p", c.dropout_p},     {"leaky_slope", c.leaky_slope},
                 {"seed", c.seed},               {"init", to_string(c.init)}};
  j["adam_step"] = params.step;
  std::ostringstream rs;
  rs << rng;
  j["rng_state"] = rs.str();
  auto& layers = j["layers"] = nlohmann::json::array();
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const Layer& layer = params.layers[l];
    const AdamMoments& m = params.moments[l];
    layers.push_back({{"weight", matrix_json(layer.weight)},
                      {"bias", vector_json(layer.bias)},
                      {"m_weight", matrix_json(m.m_weight)},
                      {"v_weight", matrix_json(m.v_weight)},
                      {"m_bias", vector_json(m.m_bias)},
                      {"v_bias", vector_json(m.v_bias)}});
  }
  return j;
}

NetworkParams params_from_json(const nlohmann::json& j, Rng* rng) {
  NetworkParams p;
  const auto& c = j.at("config");
  p.config.input_size = c.at("input_size");
  p.config.output_size = c.at("output_size");
  p.config.hidden_size = c.at("hidden_size");
  p.config.num_layers = c.at("num_layers");
  p.config.dropout_p = c.at("dropout_p");
  p.config.leaky_slope = c.at("leaky_slope");
  p.config.seed = c.at("seed");
  if (c.contains("init")) p.config.init = init_scheme_from_string(c.at("init"));
  p.config.validate();
  p.step = j.at("adam_step");
  for (const auto& lj : j.at("layers")) {
    Layer layer{matrix_from_json(lj.at("weight")), vector_from_json(lj.at("bias"))};
    AdamMoments m{matrix_from_json(lj.at("m_weight")), matrix_from_json(lj.at("v_weight")),
                  vector_from_json(lj.at("m_bias")), vector_from_json(lj.at("v_bias"))};
    p.layers.push_back(std::move(layer));
    p.moments.push_back(std::move(m));
  }
  if (static_cast<int>(p.layers.size()) != p.config.num_layers) {
    throw ParseError("checkpoint layer count does not match num_layers", 0);
  }
  if (rng) {
    std::istringstream rs(j.at("rng_state").get<std::string>());
    rs >> *rng;
  }
  return p;
}

void write_checkpoint(const NetworkParams& params, const Rng& rng,
                      const std::filesystem::path& path) {
  io::write_file_atomic(path, checkpoint_json(params, rng).dump());
}

NetworkParams read_checkpoint(const std::filesystem::path& path, Rng* rng) {
  try {
    return params_from_json(nlohmann::json::parse(io::read_file(path)), rng);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what(), 0);
  }
}

}  // namespace fkn::net
