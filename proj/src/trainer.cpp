#include "fkn/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "fkn/errors.hpp"
#include "fkn/io.hpp"

namespace fkn::train {

void TrainConfig::validate() const {
  if (batch_size <= loss_cut) throw ConfigError("batch_size must exceed loss_cut");
  if (loss_cut < 0) throw ConfigError("loss_cut must be >= 0");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (early_stop < 1) throw ConfigError("early_stop must be >= 1");
  if (loss != "mse") throw ConfigError("only the 'mse' loss is supported");
  if (correction_step_train < 1) throw ConfigError("correction_step_train must be >= 1");
  if (!(fd_step_rel > 0.0) || !(fd_step_abs_floor > 0.0)) {
    throw ConfigError("finite-difference steps must be positive");
  }
  if (!(p0_scale > 0.0)) throw ConfigError("p0_scale must be positive");
  network_config().validate();
  optimizer_config().validate();
}

net::NetworkConfig TrainConfig::network_config() const {
  net::NetworkConfig n;
  n.hidden_size = hidden_size;
  n.num_layers = num_layers;
  n.dropout_p = dropout;
  n.leaky_slope = leaky_slope;
  n.seed = seed;
  n.init = init;
  return n;
}

net::OptimizerConfig TrainConfig::optimizer_config() const {
  net::OptimizerConfig o;
  o.learning_rate = learning_rate;
  o.weight_decay = weight_decay;
  o.beta1 = adam_beta1;
  o.beta2 = adam_beta2;
  o.eps = adam_eps;
  o.plateau_factor = plateau_factor;
  o.plateau_patience = plateau_patience;
  o.min_lr = min_lr;
  return o;
}

FilterRunConfig TrainConfig::filter_config(double dt) const {
  return {dt, correction_step_train, true};
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"seed", c.seed},
          {"batch_size", c.batch_size},
          {"hidden_size", c.hidden_size},
          {"num_layers", c.num_layers},
          {"learning_rate", c.learning_rate},
          {"dropout", c.dropout},
          {"weight_decay", c.weight_decay},
          {"loss", c.loss},
          {"loss_cut", c.loss_cut},
          {"epochs", c.epochs},
          {"early_stop", c.early_stop},
          {"correction_step_train", c.correction_step_train},
          {"fd_step_rel", c.fd_step_rel},
          {"fd_step_abs_floor", c.fd_step_abs_floor},
          {"p0_scale", c.p0_scale},
          {"leaky_slope", c.leaky_slope},
          {"adam_beta1", c.adam_beta1},
          {"adam_beta2", c.adam_beta2},
          {"adam_eps", c.adam_eps},
          {"plateau_factor", c.plateau_factor},
          {"plateau_patience", c.plateau_patience},
          {"min_lr", c.min_lr},
          {"shuffle_batches", c.shuffle_batches},
          {"init", net::to_string(c.init)}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  const nlohmann::json known = to_json(c);
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw ConfigError("unknown train config key '" + key + "'");
  }
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("seed", c.seed);
  get("batch_size", c.batch_size);
  get("hidden_size", c.hidden_size);
  get("num_layers", c.num_layers);
  get("learning_rate", c.learning_rate);
  get("dropout", c.dropout);
  get("weight_decay", c.weight_decay);
  get("loss", c.loss);
  get("loss_cut", c.loss_cut);
  get("epochs", c.epochs);
  get("early_stop", c.early_stop);
  get("correction_step_train", c.correction_step_train);
  get("fd_step_rel", c.fd_step_rel);
  get("fd_step_abs_floor", c.fd_step_abs_floor);
  get("p0_scale", c.p0_scale);
  get("leaky_slope", c.leaky_slope);
  get("adam_beta1", c.adam_beta1);
  get("adam_beta2", c.adam_beta2);
  get("adam_eps", c.adam_eps);
  get("plateau_factor", c.plateau_factor);
  get("plateau_patience", c.plateau_patience);
  get("min_lr", c.min_lr);
  get("shuffle_batches", c.shuffle_batches);
  if (j.contains("init")) c.init = net::init_scheme_from_string(j.at("init").get<std::string>());
  return c;
}

LossValue sequence_loss(const FilterTrace& trace, std::span<const StateVector13> truth,
                        int loss_cut) {
  const std::size_t n = trace.size();
  if (n != truth.size()) throw ConfigError("sequence_loss: trace and truth lengths differ");
  if (loss_cut < 0 || n <= static_cast<std::size_t>(loss_cut)) {
    throw ConfigError("sequence_loss: sequence length must exceed loss_cut");
  }
  double sum = 0.0;
  for (std::size_t k = static_cast<std::size_t>(loss_cut); k < n; ++k) {
    sum += (trace.states[k] - truth[k]).squaredNorm();
  }
  LossValue v;
  v.mse = sum / (static_cast<double>(n - static_cast<std::size_t>(loss_cut)) * kStateDim);
  v.rmse = std::sqrt(v.mse);
  return v;
}

net::MatrixXd Batch::network_input() const {
  net::MatrixXd x(static_cast<Eigen::Index>(measurements.size()), kMeasDim);
  for (std::size_t i = 0; i < measurements.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = measurements[i].transpose();
  }
  return x;
}

std::vector<Batch> make_batches(const Dataset& ds, int batch_size, int loss_cut,
                                bool keep_remainder) {
  std::vector<Batch> out;
  const auto bs = static_cast<std::size_t>(batch_size);
  std::size_t start = 0;
  for (; start + bs <= ds.size(); start += bs) {
    out.push_back({ds.meas_span(start, start + bs), ds.truth_span(start, start + bs), ds.dt});
  }
  const std::size_t rest = ds.size() - start;
  if (keep_remainder && rest > static_cast<std::size_t>(loss_cut)) {
    out.push_back({ds.meas_span(start, ds.size()), ds.truth_span(start, ds.size()), ds.dt});
  }
  return out;
}

LossValue batch_loss(const Filter& filter, const Batch& batch, const SigmaParams& sigmas,
                     const TrainConfig& cfg) {
  const FilterState init = filter.init_from_measurement(batch.measurements.front(), cfg.p0_scale);
  const FilterTrace trace =
      filter.run_sequence(batch.measurements, sigmas, cfg.filter_config(batch.dt), init);
  return sequence_loss(trace, batch.truth, cfg.loss_cut);
}

FdGradient sigma_gradient_fd(const Filter& filter, const Batch& batch, const SigmaParams& sigmas,
                             const TrainConfig& cfg) {
  const Vector20 base = sigmas.flat();
  if (!sigmas.in_legal_box()) throw DomainError("sigma_gradient_fd: sigmas outside legal box");

  FdGradient out;
  auto loss_at = [&](const Vector20& s) {
    out.filter_runs += 1;
    return batch_loss(filter, batch, SigmaParams::from_flat(s), cfg).mse;
  };
  out.loss = loss_at(base);
  if (!std::isfinite(out.loss)) throw NumericalError("sigma_gradient_fd: non-finite base loss");

  for (int j = 0; j < kSigmaDim; ++j) {
    const double sj = base(j);
    const double h = std::max(cfg.fd_step_abs_floor, cfg.fd_step_rel * sj);
    const double room_down = sj - kSigmaFloor;
    const double room_up = kSigmaCeiling - sj;
    const double h_sym = std::min({h, room_down, room_up});
    Vector20 plus = base, minus = base;
    double g = 0.0;
    if (h_sym >= 1e-3 * h) {
      plus(j) = sj + h_sym;
      minus(j) = sj - h_sym;
      g = (loss_at(plus) - loss_at(minus)) / (2.0 * h_sym);
    } else if (room_up >= room_down) {
      // At the floor: forward difference.
      const double step = std::min(h, room_up);
      plus(j) = sj + step;
      g = (loss_at(plus) - out.loss) / step;
    } else {
      // At the ceiling: backward difference.
      const double step = std::min(h, room_down);
      minus(j) = sj - step;
      g = (out.loss - loss_at(minus)) / step;
    }
    if (!std::isfinite(g)) {
      throw NumericalError("sigma_gradient_fd: non-finite loss while perturbing sigma " +
                           std::to_string(j));
    }
    out.grad(j) = g;
  }
  return out;
}

bool TrainingMonitor::record(int epoch, double val) {
  if (val < best_ - 1e-12) {
    best_ = val;
    best_epoch_ = epoch;
    return true;
  }
  return false;
}

double train_epoch(net::NetworkParams& params, std::span<const Batch> batches,
                   const TrainConfig& cfg, double learning_rate, Rng& rng,
                   const Filter& filter) {
  if (batches.empty()) throw ConfigError("train_epoch: no training batches");
  const net::OptimizerConfig opt = cfg.optimizer_config();
  double sum_rmse = 0.0;
  for (std::size_t b = 0; b < batches.size(); ++b) {
    try {
      auto [y, cache] = net::forward(params, batches[b].network_input(), true, rng);
      const Vector20 pre_clip = net::column_abs_mean(y);
      const SigmaParams sigmas = net::reduce_to_sigmas(y);
      const FdGradient fd = sigma_gradient_fd(filter, batches[b], sigmas, cfg);
      const net::Gradients grads =
          net::backward(params, cache, fd.grad, pre_clip, cfg.weight_decay);
      net::adam_step(params, grads, opt, learning_rate);
      sum_rmse += std::sqrt(fd.loss);
    } catch (const NumericalError& e) {
      throw NumericalError("batch " + std::to_string(b) + ": " + e.what());
    }
  }
  return sum_rmse / static_cast<double>(batches.size());
}

EpochResult evaluate_batches(const net::NetworkParams& params, std::span<const Batch> batches,
                             const TrainConfig& cfg, const Filter& filter) {
  if (batches.empty()) throw ConfigError("evaluate_batches: no batches");
  Rng unused(0);
  EpochResult r;
  for (const Batch& batch : batches) {
    const auto [y, cache] = net::forward(params, batch.network_input(), false, unused);
    const SigmaParams sigmas = net::reduce_to_sigmas(y);
    r.rmse += batch_loss(filter, batch, sigmas, cfg).rmse;
    r.mean_sigmas += sigmas.flat();
  }
  const auto n = static_cast<double>(batches.size());
  r.rmse /= n;
  r.mean_sigmas /= n;
  return r;
}

FitResult fit(const DatasetSplit& data, const TrainConfig& cfg, const Filter& filter,
              const EpochCallback& on_epoch) {
  cfg.validate();
  std::vector<Batch> train_batches = make_batches(data.train, cfg.batch_size, cfg.loss_cut, false);
  const std::vector<Batch> val_batches =
      make_batches(data.val, cfg.batch_size, cfg.loss_cut, true);
  const std::vector<Batch> test_batches =
      make_batches(data.test, cfg.batch_size, cfg.loss_cut, true);
  if (train_batches.empty()) throw ConfigError("training split is shorter than batch_size");
  if (val_batches.empty()) throw ConfigError("validation split is not longer than loss_cut");
  if (test_batches.empty()) throw ConfigError("test split is not longer than loss_cut");

  FitResult result;
  result.rng.seed(cfg.seed);
  net::NetworkParams params = net::init_params(cfg.network_config());
  net::PlateauScheduler sched = net::PlateauScheduler::from(cfg.optimizer_config());
  TrainingMonitor monitor(cfg.early_stop);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    if (cfg.shuffle_batches) std::shuffle(train_batches.begin(), train_batches.end(), result.rng);

    EpochReport report;
    report.epoch = epoch;
    report.lr = sched.lr;
    report.train_rmse = train_epoch(params, train_batches, cfg, sched.lr, result.rng, filter);
    const EpochResult val = evaluate_batches(params, val_batches, cfg, filter);
    report.val_rmse = val.rmse;
    report.sigmas = val.mean_sigmas;
    report.ceiling_warning = (val.mean_sigmas.array() == kSigmaCeiling).all();

    if (monitor.record(epoch, val.rmse)) {
      result.checkpoint.best_val_rmse = val.rmse;
      result.checkpoint.best_epoch = epoch;
      result.checkpoint.best_params = params;
      result.checkpoint.best_sigmas = SigmaParams::from_flat(val.mean_sigmas);
    }
    sched = net::lr_plateau_update(sched, val.rmse);
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.epochs.push_back(report);
    if (on_epoch) on_epoch(report);
    if (monitor.should_stop(epoch)) break;
  }

  result.test_rmse =
      evaluate_batches(result.checkpoint.best_params, test_batches, cfg, filter).rmse;
  return result;
}

namespace {

nlohmann::json sigmas_json(const SigmaParams& s) {
  const Vector20 f = s.flat();
  return std::vector<double>(f.data(), f.data() + f.size());
}

}  // namespace

void write_run_outputs(const FitResult& result, const TrainConfig& cfg,
                       const std::filesystem::path& dir) {
  using io::format_double;
  std::filesystem::create_directories(dir);
  io::write_file_atomic(dir / "config.json", to_json(cfg).dump(2) + "\n");

  std::ostringstream epochs, sigmas, timing;
  epochs << "epoch,train_rmse,val_rmse,lr,ceiling_warning\n";
  sigmas << "epoch";
  for (int j = 0; j < kMeasDim; ++j) sigmas << ",sigma_r" << j;
  for (int j = 0; j < kStateDim; ++j) sigmas << ",sigma_q" << j;
  sigmas << "\n";
  timing << "epoch,wall_seconds\n";
  for (const EpochReport& e : result.epochs) {
    epochs << e.epoch << ',' << format_double(e.train_rmse) << ',' << format_double(e.val_rmse)
           << ',' << format_double(e.lr) << ',' << (e.ceiling_warning ? 1 : 0) << "\n";
    sigmas << e.epoch;
    for (int j = 0; j < kSigmaDim; ++j) sigmas << ',' << format_double(e.sigmas(j));
    sigmas << "\n";
    timing << e.epoch << ',' << format_double(e.wall_seconds) << "\n";
  }
  io::write_file_atomic(dir / "epochs.csv", epochs.str());
  io::write_file_atomic(dir / "sigmas.csv", sigmas.str());
  io::write_file_atomic(dir / "timing.csv", timing.str());

  nlohmann::json ckpt = net::checkpoint_json(result.checkpoint.best_params, result.rng);
  ckpt["sigmas"] = sigmas_json(result.checkpoint.best_sigmas);
  ckpt["best_epoch"] = result.checkpoint.best_epoch;
  ckpt["best_val_rmse"] = result.checkpoint.best_val_rmse;
  io::write_file_atomic(dir / "checkpoint.json", ckpt.dump());

  nlohmann::json res = {{"best_epoch", result.checkpoint.best_epoch},
                        {"best_val_rmse", result.checkpoint.best_val_rmse},
                        {"test_rmse", result.test_rmse},
                        {"epochs_run", result.epochs.size()},
                        {"sigmas", sigmas_json(result.checkpoint.best_sigmas)},
                        {"config", to_json(cfg)}};
  io::write_file_atomic(dir / "result.json", res.dump(2) + "\n");
}

nlohmann::json to_json(const GridSpec& g) {
  return {{"hidden_size", g.hidden_size},
          {"num_layers", g.num_layers},
          {"dropout", g.dropout},
          {"weight_decay", g.weight_decay}};
}

GridSpec grid_spec_from_json(const nlohmann::json& j) {
  GridSpec g;
  if (j.contains("hidden_size")) g.hidden_size = j.at("hidden_size").get<std::vector<int>>();
  if (j.contains("num_layers")) g.num_layers = j.at("num_layers").get<std::vector<int>>();
  if (j.contains("dropout")) g.dropout = j.at("dropout").get<std::vector<double>>();
  if (j.contains("weight_decay")) g.weight_decay = j.at("weight_decay").get<std::vector<double>>();
  if (g.size() == 0) throw ConfigError("grid must contain at least one value per axis");
  return g;
}

std::vector<SweepRow> grid_sweep(const GridSpec& grid, const TrainConfig& base,
                                 const DatasetSplit& data, const Filter& filter,
                                 const std::function<void(const SweepRow&)>& on_row) {
  if (grid.size() == 0) throw ConfigError("grid_sweep: empty grid");
  std::vector<SweepRow> rows;
  for (int hidden : grid.hidden_size) {
    for (int layers : grid.num_layers) {
      for (double dropout : grid.dropout) {
        for (double wd : grid.weight_decay) {
          TrainConfig cfg = base;
          cfg.hidden_size = hidden;
          cfg.num_layers = layers;
          cfg.dropout = dropout;
          cfg.weight_decay = wd;
          const FitResult fr = fit(data, cfg, filter);
          SweepRow row;
          row.hidden_size = hidden;
          row.num_layers = layers;
          row.dropout = dropout;
          row.weight_decay = wd;
          row.epochs_run = static_cast<int>(fr.epochs.size());
          row.best_epoch = fr.checkpoint.best_epoch;
          row.best_val_rmse = fr.checkpoint.best_val_rmse;
          row.test_rmse = fr.test_rmse;
          for (const EpochReport& e : fr.epochs) {
            const double m = e.sigmas.maxCoeff();
            row.max_sigma_per_epoch.push_back(m);
            if (m == kSigmaCeiling) row.overfit_flag = true;
          }
          if (on_row) on_row(row);
          rows.push_back(std::move(row));
        }
      }
    }
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  using io::format_double;
  std::ostringstream out;
  out << "hidden_size,num_layers,dropout,weight_decay,epochs_run,best_epoch,best_val_rmse,"
         "test_rmse,max_sigma_per_epoch,overfit_flag\n";
  for (const SweepRow& r : rows) {
    out << r.hidden_size << ',' << r.num_layers << ',' << format_double(r.dropout) << ','
        << format_double(r.weight_decay) << ',' << r.epochs_run << ',' << r.best_epoch << ','
        << format_double(r.best_val_rmse) << ',' << format_double(r.test_rmse) << ',';
    for (std::size_t i = 0; i < r.max_sigma_per_epoch.size(); ++i) {
      out << (i ? ";" : "") << format_double(r.max_sigma_per_epoch[i]);
    }
    out << ',' << (r.overfit_flag ? "true" : "false") << "\n";
  }
  return out.str();
}

}  // namespace fkn::train
