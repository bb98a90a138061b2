#include <filesystem>
#include <random>

#include <doctest.h>

#include "fkn/errors.hpp"
#include "fkn/eval.hpp"
#include "fkn/io.hpp"
#include "fkn/trainer.hpp"
#include "pass_through_filter.hpp"

using namespace fkn;
using namespace fkn::train;
namespace fs = std::filesystem;

namespace {

Dataset desk_data(std::size_t n, std::uint64_t seed = 0) {
  return standardize_positions(add_noise(generate_truth(TrajectoryConfig::ds1(n)), {0.1, 0.1, seed}));
}

TrainConfig tiny_config() {
  TrainConfig c;
  c.batch_size = 150;
  c.loss_cut = 20;
  c.hidden_size = 3;
  c.num_layers = 2;
  c.epochs = 3;
  c.learning_rate = 1e-3;
  return c;
}

FilterTrace trace_of(const std::vector<StateVector13>& states) {
  FilterTrace t;
  t.states = states;
  t.cov_diagonals.assign(states.size(), StateVector13::Zero());
  t.corrected.assign(states.size(), true);
  return t;
}

}  // namespace

TEST_CASE("sequence_loss") {
  const Dataset ds = desk_data(300);
  const auto truth = ds.truth_span(0, 300);
  CHECK(sequence_loss(trace_of(ds.ground_truth), truth, 0).mse == 0.0);

  std::vector<StateVector13> garbage = ds.ground_truth;
  for (int k = 0; k < 100; ++k) garbage[k].setConstant(1e6);
  CHECK(sequence_loss(trace_of(garbage), truth, 100).mse == 0.0);

  std::vector<StateVector13> offset = ds.ground_truth;
  for (auto& x : offset) x.array() += 0.25;
  const LossValue v = sequence_loss(trace_of(offset), truth, 100);
  CHECK(v.mse == doctest::Approx(0.0625).epsilon(1e-12));
  CHECK(v.rmse == doctest::Approx(0.25).epsilon(1e-12));

  CHECK_THROWS_AS(sequence_loss(trace_of(ds.ground_truth), truth, 300), ConfigError);
  CHECK_THROWS_AS(sequence_loss(trace_of(ds.ground_truth), ds.truth_span(0, 299), 10), ConfigError);
}

TEST_CASE("make_batches") {
  const Dataset ds = desk_data(1300);
  CHECK(make_batches(ds, 512, 100, false).size() == 2);
  const auto with_rest = make_batches(ds, 512, 100, true);
  REQUIRE(with_rest.size() == 3);
  CHECK(with_rest[2].measurements.size() == 276);
  CHECK(with_rest[1].truth.data() == ds.ground_truth.data() + 512);
  CHECK(make_batches(ds.slice(0, 1100), 512, 100, true).size() == 2);
  CHECK(make_batches(ds.slice(0, 400), 512, 100, true).size() == 1);
  CHECK(make_batches(ds.slice(0, 400), 512, 100, false).empty());

  const net::MatrixXd x = with_rest[0].network_input();
  CHECK(x.rows() == 512);
  CHECK(x.row(7).transpose() == ds.measurements[7]);
}

TEST_CASE("sigma_gradient_fd cost and flat directions") {
  const Dataset ds = desk_data(200);
  const auto batches = make_batches(ds, 150, 20, false);
  TrainConfig cfg = tiny_config();
  const FdGradient g = sigma_gradient_fd(Ekf{}, batches[0], eval::baseline_sigmas(), cfg);
  CHECK(g.filter_runs == 41);
  CHECK(std::isfinite(g.loss));
  CHECK(g.loss == batch_loss(Ekf{}, batches[0], eval::baseline_sigmas(), cfg).mse);

  const FdGradient flat = sigma_gradient_fd(testing::PassThroughFilter{}, batches[0], eval::baseline_sigmas(), cfg);
  CHECK(flat.grad.cwiseAbs().maxCoeff() <= 1e-8);

  SigmaParams outside = eval::baseline_sigmas();
  outside.sigma_r(0) = 2.0;
  CHECK_THROWS_AS(sigma_gradient_fd(Ekf{}, batches[0], outside, cfg), DomainError);
}

TEST_CASE("sigma_gradient_fd at the box edges") {
  const Dataset ds = desk_data(200);
  const auto batches = make_batches(ds, 150, 20, false);
  const TrainConfig cfg = tiny_config();
  SigmaParams s = eval::baseline_sigmas();
  s.sigma_q(0) = kSigmaFloor;
  s.sigma_r(1) = kSigmaCeiling;
  const FdGradient g = sigma_gradient_fd(Ekf{}, batches[0], s, cfg);
  CHECK(g.filter_runs == 39);
  CHECK(g.grad.allFinite());
}

TEST_CASE("sigma_gradient_fd matches a refined difference") {
  const Dataset ds = desk_data(200, 3);
  const auto batches = make_batches(ds, 200, 20, false);
  TrainConfig cfg = tiny_config();
  const SigmaParams s = eval::baseline_sigmas();
  const FdGradient coarse = sigma_gradient_fd(Ekf{}, batches[0], s, cfg);
  cfg.fd_step_rel /= 10;
  cfg.fd_step_abs_floor /= 10;
  const FdGradient fine = sigma_gradient_fd(Ekf{}, batches[0], s, cfg);
  CHECK((coarse.grad - fine.grad).norm() <= 1e-2 * fine.grad.norm());
}

TEST_CASE("chained gradient matches weight-space finite differences") {
  const Dataset ds = desk_data(150, 5);
  const auto batches = make_batches(ds, 150, 20, false);
  REQUIRE(batches.size() == 1);
  TrainConfig cfg = tiny_config();
  cfg.init = net::InitScheme::kTorchDefault;
  net::NetworkParams p = net::init_params(cfg.network_config());
  const net::MatrixXd x = batches[0].network_input();
  Rng rng(1);

  auto pipeline = [&](const net::NetworkParams& q) {
    Rng unused(0);
    const SigmaParams s = net::reduce_to_sigmas(net::forward(q, x, false, unused).first);
    return batch_loss(Ekf{}, batches[0], s, cfg).mse;
  };
  auto [y, cache] = net::forward(p, x, true, rng);
  const Vector20 pre = net::column_abs_mean(y);
  REQUIRE(((pre.array() > kSigmaFloor) && (pre.array() < kSigmaCeiling)).all());
  const FdGradient fd = sigma_gradient_fd(Ekf{}, batches[0], net::reduce_to_sigmas(y), cfg);
  const net::Gradients chained = net::backward(p, cache, fd.grad, pre);

  std::vector<double> a, b;
  const double h = 1e-6;
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    auto probe = [&](double& theta, double analytic) {
      const double keep = theta;
      theta = keep + h;
      const double up = pipeline(p);
      theta = keep - h;
      const double down = pipeline(p);
      theta = keep;
      a.push_back(analytic);
      b.push_back((up - down) / (2 * h));
    };
    for (Eigen::Index i = 0; i < p.layers[l].weight.size(); ++i)
      probe(p.layers[l].weight.data()[i], chained.layers[l].weight.data()[i]);
    for (Eigen::Index i = 0; i < p.layers[l].bias.size(); ++i)
      probe(p.layers[l].bias.data()[i], chained.layers[l].bias.data()[i]);
  }
  const Eigen::Map<Eigen::VectorXd> va(a.data(), static_cast<Eigen::Index>(a.size()));
  const Eigen::Map<Eigen::VectorXd> vb(b.data(), static_cast<Eigen::Index>(b.size()));
  CHECK((va - vb).norm() <= 2e-2 * vb.norm());
}

TEST_CASE("TrainingMonitor early-stop arithmetic") {
  TrainingMonitor improving(20);
  int last = 0;
  for (int e = 1; e <= 100; ++e) {
    improving.record(e, 1.0 / e);
    last = e;
    if (improving.should_stop(e)) break;
  }
  CHECK(last == 100);
  CHECK(improving.best_epoch() == 100);

  TrainingMonitor flat(20);
  for (int e = 1; e <= 100; ++e) {
    flat.record(e, e < 3 ? 1.0 / e : 1.0 / 3);
    last = e;
    if (flat.should_stop(e)) break;
  }
  CHECK(last == 23);
  CHECK(flat.best_epoch() == 3);
}

TEST_CASE("train_epoch with zero learning rate leaves parameters unchanged") {
  const Dataset ds = desk_data(600);
  const auto batches = make_batches(ds, 150, 20, false);
  TrainConfig cfg = tiny_config();
  net::NetworkParams p = net::init_params(cfg.network_config());
  const net::NetworkParams start = p;
  Rng rng(0);
  const double rmse = train_epoch(p, batches, cfg, 0.0, rng, Ekf{});
  CHECK(std::isfinite(rmse));
  CHECK(rmse > 0);
  for (std::size_t l = 0; l < p.layers.size(); ++l) CHECK(p.layers[l].weight == start.layers[l].weight);
}

TEST_CASE("fit is deterministic and keeps the best model") {
  const DatasetSplit split = split_dataset(desk_data(2000, 1));
  TrainConfig cfg = tiny_config();
  cfg.epochs = 6;
  const FitResult a = fit(split, cfg, Ekf{});
  const FitResult b = fit(split, cfg, Ekf{});
  REQUIRE(a.epochs.size() == b.epochs.size());
  for (std::size_t i = 0; i < a.epochs.size(); ++i) {
    CHECK(a.epochs[i].train_rmse == b.epochs[i].train_rmse);
    CHECK(a.epochs[i].val_rmse == b.epochs[i].val_rmse);
    CHECK(a.epochs[i].sigmas == b.epochs[i].sigmas);
    CHECK(a.epochs[i].lr == b.epochs[i].lr);
  }
  CHECK(a.test_rmse == b.test_rmse);
  CHECK(a.rng == b.rng);

  double best = std::numeric_limits<double>::infinity();
  int best_epoch = 0;
  for (const auto& e : a.epochs) {
    if (e.val_rmse < best - 1e-12) {
      best = e.val_rmse;
      best_epoch = e.epoch;
    }
  }
  CHECK(a.checkpoint.best_epoch == best_epoch);
  CHECK(a.checkpoint.best_val_rmse == best);
  CHECK(a.checkpoint.best_sigmas.flat() == a.epochs[best_epoch - 1].sigmas);
  CHECK(a.checkpoint.best_sigmas.in_legal_box());
}

TEST_CASE("fit rejects short splits and bad configs") {
  TrainConfig cfg = tiny_config();
  CHECK_THROWS_AS(fit(split_dataset(desk_data(150)), cfg, Ekf{}), ConfigError);
  cfg.loss_cut = 150;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = tiny_config();
  cfg.loss = "l1";
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("loss cut never raises the validation RMSE of a settled filter") {
  const DatasetSplit split = split_dataset(desk_data(8000, 2));
  TrainConfig cfg;
  for (const Batch& b : make_batches(split.val, 512, 100, true)) {
    cfg.loss_cut = 100;
    const double cut = batch_loss(Ekf{}, b, eval::baseline_sigmas(), cfg).rmse;
    cfg.loss_cut = 0;
    const double full = batch_loss(Ekf{}, b, eval::baseline_sigmas(), cfg).rmse;
    CHECK(cut <= full);
  }
}

TEST_CASE("train config JSON") {
  TrainConfig c;
  c.learning_rate = 3e-4;
  c.seed = 42;
  c.init = net::InitScheme::kHeUniform;
  const TrainConfig back = train_config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
  CHECK(back.init == net::InitScheme::kHeUniform);
  CHECK(to_json(TrainConfig{})["learning_rate"] == 1e-5);
  CHECK(to_json(TrainConfig{})["epochs"] == 100);
  CHECK_THROWS_AS(train_config_from_json({{"lr", 1.0}}), ConfigError);
  CHECK(train_config_from_json({{"epochs", 5}}).epochs == 5);
}

TEST_CASE("run outputs") {
  const DatasetSplit split = split_dataset(desk_data(2000, 1));
  TrainConfig cfg = tiny_config();
  cfg.epochs = 2;
  const FitResult r = fit(split, cfg, Ekf{});
  const fs::path dir = fs::temp_directory_path() / "fkn_test_run";
  fs::remove_all(dir);
  write_run_outputs(r, cfg, dir);
  for (const char* f : {"config.json", "epochs.csv", "sigmas.csv", "timing.csv", "checkpoint.json", "result.json"}) {
    CHECK(fs::exists(dir / f));
  }
  const io::CsvTable sig = io::read_csv_table(dir / "sigmas.csv");
  CHECK(sig.header.size() == 21);
  CHECK(sig.header[1] == "sigma_r0");
  CHECK(sig.header[8] == "sigma_q0");
  CHECK(sig.header[20] == "sigma_q12");
  CHECK(sig.rows.size() == 2);
  const auto res = nlohmann::json::parse(io::read_file(dir / "result.json"));
  CHECK(res["best_epoch"] == r.checkpoint.best_epoch);
  CHECK(res["sigmas"].size() == 20);
  CHECK(train_config_from_json(res["config"]).hidden_size == 3);

  Rng rng;
  const net::NetworkParams p = net::read_checkpoint(dir / "checkpoint.json", &rng);
  CHECK(p.layers[0].weight == r.checkpoint.best_params.layers[0].weight);

  const std::string epochs = io::read_file(dir / "epochs.csv");
  const fs::path dir2 = fs::temp_directory_path() / "fkn_test_run2";
  write_run_outputs(fit(split, cfg, Ekf{}), cfg, dir2);
  CHECK(io::read_file(dir2 / "epochs.csv") == epochs);
  CHECK(io::read_file(dir2 / "checkpoint.json") == io::read_file(dir / "checkpoint.json"));
  fs::remove_all(dir);
  fs::remove_all(dir2);
}

TEST_CASE("grid sweep") {
  CHECK(GridSpec{}.size() == 24);
  const GridSpec g = grid_spec_from_json(to_json(GridSpec{}));
  CHECK(g.hidden_size == std::vector<int>{512, 1024});
  CHECK(g.num_layers == std::vector<int>{6, 7, 8});

  const DatasetSplit split = split_dataset(desk_data(2000, 1));
  TrainConfig cfg = tiny_config();
  cfg.epochs = 2;
  GridSpec one;
  one.hidden_size = {3};
  one.num_layers = {2};
  one.dropout = {0};
  one.weight_decay = {0};
  const auto rows = grid_sweep(one, cfg, split, Ekf{});
  REQUIRE(rows.size() == 1);
  const FitResult plain = fit(split, cfg, Ekf{});
  CHECK(rows[0].best_val_rmse == plain.checkpoint.best_val_rmse);
  CHECK(rows[0].test_rmse == plain.test_rmse);
  CHECK(rows[0].epochs_run == 2);

  GridSpec small;
  small.hidden_size = {2, 3};
  small.num_layers = {1, 2};
  small.dropout = {0, 0.5};
  small.weight_decay = {0};
  const auto many = grid_sweep(small, cfg, split, Ekf{});
  CHECK(many.size() == 8);
  for (const auto& r : many) {
    bool hit = false;
    for (double m : r.max_sigma_per_epoch) hit = hit || m == kSigmaCeiling;
    CHECK(r.overfit_flag == hit);
    CHECK(r.max_sigma_per_epoch.size() == static_cast<std::size_t>(r.epochs_run));
  }
  const std::string csv = sweep_csv(many);
  const auto lines = io::split(csv, '\n');
  CHECK(lines[0] ==
        "hidden_size,num_layers,dropout,weight_decay,epochs_run,best_epoch,best_val_rmse,test_rmse,"
        "max_sigma_per_epoch,overfit_flag");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 9);

  SweepRow flagged;
  flagged.max_sigma_per_epoch = {0.5, 1.0};
  flagged.overfit_flag = true;
  CHECK(sweep_csv({flagged}).find(",0.5;1,true") != std::string::npos);
}

TEST_CASE("training RMSE drops over the first ten epochs on desk data") {
  const DatasetSplit split = split_dataset(desk_data(4000));
  TrainConfig cfg;
  cfg.epochs = 10;
  std::vector<double> train;
  fit(split, cfg, Ekf{}, [&](const EpochReport& e) { train.push_back(e.train_rmse); });
  REQUIRE(train.size() == 10);
  CHECK(train[9] < train[0]);
}
