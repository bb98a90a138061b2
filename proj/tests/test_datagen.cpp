#include <filesystem>
#include <fstream>
#include <random>

#include <doctest.h>

#include "fkn/datagen.hpp"
#include "fkn/ekf.hpp"
#include "fkn/errors.hpp"
#include "fkn/eval.hpp"
#include "fkn/io.hpp"

using namespace fkn;
namespace fs = std::filesystem;

namespace {

fs::path temp_path(const std::string& name) {
  return fs::temp_directory_path() / ("fkn_test_datagen_" + name);
}

bool same_dataset(const Dataset& a, const Dataset& b) {
  return a.dt == b.dt && a.time == b.time && a.measurements == b.measurements &&
         a.ground_truth == b.ground_truth && a.norm.mean == b.norm.mean && a.norm.std == b.norm.std;
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream(p) << s;
}

}  // namespace

TEST_CASE("generate_truth closed form") {
  TrajectoryConfig still;
  still.q0 = normalize({1, 1, 0, 0});
  still.n_samples = 50;
  const Dataset s = generate_truth(still);
  for (const auto& x : s.ground_truth) CHECK(quat_of(x) == still.q0);

  const Dataset ds1 = generate_truth(TrajectoryConfig::ds1());
  REQUIRE(ds1.size() == 16000);
  CHECK(ds1.dt == doctest::Approx(0.1));
  CHECK(ds1.time[15999] == doctest::Approx(1599.9));
  for (std::size_t k = 0; k < ds1.size(); k += 997) {
    CHECK(omega_of(ds1.ground_truth[k]).norm() == doctest::Approx(0.0748331).epsilon(1e-6));
    CHECK(omega_of(ds1.ground_truth[k]) == Vector3(0.02, 0.04, 0.06));
    CHECK(quat_of(ds1.ground_truth[k]).is_unit());
  }
  const Dataset ds2 = generate_truth(TrajectoryConfig::ds2(10));
  CHECK(omega_of(ds2.ground_truth[3]) == Vector3(0.1, 0.2, 0.3));

  TrajectoryConfig moving = TrajectoryConfig::ds1(20);
  moving.r0 = Vector3(1, 2, 3);
  moving.v = Vector3(0.5, 0, -1);
  const Dataset m = generate_truth(moving);
  CHECK(position_of(m.ground_truth[10]).isApprox(Vector3(1.5, 2, 2), 1e-14));
  CHECK(m.measurements[10] == m.ground_truth[10].head<kMeasDim>());
}

TEST_CASE("one-step model mismatch is second order") {
  for (const auto& cfg : {TrajectoryConfig::ds1(400), TrajectoryConfig::ds2(400)}) {
    const Dataset ds = generate_truth(cfg);
    const double w = cfg.omega_world.norm();
    for (std::size_t k = 0; k + 1 < ds.size(); ++k) {
      const Quaternion pred = normalize(quat_of(state_transition(ds.ground_truth[k], {ds.dt})));
      CHECK(geodesic_angle(quat_of(ds.ground_truth[k + 1]), pred) <= 0.5 * w * w * ds.dt * ds.dt);
    }
  }
}

TEST_CASE("add_noise") {
  const Dataset truth = generate_truth(TrajectoryConfig::ds1());
  const Dataset clean = add_noise(truth, {0.0, 0.0, 1});
  CHECK(clean.measurements == truth.measurements);

  const Dataset noisy = add_noise(truth, {0.1, 0.1, 1});
  for (int axis = 0; axis < 3; ++axis) {
    double s = 0, s2 = 0;
    for (std::size_t k = 0; k < noisy.size(); ++k) {
      const double e = noisy.measurements[k](idx::kR + axis) - truth.ground_truth[k](idx::kR + axis);
      s += e;
      s2 += e * e;
    }
    const double n = static_cast<double>(noisy.size());
    const double sd = std::sqrt((s2 - s * s / n) / (n - 1));
    CHECK(sd >= 0.097);
    CHECK(sd <= 0.103);
  }
  for (const auto& y : noisy.measurements) CHECK(quat_of(y).is_unit());
  CHECK(noisy.ground_truth == truth.ground_truth);

  const Dataset again = add_noise(truth, {0.1, 0.1, 1});
  CHECK(same_dataset(noisy, again));
  CHECK_FALSE(add_noise(truth, {0.1, 0.1, 2}).measurements == noisy.measurements);
  CHECK_THROWS_AS(add_noise(truth, {-0.1, 0.1, 1}), DomainError);
}

TEST_CASE("standardize_positions") {
  const Dataset noisy = add_noise(generate_truth(TrajectoryConfig::ds1(4000)), {0.1, 0.1, 2});
  const Dataset z = standardize_positions(noisy);
  const std::size_t train_end = SplitSpec{}.train_end(z.size());
  auto moments = [&](const Dataset& d, int axis) {
    double s = 0, s2 = 0;
    for (std::size_t k = 0; k < train_end; ++k) {
      const double r = d.measurements[k](idx::kR + axis);
      s += r;
      s2 += r * r;
    }
    const double n = static_cast<double>(train_end);
    return std::pair{s / n, std::sqrt(s2 / n - (s / n) * (s / n))};
  };
  for (int axis = 0; axis < 3; ++axis) {
    const auto [m, sd] = moments(z, axis);
    CHECK(std::abs(m) <= 1e-9);
    CHECK(std::abs(sd - 1) <= 1e-6);
  }
  // The stats compose, so the physical map is kept.
  const Dataset zz = standardize_positions(z);
  for (int axis = 0; axis < 3; ++axis) {
    const auto [m, sd] = moments(zz, axis);
    CHECK(std::abs(m) <= 1e-9);
    CHECK(std::abs(sd - 1) <= 1e-6);
  }
  CHECK(zz.norm.std.isApprox(z.norm.std, 1e-9));
  CHECK(zz.norm.mean.isApprox(z.norm.mean, 1e-9));

  for (std::size_t k = 0; k < z.size(); ++k) {
    for (int i = 0; i < 4; ++i) {
      CHECK(z.measurements[k](i) == noisy.measurements[k](i));
      CHECK(z.ground_truth[k](i) == noisy.ground_truth[k](i));
    }
    const Vector3 back = position_of(z.ground_truth[k]).cwiseProduct(z.norm.std) + z.norm.mean;
    CHECK((back - position_of(noisy.ground_truth[k])).cwiseAbs().maxCoeff() <= 1e-12);
  }

  TrajectoryConfig constant;
  constant.r0 = Vector3(3, -1, 2);
  constant.n_samples = 100;
  const Dataset c = standardize_positions(generate_truth(constant));
  CHECK(c.norm.std == Vector3::Ones());
  CHECK(c.norm.mean == Vector3(3, -1, 2));
  CHECK(position_of(c.ground_truth[50]) == Vector3::Zero());
}

TEST_CASE("velocities are scaled with the position map") {
  TrajectoryConfig cfg = TrajectoryConfig::ds1(1000);
  cfg.v = Vector3(0.01, -0.02, 0.0);
  const Dataset raw = add_noise(generate_truth(cfg), {0.1, 0.1, 3});
  const Dataset z = standardize_positions(raw);
  for (std::size_t k = 0; k + 1 < z.size(); ++k) {
    const StateVector13 next = state_transition(z.ground_truth[k], {z.dt});
    CHECK((position_of(next) - position_of(z.ground_truth[k + 1])).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("split_dataset") {
  const Dataset ds = generate_truth(TrajectoryConfig::ds1());
  const DatasetSplit s = split_dataset(ds);
  CHECK(s.train.size() == 12800);
  CHECK(s.val.size() == 1600);
  CHECK(s.test.size() == 1600);
  CHECK(s.val.time.front() == ds.time[12800]);

  const DatasetSplit small = split_dataset(generate_truth(TrajectoryConfig::ds1(10)));
  CHECK(small.train.size() == 8);
  CHECK(small.val.size() == 1);
  CHECK(small.test.size() == 1);

  std::vector<StateVector13> joined;
  for (const Dataset* part : {&s.train, &s.val, &s.test})
    joined.insert(joined.end(), part->ground_truth.begin(), part->ground_truth.end());
  CHECK(joined == ds.ground_truth);

  CHECK_THROWS_AS(split_dataset(ds, {0.5, 0.3, 0.3}), ConfigError);
}

TEST_CASE("dataset CSV round trip") {
  const Dataset ds = standardize_positions(add_noise(generate_truth(TrajectoryConfig::ds2(300)), {0.1, 0.1, 4}));
  const fs::path p = temp_path("roundtrip.csv");
  write_csv(ds, p);
  const Dataset back = read_csv(p);
  CHECK(same_dataset(ds, back));

  const std::string text = io::read_file(p);
  CHECK(text.rfind("# norm_mean=", 0) == 0);
  fs::path p2 = temp_path("roundtrip2.csv");
  write_csv(back, p2);
  CHECK(io::read_file(p2) == text);
  fs::remove(p);
  fs::remove(p2);
}

TEST_CASE("dataset CSV parse errors carry line numbers") {
  const Dataset ds = generate_truth(TrajectoryConfig::ds1(5));
  const fs::path p = temp_path("bad.csv");
  write_csv(ds, p);
  std::string text = io::read_file(p);
  std::vector<std::string> lines = io::split(text, '\n');

  SUBCASE("missing measurement column") {
    std::string header;
    int i = 0;
    for (const auto& c : dataset_csv_columns()) {
      if (c == "meas_rz") continue;
      header += (i++ ? "," : "") + c;
    }
    std::string t = lines[0] + "\n" + header + "\n";
    write_text(p, t);
    CHECK_THROWS_WITH_AS(read_csv(p), doctest::Contains("meas_rz"), ParseError);
    CHECK_THROWS_WITH_AS(read_csv(p), doctest::Contains("line 2"), ParseError);
  }
  SUBCASE("short row") {
    lines[4] = lines[4].substr(0, lines[4].rfind(','));
    std::string t;
    for (const auto& l : lines) t += l + "\n";
    write_text(p, t);
    CHECK_THROWS_WITH_AS(read_csv(p), doctest::Contains("line 5"), ParseError);
  }
  SUBCASE("non-finite value") {
    lines[3] = "nan" + lines[3].substr(lines[3].find(','));
    std::string t;
    for (const auto& l : lines) t += l + "\n";
    write_text(p, t);
    CHECK_THROWS_WITH_AS(read_csv(p), doctest::Contains("line 4"), ParseError);
  }
  SUBCASE("missing normalization comment") {
    std::string t;
    for (std::size_t i = 1; i < lines.size(); ++i) t += lines[i] + "\n";
    write_text(p, t);
    CHECK_THROWS_AS(read_csv(p), ParseError);
  }
  fs::remove(p);
}

TEST_CASE("baseline filter converges on generated datasets") {
  const Ekf ekf;
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    for (const auto& cfg : {TrajectoryConfig::ds1(2000), TrajectoryConfig::ds2(2000)}) {
      const Dataset ds = standardize_positions(add_noise(generate_truth(cfg), {0.1, 0.1, seed}));
      const FilterTrace trace = ekf.run_sequence(ds.measurements, eval::baseline_sigmas(), {ds.dt, 10, true},
                                                 ekf.init_from_measurement(ds.measurements[0]));
      const auto late = eval::rmse_window(trace, ds, 1000, 2000);
      for (int i = idx::kOmega; i < idx::kOmega + 3; ++i) CHECK(late[i] < 0.05);
    }
  }
}

TEST_CASE("standardization window does not change the omega ranking") {
  // Two candidate sigma sets; the one with lower omega RMSE must stay the
  // winner when the statistics come from a different, overlapping window.
  const Ekf ekf;
  const Dataset raw = add_noise(generate_truth(TrajectoryConfig::ds1(3000)), {0.1, 0.1, 9});
  SigmaParams loose = eval::baseline_sigmas();
  loose.sigma_q.segment<3>(idx::kOmega).setConstant(0.02);
  auto baseline_wins = [&](const Dataset& ds) {
    double sum[2] = {0, 0};
    int arm = 0;
    for (const SigmaParams& s : {eval::baseline_sigmas(), loose}) {
      const FilterTrace t = ekf.run_sequence(ds.measurements, s, {ds.dt, 10, true},
                                             ekf.init_from_measurement(ds.measurements[0]));
      const auto r = eval::rmse_window(t, ds, 0, ds.size());
      for (int i = idx::kOmega; i < idx::kOmega + 3; ++i) sum[arm] += r[i];
      ++arm;
    }
    return sum[0] < sum[1];
  };
  const bool reference = baseline_wins(standardize_positions(raw));

  std::mt19937_64 rng(10);
  std::uniform_int_distribution<std::size_t> start(0, 1000);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t b = start(rng);
    const NormStats stats = standardize_positions(raw.slice(b, b + 2000)).norm;
    Dataset ds = raw;
    for (auto& y : ds.measurements)
      y.segment<3>(idx::kR) = (y.segment<3>(idx::kR) - stats.mean).cwiseQuotient(stats.std);
    for (auto& x : ds.ground_truth) {
      x.segment<3>(idx::kR) = (x.segment<3>(idx::kR) - stats.mean).cwiseQuotient(stats.std);
      x.segment<3>(idx::kV) = x.segment<3>(idx::kV).cwiseQuotient(stats.std);
    }
    ds.norm = stats;
    CHECK(baseline_wins(ds) == reference);
  }
}
