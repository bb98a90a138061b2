#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fkn/datagen.hpp"
#include "fkn/ekf.hpp"
#include "fkn/errors.hpp"
#include "fkn/eval.hpp"
#include "fkn/io.hpp"
#include "fkn/svg.hpp"
#include "fkn/trainer.hpp"

namespace fkn::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string> kSplits = {"all", "train", "val", "test"};

// Every option value as it was resolved after parsing, defaults included.
// Replaying these arguments reruns the command.
json invocation(const CLI::App& sub) {
  json args = json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt == sub.get_help_ptr()) continue;
    const std::string name = opt->get_single_name();
    if (opt->get_expected_max() == 0) {
      args[name] = opt->count() > 0;
    } else {
      args[name] = opt->count() > 0 ? opt->results().back() : opt->get_default_str();
    }
  }
  return {{"command", sub.get_name()}, {"args", args}};
}

fs::path sidecar(const fs::path& out) { return fs::path(out.string() + ".invocation.json"); }

void write_json(const fs::path& path, const json& j) {
  io::write_file_atomic(path, j.dump(2) + "\n");
}

json read_json(const fs::path& path) {
  const std::string text = io::read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
}

double parse_arg_double(const std::string& s, const std::string& what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError(what + ": not a number: '" + s + "'");
  }
  return v;
}

// "baseline", 20 comma-separated values, or a JSON file: checkpoint.json,
// result.json, a metrics report, or a bare sigma object/array.
SigmaParams resolve_sigmas(const std::string& source) {
  SigmaParams s;
  if (source == "baseline") {
    s = eval::baseline_sigmas();
  } else if (source.find(',') != std::string::npos) {
    const auto parts = io::split(source, ',');
    if (parts.size() != static_cast<std::size_t>(kSigmaDim)) {
      throw ConfigError("sigma list needs 20 values, got " + std::to_string(parts.size()));
    }
    Vector20 flat;
    for (int i = 0; i < kSigmaDim; ++i) {
      flat(i) = parse_arg_double(parts[static_cast<std::size_t>(i)], "sigma list");
    }
    s = SigmaParams::from_flat(flat);
  } else {
    const json j = read_json(source);
    try {
      if (j.is_object() && j.contains("sigmas")) {
        s = eval::sigmas_from_json(j.at("sigmas"));
      } else if (j.is_object() && j.contains("metadata")) {
        s = eval::sigmas_from_json(j.at("metadata").at("sigmas"));
      } else {
        s = eval::sigmas_from_json(j);
      }
    } catch (const json::exception& e) {
      throw ParseError(source + ": no sigmas found (" + e.what() + ")", 0);
    }
  }
  if (!s.in_legal_box()) throw ConfigError("sigmas outside [1e-8, 1]: " + source);
  return s;
}

Dataset select_split(const Dataset& ds, const std::string& split) {
  if (split == "all") return ds;
  DatasetSplit parts = split_dataset(ds);
  if (split == "train") return std::move(parts.train);
  if (split == "val") return std::move(parts.val);
  return std::move(parts.test);
}

json feature_array_json(const eval::FeatureArray& a) {
  json j = json::object();
  for (std::size_t i = 0; i < a.size(); ++i) j[eval::feature_names()[i]] = a[i];
  return j;
}

// Options shared by run-ekf and compare.
struct EvalOptions {
  std::string data;
  std::string split = "all";
  int correction_step = 10;
  std::size_t window_start = 0;
  double noise_scale = 1.0;
  bool regenerate = false;
  std::uint64_t noise_seed = 1;
  double sigma_pos = 0.1;
  double sigma_rot = 0.1;
  double p0_scale = kDefaultP0Scale;

  void add_to(CLI::App* sub) {
    sub->add_option("--data", data, "Dataset CSV")->required();
    sub->add_option("--split", split, "Portion of the dataset to run on")
        ->check(CLI::IsMember(kSplits));
    sub->add_option("--correction-step", correction_step, "Correct every N steps");
    sub->add_option("--window-start", window_start, "First step of the RMSE window");
    sub->add_option("--noise-scale", noise_scale, "Multiplier on the base noise sigmas");
    sub->add_flag("--regenerate", regenerate,
                  "Draw fresh measurements at noise-scale times the base sigmas");
    sub->add_option("--noise-seed", noise_seed, "Seed for regenerated noise");
    sub->add_option("--sigma-pos", sigma_pos, "Base position noise sigma (m)");
    sub->add_option("--sigma-rot", sigma_rot, "Base rotation noise sigma (rad)");
    sub->add_option("--p0-scale", p0_scale, "Initial covariance P0 = p0_scale * I");
  }

  eval::RobustnessSpec spec() const {
    eval::RobustnessSpec s;
    s.noise_scale = noise_scale;
    s.correction_step = correction_step;
    s.window_start = window_start;
    s.base_noise = {sigma_pos, sigma_rot, noise_seed};
    s.regenerate_noise = regenerate;
    s.p0_scale = p0_scale;
    s.validate();
    return s;
  }

  Dataset dataset() const {
    Dataset ds = select_split(read_csv(data), split);
    if (window_start >= ds.size()) {
      throw ConfigError("--window-start " + std::to_string(window_start) +
                        " is past the end of the dataset (" + std::to_string(ds.size()) +
                        " rows)");
    }
    return ds;
  }
};

struct GenOptions {
  std::string preset;
  std::uint64_t seed = 0;
  std::size_t n = 16000;
  double sigma_pos = 0.1;
  double sigma_rot = 0.1;
  bool raw = false;
  std::string out;
};

int run_gen(const GenOptions& o, const json& inv, std::ostream& out) {
  if (o.n < 2) throw ConfigError("--n must be at least 2");
  const TrajectoryConfig traj =
      o.preset == "ds1" ? TrajectoryConfig::ds1(o.n) : TrajectoryConfig::ds2(o.n);
  const NoiseConfig noise{o.sigma_pos, o.sigma_rot, o.seed};
  Dataset ds = add_noise(generate_truth(traj), noise);
  if (!o.raw) ds = standardize_positions(ds);
  write_csv(ds, o.out);
  write_json(sidecar(o.out), {{"invocation", inv}});
  out << "wrote " << ds.size() << " samples to " << o.out << "\n";
  return 0;
}

struct TrainOptions {
  std::string data;
  std::string config;
  std::optional<int> epochs;
  std::optional<double> lr;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int run_train(const TrainOptions& o, const json& inv, std::ostream& out) {
  train::TrainConfig cfg;
  if (!o.config.empty()) cfg = train::train_config_from_json(read_json(o.config));
  if (o.epochs) cfg.epochs = *o.epochs;
  if (o.lr) cfg.learning_rate = *o.lr;
  if (o.seed) cfg.seed = *o.seed;
  cfg.validate();
  const DatasetSplit split = split_dataset(read_csv(o.data));
  const train::FitResult r = train::fit(split, cfg, Ekf{}, [&](const train::EpochReport& e) {
    out << "epoch " << e.epoch << " train " << io::format_double(e.train_rmse) << " val "
        << io::format_double(e.val_rmse) << " lr " << io::format_double(e.lr)
        << (e.ceiling_warning ? " (all sigmas at ceiling)" : "") << "\n";
  });
  train::write_run_outputs(r, cfg, o.out);
  write_json(fs::path(o.out) / "invocation.json", {{"invocation", inv}});
  out << "best epoch " << r.checkpoint.best_epoch << " val "
      << io::format_double(r.checkpoint.best_val_rmse) << " test "
      << io::format_double(r.test_rmse) << "\n";
  return 0;
}

struct RunEkfOptions {
  EvalOptions eval;
  std::string sigmas = "baseline";
  std::string trace;
  std::string metrics;
};

int run_ekf(const RunEkfOptions& o, const json& inv, std::ostream& out) {
  const SigmaParams sigmas = resolve_sigmas(o.sigmas);
  const eval::RobustnessSpec spec = o.eval.spec();
  const eval::EvalRun run = eval::run_evaluation(Ekf{}, sigmas, o.eval.dataset(), spec);
  io::write_file_atomic(o.trace, eval::trace_csv(run.trace, run.dataset));
  json report = eval::to_json(run.metrics);
  report["band_coverage"] =
      feature_array_json(eval::band_coverage(run.trace, run.dataset, spec.window_start));
  report["invocation"] = inv;
  write_json(o.metrics, report);
  out << "steps " << run.trace.size() << " overall_rmse "
      << io::format_double(run.metrics.overall_rmse) << " settling_step "
      << run.metrics.settling_step << "\n";
  return 0;
}

struct EvalCmdOptions {
  std::string trace;
  std::string data;
  std::string split = "all";
  std::size_t window_start = 0;
  double threshold = 0.1;
  std::string out;
  std::string bands;
};

int run_eval(const EvalCmdOptions& o, const json& inv, std::ostream& out) {
  const FilterTrace trace = eval::read_trace_csv(o.trace);
  const Dataset ds = select_split(read_csv(o.data), o.split);
  if (trace.size() != ds.size()) {
    throw ConfigError("trace has " + std::to_string(trace.size()) + " rows, dataset split '" +
                      o.split + "' has " + std::to_string(ds.size()));
  }
  if (o.window_start >= ds.size()) throw ConfigError("--window-start past the end of the trace");
  const eval::MetricsReport m = eval::rmse_per_feature(trace, ds, o.window_start);
  const std::size_t settling = eval::settling_time(trace, o.threshold);
  json report = eval::to_json(m);
  report["settling_step"] = settling;
  report["settling_threshold_frac"] = o.threshold;
  report["band_coverage"] = feature_array_json(eval::band_coverage(trace, ds, o.window_start));
  report["band_coverage_post_settling"] =
      settling < ds.size() ? feature_array_json(eval::band_coverage(trace, ds, settling))
                           : json(nullptr);
  report["invocation"] = inv;
  write_json(o.out, report);

  if (!o.bands.empty()) {
    const auto bands = eval::uncertainty_bands(trace);
    std::ostringstream csv;
    csv << 't';
    for (const auto& n : eval::feature_names()) csv << ",band_" << n;
    csv << "\n";
    for (std::size_t k = 0; k < bands.size(); ++k) {
      csv << io::format_double(ds.time[k]);
      for (int i = 0; i < kStateDim; ++i) csv << ',' << io::format_double(bands[k](i));
      csv << "\n";
    }
    io::write_file_atomic(o.bands, csv.str());
  }
  out << "overall_rmse " << io::format_double(m.overall_rmse) << " settling_step ";
  if (settling < ds.size()) {
    out << settling << "\n";
  } else {
    out << "never (" << ds.size() << ")\n";
  }
  return 0;
}

struct CompareOptions {
  EvalOptions eval;
  std::string trained;
  std::string baseline = "baseline";
  std::string out;
  std::string csv;
};

int run_compare(const CompareOptions& o, const json& inv, std::ostream& out) {
  const SigmaParams trained = resolve_sigmas(o.trained);
  const SigmaParams baseline = resolve_sigmas(o.baseline);
  const eval::ComparisonReport rep =
      eval::compare(trained, baseline, o.eval.dataset(), o.eval.spec());
  json j = rep.to_json();
  j["invocation"] = inv;
  write_json(o.out, j);
  if (!o.csv.empty()) io::write_file_atomic(o.csv, rep.table_csv());
  out << rep.table_text();
  return 0;
}

struct SweepOptions {
  std::string data;
  std::string grid;
  std::string config;
  std::optional<int> epochs;
  std::string out;
};

int run_sweep(const SweepOptions& o, const json& inv, std::ostream& out) {
  const train::GridSpec grid =
      o.grid.empty() ? train::GridSpec{} : train::grid_spec_from_json(read_json(o.grid));
  train::TrainConfig base;
  if (!o.config.empty()) base = train::train_config_from_json(read_json(o.config));
  if (o.epochs) base.epochs = *o.epochs;
  base.validate();
  const DatasetSplit split = split_dataset(read_csv(o.data));
  std::size_t done = 0;
  const auto rows = train::grid_sweep(grid, base, split, Ekf{}, [&](const train::SweepRow& r) {
    out << "[" << ++done << "/" << grid.size() << "] hidden " << r.hidden_size << " layers "
        << r.num_layers << " dropout " << r.dropout << " wd " << r.weight_decay << " val "
        << io::format_double(r.best_val_rmse) << (r.overfit_flag ? " overfit" : "") << "\n";
  });
  io::write_file_atomic(o.out, train::sweep_csv(rows));
  write_json(sidecar(o.out),
             {{"invocation", inv}, {"grid", train::to_json(grid)}, {"config", train::to_json(base)}});
  return 0;
}

struct PlotOptions {
  std::string kind;
  std::string input;
  std::string out;
  std::string columns;
  std::string data;
  std::string split = "all";
  std::string title;
  bool log_y = false;
};

std::vector<double> column_values(const io::CsvTable& t, const std::string& name,
                                  const std::string& file) {
  const int c = t.column(name);
  if (c < 0) throw ParseError(file + ": no column '" + name + "'", 2);
  std::vector<double> v;
  v.reserve(t.rows.size());
  for (const auto& row : t.rows) v.push_back(row[static_cast<std::size_t>(c)]);
  return v;
}

int feature_index(const std::string& name) {
  const auto& names = eval::feature_names();
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw ConfigError("unknown feature '" + name + "'");
  return static_cast<int>(it - names.begin());
}

int run_plot(const PlotOptions& o, const json& inv, std::ostream& out) {
  const io::CsvTable t = io::read_csv_table(o.input);
  std::vector<svg::Series> series;
  svg::ChartOptions chart;
  chart.title = o.title;
  chart.log_y = o.log_y;

  if (o.kind == "epochs") {
    const auto x = column_values(t, "epoch", o.input);
    series.push_back({"train", x, column_values(t, "train_rmse", o.input)});
    series.push_back({"validation", x, column_values(t, "val_rmse", o.input)});
    chart.x_label = "epoch";
    chart.y_label = "RMSE";
  } else if (o.kind == "sigmas") {
    const auto x = column_values(t, "epoch", o.input);
    std::vector<std::string> cols;
    if (o.columns.empty()) {
      cols.assign(t.header.begin() + 1, t.header.end());
    } else {
      cols = io::split(o.columns, ',');
    }
    for (const auto& c : cols) series.push_back({c, x, column_values(t, c, o.input)});
    chart.x_label = "epoch";
    chart.y_label = "sigma";
  } else {
    const auto x = column_values(t, "t", o.input);
    std::optional<Dataset> ds;
    if (!o.data.empty()) {
      ds = select_split(read_csv(o.data), o.split);
      if (ds->size() != x.size()) throw ConfigError("trace and dataset split lengths differ");
    }
    for (const auto& f : io::split(o.columns.empty() ? "wx,wy,wz" : o.columns, ',')) {
      const int i = feature_index(f);
      const auto est = column_values(t, "est_" + f, o.input);
      const auto band = column_values(t, "band_" + f, o.input);
      std::vector<double> hi(est.size()), lo(est.size());
      for (std::size_t k = 0; k < est.size(); ++k) {
        hi[k] = est[k] + band[k];
        lo[k] = est[k] - band[k];
      }
      series.push_back({f, x, est});
      series.push_back({f + " +2sigma", x, hi, true});
      series.push_back({f + " -2sigma", x, lo, true});
      if (ds) {
        std::vector<double> truth(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) truth[k] = ds->ground_truth[k](i);
        series.push_back({f + " true", x, truth});
      }
    }
    chart.x_label = "t (s)";
    chart.y_label = "estimate";
  }
  io::write_file_atomic(o.out, svg::line_chart(series, chart));
  write_json(sidecar(o.out), {{"invocation", inv}});
  out << "wrote " << o.out << "\n";
  return 0;
}

int replay(const std::string& file, std::ostream& out, std::ostream& err) {
  const json j = read_json(file);
  const json& inv = j.contains("invocation") ? j.at("invocation") : j;
  try {
    const std::string command = inv.at("command").get<std::string>();
    if (command == "replay") throw ConfigError("cannot replay a replay");
    std::vector<std::string> args = {command};
    for (const auto& [name, value] : inv.at("args").items()) {
      if (value.is_boolean()) {
        if (value.get<bool>()) args.push_back("--" + name);
      } else if (!value.get<std::string>().empty()) {
        args.push_back("--" + name);
        args.push_back(value.get<std::string>());
      }
    }
    return dispatch(args, out, err);
  } catch (const json::exception& e) {
    throw ParseError(file + ": malformed invocation (" + std::string(e.what()) + ")", 0);
  }
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kalman filter noise tuning toolkit", "fkn"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  GenOptions gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "Generate a constant-twist dataset CSV");
  gen_cmd->add_option("--preset", gen.preset, "Trajectory preset")
      ->required()
      ->check(CLI::IsMember({"ds1", "ds2"}));
  gen_cmd->add_option("--seed", gen.seed, "Noise seed");
  gen_cmd->add_option("--n", gen.n, "Number of samples");
  gen_cmd->add_option("--sigma-pos", gen.sigma_pos, "Position noise sigma (m)");
  gen_cmd->add_option("--sigma-rot", gen.sigma_rot, "Rotation noise sigma (rad)");
  gen_cmd->add_flag("--raw", gen.raw, "Keep physical positions (no standardization)");
  gen_cmd->add_option("--out", gen.out, "Output CSV")->required();

  TrainOptions tr;
  CLI::App* train_cmd = app.add_subcommand("train", "Train the sigma network on a dataset");
  train_cmd->add_option("--data", tr.data, "Dataset CSV")->required();
  train_cmd->add_option("--config", tr.config, "Training config JSON");
  train_cmd->add_option("--epochs", tr.epochs, "Override epochs");
  train_cmd->add_option("--lr", tr.lr, "Override learning rate");
  train_cmd->add_option("--seed", tr.seed, "Override seed");
  train_cmd->add_option("--out", tr.out, "Run output directory")->required();

  RunEkfOptions ekf;
  CLI::App* ekf_cmd = app.add_subcommand("run-ekf", "Run the EKF and report metrics");
  ekf.eval.add_to(ekf_cmd);
  ekf_cmd->add_option("--sigmas", ekf.sigmas,
                      "baseline, 20 comma-separated values, or a JSON file with sigmas");
  ekf_cmd->add_option("--trace", ekf.trace, "Trace CSV output")->required();
  ekf_cmd->add_option("--metrics", ekf.metrics, "Metrics JSON output")->required();

  EvalCmdOptions ev;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Metrics, bands and settling for a trace");
  eval_cmd->add_option("--trace", ev.trace, "Trace CSV")->required();
  eval_cmd->add_option("--data", ev.data, "Dataset CSV")->required();
  eval_cmd->add_option("--split", ev.split, "Portion the trace was run on")
      ->check(CLI::IsMember(kSplits));
  eval_cmd->add_option("--window-start", ev.window_start, "First step of the RMSE window");
  eval_cmd->add_option("--threshold", ev.threshold, "Settling threshold fraction");
  eval_cmd->add_option("--out", ev.out, "Metrics JSON output")->required();
  eval_cmd->add_option("--bands", ev.bands, "Bands CSV output");

  CompareOptions cmp;
  CLI::App* cmp_cmd = app.add_subcommand("compare", "Compare two sigma sources");
  cmp.eval.add_to(cmp_cmd);
  cmp_cmd->add_option("--trained", cmp.trained, "Trained sigma source")->required();
  cmp_cmd->add_option("--baseline", cmp.baseline, "Reference sigma source");
  cmp_cmd->add_option("--out", cmp.out, "Comparison JSON output")->required();
  cmp_cmd->add_option("--csv", cmp.csv, "Comparison table CSV output");

  SweepOptions sw;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Grid sweep over network shapes");
  sweep_cmd->add_option("--data", sw.data, "Dataset CSV")->required();
  sweep_cmd->add_option("--grid", sw.grid, "Grid JSON (default: 24-combination grid)");
  sweep_cmd->add_option("--config", sw.config, "Base training config JSON");
  sweep_cmd->add_option("--epochs", sw.epochs, "Truncate every run to this many epochs");
  sweep_cmd->add_option("--out", sw.out, "Sweep CSV output")->required();

  PlotOptions pl;
  CLI::App* plot_cmd = app.add_subcommand("plot", "SVG line chart from an output CSV");
  plot_cmd->add_option("--kind", pl.kind, "Input type")
      ->required()
      ->check(CLI::IsMember({"epochs", "sigmas", "trace"}));
  plot_cmd->add_option("--input", pl.input, "epochs.csv, sigmas.csv or trace CSV")->required();
  plot_cmd->add_option("--out", pl.out, "SVG output")->required();
  plot_cmd->add_option("--columns", pl.columns,
                       "Comma-separated sigma columns or trace features (default wx,wy,wz)");
  plot_cmd->add_option("--data", pl.data, "Dataset CSV for ground truth (trace only)");
  plot_cmd->add_option("--split", pl.split, "Dataset portion matching the trace")
      ->check(CLI::IsMember(kSplits));
  plot_cmd->add_option("--title", pl.title, "Chart title");
  plot_cmd->add_flag("--log-y", pl.log_y, "Logarithmic y axis");

  std::string replay_file;
  CLI::App* replay_cmd =
      app.add_subcommand("replay", "Rerun a command from the invocation embedded in its output");
  replay_cmd->add_option("file", replay_file, "Report or .invocation.json file")->required();

  if (!args.empty() && !args.front().starts_with('-') && !app.get_subcommand_no_throw(args.front())) {
    err << "error: unknown subcommand '" << args.front() << "'\n\n" << app.help();
    return static_cast<int>(ExitCode::kUsage);
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return static_cast<int>(ExitCode::kOk);
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return static_cast<int>(ExitCode::kOk);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return static_cast<int>(ExitCode::kUsage);
  }

  try {
    if (*gen_cmd) return run_gen(gen, invocation(*gen_cmd), out);
    if (*train_cmd) return run_train(tr, invocation(*train_cmd), out);
    if (*ekf_cmd) return run_ekf(ekf, invocation(*ekf_cmd), out);
    if (*eval_cmd) return run_eval(ev, invocation(*eval_cmd), out);
    if (*cmp_cmd) return run_compare(cmp, invocation(*cmp_cmd), out);
    if (*sweep_cmd) return run_sweep(sw, invocation(*sweep_cmd), out);
    if (*plot_cmd) return run_plot(pl, invocation(*plot_cmd), out);
    return replay(replay_file, out, err);
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kNumerical);
  } catch (const ParseError& e) {
    err << "data error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kData);
  } catch (const DomainError& e) {
    err << "data error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kData);
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kUsage);
  } catch (const json::exception& e) {
    err << "data error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kData);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kData);
  }
}

}  // namespace fkn::cli
