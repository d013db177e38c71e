// netslice command line: collect / train / run / eval / plot.
// Exit codes: 0 success, 1 configuration error, 2 runtime failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "netslice/csv.hpp"
#include "netslice/dataset.hpp"
#include "netslice/estimator.hpp"
#include "netslice/harness.hpp"
#include "netslice/netsim.hpp"
#include "netslice/rng.hpp"

namespace {

using namespace netslice;

struct CommonOptions {
  std::string config_path;
  std::string scale = "desk";
  std::string out_dir;
  std::string schemes;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool trace = false;
};

ExperimentConfig resolve_config(const CommonOptions& opts) {
  ExperimentConfig config;
  if (!opts.config_path.empty()) {
    config = load_experiment_config(opts.config_path);
  } else if (opts.scale == "desk") {
    config = ExperimentConfig::desk_scale();
  } else if (opts.scale == "full") {
    config = ExperimentConfig::full_scale();
  } else {
    throw ConfigError("unknown scale '" + opts.scale + "' (expected full or desk)");
  }
  if (opts.seed_set) config.seed = opts.seed;
  if (!opts.out_dir.empty()) config.out_dir = opts.out_dir;
  if (opts.trace) config.trace = true;
  if (!opts.schemes.empty()) {
    config.schemes.clear();
    std::string token;
    for (char c : opts.schemes + ",") {
      if (c == ',') {
        if (!token.empty()) config.schemes.push_back(token);
        token.clear();
      } else {
        token.push_back(c);
      }
    }
  }
  validate_experiment(config);
  return config;
}

int cmd_collect(const CommonOptions& opts) {
  const ExperimentConfig config = resolve_config(opts);
  const auto out = collect_only(config);
  const std::filesystem::path dir(config.out_dir);
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / "kpi_explore.csv");
    write_kpi_csv(os, out.records);
  }
  save_samples(dir / "dataset.csv", out.samples);
  std::printf("collected %zu KPI records over %ld slots\n", out.records.size(),
              config.phases.h0_steps);
  std::printf("dataset: %zu samples (%zu raw, %zu skipped for missing history)\n",
              out.samples.size(), out.stats.emitted, out.stats.skipped);
  std::printf("wrote %s and %s\n", (dir / "dataset.csv").c_str(), (dir / "kpi_explore.csv").c_str());
  return 0;
}

int cmd_train(const CommonOptions& opts, const std::string& dataset_path,
              const std::string& model_path) {
  const ExperimentConfig config = resolve_config(opts);
  const auto samples = load_samples(dataset_path);
  if (samples.empty()) throw ConfigError("dataset " + dataset_path + " is empty");
  const auto [train_set, test_set] =
      split(samples, config.estimator.train_fraction, derive(config.seed, Stream::split));
  const int h = samples.front().input.history_depth();
  EstimatorModel model =
      EstimatorModel::make(h, config.estimator.hidden, derive(config.seed, Stream::estimator_init));
  TrainOptions options;
  options.epochs = config.estimator.epochs;
  options.learning_rate = config.estimator.learning_rate;
  options.batch_size = config.estimator.batch_size;
  options.seed = derive(config.seed, Stream::estimator_shuffle);
  const TrainReport report = model.train(train_set, test_set, options);
  model.save(model_path);
  std::printf("trained %d epochs on %zu samples (held out %zu)\n", report.epochs,
              train_set.size(), test_set.size());
  std::printf("train MAE %.4f, held-out MAE %.4f, %.1fs\n", report.train_mae, report.test_mae,
              report.wall_seconds);
  std::printf("wrote %s\n", model_path.c_str());
  return 0;
}

int cmd_run(const CommonOptions& opts) {
  const ExperimentConfig config = resolve_config(opts);
  const auto artifacts = run_experiment(config);
  std::printf("estimator held-out MAE: %.4f\n", artifacts.train_report.test_mae);
  for (const SchemePhaseStats& s : artifacts.metrics.stats)
    std::printf("%-8s %s  P(sat=1)=%.3f  mean sat=%.3f\n", s.scheme.c_str(), s.phase.c_str(),
                s.p_full_satisfaction, s.mean_satisfaction);
  std::printf("feasibility: %llu checks, %llu violations\n",
              static_cast<unsigned long long>(artifacts.metrics.feasibility_checks),
              static_cast<unsigned long long>(artifacts.metrics.feasibility_violations));
  std::printf("artifacts in %s\n", artifacts.out_dir.c_str());
  return 0;
}

std::map<std::string, std::vector<KpiRecord>> load_logs(const ExperimentConfig& config,
                                                        const std::filesystem::path& dir) {
  std::map<std::string, std::vector<KpiRecord>> logs;
  for (const std::string& scheme : config.schemes) {
    const auto path = dir / ("kpi_" + scheme + ".csv");
    std::ifstream is(path);
    if (!is) throw std::runtime_error("missing log " + path.string() + "; run the experiment first");
    logs[scheme] = read_kpi_csv(is);
  }
  return logs;
}

int cmd_eval(const CommonOptions& opts, const std::string& logs_dir) {
  CommonOptions resolved = opts;
  const std::filesystem::path dir(logs_dir);
  if (resolved.config_path.empty()) {
    const auto embedded = dir / "run_config.json";
    if (std::filesystem::exists(embedded)) resolved.config_path = embedded.string();
  }
  ExperimentConfig config = resolve_config(resolved);
  const auto logs = load_logs(config, dir);
  MetricsTable metrics = compute_metrics(config, logs);
  emit_metric_files(metrics, dir);
  for (const SchemePhaseStats& s : metrics.stats)
    std::printf("%-8s %s  P(sat=1)=%.3f  mean sat=%.3f\n", s.scheme.c_str(), s.phase.c_str(),
                s.p_full_satisfaction, s.mean_satisfaction);
  std::printf("metrics recomputed into %s\n", dir.c_str());
  return 0;
}

int cmd_plot(const CommonOptions& opts, const std::string& logs_dir) {
  CommonOptions resolved = opts;
  const std::filesystem::path dir(logs_dir);
  if (resolved.config_path.empty()) {
    const auto embedded = dir / "run_config.json";
    if (std::filesystem::exists(embedded)) resolved.config_path = embedded.string();
  }
  ExperimentConfig config = resolve_config(resolved);
  const auto logs = load_logs(config, dir);
  MetricsTable metrics = compute_metrics(config, logs);
  emit_plot_files(metrics, dir);
  std::size_t count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.path().extension() == ".svg") ++count;
  std::printf("wrote %zu figures into %s\n", count, dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"neural-assisted inter-slice resource partitioning experiments"};
  app.require_subcommand(1);

  CommonOptions opts;
  std::string dataset_path, model_path = "model.json", logs_dir;

  const auto add_common = [&](CLI::App* cmd, bool with_trace = false) {
    cmd->add_option("--config", opts.config_path, "experiment config JSON");
    cmd->add_option("--scale", opts.scale, "built-in preset when no config is given: full|desk");
    cmd->add_option("--out", opts.out_dir, "output directory override");
    cmd->add_option("--seed", opts.seed, "master seed override")
        ->each([&](const std::string&) { opts.seed_set = true; });
    cmd->add_option("--schemes", opts.schemes, "comma-separated scheme list");
    if (with_trace) cmd->add_flag("--trace", opts.trace, "dump optimizer traces");
  };

  auto* collect = app.add_subcommand("collect", "run the exploration phase, emit the dataset");
  add_common(collect);
  auto* train = app.add_subcommand("train", "train the estimator from a dataset file");
  add_common(train);
  train->add_option("--dataset", dataset_path, "dataset CSV path")->required();
  train->add_option("--model", model_path, "output model path");
  auto* run = app.add_subcommand("run", "full phased experiment");
  add_common(run, true);
  auto* eval = app.add_subcommand("eval", "recompute metrics from per-scheme logs");
  add_common(eval);
  eval->add_option("--logs", logs_dir, "run directory holding kpi_<scheme>.csv")->required();
  auto* plot = app.add_subcommand("plot", "render figures from per-scheme logs");
  add_common(plot);
  plot->add_option("--logs", logs_dir, "run directory holding kpi_<scheme>.csv")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // bad flags are configuration errors
  }

  try {
    if (collect->parsed()) return cmd_collect(opts);
    if (train->parsed()) return cmd_train(opts, dataset_path, model_path);
    if (run->parsed()) return cmd_run(opts);
    if (eval->parsed()) return cmd_eval(opts, logs_dir);
    if (plot->parsed()) return cmd_plot(opts, logs_dir);
  } catch (const netslice::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
