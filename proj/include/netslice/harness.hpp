#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "netslice/core.hpp"
#include "netslice/dataset.hpp"
#include "netslice/estimator.hpp"
#include "netslice/netsim.hpp"
#include "netslice/optimizer.hpp"

// Orchestrates the phased online experiment:
//   H0  exploration under seeded random partitions, KPI + sample collection
//   --  estimator training (exactly once; never retrained afterwards)
//   H1  all selected schemes run online, one simulator replica each, all
//       replicas cloned from the shared end-of-H0 state so every scheme sees
//       identical traffic and channel realizations
//   H2  the slice set changes at the boundary and the run continues
// plus metric computation (per-slice throughput vs requirement, satisfaction
// CDFs over a convergence window, per-slot utility) and artifact emission.

namespace netslice {

// configuration errors get exit code 1 in the CLI, runtime failures 2
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PhasePlan {
  long h0_steps = 200;
  long h1_steps = 400;
  long h2_steps = 400;
  std::vector<int> h1_slices = {1, 2, 4};
  std::vector<int> h2_slices = {1, 2, 3, 4};
};

struct EstimatorOptions {
  std::vector<int> hidden = {36, 24, 16, 16};
  int epochs = 200;
  double learning_rate = 1e-3;
  int batch_size = 64;
  double train_fraction = 0.75;
};

struct ExperimentConfig {
  SimConfig sim;  // catalog and dynamics; active set and seed come from here
  PhasePlan phases;
  std::vector<std::string> schemes = {"lagrange", "oracle", "traffic", "equal"};
  SolverParams solver;
  EstimatorOptions estimator;
  double oracle_grid_step = 0.05;
  double convergence_window = 0.5;  // trailing fraction of a phase
  std::string out_dir = "runs/out";
  std::uint64_t seed = 1;  // master seed; all stage seeds derive from it
  bool trace = false;      // dump optimizer traces for the lagrange scheme

  static ExperimentConfig desk_scale();  // 3 cells, 200/400/400
  static ExperimentConfig full_scale();  // 12 cells, 1000/2000/2000
};

void validate_experiment(const ExperimentConfig& config);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
void save_experiment_config(const ExperimentConfig& config, const std::filesystem::path& path);

// Right-continuous empirical CDF over [0,1]-valued satisfaction samples.
struct Cdf {
  std::vector<double> values;      // sorted unique sample points
  std::vector<double> cumulative;  // P(X <= value)

  double at(double v) const;       // 0 below the support, 1 at/above the top
  double mass_at(double v) const;  // P(X == v)
};
Cdf compute_cdf(std::span<const double> series);

struct SchemePhaseStats {
  std::string scheme;
  std::string phase;  // "H1" | "H2"
  std::map<int, double> mean_tput_norm;  // slice id -> mean throughput/req
  double p_full_satisfaction = 0.0;      // P(r = 1) over the convergence window
  double mean_satisfaction = 0.0;
  Cdf cdf;
};

struct SliceSeries {
  int slice_id = 0;
  double requirement = 0.0;
  std::vector<long> t;
  std::vector<double> throughput;  // mean over cells
};

struct MetricsTable {
  std::vector<SchemePhaseStats> stats;
  std::map<std::string, std::vector<SliceSeries>> throughput_series;
  std::map<std::string, std::pair<std::vector<long>, std::vector<double>>> utility_series;
  std::uint64_t feasibility_checks = 0;
  std::uint64_t feasibility_violations = 0;
};

// Everything a finished run leaves behind, in memory.
struct ExperimentArtifacts {
  MetricsTable metrics;
  TrainReport train_report;
  EstimatorModel model;
  std::filesystem::path out_dir;
};

// The full H0 / train / H1 / H2 pipeline; writes logs, dataset, model,
// metrics and figures under config.out_dir. Any stage failure is rethrown
// with the stage name; artifacts written so far stay on disk.
ExperimentArtifacts run_experiment(const ExperimentConfig& config);

// H0 only: explore, collect KPIs, assemble and augment the dataset.
struct CollectOutput {
  std::vector<KpiRecord> records;
  std::vector<Sample> samples;
  AssemblyStats stats;
};
CollectOutput collect_only(const ExperimentConfig& config);

// Metric recomputation from per-scheme KPI logs (the eval subcommand).
MetricsTable compute_metrics(const ExperimentConfig& config,
                             const std::map<std::string, std::vector<KpiRecord>>& logs);

void emit_metric_files(const MetricsTable& metrics, const std::filesystem::path& dir);
void emit_plot_files(const MetricsTable& metrics, const std::filesystem::path& dir);

std::vector<SliceSpec> catalog_specs(const SimConfig& sim);

}  // namespace netslice
