#include "netslice/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "netslice/csv.hpp"
#include "netslice/rng.hpp"
#include "netslice/schemes.hpp"
#include "netslice/svg.hpp"

namespace netslice {

namespace {

const char* kSchemeColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"};

// Exploration over the whole feasible body, mixed so the estimator sees
// every decision-relevant corner:
//   70%  uniform over {x >= 0, sum <= 1} (n+1 exponential spacings, one slack)
//   30%  sparse Dirichlet(0.3) face draws, which place several coordinates
//        near 0 and anchor the steep left edge of the satisfaction curve
// plus an occasional exact zero, the corner the grid oracle probes.
std::vector<double> explore_partition(Rng& rng, std::size_t n) {
  std::vector<double> e(n);
  double total = 0.0;
  if (rng.uniform01() < 0.7) {
    for (double& v : e) {
      double u = rng.uniform01();
      if (u <= 0.0) u = 0x1.0p-53;
      v = -std::log(u);
      total += v;
    }
    double u = rng.uniform01();
    if (u <= 0.0) u = 0x1.0p-53;
    total += -std::log(u);
  } else {
    for (double& v : e) {
      // Gamma(0.3) via Johnk-style rejection-free transform: U^(1/alpha) * Exp
      double u = rng.uniform01();
      if (u <= 0.0) u = 0x1.0p-53;
      double w = rng.uniform01();
      if (w <= 0.0) w = 0x1.0p-53;
      v = std::pow(u, 1.0 / 0.3) * -std::log(w);
      total += v;
    }
  }
  if (total <= 0.0) return std::vector<double>(n, 1.0 / static_cast<double>(n));
  for (double& v : e) v /= total;
  if (n > 1 && rng.uniform01() < 0.15)
    e[static_cast<std::size_t>(rng.uniform_int(0, static_cast<long>(n - 1)))] = 0.0;
  return e;
}

struct FeasibilityGate {
  std::uint64_t checks = 0;
  std::uint64_t violations = 0;

  void require(const PartitionVector& p, const std::string& who, long t, int cell) {
    ++checks;
    if (auto violation = validate_partition(p)) {
      ++violations;
      throw std::runtime_error(who + " produced an infeasible partition at t=" +
                               std::to_string(t) + " cell=" + std::to_string(cell) + ": " +
                               violation->message);
    }
  }
};

void write_text_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << body;
  if (!os) throw std::runtime_error("write to " + path.string() + " failed");
}

}  // namespace

std::vector<SliceSpec> catalog_specs(const SimConfig& sim) {
  std::vector<SliceSpec> specs;
  specs.reserve(sim.catalog.size());
  for (const SliceTraits& t : sim.catalog) specs.push_back(t.spec);
  return specs;
}

// ---------------------------------------------------------------------------
// Config plumbing
// ---------------------------------------------------------------------------

ExperimentConfig ExperimentConfig::desk_scale() {
  ExperimentConfig config;
  config.sim = SimConfig::defaults();
  config.sim.num_cells = 3;
  config.out_dir = "runs/desk";
  return config;
}

ExperimentConfig ExperimentConfig::full_scale() {
  ExperimentConfig config;
  config.sim = SimConfig::defaults();
  config.phases.h0_steps = 1000;
  config.phases.h1_steps = 2000;
  config.phases.h2_steps = 2000;
  config.out_dir = "runs/full";
  return config;
}

void validate_experiment(const ExperimentConfig& config) {
  try {
    validate_config(config.sim);
    validate_params(config.solver);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const PhasePlan& p = config.phases;
  if (p.h0_steps < 1 || p.h1_steps < 1 || p.h2_steps < 1)
    throw ConfigError("every phase needs at least one step");
  if (p.h0_steps <= config.sim.history_depth)
    throw ConfigError("H0 must outlast the history depth to yield any training samples");
  if (p.h1_slices.empty() || p.h2_slices.empty())
    throw ConfigError("phase slice sets must be non-empty");
  if (p.h1_slices == p.h2_slices)
    throw ConfigError("H2 must change the slice set (that is the experiment)");
  const auto specs = catalog_specs(config.sim);
  for (int id : p.h1_slices)
    if (std::none_of(specs.begin(), specs.end(),
                     [&](const SliceSpec& s) { return s.slice_id == id; }))
      throw ConfigError("H1 slice " + std::to_string(id) + " not in catalog");
  for (int id : p.h2_slices)
    if (std::none_of(specs.begin(), specs.end(),
                     [&](const SliceSpec& s) { return s.slice_id == id; }))
      throw ConfigError("H2 slice " + std::to_string(id) + " not in catalog");
  if (config.schemes.empty()) throw ConfigError("no schemes selected");
  for (const std::string& name : config.schemes)
    if (name != "lagrange" && name != "oracle" && name != "traffic" && name != "equal")
      throw ConfigError("unknown scheme '" + name + "'");
  if (!(config.convergence_window > 0.0 && config.convergence_window <= 1.0))
    throw ConfigError("convergence_window must lie in (0,1]");
  if (!(config.estimator.train_fraction > 0.0 && config.estimator.train_fraction < 1.0))
    throw ConfigError("train_fraction must lie strictly between 0 and 1");
  if (config.estimator.epochs < 1 || config.estimator.batch_size < 1)
    throw ConfigError("invalid estimator options");
  const double levels = 1.0 / config.oracle_grid_step;
  if (std::abs(levels - std::llround(levels)) > 1e-9)
    throw ConfigError("oracle_grid_step must divide 1");
}

namespace {

nlohmann::json sim_to_json(const SimConfig& sim) {
  nlohmann::json j;
  j["num_cells"] = sim.num_cells;
  j["bandwidth_mhz"] = sim.bandwidth_mhz;
  j["coupling"] = sim.coupling;
  j["history_depth"] = sim.history_depth;
  j["step_minutes"] = sim.step_minutes;
  j["cqi_min"] = sim.cqi_min;
  j["cqi_max"] = sim.cqi_max;
  j["cqi_walk_prob"] = sim.cqi_walk_prob;
  j["base_delay_ms"] = sim.base_delay_ms;
  j["delay_headroom"] = sim.delay_headroom;
  j["initial_active"] = sim.initial_active;
  nlohmann::json slices = nlohmann::json::array();
  for (const SliceTraits& t : sim.catalog) {
    nlohmann::json s;
    s["id"] = t.spec.slice_id;
    s["throughput_req_mbps"] = t.spec.throughput_req_mbps;
    s["delay_req_ms"] = t.spec.delay_req_ms;
    s["mean_users"] = t.mean_users;
    s["demand_per_user_mbps"] = t.demand_per_user_mbps;
    s["mask"] = t.mask.values;
    slices.push_back(std::move(s));
  }
  j["slices"] = std::move(slices);
  return j;
}

SimConfig sim_from_json(const nlohmann::json& j) {
  SimConfig sim = SimConfig::defaults();
  sim.num_cells = j.value("num_cells", sim.num_cells);
  sim.bandwidth_mhz = j.value("bandwidth_mhz", sim.bandwidth_mhz);
  sim.coupling = j.value("coupling", sim.coupling);
  sim.history_depth = j.value("history_depth", sim.history_depth);
  sim.step_minutes = j.value("step_minutes", sim.step_minutes);
  sim.cqi_min = j.value("cqi_min", sim.cqi_min);
  sim.cqi_max = j.value("cqi_max", sim.cqi_max);
  sim.cqi_walk_prob = j.value("cqi_walk_prob", sim.cqi_walk_prob);
  sim.base_delay_ms = j.value("base_delay_ms", sim.base_delay_ms);
  sim.delay_headroom = j.value("delay_headroom", sim.delay_headroom);
  const int mask_period = j.value("mask_period", 96);
  if (j.contains("slices")) {
    sim.catalog.clear();
    for (const auto& s : j.at("slices")) {
      SliceTraits t;
      t.spec.slice_id = s.at("id").get<int>();
      t.spec.throughput_req_mbps = s.at("throughput_req_mbps").get<double>();
      t.spec.delay_req_ms = s.at("delay_req_ms").get<double>();
      t.mean_users = s.at("mean_users").get<double>();
      t.demand_per_user_mbps = s.at("demand_per_user_mbps").get<double>();
      if (s.contains("mask"))
        t.mask.values = s.at("mask").get<std::vector<double>>();
      else
        t.mask = default_traffic_mask(t.spec.slice_id, mask_period);
      sim.catalog.push_back(std::move(t));
    }
  }
  if (j.contains("initial_active"))
    sim.initial_active = j.at("initial_active").get<std::vector<int>>();
  return sim;
}

}  // namespace

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + std::string(e.what()));
  }
  ExperimentConfig config;
  try {
    if (j.contains("sim")) config.sim = sim_from_json(j.at("sim"));
    if (j.contains("phases")) {
      const auto& p = j.at("phases");
      config.phases.h0_steps = p.value("h0_steps", config.phases.h0_steps);
      config.phases.h1_steps = p.value("h1_steps", config.phases.h1_steps);
      config.phases.h2_steps = p.value("h2_steps", config.phases.h2_steps);
      if (p.contains("h1_slices")) config.phases.h1_slices = p.at("h1_slices").get<std::vector<int>>();
      if (p.contains("h2_slices")) config.phases.h2_slices = p.at("h2_slices").get<std::vector<int>>();
    }
    if (j.contains("schemes")) config.schemes = j.at("schemes").get<std::vector<std::string>>();
    if (j.contains("solver")) {
      const auto& s = j.at("solver");
      config.solver.starts = s.value("starts", config.solver.starts);
      config.solver.noise_mean = s.value("noise_mean", config.solver.noise_mean);
      config.solver.noise_variance = s.value("noise_variance", config.solver.noise_variance);
      config.solver.primal_step = s.value("primal_step", config.solver.primal_step);
      config.solver.dual_step = s.value("dual_step", config.solver.dual_step);
      config.solver.decay = s.value("decay", config.solver.decay);
      config.solver.max_iterations = s.value("max_iterations", config.solver.max_iterations);
      config.solver.tolerance = s.value("tolerance", config.solver.tolerance);
      config.solver.initial_multiplier =
          s.value("initial_multiplier", config.solver.initial_multiplier);
    }
    if (j.contains("estimator")) {
      const auto& e = j.at("estimator");
      if (e.contains("hidden")) config.estimator.hidden = e.at("hidden").get<std::vector<int>>();
      config.estimator.epochs = e.value("epochs", config.estimator.epochs);
      config.estimator.learning_rate = e.value("learning_rate", config.estimator.learning_rate);
      config.estimator.batch_size = e.value("batch_size", config.estimator.batch_size);
      config.estimator.train_fraction = e.value("train_fraction", config.estimator.train_fraction);
    }
    config.oracle_grid_step = j.value("oracle_grid_step", config.oracle_grid_step);
    config.convergence_window = j.value("convergence_window", config.convergence_window);
    config.out_dir = j.value("out_dir", config.out_dir);
    config.seed = j.value("seed", config.seed);
    config.trace = j.value("trace", config.trace);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(path.string() + ": " + std::string(e.what()));
  }
  return config;
}

void save_experiment_config(const ExperimentConfig& config, const std::filesystem::path& path) {
  nlohmann::json j;
  j["sim"] = sim_to_json(config.sim);
  j["phases"] = {{"h0_steps", config.phases.h0_steps},
                 {"h1_steps", config.phases.h1_steps},
                 {"h2_steps", config.phases.h2_steps},
                 {"h1_slices", config.phases.h1_slices},
                 {"h2_slices", config.phases.h2_slices}};
  j["schemes"] = config.schemes;
  j["solver"] = {{"starts", config.solver.starts},
                 {"noise_mean", config.solver.noise_mean},
                 {"noise_variance", config.solver.noise_variance},
                 {"primal_step", config.solver.primal_step},
                 {"dual_step", config.solver.dual_step},
                 {"decay", config.solver.decay},
                 {"max_iterations", config.solver.max_iterations},
                 {"tolerance", config.solver.tolerance},
                 {"initial_multiplier", config.solver.initial_multiplier}};
  j["estimator"] = {{"hidden", config.estimator.hidden},
                    {"epochs", config.estimator.epochs},
                    {"learning_rate", config.estimator.learning_rate},
                    {"batch_size", config.estimator.batch_size},
                    {"train_fraction", config.estimator.train_fraction}};
  j["oracle_grid_step"] = config.oracle_grid_step;
  j["convergence_window"] = config.convergence_window;
  j["out_dir"] = config.out_dir;
  j["seed"] = config.seed;
  j["trace"] = config.trace;
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << j.dump(1) << '\n';
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

Cdf compute_cdf(std::span<const double> series) {
  if (series.empty()) throw std::invalid_argument("cannot build a CDF from an empty series");
  std::vector<double> sorted(series.begin(), series.end());
  for (double v : sorted)
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("satisfaction series values must lie in [0,1]");
  std::sort(sorted.begin(), sorted.end());
  Cdf cdf;
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (!cdf.values.empty() && sorted[i] == cdf.values.back())
      cdf.cumulative.back() = static_cast<double>(i + 1) / n;
    else {
      cdf.values.push_back(sorted[i]);
      cdf.cumulative.push_back(static_cast<double>(i + 1) / n);
    }
  }
  return cdf;
}

double Cdf::at(double v) const {
  double result = 0.0;
  for (std::size_t i = 0; i < values.size() && values[i] <= v; ++i) result = cumulative[i];
  return result;
}

double Cdf::mass_at(double v) const {
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i] == v) return cumulative[i] - (i ? cumulative[i - 1] : 0.0);
  return 0.0;
}

MetricsTable compute_metrics(const ExperimentConfig& config,
                             const std::map<std::string, std::vector<KpiRecord>>& logs) {
  const auto specs = catalog_specs(config.sim);
  const auto spec_for = [&](int slice_id) -> const SliceSpec& {
    for (const SliceSpec& s : specs)
      if (s.slice_id == slice_id) return s;
    throw std::invalid_argument("no SliceSpec for slice " + std::to_string(slice_id));
  };
  const long h1_begin = config.phases.h0_steps;
  const long h1_end = h1_begin + config.phases.h1_steps;
  const long h2_end = h1_end + config.phases.h2_steps;

  MetricsTable metrics;
  for (const auto& [scheme, records] : logs) {
    if (scheme == "explore") continue;

    // per-phase aggregation
    for (const bool first_phase : {true, false}) {
      const char* phase = first_phase ? "H1" : "H2";
      const long begin = first_phase ? h1_begin : h1_end;
      const long end = first_phase ? h1_end : h2_end;
      const long window_begin =
          end - static_cast<long>(std::llround(config.convergence_window *
                                               static_cast<double>(end - begin)));
      SchemePhaseStats stats;
      stats.scheme = scheme;
      stats.phase = phase;
      std::map<int, std::pair<double, long>> tput_acc;  // slice -> (sum ratio, count)
      std::vector<double> window_sat;
      for (const KpiRecord& r : records) {
        if (r.t < begin || r.t >= end) continue;
        const SliceSpec& spec = spec_for(r.slice_id);
        auto& acc = tput_acc[r.slice_id];
        acc.first += r.throughput_mbps / spec.throughput_req_mbps;
        acc.second += 1;
        if (r.t >= window_begin)
          window_sat.push_back(satisfaction({r.throughput_mbps, r.delay_ms}, spec).value);
      }
      if (window_sat.empty()) continue;  // phase absent from the log
      for (const auto& [slice_id, acc] : tput_acc)
        stats.mean_tput_norm[slice_id] = acc.first / static_cast<double>(acc.second);
      stats.cdf = compute_cdf(window_sat);
      stats.p_full_satisfaction = stats.cdf.mass_at(1.0);
      double mean = 0.0;
      for (double v : window_sat) mean += v;
      stats.mean_satisfaction = mean / static_cast<double>(window_sat.size());
      metrics.stats.push_back(std::move(stats));
    }

    // per-slot series
    std::map<long, double> utility;
    std::map<int, std::map<long, std::pair<double, long>>> tput_by_slice;
    for (const KpiRecord& r : records) {
      const SliceSpec& spec = spec_for(r.slice_id);
      utility[r.t] += std::log1p(satisfaction({r.throughput_mbps, r.delay_ms}, spec).value);
      auto& cell_acc = tput_by_slice[r.slice_id][r.t];
      cell_acc.first += r.throughput_mbps;
      cell_acc.second += 1;
    }
    auto& series = metrics.utility_series[scheme];
    for (const auto& [t, u] : utility) {
      series.first.push_back(t);
      series.second.push_back(u);
    }
    auto& slice_series = metrics.throughput_series[scheme];
    for (const auto& [slice_id, by_t] : tput_by_slice) {
      SliceSeries s;
      s.slice_id = slice_id;
      s.requirement = spec_for(slice_id).throughput_req_mbps;
      for (const auto& [t, acc] : by_t) {
        s.t.push_back(t);
        s.throughput.push_back(acc.first / static_cast<double>(acc.second));
      }
      slice_series.push_back(std::move(s));
    }
  }
  return metrics;
}

// ---------------------------------------------------------------------------
// Artifact emission
// ---------------------------------------------------------------------------

void emit_metric_files(const MetricsTable& metrics, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ostringstream os;
    os << "scheme,phase,slice_id,mean_throughput_over_req\n";
    for (const SchemePhaseStats& s : metrics.stats)
      for (const auto& [slice_id, ratio] : s.mean_tput_norm)
        os << s.scheme << ',' << s.phase << ',' << slice_id << ',' << format_double(ratio)
           << '\n';
    write_text_file(dir / "throughput_norm.csv", os.str());
  }
  {
    std::ostringstream os;
    os << "scheme,phase,p_full_satisfaction,mean_satisfaction\n";
    for (const SchemePhaseStats& s : metrics.stats)
      os << s.scheme << ',' << s.phase << ',' << format_double(s.p_full_satisfaction) << ','
         << format_double(s.mean_satisfaction) << '\n';
    write_text_file(dir / "satisfaction.csv", os.str());
  }
  for (const SchemePhaseStats& s : metrics.stats) {
    std::ostringstream os;
    os << "value,cum_prob\n";
    for (std::size_t i = 0; i < s.cdf.values.size(); ++i)
      os << format_double(s.cdf.values[i]) << ',' << format_double(s.cdf.cumulative[i]) << '\n';
    write_text_file(dir / ("cdf_" + s.scheme + "_" + s.phase + ".csv"), os.str());
  }
  for (const auto& [scheme, series] : metrics.utility_series) {
    std::ostringstream os;
    os << "t,utility\n";
    for (std::size_t i = 0; i < series.first.size(); ++i)
      os << format_int(series.first[i]) << ',' << format_double(series.second[i]) << '\n';
    write_text_file(dir / ("utility_" + scheme + ".csv"), os.str());
  }
  {
    std::ostringstream os;
    os << "checks,violations\n"
       << metrics.feasibility_checks << ',' << metrics.feasibility_violations << '\n';
    write_text_file(dir / "feasibility.csv", os.str());
  }
}

void emit_plot_files(const MetricsTable& metrics, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [scheme, slices] : metrics.throughput_series) {
    for (const SliceSeries& s : slices) {
      ChartSpec chart;
      chart.title = scheme + ": slice " + std::to_string(s.slice_id) +
                    " mean throughput vs requirement";
      chart.x_label = "slot";
      chart.y_label = "Mbit/s";
      chart.reference_y = s.requirement;
      ChartSeries line;
      line.label = "slice " + std::to_string(s.slice_id);
      line.color = kSchemeColors[static_cast<std::size_t>(s.slice_id) % 5];
      for (std::size_t i = 0; i < s.t.size(); ++i) {
        line.xs.push_back(static_cast<double>(s.t[i]));
        line.ys.push_back(s.throughput[i]);
      }
      chart.series.push_back(std::move(line));
      std::ostringstream os;
      write_line_chart(os, chart);
      write_text_file(dir / ("plot_tput_" + scheme + "_slice" + std::to_string(s.slice_id) +
                             ".svg"),
                      os.str());
    }
  }
  // one satisfaction-CDF figure per scheme, phases overlaid as staircases
  std::set<std::string> schemes;
  for (const SchemePhaseStats& s : metrics.stats) schemes.insert(s.scheme);
  for (const std::string& scheme : schemes) {
    ChartSpec chart;
    chart.title = scheme + ": satisfaction CDF over the convergence window";
    chart.x_label = "satisfaction level";
    chart.y_label = "P(X <= x)";
    int color = 0;
    for (const SchemePhaseStats& s : metrics.stats) {
      if (s.scheme != scheme) continue;
      ChartSeries line;
      line.label = s.phase;
      line.color = kSchemeColors[static_cast<std::size_t>(color++) % 5];
      double prev = 0.0;
      line.xs.push_back(0.0);
      line.ys.push_back(0.0);
      for (std::size_t i = 0; i < s.cdf.values.size(); ++i) {
        line.xs.push_back(s.cdf.values[i]);
        line.ys.push_back(prev);  // staircase riser
        line.xs.push_back(s.cdf.values[i]);
        line.ys.push_back(s.cdf.cumulative[i]);
        prev = s.cdf.cumulative[i];
      }
      line.xs.push_back(1.0);
      line.ys.push_back(1.0);
      chart.series.push_back(std::move(line));
    }
    std::ostringstream os;
    write_line_chart(os, chart);
    write_text_file(dir / ("plot_cdf_" + scheme + ".svg"), os.str());
  }
}

// ---------------------------------------------------------------------------
// The experiment itself
// ---------------------------------------------------------------------------

namespace {

struct H0Output {
  Simulator sim;
  std::vector<KpiRecord> records;
  FeasibilityGate gate;
};

H0Output run_h0(const ExperimentConfig& config) {
  SimConfig sim_config = config.sim;
  sim_config.initial_active = config.phases.h1_slices;
  sim_config.seed = derive(config.seed, Stream::sim);
  H0Output out{Simulator(sim_config), {}, {}};

  const int cells = sim_config.num_cells;
  for (long t = 0; t < config.phases.h0_steps; ++t) {
    std::vector<PartitionVector> partitions;
    partitions.reserve(static_cast<std::size_t>(cells));
    for (int c = 0; c < cells; ++c) {
      Rng rng(derive(config.seed, Stream::explore, static_cast<std::uint64_t>(c),
                     static_cast<std::uint64_t>(t)));
      PartitionVector p{explore_partition(rng, out.sim.active_slice_ids(c).size())};
      out.gate.require(p, "exploration policy", t, c);
      partitions.push_back(std::move(p));
    }
    auto records = out.sim.step(partitions);
    out.records.insert(out.records.end(), records.begin(), records.end());
  }
  return out;
}

}  // namespace

CollectOutput collect_only(const ExperimentConfig& config) {
  validate_experiment(config);
  H0Output h0 = run_h0(config);
  CollectOutput out;
  out.records = std::move(h0.records);
  const auto specs = catalog_specs(config.sim);
  auto raw = assemble_samples(out.records, specs, config.sim.history_depth, &out.stats);
  out.samples = augment(raw, derive(config.seed, Stream::augment));
  return out;
}

ExperimentArtifacts run_experiment(const ExperimentConfig& config) {
  validate_experiment(config);
  const std::filesystem::path dir(config.out_dir);
  std::filesystem::create_directories(dir);
  save_experiment_config(config, dir / "run_config.json");

  const auto specs = catalog_specs(config.sim);
  std::map<std::string, std::vector<KpiRecord>> logs;
  FeasibilityGate gate;

  // ---- H0: exploration and sample collection -----------------------------
  H0Output h0 = [&] {
    try {
      return run_h0(config);
    } catch (const std::exception& e) {
      throw std::runtime_error("stage H0: " + std::string(e.what()));
    }
  }();
  gate.checks += h0.gate.checks;
  gate.violations += h0.gate.violations;
  {
    std::ostringstream os;
    write_kpi_csv(os, h0.records);
    write_text_file(dir / "kpi_explore.csv", os.str());
    logs["explore"] = h0.records;
  }

  // ---- training, exactly once ---------------------------------------------
  EstimatorModel model;
  TrainReport report;
  try {
    auto raw = assemble_samples(h0.records, specs, config.sim.history_depth);
    auto samples = augment(raw, derive(config.seed, Stream::augment));
    save_samples(dir / "dataset.csv", samples);
    auto [train_set, test_set] =
        split(samples, config.estimator.train_fraction, derive(config.seed, Stream::split));
    model = EstimatorModel::make(config.sim.history_depth, config.estimator.hidden,
                                 derive(config.seed, Stream::estimator_init));
    TrainOptions options;
    options.epochs = config.estimator.epochs;
    options.learning_rate = config.estimator.learning_rate;
    options.batch_size = config.estimator.batch_size;
    options.seed = derive(config.seed, Stream::estimator_shuffle);
    report = model.train(train_set, test_set, options);
    model.save(dir / "model.json");
  } catch (const std::exception& e) {
    throw std::runtime_error("stage train: " + std::string(e.what()));
  }

  // ---- H1 + H2: every scheme replays the same world ----------------------
  const long h1_steps = config.phases.h1_steps;
  const long h2_steps = config.phases.h2_steps;
  for (std::size_t scheme_index = 0; scheme_index < config.schemes.size(); ++scheme_index) {
    const std::string& name = config.schemes[scheme_index];
    try {
      Simulator replica = h0.sim;  // shared seed and state: paired comparison
      SchemeContext ctx;
      ctx.model = &model;
      ctx.solver = config.solver;
      ctx.solver.seed = derive(config.seed, Stream::solver_noise, scheme_index);
      ctx.solver.record_trace = config.trace && name == "lagrange";
      ctx.oracle_grid_step = config.oracle_grid_step;
      auto scheme = make_scheme(name, ctx);
      auto* lagrange = dynamic_cast<LagrangeScheme*>(scheme.get());

      std::vector<KpiRecord> records;
      std::ostringstream trace_os;
      if (ctx.solver.record_trace) trace_os << "t,cell_id,start,iteration,sum_x,lambda,utility\n";

      for (long step = 0; step < h1_steps + h2_steps; ++step) {
        const long t = replica.time();
        if (step == h1_steps)
          for (int c = 0; c < config.sim.num_cells; ++c)
            replica.reconfigure_slices(c, config.phases.h2_slices);

        std::vector<PartitionVector> partitions;
        for (int c = 0; c < config.sim.num_cells; ++c) {
          SchemeInput input;
          input.cell = replica.topology(c);
          for (const SliceSpec& spec : input.cell.active_slices)
            input.observations.push_back(replica.observation(c, spec.slice_id));
          input.offered_load = replica.peek_offered_load(c);
          PartitionVector p = scheme->decide(input);
          gate.require(p, "scheme " + name, t, c);
          if (lagrange && ctx.solver.record_trace)
            for (const TraceRow& row : lagrange->last_trace())
              trace_os << format_int(t) << ',' << format_int(c) << ',' << format_int(row.start)
                       << ',' << format_int(row.iteration) << ',' << format_double(row.sum_x)
                       << ',' << format_double(row.lambda) << ',' << format_double(row.utility)
                       << '\n';
          partitions.push_back(std::move(p));
        }
        auto step_records = replica.step(partitions);
        records.insert(records.end(), step_records.begin(), step_records.end());
      }

      std::ostringstream os;
      write_kpi_csv(os, records);
      write_text_file(dir / ("kpi_" + name + ".csv"), os.str());
      if (ctx.solver.record_trace) write_text_file(dir / "trace_lagrange.csv", trace_os.str());
      logs[name] = std::move(records);
    } catch (const std::exception& e) {
      throw std::runtime_error("stage online (" + name + "): " + std::string(e.what()));
    }
  }

  // ---- metrics and artifacts ----------------------------------------------
  ExperimentArtifacts artifacts;
  try {
    artifacts.metrics = compute_metrics(config, logs);
    artifacts.metrics.feasibility_checks = gate.checks;
    artifacts.metrics.feasibility_violations = gate.violations;
    emit_metric_files(artifacts.metrics, dir);
    emit_plot_files(artifacts.metrics, dir);
  } catch (const std::exception& e) {
    throw std::runtime_error("stage metrics: " + std::string(e.what()));
  }
  artifacts.train_report = std::move(report);
  artifacts.model = std::move(model);
  artifacts.out_dir = dir;
  return artifacts;
}

}  // namespace netslice
