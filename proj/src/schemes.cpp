#include "netslice/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "netslice/rng.hpp"

namespace netslice {

PartitionVector traffic_proportional(std::span<const double> demands) {
  if (demands.empty()) throw std::invalid_argument("no demands given");
  double total = 0.0;
  for (double d : demands) {
    if (!(d >= 0.0) || !std::isfinite(d))
      throw std::invalid_argument("demands must be nonnegative and finite");
    total += d;
  }
  PartitionVector p;
  if (total == 0.0) {
    p.shares.assign(demands.size(), 1.0 / static_cast<double>(demands.size()));
  } else {
    p.shares.reserve(demands.size());
    for (double d : demands) p.shares.push_back(d / total);
  }
  return p;
}

PartitionVector equal_split(int num_slices) {
  if (num_slices < 1) throw std::invalid_argument("a cell needs at least one slice");
  PartitionVector p;
  p.shares.assign(static_cast<std::size_t>(num_slices), 1.0 / static_cast<double>(num_slices));
  return p;
}

namespace {

// number of grid points with n nonnegative integer coordinates summing to
// at most k: C(k + n, n)
double grid_point_count(int k, int n) {
  double count = 1.0;
  for (int i = 1; i <= n; ++i) count *= static_cast<double>(k + i) / static_cast<double>(i);
  return count;
}

}  // namespace

void enumerate_simplex_grid(double grid_step, int num_slices,
                            const std::function<void(std::span<const double>)>& visit,
                            std::size_t budget) {
  if (num_slices < 1) throw std::invalid_argument("need at least one slice");
  if (!(grid_step > 0.0 && grid_step <= 1.0))
    throw std::invalid_argument("grid step must lie in (0,1]");
  const double levels = 1.0 / grid_step;
  const int k = static_cast<int>(std::llround(levels));
  if (std::abs(levels - static_cast<double>(k)) > 1e-9)
    throw std::invalid_argument("grid step must divide 1");
  if (grid_point_count(k, num_slices) > static_cast<double>(budget))
    throw std::runtime_error(
        "grid enumeration budget exceeded; use a coarser grid step");

  std::vector<int> ticks(static_cast<std::size_t>(num_slices), 0);
  std::vector<double> point(static_cast<std::size_t>(num_slices), 0.0);
  // lexicographic odometer over tick vectors with sum <= k
  const auto emit = [&] {
    for (std::size_t i = 0; i < ticks.size(); ++i)
      point[i] = static_cast<double>(ticks[i]) * grid_step;
    visit(point);
  };
  int depth = 0;
  int used = 0;
  for (;;) {
    if (depth == num_slices) {
      emit();
      // backtrack to the deepest coordinate that can still grow
      while (--depth >= 0) {
        used -= ticks[static_cast<std::size_t>(depth)];
        if (ticks[static_cast<std::size_t>(depth)] < k - used) break;
        ticks[static_cast<std::size_t>(depth)] = 0;
      }
      if (depth < 0) return;
      ++ticks[static_cast<std::size_t>(depth)];
      used += ticks[static_cast<std::size_t>(depth)];
      ++depth;
      continue;
    }
    ticks[static_cast<std::size_t>(depth)] = 0;
    ++depth;
  }
}

PartitionVector oracle_grid(const SliceQosModel& model, std::span<const ObservationVector> obs,
                            double grid_step, std::size_t budget) {
  if (obs.empty()) throw std::invalid_argument("no observations given");
  const int n = static_cast<int>(obs.size());
  const int k = static_cast<int>(std::llround(1.0 / grid_step));

  // per-slice utilities are reused across the whole grid, so the expensive
  // model evaluations are k+1 per slice, not one per grid point
  std::vector<std::vector<double>> level_utility(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) {
    auto& u = level_utility[static_cast<std::size_t>(s)];
    u.resize(static_cast<std::size_t>(k) + 1);
    for (int level = 0; level <= k; ++level) {
      const double x = static_cast<double>(level) * grid_step;
      u[static_cast<std::size_t>(level)] =
          std::log1p(model.value(x, obs[static_cast<std::size_t>(s)].z));
    }
  }

  std::vector<double> best_point;
  double best_utility = -std::numeric_limits<double>::infinity();
  enumerate_simplex_grid(grid_step, n, [&](std::span<const double> point) {
    double utility = 0.0;
    for (int s = 0; s < n; ++s) {
      const int level =
          static_cast<int>(std::llround(point[static_cast<std::size_t>(s)] / grid_step));
      utility += level_utility[static_cast<std::size_t>(s)][static_cast<std::size_t>(level)];
    }
    // strict improvement keeps the lexicographically first maximizer
    if (utility > best_utility) {
      best_utility = utility;
      best_point.assign(point.begin(), point.end());
    }
  }, budget);

  return PartitionVector{std::move(best_point)};
}

// ---------------------------------------------------------------------------
// Scheme wrappers
// ---------------------------------------------------------------------------

namespace {

class TrafficScheme final : public AllocationScheme {
 public:
  std::string name() const override { return "traffic"; }
  PartitionVector decide(const SchemeInput& input) override {
    return traffic_proportional(input.offered_load);
  }
};

class EqualScheme final : public AllocationScheme {
 public:
  std::string name() const override { return "equal"; }
  PartitionVector decide(const SchemeInput& input) override {
    return equal_split(static_cast<int>(input.cell.active_slices.size()));
  }
};

class OracleScheme final : public AllocationScheme {
 public:
  OracleScheme(const SliceQosModel& model, double grid_step, std::size_t budget)
      : model_(&model), grid_step_(grid_step), budget_(budget) {}
  std::string name() const override { return "oracle"; }
  PartitionVector decide(const SchemeInput& input) override {
    return oracle_grid(*model_, input.observations, grid_step_, budget_);
  }

 private:
  const SliceQosModel* model_;
  double grid_step_;
  std::size_t budget_;
};

}  // namespace

LagrangeScheme::LagrangeScheme(const SliceQosModel& model, SolverParams params)
    : model_(&model), params_(params) {}

PartitionVector LagrangeScheme::warm_start(const SchemeInput& input) const {
  const auto& slices = input.cell.active_slices;
  const int cell = input.cell.cell_id;
  if (cell >= 0 && static_cast<std::size_t>(cell) < memory_.size() &&
      !memory_[static_cast<std::size_t>(cell)].slice_ids.empty()) {
    const CellMemory& mem = memory_[static_cast<std::size_t>(cell)];
    std::vector<double> shares(slices.size());
    const double fresh = 1.0 / static_cast<double>(slices.size());
    for (std::size_t s = 0; s < slices.size(); ++s) {
      const auto it =
          std::find(mem.slice_ids.begin(), mem.slice_ids.end(), slices[s].slice_id);
      // carried-over slices keep their share; newly added ones start from
      // the default split, then the whole vector is repaired to feasibility
      shares[s] = it == mem.slice_ids.end()
                      ? fresh
                      : mem.shares[static_cast<std::size_t>(it - mem.slice_ids.begin())];
    }
    return normalize_to_simplex(shares);
  }
  return default_action(static_cast<int>(slices.size()));
}

PartitionVector LagrangeScheme::decide(const SchemeInput& input) {
  const PartitionVector x0 = warm_start(input);
  SolverParams params = params_;
  // one independent noise stream per (cell, slot)
  params.seed = derive(params_.seed, Stream::solver_noise,
                       static_cast<std::uint64_t>(input.cell.cell_id),
                       static_cast<std::uint64_t>(decisions_made_++));
  const SolveResult result = solve_cell(*model_, input.observations, x0, params);

  last_iterations_ = 0;
  for (const StartResult& sr : result.starts) last_iterations_ += sr.iterations;
  last_trace_ = result.trace;

  const int cell = input.cell.cell_id;
  if (cell >= 0) {
    if (static_cast<std::size_t>(cell) >= memory_.size())
      memory_.resize(static_cast<std::size_t>(cell) + 1);
    CellMemory& mem = memory_[static_cast<std::size_t>(cell)];
    mem.slice_ids.clear();
    for (const SliceSpec& s : input.cell.active_slices) mem.slice_ids.push_back(s.slice_id);
    mem.shares = result.best.shares;
  }
  return result.best;
}

std::unique_ptr<AllocationScheme> make_scheme(const std::string& name, const SchemeContext& ctx) {
  if (name == "traffic") return std::make_unique<TrafficScheme>();
  if (name == "equal") return std::make_unique<EqualScheme>();
  if (name == "oracle") {
    if (!ctx.model) throw std::invalid_argument("oracle scheme needs a trained model");
    return std::make_unique<OracleScheme>(*ctx.model, ctx.oracle_grid_step, ctx.oracle_budget);
  }
  if (name == "lagrange") {
    if (!ctx.model) throw std::invalid_argument("lagrange scheme needs a trained model");
    return std::make_unique<LagrangeScheme>(*ctx.model, ctx.solver);
  }
  throw std::invalid_argument("unknown scheme '" + name + "'");
}

}  // namespace netslice
