#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "netslice/core.hpp"
#include "netslice/optimizer.hpp"
#include "netslice/surrogate.hpp"

// A uniform allocation-scheme interface plus the comparison baselines:
// traffic-proportional, equal-split, the brute-force grid oracle over the
// trained estimator, and the Lagrangian-descent scheme that wraps solve_cell
// with per-cell warm starts.

namespace netslice {

struct SchemeInput {
  CellTopology cell;
  std::vector<ObservationVector> observations;  // aligned with active slices
  std::vector<double> offered_load;             // ground-truth per-slice demand
};

class AllocationScheme {
 public:
  virtual ~AllocationScheme() = default;
  virtual std::string name() const = 0;
  // May keep per-cell state across calls (warm starts); outputs always pass
  // validate_partition.
  virtual PartitionVector decide(const SchemeInput& input) = 0;
};

// x_s = demand_s / sum(demands); all-zero demands fall back to equal split.
PartitionVector traffic_proportional(std::span<const double> demands);

PartitionVector equal_split(int num_slices);

inline constexpr std::size_t kDefaultEnumerationBudget = 2'000'000;

// Enumerates every grid point of the simplex with coordinates in
// {0, step, ..., 1} and sum <= 1, in lexicographic order.
void enumerate_simplex_grid(double grid_step, int num_slices,
                            const std::function<void(std::span<const double>)>& visit,
                            std::size_t budget = kDefaultEnumerationBudget);

// Exhaustive search for the grid point maximizing the surrogate utility;
// deterministic tie-break toward the lexicographically smallest point.
// grid_step must divide 1; exceeding the enumeration budget is an error
// advising a coarser grid.
PartitionVector oracle_grid(const SliceQosModel& model, std::span<const ObservationVector> obs,
                            double grid_step, std::size_t budget = kDefaultEnumerationBudget);

struct SchemeContext {
  const SliceQosModel* model = nullptr;  // required by lagrange and oracle
  SolverParams solver;
  double oracle_grid_step = 0.05;
  std::size_t oracle_budget = kDefaultEnumerationBudget;
};

// Known names: "lagrange", "oracle", "traffic", "equal".
std::unique_ptr<AllocationScheme> make_scheme(const std::string& name, const SchemeContext& ctx);

// Exposed for the warm-start acceptance property: the lagrange scheme with
// access to its per-cell solve statistics.
class LagrangeScheme final : public AllocationScheme {
 public:
  LagrangeScheme(const SliceQosModel& model, SolverParams params);
  std::string name() const override { return "lagrange"; }
  PartitionVector decide(const SchemeInput& input) override;

  const std::vector<TraceRow>& last_trace() const { return last_trace_; }
  int last_iterations() const { return last_iterations_; }  // summed over starts

 private:
  // previous solution per cell, keyed by slice id for remapping across
  // reconfigurations
  struct CellMemory {
    std::vector<int> slice_ids;
    std::vector<double> shares;
  };
  PartitionVector warm_start(const SchemeInput& input) const;

  const SliceQosModel* model_;
  SolverParams params_;
  std::vector<CellMemory> memory_;
  std::vector<TraceRow> last_trace_;
  int last_iterations_ = 0;
  std::uint64_t decisions_made_ = 0;
};

}  // namespace netslice
