#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "netslice/core.hpp"
#include "netslice/surrogate.hpp"

// Per-cell constrained maximization of sum_s ln(f(x_s, z_s) + 1) over the
// simplex via primal-dual projected gradient, with a warm start, P perturbed
// start points searched independently, geometric step decay and best-of-P
// selection. The start searches share the frozen model read-only and may run
// concurrently; selection is a deterministic reduction with ties broken by
// the lowest start index.

namespace netslice {

struct SolverParams {
  int starts = 5;                  // P
  double noise_mean = 0.0;         // start-point offset distribution
  double noise_variance = 0.0025;
  double primal_step = 0.1;        // delta_x
  double dual_step = 0.2;          // delta_lambda
  double decay = 0.998;            // geometric per-iteration step decay
  int max_iterations = 3000;
  double tolerance = 1e-4;         // eta, on ||x_i - x_{i-1}||
  double initial_multiplier = 0.0; // lambda_0; the dual price grows only when needed
  std::uint64_t seed = 1;
  bool record_trace = false;
};

void validate_params(const SolverParams& params);

struct TraceRow {
  int start = 0;
  int iteration = 0;
  double sum_x = 0.0;
  double lambda = 0.0;
  double utility = 0.0;
};

struct StartResult {
  int start = 0;
  int iterations = 0;
  bool converged = false;
  double utility = 0.0;        // surrogate utility of the repaired iterate
  double final_lambda = 0.0;
  double max_lambda = 0.0;
  PartitionVector partition;   // repaired, always feasible
};

struct SolveResult {
  PartitionVector best;
  double best_utility = 0.0;
  int best_start = 0;
  std::vector<StartResult> starts;
  std::vector<TraceRow> trace;  // populated when record_trace is set
};

// sum_s ln(f(x_s, z_s) + 1)
double surrogate_utility(const SliceQosModel& model, std::span<const ObservationVector> obs,
                         const PartitionVector& x);

// surrogate_utility(x) + lambda * (1 - sum_s x_s); lambda must be >= 0
double lagrangian_value(const SliceQosModel& model, std::span<const ObservationVector> obs,
                        const PartitionVector& x, double lambda);

// One primal-dual update:
//   x'_s = clamp([x_s + dx * (f'(x_s)/(f(x_s)+1) - lambda)]_+, <= 1)
//   lambda' = [lambda - dl * (1 - sum_s x'_s)]_+
std::pair<std::vector<double>, double> primal_dual_step(const SliceQosModel& model,
                                                        std::span<const ObservationVector> obs,
                                                        std::span<const double> x, double lambda,
                                                        double dx, double dl);

// Full per-cell solve from a feasible warm start (pass default_action at
// t = 0). Every returned partition is feasible regardless of convergence.
SolveResult solve_cell(const SliceQosModel& model, std::span<const ObservationVector> obs,
                       const PartitionVector& x_init, const SolverParams& params);

// equal split, the warm start used when no previous solution exists
PartitionVector default_action(int num_slices);

}  // namespace netslice
