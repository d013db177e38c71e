#include "netslice/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "netslice/rng.hpp"

namespace netslice {

void validate_params(const SolverParams& params) {
  if (params.starts < 1) throw std::invalid_argument("starts must be >= 1");
  if (!(params.noise_variance >= 0.0)) throw std::invalid_argument("noise variance must be >= 0");
  if (!(params.primal_step > 0.0) || !(params.dual_step > 0.0))
    throw std::invalid_argument("step sizes must be > 0");
  if (!(params.decay > 0.0 && params.decay <= 1.0))
    throw std::invalid_argument("decay must lie in (0,1]");
  if (params.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  if (!(params.tolerance > 0.0)) throw std::invalid_argument("tolerance must be > 0");
  if (!(params.initial_multiplier >= 0.0))
    throw std::invalid_argument("initial multiplier must be >= 0");
}

double surrogate_utility(const SliceQosModel& model, std::span<const ObservationVector> obs,
                         const PartitionVector& x) {
  if (obs.size() != x.size())
    throw std::invalid_argument("one observation per slice share is required");
  double total = 0.0;
  for (std::size_t s = 0; s < obs.size(); ++s)
    total += std::log1p(model.value(x.shares[s], obs[s].z));
  return total;
}

double lagrangian_value(const SliceQosModel& model, std::span<const ObservationVector> obs,
                        const PartitionVector& x, double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("multiplier must be >= 0");
  return surrogate_utility(model, obs, x) + lambda * (1.0 - x.sum());
}

std::pair<std::vector<double>, double> primal_dual_step(const SliceQosModel& model,
                                                        std::span<const ObservationVector> obs,
                                                        std::span<const double> x, double lambda,
                                                        double dx, double dl) {
  if (obs.size() != x.size())
    throw std::invalid_argument("one observation per slice share is required");
  std::vector<double> next(x.size());
  double sum = 0.0;
  for (std::size_t s = 0; s < x.size(); ++s) {
    const double f = model.value(x[s], obs[s].z);
    const double g = model.gradient(x[s], obs[s].z) / (f + 1.0) - lambda;
    // shares above 1 are meaningless under the simplex constraint
    next[s] = std::clamp(x[s] + dx * g, 0.0, 1.0);
    sum += next[s];
  }
  const double next_lambda = std::max(0.0, lambda - dl * (1.0 - sum));
  return {std::move(next), next_lambda};
}

PartitionVector default_action(int num_slices) {
  if (num_slices < 1) throw std::invalid_argument("a cell needs at least one slice");
  PartitionVector p;
  p.shares.assign(static_cast<std::size_t>(num_slices), 1.0 / static_cast<double>(num_slices));
  return p;
}

SolveResult solve_cell(const SliceQosModel& model, std::span<const ObservationVector> obs,
                       const PartitionVector& x_init, const SolverParams& params) {
  validate_params(params);
  if (obs.empty()) throw std::invalid_argument("no active slices to solve for");
  if (x_init.size() != obs.size())
    throw std::invalid_argument("warm start does not cover the active slices");
  if (auto violation = validate_partition(x_init))
    throw std::invalid_argument("warm start is infeasible: " + violation->message);

  const std::size_t n = obs.size();
  const double noise_sd = std::sqrt(params.noise_variance);

  SolveResult result;
  result.starts.reserve(static_cast<std::size_t>(params.starts));
  for (int p = 0; p < params.starts; ++p) {
    Rng rng(derive(params.seed, Stream::solver_noise, static_cast<std::uint64_t>(p)));
    std::vector<double> x(n);
    for (std::size_t s = 0; s < n; ++s)
      x[s] = std::clamp(x_init.shares[s] + rng.normal(params.noise_mean, noise_sd), 0.0, 1.0);
    {
      // project the perturbed start back onto the feasible set
      double sum = 0.0;
      for (double v : x) sum += v;
      if (sum > 1.0) x = normalize_to_simplex(x).shares;
    }

    double lambda = params.initial_multiplier;
    double dx = params.primal_step;
    double dl = params.dual_step;

    StartResult sr;
    sr.start = p;
    sr.max_lambda = lambda;
    for (int i = 1; i <= params.max_iterations; ++i) {
      auto [next, next_lambda] = primal_dual_step(model, obs, x, lambda, dx, dl);
      double moved_sq = 0.0;
      for (std::size_t s = 0; s < n; ++s) {
        const double d = next[s] - x[s];
        moved_sq += d * d;
      }
      x = std::move(next);
      lambda = next_lambda;
      sr.max_lambda = std::max(sr.max_lambda, lambda);
      dx *= params.decay;
      dl *= params.decay;
      sr.iterations = i;
      if (params.record_trace) {
        double sum = 0.0;
        for (double v : x) sum += v;
        const double util = surrogate_utility(model, obs, normalize_to_simplex(x));
        result.trace.push_back({p, i, sum, lambda, util});
      }
      if (std::sqrt(moved_sq) < params.tolerance) {
        sr.converged = true;
        break;
      }
    }

    // hard feasibility every slot, independent of convergence
    sr.partition = normalize_to_simplex(x);
    sr.final_lambda = lambda;
    sr.utility = surrogate_utility(model, obs, sr.partition);
    result.starts.push_back(std::move(sr));
  }

  std::size_t best = 0;
  for (std::size_t p = 1; p < result.starts.size(); ++p)
    if (result.starts[p].utility > result.starts[best].utility) best = p;
  result.best = result.starts[best].partition;
  result.best_utility = result.starts[best].utility;
  result.best_start = static_cast<int>(best);
  return result;
}

}  // namespace netslice
