#include "netslice/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace netslice {

void validate_spec(const SliceSpec& spec) {
  if (!(spec.throughput_req_mbps > 0.0) || !std::isfinite(spec.throughput_req_mbps))
    throw std::invalid_argument("slice " + std::to_string(spec.slice_id) +
                                ": throughput requirement must be > 0");
  if (!(spec.delay_req_ms > 0.0) || !std::isfinite(spec.delay_req_ms))
    throw std::invalid_argument("slice " + std::to_string(spec.slice_id) +
                                ": delay requirement must be > 0");
}

double PartitionVector::sum() const {
  double s = 0.0;
  for (double v : shares) s += v;
  return s;
}

SatisfactionLevel satisfaction(const QosOutcome& outcome, const SliceSpec& spec) {
  validate_spec(spec);
  if (outcome.throughput_mbps < 0.0 || !std::isfinite(outcome.throughput_mbps))
    throw std::invalid_argument("negative or non-finite throughput");
  if (outcome.delay_ms < 0.0 || !std::isfinite(outcome.delay_ms))
    throw std::invalid_argument("negative or non-finite delay");

  const double tput_ratio = outcome.throughput_mbps / spec.throughput_req_mbps;
  const double delay_ratio = outcome.delay_ms == 0.0
                                 ? std::numeric_limits<double>::infinity()
                                 : spec.delay_req_ms / outcome.delay_ms;
  return {std::min({tput_ratio, delay_ratio, 1.0})};
}

double log_utility(std::span<const double> levels) {
  double total = 0.0;
  for (double r : levels) {
    if (!(r >= 0.0 && r <= 1.0))
      throw std::invalid_argument("satisfaction level outside [0,1]");
    total += std::log1p(r);
  }
  return total;
}

double log_utility(std::span<const SatisfactionLevel> levels) {
  double total = 0.0;
  for (const SatisfactionLevel& r : levels) {
    if (!(r.value >= 0.0 && r.value <= 1.0))
      throw std::invalid_argument("satisfaction level outside [0,1]");
    total += std::log1p(r.value);
  }
  return total;
}

std::optional<PartitionViolation> validate_partition(const PartitionVector& p) {
  for (std::size_t i = 0; i < p.shares.size(); ++i) {
    const double v = p.shares[i];
    if (!(v >= 0.0))
      return PartitionViolation{PartitionViolation::Clause::negative_share, i, v,
                                "negative share at index " + std::to_string(i)};
    if (v > 1.0)
      return PartitionViolation{PartitionViolation::Clause::share_above_one, i, v,
                                "share above 1 at index " + std::to_string(i)};
  }
  const double s = p.sum();
  if (s > 1.0 + kPartitionSumTolerance)
    return PartitionViolation{PartitionViolation::Clause::sum_above_one, 0, s,
                              "share sum " + std::to_string(s) + " exceeds 1"};
  return std::nullopt;
}

PartitionVector normalize_to_simplex(std::span<const double> raw) {
  if (raw.empty()) throw std::invalid_argument("cannot normalize an empty share vector");
  double sum = 0.0;
  for (double v : raw) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("normalize_to_simplex requires nonnegative finite entries");
    sum += v;
  }
  PartitionVector out;
  out.shares.assign(raw.begin(), raw.end());
  if (sum == 0.0) {
    // documented fallback: nothing to preserve, split equally
    std::fill(out.shares.begin(), out.shares.end(), 1.0 / static_cast<double>(raw.size()));
  } else if (sum > 1.0) {
    for (double& v : out.shares) v /= sum;
  }
  return out;
}

}  // namespace netslice
