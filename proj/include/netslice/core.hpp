#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

// Shared domain types and the closed-form QoS utility math. Everything here
// is an immutable value object with pure operations; callers may use them
// from any number of threads.

namespace netslice {

// Feasibility tolerance on the share sum; absorbs float accumulation across
// up to ~10 slices.
inline constexpr double kPartitionSumTolerance = 1e-9;

// A slice's identity plus its QoS requirements.
struct SliceSpec {
  int slice_id = 0;
  double throughput_req_mbps = 0.0;  // > 0
  double delay_req_ms = 0.0;         // > 0
};

// Throws std::invalid_argument on non-positive requirements.
void validate_spec(const SliceSpec& spec);

// A cell and its ordered active slice set. The declaration order of
// active_slices is the canonical alignment for every per-slice vector
// (shares, observations, gradients).
struct CellTopology {
  int cell_id = 0;
  double bandwidth_mhz = 0.0;
  std::vector<SliceSpec> active_slices;
};

// Per-cell resource shares aligned with CellTopology::active_slices.
// Feasible iff every share lies in [0,1] and the sum is <= 1 (+ tolerance).
struct PartitionVector {
  std::vector<double> shares;

  std::size_t size() const { return shares.size(); }
  double sum() const;
};

// One step's realized per-slice QoS.
struct QosOutcome {
  double throughput_mbps = 0.0;  // >= 0
  double delay_ms = 0.0;         // > 0 (0 is treated as "instant", ratio capped)
};

// QoS satisfaction level r in [0,1].
struct SatisfactionLevel {
  double value = 0.0;
};

// r = min(throughput/throughput_req, delay_req/delay, 1).
// Degenerate delay 0 counts as an infinite delay ratio, hence capped at 1.
// Throws std::invalid_argument on invalid spec or negative outcome fields.
SatisfactionLevel satisfaction(const QosOutcome& outcome, const SliceSpec& spec);

// Sum of ln(r + 1) over the given satisfaction levels (natural log).
// Levels outside [0,1] are rejected.
double log_utility(std::span<const double> levels);
double log_utility(std::span<const SatisfactionLevel> levels);

// Per-slice local features feeding the QoS estimator: the resource input x
// plus the feature tail z = [v(t-H)..v(t-1), q(t-H)..q(t-1), tput_req,
// delay_req]. Histories cover [t-H, t-1] only, oldest first; the step being
// predicted never contributes its own v or q.
struct ObservationVector {
  double x = 0.0;
  std::vector<double> z;

  int history_depth() const { return static_cast<int>((z.size() - 2) / 2); }
  // total input width including x: 2H + 3
  std::size_t width() const { return z.size() + 1; }
};

struct PartitionViolation {
  enum class Clause { negative_share, share_above_one, sum_above_one };
  Clause clause;
  std::size_t index = 0;  // offending share for the per-share clauses
  double value = 0.0;
  std::string message;
};

// nullopt means the partition is feasible. Never throws.
std::optional<PartitionViolation> validate_partition(const PartitionVector& p);

// Final feasibility repair: leaves the input unchanged when the sum is
// already <= 1, otherwise rescales by 1/sum. All-zero input falls back to an
// equal split. Negative entries and empty input are rejected.
PartitionVector normalize_to_simplex(std::span<const double> raw);

}  // namespace netslice
