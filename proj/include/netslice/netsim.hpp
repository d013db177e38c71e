#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "netslice/core.hpp"

// Discrete-time synthetic multi-cell network. Given per-cell slice
// partitions it produces per-slice KPIs (throughput, delay, PRB utilization,
// user counts, channel quality) with daily traffic masks and a mild
// inter-cell coupling discount.
//
// Ground truth per (cell, slice) at step t:
//   offered     = users(t) * demand_per_user,  users ~ Poisson(mean * mask(t))
//   eff_cap     = bandwidth * spectral_efficiency(cqi) * (1 - coupling * neighbor_load)
//   slice_cap   = share * eff_cap
//   throughput  = min(offered, slice_cap)
//   prb_util    = share * min(1, offered / slice_cap)
//   delay       = base_delay / max(eps_d, 1 - rho),  rho = clamp(offered / slice_cap, 0, 1 - eps_d)
//
// neighbor_load is snapshotted from the previous step, so within one step a
// cell's KPIs depend only on its own current partition. All randomness is
// derived from (seed, stream, cell, slice, step): identical config and seed
// give bit-identical KPI streams, and per-slice satisfaction is monotone
// non-decreasing in that slice's share.

namespace netslice {

// Per-slice periodic [0,1] scaling of offered load.
struct TrafficMask {
  std::vector<double> values;  // one full period

  int period() const { return static_cast<int>(values.size()); }
  double at(long step) const {
    const long p = static_cast<long>(values.size());
    return values[static_cast<std::size_t>(((step % p) + p) % p)];
  }
};

// Smooth diurnal profile: sinusoid with a per-slice phase offset plus
// bounded seeded noise, exactly period-periodic. Period must be >= 24 steps.
TrafficMask default_traffic_mask(int slice_id, int period_steps, std::uint64_t seed = 0);

// Everything the simulator knows about one service type.
struct SliceTraits {
  SliceSpec spec;
  double mean_users = 0.0;            // Poisson mean at mask value 1
  double demand_per_user_mbps = 0.0;  // constant per slice type
  TrafficMask mask;
};

struct SimConfig {
  int num_cells = 12;
  double bandwidth_mhz = 20.0;
  std::vector<SliceTraits> catalog;  // all defined service types
  std::vector<int> initial_active;   // slice ids active in every cell at start
  double coupling = 0.10;            // [0,1) neighbor-load capacity discount
  int history_depth = 5;             // H
  double step_minutes = 15.0;
  int cqi_min = 4;
  int cqi_max = 10;
  double cqi_walk_prob = 0.1;        // per-step probability of moving +-1
  double base_delay_ms = 0.5;
  double delay_headroom = 0.005;     // eps_d
  std::uint64_t seed = 1;

  // 12 cells, the 4 default service types, all active.
  static SimConfig defaults();
};

// Throws std::invalid_argument describing the first problem found.
void validate_config(const SimConfig& cfg);

// One simulator step's ground truth for one (cell, slice).
struct KpiRecord {
  long t = 0;
  int cell_id = 0;
  int slice_id = 0;
  double share = 0.0;
  double prb_utilization = 0.0;
  double users = 0.0;
  double cqi = 0.0;
  double throughput_mbps = 0.0;
  double delay_ms = 0.0;
};

// Monotone MCS-style mapping from CQI index 1..15 to bit/s/Hz.
double spectral_efficiency(double cqi);

class Simulator {
 public:
  // Validates the config and runs H warm-up steps under equal-split
  // partitions so history buffers are full before the first public step.
  explicit Simulator(SimConfig cfg);

  const SimConfig& config() const { return cfg_; }

  // Time index of the next step; 0 right after construction.
  long time() const { return step_count_ - cfg_.history_depth; }

  CellTopology topology(int cell_id) const;
  std::vector<int> active_slice_ids(int cell_id) const;

  // Advances one slot. Expects one feasible partition per cell, aligned with
  // that cell's active slices; infeasible input throws (no silent clamping).
  std::vector<KpiRecord> step(std::span<const PartitionVector> partitions);

  // Changes a cell's active set starting at the next step. Retained slices
  // keep their state; new slices get zero-filled histories and a freshly
  // drawn channel state. Identical sets are a no-op.
  void reconfigure_slices(int cell_id, const std::vector<int>& slice_ids);

  // Local features for the upcoming step: histories over [t-H, t-1] plus the
  // slice requirements. The x field is left 0 for the caller to set.
  ObservationVector observation(int cell_id, int slice_id) const;

  // Ground-truth offered load per active slice for the upcoming step
  // (the "perfect traffic knowledge" input of the traffic baseline).
  std::vector<double> peek_offered_load(int cell_id) const;

  // Order-independent fingerprint of the dynamic state, for determinism
  // tests.
  std::uint64_t digest() const;

 private:
  struct SliceState {
    std::size_t catalog_index = 0;
    double cqi = 0.0;
    std::vector<double> v_hist;  // length H, oldest first
    std::vector<double> q_hist;
  };
  struct CellState {
    int cell_id = 0;
    std::vector<SliceState> slices;
    double prev_load = 0.0;  // sum of prb_util from the previous step
  };

  const SliceTraits& slice_traits(const SliceState& s) const { return cfg_.catalog[s.catalog_index]; }
  std::size_t catalog_index_of(int slice_id) const;
  long draw_users(int cell_id, int slice_id, long k, double mask_value) const;
  double walk_cqi(double cqi, int cell_id, int slice_id, long k) const;
  void step_internal(std::span<const PartitionVector> partitions,
                     std::vector<KpiRecord>* out);

  SimConfig cfg_;
  std::vector<CellState> cells_;
  long step_count_ = 0;  // internal counter; warm-up consumes [0, H)
};

// KPI stream export, stable schema:
// t,cell_id,slice_id,share,prb_util,users,cqi,throughput_mbps,delay_ms
void write_kpi_csv(std::ostream& os, std::span<const KpiRecord> records);
std::vector<KpiRecord> read_kpi_csv(std::istream& is);

}  // namespace netslice
