#include "netslice/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "netslice/csv.hpp"
#include "netslice/rng.hpp"

namespace netslice {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// LTE CQI efficiency table, bit/s/Hz, indices 1..15.
constexpr double kSpectralEfficiency[16] = {
    0.0,    0.1523, 0.2344, 0.3770, 0.6016, 0.8770, 1.1758, 1.4766,
    1.9141, 2.4063, 2.7305, 3.3223, 3.9023, 4.5234, 5.1152, 5.5547};

std::uint64_t hash_mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

std::uint64_t hash_double(double v) {
  std::uint64_t bits;
  static_assert(sizeof(bits) == sizeof(v));
  std::memcpy(&bits, &v, sizeof(bits));
  return bits;
}

}  // namespace

double spectral_efficiency(double cqi) {
  const int idx = std::clamp(static_cast<int>(std::lround(cqi)), 1, 15);
  return kSpectralEfficiency[idx];
}

TrafficMask default_traffic_mask(int slice_id, int period_steps, std::uint64_t seed) {
  if (period_steps < 24)
    throw std::invalid_argument("traffic mask period must be at least 24 steps");
  TrafficMask mask;
  mask.values.resize(static_cast<std::size_t>(period_steps));
  // golden-angle phase keeps any two slice traces distinct
  const double phase = 2.39996322972865332 * static_cast<double>(slice_id);
  for (int k = 0; k < period_steps; ++k) {
    Rng rng(derive(seed, Stream::mask, static_cast<std::uint64_t>(slice_id),
                   static_cast<std::uint64_t>(k)));
    const double diurnal =
        0.575 + 0.375 * std::sin(kTwoPi * static_cast<double>(k) / period_steps + phase);
    const double noise = rng.uniform(-0.03, 0.03);
    mask.values[static_cast<std::size_t>(k)] = std::clamp(diurnal + noise, 0.0, 1.0);
  }
  return mask;
}

SimConfig SimConfig::defaults() {
  SimConfig cfg;
  cfg.num_cells = 12;
  const int period = 96;  // 15-minute steps, one mask period per day
  cfg.catalog = {
      {{1, 2.0, 10.0}, 120.0, 0.062500, default_traffic_mask(1, period)},
      {{2, 1.0, 20.0}, 150.0, 0.031250, default_traffic_mask(2, period)},
      {{3, 1.5, 15.0}, 90.0, 0.062500, default_traffic_mask(3, period)},
      {{4, 0.5, 50.0}, 180.0, 0.015625, default_traffic_mask(4, period)},
  };
  cfg.initial_active = {1, 2, 3, 4};
  return cfg;
}

void validate_config(const SimConfig& cfg) {
  if (cfg.num_cells < 1) throw std::invalid_argument("num_cells must be >= 1");
  if (!(cfg.bandwidth_mhz > 0.0)) throw std::invalid_argument("bandwidth must be > 0");
  if (cfg.catalog.empty()) throw std::invalid_argument("slice catalog is empty");
  if (!(cfg.coupling >= 0.0 && cfg.coupling < 1.0))
    throw std::invalid_argument("coupling must lie in [0,1)");
  if (cfg.history_depth < 1) throw std::invalid_argument("history_depth must be >= 1");
  if (!(cfg.step_minutes > 0.0)) throw std::invalid_argument("step_minutes must be > 0");
  if (cfg.cqi_min < 1 || cfg.cqi_max > 15 || cfg.cqi_min > cfg.cqi_max)
    throw std::invalid_argument("cqi range must satisfy 1 <= min <= max <= 15");
  if (!(cfg.cqi_walk_prob >= 0.0 && cfg.cqi_walk_prob <= 1.0))
    throw std::invalid_argument("cqi_walk_prob must lie in [0,1]");
  if (!(cfg.base_delay_ms > 0.0)) throw std::invalid_argument("base_delay_ms must be > 0");
  if (!(cfg.delay_headroom > 0.0 && cfg.delay_headroom < 1.0))
    throw std::invalid_argument("delay_headroom must lie in (0,1)");
  for (const SliceTraits& t : cfg.catalog) {
    validate_spec(t.spec);
    if (!(t.mean_users >= 0.0))
      throw std::invalid_argument("mean_users must be >= 0");
    if (!(t.demand_per_user_mbps > 0.0))
      throw std::invalid_argument("demand_per_user_mbps must be > 0");
    if (t.mask.values.empty()) throw std::invalid_argument("traffic mask is empty");
    for (double v : t.mask.values)
      if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument("traffic mask values must lie in [0,1]");
    for (const SliceTraits& u : cfg.catalog)
      if (&t != &u && t.spec.slice_id == u.spec.slice_id)
        throw std::invalid_argument("duplicate slice id in catalog");
  }
  if (cfg.initial_active.empty())
    throw std::invalid_argument("initial_active slice set is empty");
  for (int id : cfg.initial_active) {
    const bool known = std::any_of(cfg.catalog.begin(), cfg.catalog.end(),
                                   [&](const SliceTraits& t) { return t.spec.slice_id == id; });
    if (!known)
      throw std::invalid_argument("active slice " + std::to_string(id) + " not in catalog");
  }
}

Simulator::Simulator(SimConfig cfg) : cfg_(std::move(cfg)) {
  validate_config(cfg_);
  const int h = cfg_.history_depth;
  cells_.resize(static_cast<std::size_t>(cfg_.num_cells));
  for (int c = 0; c < cfg_.num_cells; ++c) {
    CellState& cell = cells_[static_cast<std::size_t>(c)];
    cell.cell_id = c;
    for (int id : cfg_.initial_active) {
      SliceState s;
      s.catalog_index = catalog_index_of(id);
      Rng rng(derive(cfg_.seed, Stream::cqi_init, static_cast<std::uint64_t>(c),
                     static_cast<std::uint64_t>(id), 0));
      s.cqi = static_cast<double>(rng.uniform_int(cfg_.cqi_min, cfg_.cqi_max));
      s.v_hist.assign(static_cast<std::size_t>(h), 0.0);
      s.q_hist.assign(static_cast<std::size_t>(h), 0.0);
      cell.slices.push_back(std::move(s));
    }
  }
  // warm-up: fill the H-deep histories under equal split
  for (int i = 0; i < h; ++i) {
    std::vector<PartitionVector> equal;
    equal.reserve(cells_.size());
    for (const CellState& cell : cells_) {
      PartitionVector p;
      p.shares.assign(cell.slices.size(), 1.0 / static_cast<double>(cell.slices.size()));
      equal.push_back(std::move(p));
    }
    step_internal(equal, nullptr);
  }
}

std::size_t Simulator::catalog_index_of(int slice_id) const {
  for (std::size_t i = 0; i < cfg_.catalog.size(); ++i)
    if (cfg_.catalog[i].spec.slice_id == slice_id) return i;
  throw std::invalid_argument("slice " + std::to_string(slice_id) + " not in catalog");
}

CellTopology Simulator::topology(int cell_id) const {
  if (cell_id < 0 || cell_id >= cfg_.num_cells)
    throw std::invalid_argument("unknown cell " + std::to_string(cell_id));
  const CellState& cell = cells_[static_cast<std::size_t>(cell_id)];
  CellTopology topo;
  topo.cell_id = cell_id;
  topo.bandwidth_mhz = cfg_.bandwidth_mhz;
  for (const SliceState& s : cell.slices) topo.active_slices.push_back(slice_traits(s).spec);
  return topo;
}

std::vector<int> Simulator::active_slice_ids(int cell_id) const {
  CellTopology topo = topology(cell_id);
  std::vector<int> ids;
  for (const SliceSpec& s : topo.active_slices) ids.push_back(s.slice_id);
  return ids;
}

long Simulator::draw_users(int cell_id, int slice_id, long k, double mask_value) const {
  Rng rng(derive(cfg_.seed, Stream::users, static_cast<std::uint64_t>(cell_id),
                 static_cast<std::uint64_t>(slice_id), static_cast<std::uint64_t>(k)));
  return rng.poisson(cfg_.catalog[catalog_index_of(slice_id)].mean_users * mask_value);
}

double Simulator::walk_cqi(double cqi, int cell_id, int slice_id, long k) const {
  Rng rng(derive(cfg_.seed, Stream::cqi_walk, static_cast<std::uint64_t>(cell_id),
                 static_cast<std::uint64_t>(slice_id), static_cast<std::uint64_t>(k)));
  const double u = rng.uniform01();
  double next = cqi;
  if (u < 0.5 * cfg_.cqi_walk_prob)
    next -= 1.0;
  else if (u < cfg_.cqi_walk_prob)
    next += 1.0;
  return std::clamp(next, static_cast<double>(cfg_.cqi_min), static_cast<double>(cfg_.cqi_max));
}

std::vector<KpiRecord> Simulator::step(std::span<const PartitionVector> partitions) {
  std::vector<KpiRecord> records;
  step_internal(partitions, &records);
  return records;
}

void Simulator::step_internal(std::span<const PartitionVector> partitions,
                              std::vector<KpiRecord>* out) {
  if (partitions.size() != cells_.size())
    throw std::invalid_argument("expected one partition per cell");
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    if (partitions[c].size() != cells_[c].slices.size())
      throw std::invalid_argument("partition for cell " + std::to_string(c) +
                                  " does not cover its active slices");
    if (auto violation = validate_partition(partitions[c]))
      throw std::invalid_argument("infeasible partition for cell " + std::to_string(c) + ": " +
                                  violation->message);
  }

  // one-step-lag coupling: neighbor loads are last step's, snapshotted here
  const std::size_t n_cells = cells_.size();
  std::vector<double> neighbor_load(n_cells, 0.0);
  if (n_cells > 1) {
    double total = 0.0;
    for (const CellState& cell : cells_) total += cell.prev_load;
    for (std::size_t c = 0; c < n_cells; ++c)
      neighbor_load[c] = (total - cells_[c].prev_load) / static_cast<double>(n_cells - 1);
  }

  const long k = step_count_;
  const long t = time();
  for (std::size_t c = 0; c < n_cells; ++c) {
    CellState& cell = cells_[c];
    double cell_load = 0.0;
    for (std::size_t i = 0; i < cell.slices.size(); ++i) {
      SliceState& s = cell.slices[i];
      const SliceTraits& traits = slice_traits(s);
      const int sid = traits.spec.slice_id;
      const double share = partitions[c].shares[i];
      const double mask_value = traits.mask.at(k);
      const double users = static_cast<double>(draw_users(cell.cell_id, sid, k, mask_value));
      s.cqi = walk_cqi(s.cqi, cell.cell_id, sid, k);

      const double offered = users * traits.demand_per_user_mbps;
      const double eff_cap = cfg_.bandwidth_mhz * spectral_efficiency(s.cqi) *
                             (1.0 - cfg_.coupling * neighbor_load[c]);
      const double slice_cap = share * eff_cap;
      double load_ratio;  // offered relative to this slice's capacity
      if (slice_cap > 0.0)
        load_ratio = offered / slice_cap;
      else
        load_ratio = offered > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;

      const double throughput = std::min(offered, slice_cap);
      const double prb_util = share * std::min(1.0, load_ratio);
      const double rho = std::min(load_ratio, 1.0 - cfg_.delay_headroom);
      const double delay = cfg_.base_delay_ms / std::max(cfg_.delay_headroom, 1.0 - rho);

      if (out)
        out->push_back({t, cell.cell_id, sid, share, prb_util, users, s.cqi, throughput, delay});

      // histories shift forward so the next step sees [t-H+1, t]
      s.v_hist.erase(s.v_hist.begin());
      s.v_hist.push_back(users);
      s.q_hist.erase(s.q_hist.begin());
      s.q_hist.push_back(s.cqi);
      cell_load += prb_util;
    }
    cell.prev_load = cell_load;
  }
  ++step_count_;
}

void Simulator::reconfigure_slices(int cell_id, const std::vector<int>& slice_ids) {
  if (cell_id < 0 || cell_id >= cfg_.num_cells)
    throw std::invalid_argument("unknown cell " + std::to_string(cell_id));
  if (slice_ids.empty())
    throw std::invalid_argument("a cell must keep at least one active slice");
  for (std::size_t i = 0; i < slice_ids.size(); ++i)
    for (std::size_t j = i + 1; j < slice_ids.size(); ++j)
      if (slice_ids[i] == slice_ids[j])
        throw std::invalid_argument("duplicate slice id in new active set");

  CellState& cell = cells_[static_cast<std::size_t>(cell_id)];
  std::vector<SliceState> next;
  next.reserve(slice_ids.size());
  for (int id : slice_ids) {
    const std::size_t catalog_index = catalog_index_of(id);
    auto it = std::find_if(cell.slices.begin(), cell.slices.end(), [&](const SliceState& s) {
      return slice_traits(s).spec.slice_id == id;
    });
    if (it != cell.slices.end()) {
      next.push_back(std::move(*it));
    } else {
      SliceState s;
      s.catalog_index = catalog_index;
      Rng rng(derive(cfg_.seed, Stream::cqi_init, static_cast<std::uint64_t>(cell_id),
                     static_cast<std::uint64_t>(id), static_cast<std::uint64_t>(step_count_)));
      s.cqi = static_cast<double>(rng.uniform_int(cfg_.cqi_min, cfg_.cqi_max));
      s.v_hist.assign(static_cast<std::size_t>(cfg_.history_depth), 0.0);
      s.q_hist.assign(static_cast<std::size_t>(cfg_.history_depth), 0.0);
      next.push_back(std::move(s));
    }
  }
  cell.slices = std::move(next);
}

ObservationVector Simulator::observation(int cell_id, int slice_id) const {
  if (cell_id < 0 || cell_id >= cfg_.num_cells)
    throw std::invalid_argument("unknown cell " + std::to_string(cell_id));
  const CellState& cell = cells_[static_cast<std::size_t>(cell_id)];
  for (const SliceState& s : cell.slices) {
    const SliceSpec& spec = slice_traits(s).spec;
    if (spec.slice_id != slice_id) continue;
    ObservationVector obs;
    obs.z.reserve(s.v_hist.size() + s.q_hist.size() + 2);
    obs.z.insert(obs.z.end(), s.v_hist.begin(), s.v_hist.end());
    obs.z.insert(obs.z.end(), s.q_hist.begin(), s.q_hist.end());
    obs.z.push_back(spec.throughput_req_mbps);
    obs.z.push_back(spec.delay_req_ms);
    return obs;
  }
  throw std::invalid_argument("slice " + std::to_string(slice_id) + " not active in cell " +
                              std::to_string(cell_id));
}

std::vector<double> Simulator::peek_offered_load(int cell_id) const {
  if (cell_id < 0 || cell_id >= cfg_.num_cells)
    throw std::invalid_argument("unknown cell " + std::to_string(cell_id));
  const CellState& cell = cells_[static_cast<std::size_t>(cell_id)];
  std::vector<double> offered;
  offered.reserve(cell.slices.size());
  for (const SliceState& s : cell.slices) {
    const SliceTraits& traits = slice_traits(s);
    const int sid = traits.spec.slice_id;
    const double mask_value = traits.mask.at(step_count_);
    const double users =
        static_cast<double>(draw_users(cell.cell_id, sid, step_count_, mask_value));
    offered.push_back(users * traits.demand_per_user_mbps);
  }
  return offered;
}

std::uint64_t Simulator::digest() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  h = hash_mix(h, static_cast<std::uint64_t>(step_count_));
  for (const CellState& cell : cells_) {
    h = hash_mix(h, static_cast<std::uint64_t>(cell.cell_id));
    h = hash_mix(h, hash_double(cell.prev_load));
    for (const SliceState& s : cell.slices) {
      h = hash_mix(h, static_cast<std::uint64_t>(slice_traits(s).spec.slice_id));
      h = hash_mix(h, hash_double(s.cqi));
      for (double v : s.v_hist) h = hash_mix(h, hash_double(v));
      for (double q : s.q_hist) h = hash_mix(h, hash_double(q));
    }
  }
  return h;
}

void write_kpi_csv(std::ostream& os, std::span<const KpiRecord> records) {
  os << "t,cell_id,slice_id,share,prb_util,users,cqi,throughput_mbps,delay_ms\n";
  for (const KpiRecord& r : records) {
    os << format_int(r.t) << ',' << format_int(r.cell_id) << ',' << format_int(r.slice_id) << ','
       << format_double(r.share) << ',' << format_double(r.prb_utilization) << ','
       << format_double(r.users) << ',' << format_double(r.cqi) << ','
       << format_double(r.throughput_mbps) << ',' << format_double(r.delay_ms) << '\n';
  }
}

std::vector<KpiRecord> read_kpi_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("KPI csv: missing header");
  std::vector<KpiRecord> out;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cols = split_csv_line(line);
    if (cols.size() != 9)
      throw std::runtime_error("KPI csv line " + std::to_string(line_no) + ": expected 9 columns");
    try {
      KpiRecord r;
      r.t = parse_int(cols[0]);
      r.cell_id = static_cast<int>(parse_int(cols[1]));
      r.slice_id = static_cast<int>(parse_int(cols[2]));
      r.share = parse_double(cols[3]);
      r.prb_utilization = parse_double(cols[4]);
      r.users = parse_double(cols[5]);
      r.cqi = parse_double(cols[6]);
      r.throughput_mbps = parse_double(cols[7]);
      r.delay_ms = parse_double(cols[8]);
      out.push_back(r);
    } catch (const std::exception& e) {
      throw std::runtime_error("KPI csv line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace netslice
