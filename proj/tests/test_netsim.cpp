#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <sstream>
#include <stdexcept>

#include "netslice/csv.hpp"
#include "netslice/netsim.hpp"
#include "netslice/rng.hpp"

using namespace netslice;

namespace {

SimConfig small_config(int num_cells = 2) {
  SimConfig cfg = SimConfig::defaults();
  cfg.num_cells = num_cells;
  cfg.initial_active = {1, 2, 4};
  cfg.seed = 7;
  return cfg;
}

std::vector<PartitionVector> equal_partitions(const Simulator& sim) {
  std::vector<PartitionVector> out;
  for (int c = 0; c < sim.config().num_cells; ++c) {
    const auto ids = sim.active_slice_ids(c);
    PartitionVector p;
    p.shares.assign(ids.size(), 1.0 / static_cast<double>(ids.size()));
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

TEST_CASE("default config matches the intended scale") {
  const SimConfig cfg = SimConfig::defaults();
  CHECK(cfg.num_cells == 12);
  CHECK(cfg.catalog.size() == 4);
  CHECK(cfg.catalog[0].spec.throughput_req_mbps == doctest::Approx(2.0));
  CHECK(cfg.catalog[1].spec.throughput_req_mbps == doctest::Approx(1.0));
  CHECK(cfg.catalog[2].spec.throughput_req_mbps == doctest::Approx(1.5));
  CHECK(cfg.catalog[3].spec.throughput_req_mbps == doctest::Approx(0.5));
  CHECK(cfg.step_minutes == doctest::Approx(15.0));
  CHECK(cfg.bandwidth_mhz == doctest::Approx(20.0));
}

TEST_CASE("invalid configs are rejected") {
  SimConfig cfg = small_config();
  cfg.num_cells = 0;
  CHECK_THROWS_AS(Simulator{cfg}, std::invalid_argument);
  cfg = small_config();
  cfg.coupling = 1.0;
  CHECK_THROWS_AS(Simulator{cfg}, std::invalid_argument);
  cfg = small_config();
  cfg.initial_active = {9};
  CHECK_THROWS_AS(Simulator{cfg}, std::invalid_argument);
}

TEST_CASE("same config and seed give identical digests and streams") {
  Simulator a(small_config());
  Simulator b(small_config());
  CHECK(a.digest() == b.digest());
  for (int t = 0; t < 20; ++t) {
    const auto ra = a.step(equal_partitions(a));
    const auto rb = b.step(equal_partitions(b));
    REQUIRE(ra.size() == rb.size());
    for (std::size_t i = 0; i < ra.size(); ++i) {
      CHECK(ra[i].throughput_mbps == rb[i].throughput_mbps);
      CHECK(ra[i].delay_ms == rb[i].delay_ms);
      CHECK(ra[i].users == rb[i].users);
      CHECK(ra[i].cqi == rb[i].cqi);
    }
  }
  CHECK(a.digest() == b.digest());
  Simulator c(small_config());
  SimConfig other = small_config();
  other.seed = 8;
  Simulator d(other);
  CHECK(c.digest() != d.digest());
}

TEST_CASE("underloaded slice carries its whole offered load") {
  SimConfig cfg = small_config(1);
  cfg.initial_active = {4};  // lightest service
  cfg.coupling = 0.0;
  Simulator sim(cfg);
  PartitionVector p{{1.0}};
  const auto records = sim.step(std::array{p});
  REQUIRE(records.size() == 1);
  const KpiRecord& r = records[0];
  const double offered = r.users * cfg.catalog[3].demand_per_user_mbps;
  const double cap = cfg.bandwidth_mhz * spectral_efficiency(r.cqi);
  REQUIRE(offered < cap);  // slice 4 cannot fill a whole cell
  CHECK(r.throughput_mbps == doctest::Approx(offered));
  CHECK(r.delay_ms < cfg.base_delay_ms / cfg.delay_headroom);
}

TEST_CASE("zero share starves the slice") {
  SimConfig cfg = small_config(1);
  Simulator sim(cfg);
  PartitionVector p{{0.0, 0.5, 0.5}};
  bool saw_users = false;
  for (int t = 0; t < 10 && !saw_users; ++t) {
    const auto records = sim.step(std::array{p});
    const KpiRecord& starved = records[0];
    REQUIRE(starved.slice_id == 1);
    CHECK(starved.throughput_mbps == 0.0);
    CHECK(starved.prb_utilization == 0.0);
    if (starved.users > 0) {
      saw_users = true;
      CHECK(starved.delay_ms ==
            doctest::Approx(cfg.base_delay_ms / cfg.delay_headroom));
    }
  }
  CHECK(saw_users);
}

TEST_CASE("satisfaction is monotone in the slice's own share") {
  SimConfig cfg = small_config(2);
  Simulator base(cfg);
  // fixed state: re-run the same step from a copy at several share levels
  for (int warm = 0; warm < 12; ++warm) base.step(equal_partitions(base));
  double prev = -1.0;
  for (double share : {0.0, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0}) {
    Simulator sim = base;
    PartitionVector p0{{share, (1.0 - share) / 2.0, (1.0 - share) / 2.0}};
    const auto records = sim.step(std::vector{p0, equal_partitions(sim)[1]});
    const KpiRecord& r = records[0];
    const double sat =
        satisfaction({r.throughput_mbps, r.delay_ms}, cfg.catalog[0].spec).value;
    CHECK(sat >= prev - 1e-12);
    prev = sat;
  }
}

TEST_CASE("prb utilization stays within the allocated share and conserves") {
  SimConfig cfg = small_config(3);
  Simulator sim(cfg);
  Rng rng(11);
  for (int t = 0; t < 50; ++t) {
    std::vector<PartitionVector> parts;
    for (int c = 0; c < cfg.num_cells; ++c) {
      std::vector<double> raw(3);
      for (double& v : raw) v = rng.uniform01();
      parts.push_back(normalize_to_simplex(raw));
    }
    const auto records = sim.step(parts);
    std::map<int, double> per_cell;
    for (const KpiRecord& r : records) {
      CHECK(r.prb_utilization <= r.share + 1e-9);
      const double eff_cap_upper = cfg.bandwidth_mhz * spectral_efficiency(r.cqi);
      CHECK(r.throughput_mbps <= r.share * eff_cap_upper + 1e-9);
      per_cell[r.cell_id] += r.prb_utilization;
    }
    for (const auto& [cell, total] : per_cell) CHECK(total <= 1.0 + 1e-9);
  }
}

TEST_CASE("infeasible partitions are rejected, not clamped") {
  Simulator sim(small_config(1));
  PartitionVector bad{{0.7, 0.7, 0.2}};
  CHECK_THROWS_AS(sim.step(std::array{bad}), std::invalid_argument);
  PartitionVector wrong_size{{0.5, 0.5}};
  CHECK_THROWS_AS(sim.step(std::array{wrong_size}), std::invalid_argument);
}

TEST_CASE("reconfigure adds and removes slices at the next step") {
  SimConfig cfg = small_config(2);
  Simulator sim(cfg);
  for (int t = 0; t < 3; ++t) sim.step(equal_partitions(sim));

  SUBCASE("adding a slice") {
    sim.reconfigure_slices(0, {1, 2, 3, 4});
    CHECK(sim.active_slice_ids(0) == std::vector<int>{1, 2, 3, 4});
    CHECK(sim.active_slice_ids(1) == std::vector<int>{1, 2, 4});
    const ObservationVector obs = sim.observation(0, 3);
    const int h = cfg.history_depth;
    for (int i = 0; i < 2 * h; ++i) CHECK(obs.z[static_cast<std::size_t>(i)] == 0.0);
    const auto records = sim.step(
        std::vector{PartitionVector{{0.25, 0.25, 0.25, 0.25}}, equal_partitions(sim)[1]});
    CHECK(records.size() == 7);
  }
  SUBCASE("removing every slice is an error") {
    CHECK_THROWS_AS(sim.reconfigure_slices(0, {}), std::invalid_argument);
    CHECK_THROWS_AS(sim.reconfigure_slices(5, {1}), std::invalid_argument);
  }
  SUBCASE("identical set is a no-op") {
    const auto before = sim.digest();
    sim.reconfigure_slices(0, {1, 2, 4});
    CHECK(sim.digest() == before);
  }
}

TEST_CASE("default traffic mask is periodic, bounded, per-slice distinct") {
  const TrafficMask m1 = default_traffic_mask(1, 96);
  const TrafficMask m2 = default_traffic_mask(2, 96);
  for (double v : m1.values) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  CHECK(m1.at(5) == m1.at(5 + 96));
  CHECK(m1.at(17) == m1.at(17 + 3 * 96));
  CHECK(m1.values != m2.values);
  CHECK_THROWS_AS(default_traffic_mask(1, 12), std::invalid_argument);
}

TEST_CASE("observations hold only past steps") {
  SimConfig cfg = small_config(1);
  Simulator sim(cfg);
  std::vector<double> last_users, last_cqi;
  for (int t = 0; t < 4; ++t) {
    const auto records = sim.step(equal_partitions(sim));
    last_users.push_back(records[0].users);
    last_cqi.push_back(records[0].cqi);
  }
  const ObservationVector obs = sim.observation(0, 1);
  const int h = cfg.history_depth;
  REQUIRE(static_cast<int>(obs.z.size()) == 2 * h + 2);
  // the most recent history entries must equal the last emitted records
  CHECK(obs.z[static_cast<std::size_t>(h - 1)] == last_users.back());
  CHECK(obs.z[static_cast<std::size_t>(2 * h - 1)] == last_cqi.back());
  CHECK(obs.z[static_cast<std::size_t>(h - 2)] == last_users[2]);
  CHECK(obs.z[static_cast<std::size_t>(2 * h)] == cfg.catalog[0].spec.throughput_req_mbps);
  CHECK(obs.z[static_cast<std::size_t>(2 * h + 1)] == cfg.catalog[0].spec.delay_req_ms);
}

TEST_CASE("peek_offered_load previews exactly the next step's ground truth") {
  Simulator sim(small_config(2));
  const auto peeked = sim.peek_offered_load(0);
  const auto records = sim.step(equal_partitions(sim));
  const double demand_1 = sim.config().catalog[0].demand_per_user_mbps;
  CHECK(peeked[0] == doctest::Approx(records[0].users * demand_1));
}

TEST_CASE("kpi csv round-trips") {
  Simulator sim(small_config(2));
  std::vector<KpiRecord> records;
  for (int t = 0; t < 5; ++t) {
    auto step_records = sim.step(equal_partitions(sim));
    records.insert(records.end(), step_records.begin(), step_records.end());
  }
  std::stringstream ss;
  write_kpi_csv(ss, records);
  const auto loaded = read_kpi_csv(ss);
  REQUIRE(loaded.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(loaded[i].t == records[i].t);
    CHECK(loaded[i].throughput_mbps == records[i].throughput_mbps);
    CHECK(loaded[i].delay_ms == records[i].delay_ms);
    CHECK(loaded[i].prb_utilization == records[i].prb_utilization);
  }
  std::stringstream bad("t,cell_id\n1,2\n");
  CHECK_THROWS_AS(read_kpi_csv(bad), std::runtime_error);
}
