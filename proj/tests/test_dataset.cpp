#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "netslice/dataset.hpp"
#include "netslice/netsim.hpp"
#include "netslice/rng.hpp"

using namespace netslice;

namespace {

std::vector<KpiRecord> collect_stream(int cells, int steps, std::uint64_t seed = 7) {
  SimConfig cfg = SimConfig::defaults();
  cfg.num_cells = cells;
  cfg.initial_active = {1, 2, 4};
  cfg.seed = seed;
  Simulator sim(cfg);
  Rng rng(derive(seed, Stream::explore));
  std::vector<KpiRecord> stream;
  for (int t = 0; t < steps; ++t) {
    std::vector<PartitionVector> parts;
    for (int c = 0; c < cells; ++c) {
      std::vector<double> raw(3);
      for (double& v : raw) v = rng.uniform01();
      parts.push_back(normalize_to_simplex(raw));
    }
    auto records = sim.step(parts);
    stream.insert(stream.end(), records.begin(), records.end());
  }
  return stream;
}

std::vector<SliceSpec> specs_of(const SimConfig& cfg) {
  std::vector<SliceSpec> specs;
  for (const SliceTraits& t : cfg.catalog) specs.push_back(t.spec);
  return specs;
}

struct TempFile {
  std::filesystem::path path;
  explicit TempFile(const char* name)
      : path(std::filesystem::temp_directory_path() / name) {}
  ~TempFile() { std::filesystem::remove(path); }
};

}  // namespace

TEST_CASE("assemble_samples emits one sample per fully-historied record") {
  const auto specs = specs_of(SimConfig::defaults());
  const int h = 5;

  SUBCASE("input dimension is 2H+3") {
    const auto stream = collect_stream(1, 10);
    const auto samples = assemble_samples(stream, specs, h);
    REQUIRE(!samples.empty());
    CHECK(samples.front().input.width() == 13);
    CHECK(samples.front().input.history_depth() == h);
  }
  SUBCASE("a stream of exactly H steps yields nothing") {
    const auto stream = collect_stream(1, h);
    AssemblyStats stats;
    const auto samples = assemble_samples(stream, specs, h, &stats);
    CHECK(samples.empty());
    CHECK(stats.skipped == 3 * static_cast<std::size_t>(h));
  }
  SUBCASE("counts: (steps - H) samples per (cell, slice)") {
    const auto stream = collect_stream(2, 20);
    AssemblyStats stats;
    const auto samples = assemble_samples(stream, specs, h, &stats);
    CHECK(samples.size() == 2 * 3 * (20 - h));
    CHECK(stats.emitted == samples.size());
    CHECK(stats.skipped == 2 * 3 * static_cast<std::size_t>(h));
  }
}

TEST_CASE("labels follow the satisfaction formula") {
  std::vector<KpiRecord> stream;
  // slice 1 requires 2 Mbit/s and 10 ms; feed it 1 Mbit/s at ample delay
  for (int t = 0; t < 6; ++t) {
    KpiRecord r;
    r.t = t;
    r.cell_id = 0;
    r.slice_id = 1;
    r.share = 0.5;
    r.prb_utilization = 0.4;
    r.users = 3;
    r.cqi = 9;
    r.throughput_mbps = 1.0;
    r.delay_ms = 3.0;
    stream.push_back(r);
  }
  const SliceSpec spec{1, 2.0, 10.0};
  const auto samples = assemble_samples(stream, std::array{spec}, 5);
  REQUIRE(samples.size() == 1);
  CHECK(samples[0].label == doctest::Approx(0.5));
  CHECK(samples[0].input.x == doctest::Approx(0.4));
  CHECK(samples[0].achieved.throughput_mbps == doctest::Approx(1.0));
}

TEST_CASE("histories never include the labeled step") {
  std::vector<KpiRecord> stream;
  for (int t = 0; t < 8; ++t) {
    KpiRecord r;
    r.t = t;
    r.cell_id = 0;
    r.slice_id = 1;
    r.users = 100 + t;  // distinct per step so leakage is detectable
    r.cqi = 5 + (t % 3);
    r.share = 0.5;
    r.prb_utilization = 0.3;
    r.throughput_mbps = 2.0;
    r.delay_ms = 4.0;
    stream.push_back(r);
  }
  const SliceSpec spec{1, 2.0, 10.0};
  const auto samples = assemble_samples(stream, std::array{spec}, 5);
  REQUIRE(samples.size() == 3);
  // first sample is for t=5: users history must be 100..104, not 105
  for (int j = 0; j < 5; ++j)
    CHECK(samples[0].input.z[static_cast<std::size_t>(j)] == doctest::Approx(100.0 + j));
  // requirements ride at the tail
  CHECK(samples[0].input.z[10] == doctest::Approx(2.0));
  CHECK(samples[0].input.z[11] == doctest::Approx(10.0));
}

TEST_CASE("gaps in a slice's timeline are skipped, not misassembled") {
  std::vector<KpiRecord> stream;
  for (int t = 0; t < 14; ++t) {
    if (t == 6) continue;  // hole
    KpiRecord r;
    r.t = t;
    r.cell_id = 0;
    r.slice_id = 1;
    r.users = t;
    r.cqi = 7;
    r.throughput_mbps = 2.5;
    r.delay_ms = 3.0;
    stream.push_back(r);
  }
  const SliceSpec spec{1, 2.0, 10.0};
  AssemblyStats stats;
  const auto samples = assemble_samples(stream, std::array{spec}, 5, &stats);
  // only t=5 (from the run before the hole) and t=12,13 have five
  // contiguous predecessors ending at t-1
  CHECK(samples.size() == 3);
  CHECK(stats.skipped == 10);
}

TEST_CASE("augmentation rule 1 rewrites requirements to the achieved QoS") {
  Sample raw;
  raw.input.x = 0.37;
  raw.input.z = {3, 4, 5, 6, 7, 9, 9, 9, 9, 9, 2.0, 10.0};
  raw.achieved = {1.4, 8.0};
  raw.label = 0.7;
  const auto out = augment(std::array{raw}, 99);
  REQUIRE(out.size() == 2);
  CHECK(out[0] == raw);
  const Sample& aug = out[1];
  CHECK(aug.provenance == Provenance::augmented_rule1);
  CHECK(aug.label == 1.0);
  CHECK(aug.input.z[10] == 1.4);
  CHECK(aug.input.z[11] == 8.0);
  CHECK(aug.parent == 0);
  // everything else is byte-identical to the parent
  CHECK(aug.input.x == raw.input.x);
  for (std::size_t i = 0; i < 10; ++i) CHECK(aug.input.z[i] == raw.input.z[i]);
}

TEST_CASE("augmentation rule 2 grows x inside [x, 1]") {
  Sample raw;
  raw.input.x = 0.4;
  raw.input.z = {1, 1, 1, 1, 1, 9, 9, 9, 9, 9, 2.0, 10.0};
  raw.achieved = {2.4, 4.0};
  raw.label = 1.0;
  const auto out = augment(std::array{raw}, 99);
  REQUIRE(out.size() == 2);
  const Sample& aug = out[1];
  CHECK(aug.provenance == Provenance::augmented_rule2);
  CHECK(aug.label == 1.0);
  CHECK(aug.input.x >= 0.4);
  CHECK(aug.input.x <= 1.0);
  CHECK(aug.input.z == raw.input.z);

  SUBCASE("degenerate interval at x = 1") {
    raw.input.x = 1.0;
    const auto out2 = augment(std::array{raw}, 99);
    CHECK(out2[1].input.x == 1.0);
  }
  SUBCASE("same seed, same draw") {
    const auto again = augment(std::array{raw}, 99);
    CHECK(again[1].input.x == out[1].input.x);
  }
  SUBCASE("already-augmented samples are not re-augmented") {
    const auto twice = augment(out, 99);
    CHECK(twice.size() == 3);  // raw gets a copy, the rule-2 copy passes through
  }
}

TEST_CASE("split is seeded, exact on even families, and leakage-safe") {
  const SimConfig cfg = SimConfig::defaults();
  auto stream = collect_stream(2, 90);
  auto raw = assemble_samples(stream, specs_of(cfg), 5);
  raw.resize(500);
  const auto samples = augment(raw, 5);  // 1000 samples in 500 families
  REQUIRE(samples.size() == 1000);

  const auto [train, test] = split(samples, 0.75, 11);
  CHECK(train.size() == 750);
  CHECK(test.size() == 250);

  const auto [train2, test2] = split(samples, 0.75, 11);
  CHECK(train2.size() == train.size());
  for (std::size_t i = 0; i < train.size(); ++i) CHECK(train2[i] == train[i]);

  // leakage guard: an augmented sample's parent input must sit on the same
  // side; check by matching the distinctive z tails / x values
  const auto [train3, test3] = split(samples, 0.6, 17);
  auto contains_parent = [](const std::vector<Sample>& side, const Sample& child) {
    for (const Sample& s : side)
      if (s.provenance == Provenance::raw &&
          std::equal(s.input.z.begin(), s.input.z.begin() + 10, child.input.z.begin()))
        return true;
    return false;
  };
  int checked = 0;
  for (const Sample& s : test3) {
    if (s.provenance == Provenance::raw || checked > 50) continue;
    CHECK(!contains_parent(train3, s));
    ++checked;
  }
  CHECK(checked > 0);

  CHECK_THROWS_AS(split(samples, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(split(samples, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(split(std::span<const Sample>{}, 0.5, 1), std::invalid_argument);
}

TEST_CASE("dataset persistence round-trips losslessly") {
  const SimConfig cfg = SimConfig::defaults();
  const auto stream = collect_stream(1, 12);
  const auto samples = augment(assemble_samples(stream, specs_of(cfg), 5), 3);
  REQUIRE(!samples.empty());

  TempFile f("netslice_dataset_test.csv");
  save_samples(f.path, samples);
  const auto loaded = load_samples(f.path);
  REQUIRE(loaded.size() == samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) CHECK(loaded[i] == samples[i]);
}

TEST_CASE("dataset parser names the offending line") {
  TempFile f("netslice_dataset_bad.csv");
  {
    std::ofstream os(f.path);
    os << "# netslice-dataset v1 H=1\n";
    os << "x,v_1,q_1,tput_req,delay_req,label,provenance\n";
    os << "0.5,1,9,2,10,1,raw\n";
    os << "0.5,1,9,2,10,1\n";  // short row
  }
  try {
    load_samples(f.path);
    FAIL("expected a parse error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("line 4") != std::string::npos);
  }
}

TEST_CASE("header-only dataset file loads as empty") {
  TempFile f("netslice_dataset_empty.csv");
  {
    std::ofstream os(f.path);
    os << "# netslice-dataset v1 H=5\n";
    os << "x,v_1,v_2,v_3,v_4,v_5,q_1,q_2,q_3,q_4,q_5,tput_req,delay_req,label,provenance\n";
  }
  CHECK(load_samples(f.path).empty());

  TempFile g("netslice_dataset_noheader.csv");
  { std::ofstream os(g.path); }
  CHECK_THROWS_AS(load_samples(g.path), std::runtime_error);
}
