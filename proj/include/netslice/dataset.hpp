#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "netslice/core.hpp"
#include "netslice/netsim.hpp"

// Estimator training sets built from KPI streams: feature assembly, label
// computation, the two augmentation rules, parent-aware train/test splitting
// and CSV persistence.

namespace netslice {

enum class Provenance { raw, augmented_rule1, augmented_rule2 };

const char* provenance_name(Provenance p);
Provenance provenance_from_name(const std::string& name);

struct Sample {
  ObservationVector input;
  double label = 0.0;  // satisfaction level in [0,1]
  Provenance provenance = Provenance::raw;

  // Pipeline-only metadata, not part of the persisted schema: the achieved
  // QoS behind the label (raw samples, consumed by augmentation rule 1) and
  // the index of the raw parent (augmented samples, consumed by split).
  QosOutcome achieved{};
  static constexpr std::size_t kNoParent = static_cast<std::size_t>(-1);
  std::size_t parent = kNoParent;
};

// Persisted-content equality: input, label, provenance.
bool operator==(const Sample& a, const Sample& b);

struct AssemblyStats {
  std::size_t emitted = 0;
  std::size_t skipped = 0;  // records lacking a full contiguous H-history
};

// One raw sample per (t, cell, slice) with x := prb_utilization(t), z from
// the previous H steps and the label computed from the achieved KPIs. The
// stream must be time-sorted; records without H contiguous predecessors are
// skipped and counted.
std::vector<Sample> assemble_samples(std::span<const KpiRecord> stream,
                                     std::span<const SliceSpec> specs, int history_depth,
                                     AssemblyStats* stats = nullptr);

// Emits every input sample followed by its augmented copy:
//   rule 1 (label < 1): requirements replaced by the achieved QoS, label 1.
//   rule 2 (label = 1): x replaced by a seeded uniform draw from [x, 1].
// Already-augmented inputs pass through untouched.
std::vector<Sample> augment(std::span<const Sample> samples, std::uint64_t seed);

// Seeded shuffle-then-split. Augmented samples always land on the same side
// as their raw parent so near-duplicates cannot leak across the split.
std::pair<std::vector<Sample>, std::vector<Sample>> split(std::span<const Sample> samples,
                                                          double train_fraction,
                                                          std::uint64_t seed);

// CSV schema: a version line, then
// x,v_1..v_H,q_1..q_H,tput_req,delay_req,label,provenance
// Doubles are written with full precision; round-trips are lossless.
void save_samples(const std::filesystem::path& path, std::span<const Sample> samples);
std::vector<Sample> load_samples(const std::filesystem::path& path);

}  // namespace netslice
