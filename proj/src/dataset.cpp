#include "netslice/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>

#include "netslice/csv.hpp"
#include "netslice/rng.hpp"

namespace netslice {

namespace {

constexpr const char* kDatasetMagic = "# netslice-dataset v1";

const SliceSpec& spec_for(std::span<const SliceSpec> specs, int slice_id) {
  for (const SliceSpec& s : specs)
    if (s.slice_id == slice_id) return s;
  throw std::invalid_argument("no SliceSpec for slice " + std::to_string(slice_id));
}

}  // namespace

const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::raw: return "raw";
    case Provenance::augmented_rule1: return "augmented_rule1";
    case Provenance::augmented_rule2: return "augmented_rule2";
  }
  throw std::logic_error("unknown provenance");
}

Provenance provenance_from_name(const std::string& name) {
  if (name == "raw") return Provenance::raw;
  if (name == "augmented_rule1") return Provenance::augmented_rule1;
  if (name == "augmented_rule2") return Provenance::augmented_rule2;
  throw std::runtime_error("unknown provenance tag '" + name + "'");
}

bool operator==(const Sample& a, const Sample& b) {
  return a.input.x == b.input.x && a.input.z == b.input.z && a.label == b.label &&
         a.provenance == b.provenance;
}

std::vector<Sample> assemble_samples(std::span<const KpiRecord> stream,
                                     std::span<const SliceSpec> specs, int history_depth,
                                     AssemblyStats* stats) {
  if (history_depth < 1) throw std::invalid_argument("history_depth must be >= 1");
  const std::size_t h = static_cast<std::size_t>(history_depth);

  std::map<std::pair<int, int>, std::vector<const KpiRecord*>> groups;
  for (const KpiRecord& r : stream) groups[{r.cell_id, r.slice_id}].push_back(&r);

  AssemblyStats local;
  std::vector<Sample> out;
  for (auto& [key, records] : groups) {
    std::stable_sort(records.begin(), records.end(),
                     [](const KpiRecord* a, const KpiRecord* b) { return a->t < b->t; });
    const SliceSpec& spec = spec_for(specs, key.second);
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (i < h) {
        ++local.skipped;
        continue;
      }
      // the H predecessors must be contiguous in time
      bool contiguous = true;
      for (std::size_t j = i - h; j < i; ++j)
        if (records[j + 1]->t != records[j]->t + 1) contiguous = false;
      if (!contiguous) {
        ++local.skipped;
        continue;
      }
      const KpiRecord& now = *records[i];
      Sample s;
      s.input.x = now.prb_utilization;
      s.input.z.reserve(2 * h + 2);
      for (std::size_t j = i - h; j < i; ++j) s.input.z.push_back(records[j]->users);
      for (std::size_t j = i - h; j < i; ++j) s.input.z.push_back(records[j]->cqi);
      s.input.z.push_back(spec.throughput_req_mbps);
      s.input.z.push_back(spec.delay_req_ms);
      s.achieved = {now.throughput_mbps, now.delay_ms};
      s.label = satisfaction(s.achieved, spec).value;
      out.push_back(std::move(s));
      ++local.emitted;
    }
  }
  if (stats) *stats = local;
  return out;
}

std::vector<Sample> augment(std::span<const Sample> samples, std::uint64_t seed) {
  std::vector<Sample> out;
  out.reserve(samples.size() * 2);
  std::uint64_t raw_counter = 0;
  for (const Sample& s : samples) {
    out.push_back(s);
    if (s.provenance != Provenance::raw) continue;
    const std::size_t parent_index = out.size() - 1;
    const std::size_t req_offset = s.input.z.size() - 2;
    Sample copy = s;
    copy.parent = parent_index;
    copy.achieved = {};
    if (s.label < 1.0) {
      // rule 1: the achieved QoS, taken as the requirement, is met exactly
      copy.input.z[req_offset] = s.achieved.throughput_mbps;
      copy.input.z[req_offset + 1] = s.achieved.delay_ms;
      copy.label = 1.0;
      copy.provenance = Provenance::augmented_rule1;
    } else {
      // rule 2: satisfaction is monotone in x, so any x' >= x keeps label 1
      Rng rng(derive(seed, Stream::augment, raw_counter));
      copy.input.x = rng.uniform(s.input.x, 1.0);
      copy.label = 1.0;
      copy.provenance = Provenance::augmented_rule2;
    }
    out.push_back(std::move(copy));
    ++raw_counter;
  }
  return out;
}

std::pair<std::vector<Sample>, std::vector<Sample>> split(std::span<const Sample> samples,
                                                          double train_fraction,
                                                          std::uint64_t seed) {
  if (samples.empty()) throw std::invalid_argument("cannot split an empty sample list");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("train_fraction must lie strictly between 0 and 1");

  // families: a raw sample plus the augmented copies pointing at it
  std::vector<std::vector<std::size_t>> families;
  std::map<std::size_t, std::size_t> family_of;  // sample index -> family
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::size_t parent = samples[i].parent;
    if (parent != Sample::kNoParent && family_of.count(parent)) {
      families[family_of[parent]].push_back(i);
      family_of[i] = family_of[parent];
    } else {
      family_of[i] = families.size();
      families.push_back({i});
    }
  }

  Rng rng(derive(seed, Stream::split));
  for (std::size_t i = families.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<long>(i - 1)));
    std::swap(families[i - 1], families[j]);
  }

  const auto target =
      static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(samples.size())));
  std::vector<Sample> train, test;
  std::size_t taken = 0;
  for (const auto& family : families) {
    auto& side = taken < target ? train : test;
    for (std::size_t idx : family) side.push_back(samples[idx]);
    if (taken < target) taken += family.size();
  }
  return {std::move(train), std::move(test)};
}

void save_samples(const std::filesystem::path& path, std::span<const Sample> samples) {
  std::size_t h = 0;
  if (!samples.empty()) h = static_cast<std::size_t>(samples.front().input.history_depth());
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << kDatasetMagic << " H=" << h << '\n';
  os << "x";
  for (std::size_t i = 1; i <= h; ++i) os << ",v_" << i;
  for (std::size_t i = 1; i <= h; ++i) os << ",q_" << i;
  os << ",tput_req,delay_req,label,provenance\n";
  for (const Sample& s : samples) {
    if (s.input.z.size() != 2 * h + 2)
      throw std::invalid_argument("samples in one file must share a history depth");
    os << format_double(s.input.x);
    for (double v : s.input.z) os << ',' << format_double(v);
    os << ',' << format_double(s.label) << ',' << provenance_name(s.provenance) << '\n';
  }
  if (!os) throw std::runtime_error("write to " + path.string() + " failed");
}

std::vector<Sample> load_samples(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line) || line.rfind(kDatasetMagic, 0) != 0)
    throw std::runtime_error(path.string() + ": not a netslice dataset (bad version line)");
  if (!std::getline(is, line))
    throw std::runtime_error(path.string() + ": missing column header");
  const std::size_t columns = split_csv_line(line).size();
  if (columns < 5 || (columns - 5) % 2 != 0)
    throw std::runtime_error(path.string() + ": malformed column header");

  std::vector<Sample> out;
  std::size_t line_no = 2;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cols = split_csv_line(line);
    if (cols.size() != columns)
      throw std::runtime_error(path.string() + " line " + std::to_string(line_no) +
                               ": expected " + std::to_string(columns) + " columns, got " +
                               std::to_string(cols.size()));
    try {
      Sample s;
      s.input.x = parse_double(cols[0]);
      s.input.z.reserve(columns - 3);
      for (std::size_t i = 1; i + 2 < cols.size(); ++i) s.input.z.push_back(parse_double(cols[i]));
      s.label = parse_double(cols[columns - 2]);
      s.provenance = provenance_from_name(cols[columns - 1]);
      out.push_back(std::move(s));
    } catch (const std::exception& e) {
      throw std::runtime_error(path.string() + " line " + std::to_string(line_no) + ": " +
                               e.what());
    }
  }
  return out;
}

}  // namespace netslice
