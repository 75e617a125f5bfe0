#include "still/correctors.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace still {

void DistillConfig::validate() const {
  if (k < 2 || k > 24) throw config_error("subsequence length k must lie in [2, 24]");
  if (m < 0) throw config_error("skip length m must be non-negative");
}

std::size_t SubsequenceHistogram::observed_values() const {
  std::size_t d = 0;
  for (auto c : counts) d += (c > 0);
  return d;
}

BitStream von_neumann(const BitStream& input) {
  BitStream out;
  out.reserve(input.size() / 4);
  for (std::size_t i = 0; i + 1 < input.size(); i += 2) {
    if (input[i] != input[i + 1]) out.push_back(input[i]);
  }
  return out;
}

SubsequenceHistogram build_histogram(const BitStream& input, const DistillConfig& cfg) {
  cfg.validate();
  const std::size_t k = static_cast<std::size_t>(cfg.k);
  if (input.size() < k) throw insufficient_data("insufficient warmup data");

  SubsequenceHistogram hist;
  hist.k = cfg.k;
  hist.counts.assign(std::size_t{1} << k, 0);
  hist.first_seen.assign(std::size_t{1} << k, SubsequenceHistogram::kNeverSeen);

  const std::size_t stride = static_cast<std::size_t>(cfg.stride());
  std::int64_t window = 0;
  for (std::size_t off = 0; off + k <= input.size(); off += stride) {
    std::uint32_t value = 0;
    for (std::size_t j = 0; j < k; ++j) value = (value << 1) | input[off + j];
    if (hist.counts[value] == 0) hist.first_seen[value] = window;
    ++hist.counts[value];
    ++window;
  }
  hist.windows_total = static_cast<std::uint64_t>(window);
  return hist;
}

RemapTable select_typical(const SubsequenceHistogram& hist) {
  std::vector<std::pair<std::uint64_t, std::uint32_t>> observed;  // (count, value)
  for (std::uint32_t v = 0; v < hist.counts.size(); ++v) {
    if (hist.counts[v] > 0) observed.emplace_back(hist.counts[v], v);
  }
  if (observed.size() < 2) throw config_error("degenerate histogram");

  std::sort(observed.begin(), observed.end());
  const std::size_t cap = std::size_t{1} << (hist.k - 1);
  const std::size_t keep = std::min(observed.size() / 2, cap);

  RemapTable table;
  table.k = hist.k;
  table.index_of.assign(hist.counts.size(), RemapTable::kDropped);
  table.retained.reserve(keep);

  // number the keepers in first-occurrence order
  std::vector<std::pair<std::int64_t, std::uint32_t>> by_first;  // (first_seen, value)
  by_first.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    const std::uint32_t v = observed[i].second;
    by_first.emplace_back(hist.first_seen[v], v);
    table.retained.push_back(v);
  }
  std::sort(by_first.begin(), by_first.end());
  for (std::size_t i = 0; i < by_first.size(); ++i) {
    table.index_of[by_first[i].second] = static_cast<std::int32_t>(i);
  }
  std::sort(table.retained.begin(), table.retained.end());
  return table;
}

BitStream distill(const BitStream& input, const DistillConfig& cfg, const RemapTable& table) {
  cfg.validate();
  if (table.k != cfg.k) throw config_error("table/config mismatch");
  const std::size_t k = static_cast<std::size_t>(cfg.k);
  const std::size_t stride = static_cast<std::size_t>(cfg.stride());

  BitStream out;
  for (std::size_t off = 0; off + k <= input.size(); off += stride) {
    std::uint32_t value = 0;
    for (std::size_t j = 0; j < k; ++j) value = (value << 1) | input[off + j];
    const std::int32_t index = table.index_of[value];
    if (index != RemapTable::kDropped) out.append_value(static_cast<std::uint64_t>(index), cfg.k - 1);
  }
  return out;
}

MoonshineResult moonshine(const BitStream& input, const DistillConfig& cfg,
                          double warmup_fraction) {
  cfg.validate();
  if (!(warmup_fraction > 0.0) || warmup_fraction > 1.0)
    throw config_error("warmup fraction must lie in (0, 1]");

  const auto warmup_bits =
      static_cast<std::size_t>(std::ceil(warmup_fraction * static_cast<double>(input.size())));
  std::vector<std::uint8_t> prefix(input.bits().begin(),
                                   input.bits().begin() + static_cast<std::ptrdiff_t>(
                                                              std::min(warmup_bits, input.size())));
  const auto hist = build_histogram(BitStream(std::move(prefix)), cfg);
  auto table = select_typical(hist);
  auto output = distill(input, cfg, table);
  return MoonshineResult{std::move(output), std::move(table)};
}

nlohmann::json RemapTable::to_json() const {
  nlohmann::json pairs = nlohmann::json::array();
  for (std::uint32_t v : retained) {
    pairs.push_back({v, index_of[v]});
  }
  return nlohmann::json{{"k", k}, {"retained", retained}, {"index_of", pairs}};
}

RemapTable RemapTable::from_json(const nlohmann::json& j) {
  RemapTable table;
  try {
    table.k = j.at("k").get<int>();
    table.retained = j.at("retained").get<std::vector<std::uint32_t>>();
    if (table.k < 2 || table.k > 24) throw config_error("table k out of range");
    table.index_of.assign(std::size_t{1} << table.k, kDropped);
    for (const auto& pair : j.at("index_of")) {
      const auto value = pair.at(0).get<std::uint64_t>();
      const auto index = pair.at(1).get<std::int64_t>();
      if (value >= table.index_of.size()) throw config_error("table value exceeds 2^k");
      table.index_of[value] = static_cast<std::int32_t>(index);
    }
  } catch (const nlohmann::json::exception& e) {
    throw io_error(std::string("bad remap table: ") + e.what());
  }

  // invariants: capped size, dense injective indices, retained matches mapping
  const std::size_t cap = std::size_t{1} << (table.k - 1);
  if (table.retained.size() > cap) throw config_error("table retains more than 2^(k-1) values");
  std::vector<bool> used(table.retained.size(), false);
  std::size_t mapped = 0;
  for (std::size_t v = 0; v < table.index_of.size(); ++v) {
    const auto index = table.index_of[v];
    if (index == kDropped) continue;
    ++mapped;
    if (index < 0 || static_cast<std::size_t>(index) >= table.retained.size() || used[index])
      throw config_error("table indices must be exactly 0..retained-1, each once");
    used[index] = true;
    if (!std::binary_search(table.retained.begin(), table.retained.end(),
                            static_cast<std::uint32_t>(v)))
      throw config_error("mapped value missing from retained list");
  }
  if (mapped != table.retained.size())
    throw config_error("retained list does not match the index mapping");
  return table;
}

}  // namespace still
