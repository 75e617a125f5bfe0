#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "still/bitstream.hpp"

namespace still {

/// Distiller parameters: subsequence width k and inter-window skip m.
struct DistillConfig {
  int k = 8;  ///< window width, 2..24 (the value histogram has 2^k cells)
  int m = 0;  ///< bits dropped after each window

  void validate() const;
  int stride() const { return k + m; }
};

/// Occurrence counts and first-occurrence window indices for all k-bit
/// window values seen during warmup.
struct SubsequenceHistogram {
  int k = 0;
  std::vector<std::uint64_t> counts;      // 2^k cells
  std::vector<std::int64_t> first_seen;   // window index, or kNeverSeen
  std::uint64_t windows_total = 0;

  static constexpr std::int64_t kNeverSeen = -1;

  std::size_t observed_values() const;
};

/// The retained (typical) window values and their dense (k-1)-bit output
/// indices. Serializable so one device can hand its table to a peer.
struct RemapTable {
  int k = 0;
  std::vector<std::uint32_t> retained;   // ascending value order
  std::vector<std::int32_t> index_of;    // 2^k cells, kDropped for discarded values

  static constexpr std::int32_t kDropped = -1;

  nlohmann::json to_json() const;
  static RemapTable from_json(const nlohmann::json& j);
};

/// Classical debiaser: one output bit per unequal non-overlapping pair
/// (01 -> 0, 10 -> 1); equal pairs and an odd trailing bit are dropped.
BitStream von_neumann(const BitStream& input);

/// Count k-bit windows read at offsets 0, k+m, 2(k+m), ... MSB first.
/// A trailing fragment shorter than k bits is ignored.
SubsequenceHistogram build_histogram(const BitStream& input, const DistillConfig& cfg);

/// Keep the least-frequent half of the observed values (ties broken by
/// ascending value), capped at 2^(k-1) so indices fit in k-1 bits, and
/// number the keepers in first-occurrence order.
RemapTable select_typical(const SubsequenceHistogram& hist);

/// Re-scan the input with the histogram windowing; retained windows emit
/// their (k-1)-bit index, everything else emits nothing.
BitStream distill(const BitStream& input, const DistillConfig& cfg, const RemapTable& table);

struct MoonshineResult {
  BitStream output;
  RemapTable table;
};

/// Full distiller pass: histogram over the warmup prefix
/// (ceil(warmup_fraction * length) bits), typical-set selection, then a
/// remap pass over the entire input.
MoonshineResult moonshine(const BitStream& input, const DistillConfig& cfg,
                          double warmup_fraction = 1.0);

}  // namespace still
