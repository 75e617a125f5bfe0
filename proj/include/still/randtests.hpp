#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "still/bitstream.hpp"

namespace still {

/// Complementary error function (<= 1e-12 absolute).
double erfc(double x);

/// Regularized upper incomplete gamma Q(a, x) (<= 1e-10 absolute).
double igamc(double a, double x);

/// Standard normal CDF, used by the cumulative-sums p-value.
double normal_cdf(double x);

enum class Statistic {
  frequency,
  block_frequency,
  runs,
  longest_run,
  cumsum_fwd,
  cumsum_rev,
  spectral,
  approx_entropy,
  serial,
};

inline constexpr std::array<Statistic, 9> kAllStatistics = {
    Statistic::frequency,     Statistic::block_frequency, Statistic::runs,
    Statistic::longest_run,   Statistic::cumsum_fwd,      Statistic::cumsum_rev,
    Statistic::spectral,      Statistic::approx_entropy,  Statistic::serial,
};

const char* statistic_name(Statistic s);
Statistic statistic_from_name(const std::string& name);

struct BatteryConfig {
  double alpha = 0.01;        ///< per-block significance level
  int block_bits = 100;       ///< sub-block size inside block-aggregated statistics
  int min_stream_bits = 1000; ///< evaluation blocks never get smaller than this

  void validate() const;
};

/// p-value of one statistic on one evaluation block. `prerequisite_failed`
/// marks degenerate inputs where the statistic's applicability condition
/// fails (reported as p = 0).
struct BlockVerdict {
  double p_value = 0.0;
  bool prerequisite_failed = false;
};

/// Evaluate a single statistic on a single block of bits. Exposed for
/// known-answer checks; `params`, when given, receives the constants the
/// statistic chose for this block length.
BlockVerdict statistic_p_value(Statistic s, std::span<const std::uint8_t> bits,
                               const BatteryConfig& cfg,
                               std::map<std::string, double>* params = nullptr);

struct TestOutcome {
  std::string test_name;
  std::vector<double> p_values;        // one per evaluation block
  std::array<int, 10> deciles{};       // C1..C10 over the block p-values
  double proportion_passing = 0.0;     // fraction of blocks with p >= alpha
  double proportion_threshold = 0.0;   // minimum passing proportion at this block count
  double uniformity_p = 0.0;           // chi-square over the decile counters
  int prerequisite_failures = 0;
  bool passed = false;
  std::map<std::string, double> params;

  nlohmann::json to_json() const;
};

/// Split the stream into evaluation blocks (up to 100 blocks of at least
/// min_stream_bits each), score every block, and aggregate NIST-style.
TestOutcome run_test(const BitStream& stream, Statistic s, const BatteryConfig& cfg = {});

struct BatteryReport {
  std::vector<TestOutcome> outcomes;
  int passed_count = 0;
  int total = 0;

  nlohmann::json to_json() const;
  /// Final-analysis-report style table: C1..C10, p-value, proportion, name.
  std::string to_table() const;
};

BatteryReport run_battery(const BitStream& stream, const BatteryConfig& cfg = {});

}  // namespace still
