#include "still/randtests.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <nlohmann/json.hpp>
#include <unsupported/Eigen/FFT>

namespace still {

double erfc(double x) { return std::erfc(x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

namespace {

constexpr double kEps = 1e-16;
constexpr double kBig = 4.503599627370496e15;
constexpr double kBigInv = 2.22044604925031308085e-16;

// lower regularized incomplete gamma, power series (x < a + 1)
double igam_series(double a, double x) {
  if (x <= 0) return 0.0;
  const double ax = a * std::log(x) - x - std::lgamma(a);
  if (ax < -709.0) return 0.0;
  double r = a;
  double c = 1.0;
  double ans = 1.0;
  do {
    r += 1.0;
    c *= x / r;
    ans += c;
  } while (c / ans > kEps);
  return ans * std::exp(ax) / a;
}

// upper regularized incomplete gamma, continued fraction (x >= a + 1)
double igamc_fraction(double a, double x) {
  const double ax = a * std::log(x) - x - std::lgamma(a);
  if (ax < -709.0) return 0.0;

  double y = 1.0 - a;
  double z = x + y + 1.0;
  double c = 0.0;
  double pkm2 = 1.0, qkm2 = x;
  double pkm1 = x + 1.0, qkm1 = z * x;
  double ans = pkm1 / qkm1;
  double t = 1.0;
  do {
    c += 1.0;
    y += 1.0;
    z += 2.0;
    const double yc = y * c;
    const double pk = pkm1 * z - pkm2 * yc;
    const double qk = qkm1 * z - qkm2 * yc;
    if (qk != 0) {
      const double r = pk / qk;
      t = std::abs((ans - r) / r);
      ans = r;
    } else {
      t = 1.0;
    }
    pkm2 = pkm1;
    pkm1 = pk;
    qkm2 = qkm1;
    qkm1 = qk;
    if (std::abs(pk) > kBig) {
      pkm2 *= kBigInv;
      pkm1 *= kBigInv;
      qkm2 *= kBigInv;
      qkm1 *= kBigInv;
    }
  } while (t > kEps);
  return ans * std::exp(ax);
}

}  // namespace

double igamc(double a, double x) {
  if (!(a > 0)) throw config_error("igamc: a must be positive");
  if (x < 0) throw config_error("igamc: x must be non-negative");
  if (x == 0) return 1.0;
  if (x < a + 1.0) return 1.0 - igam_series(a, x);
  return igamc_fraction(a, x);
}

const char* statistic_name(Statistic s) {
  switch (s) {
    case Statistic::frequency: return "frequency";
    case Statistic::block_frequency: return "block_frequency";
    case Statistic::runs: return "runs";
    case Statistic::longest_run: return "longest_run";
    case Statistic::cumsum_fwd: return "cumsum_fwd";
    case Statistic::cumsum_rev: return "cumsum_rev";
    case Statistic::spectral: return "spectral";
    case Statistic::approx_entropy: return "approx_entropy";
    case Statistic::serial: return "serial";
  }
  return "unknown";
}

Statistic statistic_from_name(const std::string& name) {
  for (Statistic s : kAllStatistics) {
    if (name == statistic_name(s)) return s;
  }
  throw config_error("unknown statistic: " + name);
}

void BatteryConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw config_error("alpha must lie in (0, 1)");
  if (block_bits < 100) throw config_error("block_bits must be at least 100");
  if (min_stream_bits < 128) throw config_error("min_stream_bits must be at least 128");
}

namespace {

using Bits = std::span<const std::uint8_t>;

void record(std::map<std::string, double>* params, const char* key, double value) {
  if (params) (*params)[key] = value;
}

BlockVerdict frequency_test(Bits bits) {
  const auto n = static_cast<double>(bits.size());
  long long sum = 0;
  for (auto b : bits) sum += 2 * static_cast<int>(b) - 1;
  const double s_obs = std::abs(static_cast<double>(sum)) / std::sqrt(n);
  return {erfc(s_obs / std::numbers::sqrt2), false};
}

BlockVerdict block_frequency_test(Bits bits, int block_bits,
                                  std::map<std::string, double>* params) {
  const std::size_t m = static_cast<std::size_t>(block_bits);
  const std::size_t blocks = bits.size() / m;
  if (blocks == 0) throw insufficient_data("block shorter than block_bits");
  record(params, "sub_block_bits", static_cast<double>(m));
  double chi2 = 0.0;
  for (std::size_t i = 0; i < blocks; ++i) {
    std::size_t ones = 0;
    for (std::size_t j = 0; j < m; ++j) ones += bits[i * m + j];
    const double pi = static_cast<double>(ones) / static_cast<double>(m);
    chi2 += (pi - 0.5) * (pi - 0.5);
  }
  chi2 *= 4.0 * static_cast<double>(m);
  return {igamc(static_cast<double>(blocks) / 2.0, chi2 / 2.0), false};
}

BlockVerdict runs_test(Bits bits) {
  const auto n = static_cast<double>(bits.size());
  std::size_t ones = 0;
  for (auto b : bits) ones += b;
  const double pi = static_cast<double>(ones) / n;
  if (std::abs(pi - 0.5) >= 2.0 / std::sqrt(n)) return {0.0, true};

  std::size_t v_obs = 1;
  for (std::size_t i = 0; i + 1 < bits.size(); ++i) v_obs += (bits[i] != bits[i + 1]);
  const double product = pi * (1.0 - pi);
  const double arg = std::abs(static_cast<double>(v_obs) - 2.0 * n * product) /
                     (2.0 * std::sqrt(2.0 * n) * product);
  return {erfc(arg), false};
}

BlockVerdict longest_run_test(Bits bits, std::map<std::string, double>* params) {
  const std::size_t n = bits.size();
  // SP 800-22 table 2-4 block lengths and class probabilities
  std::size_t m = 0;
  int k = 0;
  const double* pi = nullptr;
  int lo = 0;
  static constexpr double kPi8[] = {0.21484375, 0.3671875, 0.23046875, 0.1875};
  static constexpr double kPi128[] = {0.1174035788, 0.242955959, 0.249363483,
                                      0.17517706,   0.102701071, 0.112398847};
  static constexpr double kPi10000[] = {0.0882, 0.2092, 0.2483, 0.1933,
                                        0.1208, 0.0675, 0.0727};
  if (n < 6272) {
    m = 8, k = 3, pi = kPi8, lo = 1;
  } else if (n < 750000) {
    m = 128, k = 5, pi = kPi128, lo = 4;
  } else {
    m = 10000, k = 6, pi = kPi10000, lo = 10;
  }
  const std::size_t blocks = n / m;
  if (blocks == 0) throw insufficient_data("block shorter than the longest-run table size");
  record(params, "run_block_bits", static_cast<double>(m));
  record(params, "run_classes", static_cast<double>(k + 1));

  std::vector<double> nu(static_cast<std::size_t>(k) + 1, 0.0);
  for (std::size_t i = 0; i < blocks; ++i) {
    int run = 0, longest = 0;
    for (std::size_t j = i * m; j < (i + 1) * m; ++j) {
      run = bits[j] ? run + 1 : 0;
      longest = std::max(longest, run);
    }
    const int cls = std::clamp(longest - lo, 0, k);
    nu[static_cast<std::size_t>(cls)] += 1.0;
  }
  double chi2 = 0.0;
  for (int i = 0; i <= k; ++i) {
    const double expected = static_cast<double>(blocks) * pi[i];
    chi2 += (nu[static_cast<std::size_t>(i)] - expected) * (nu[static_cast<std::size_t>(i)] - expected) / expected;
  }
  return {igamc(static_cast<double>(k) / 2.0, chi2 / 2.0), false};
}

BlockVerdict cumsum_test(Bits bits, bool forward) {
  const auto n = static_cast<double>(bits.size());
  long long sum = 0, z = 0;
  if (forward) {
    for (std::size_t i = 0; i < bits.size(); ++i) {
      sum += 2 * static_cast<int>(bits[i]) - 1;
      z = std::max(z, std::llabs(sum));
    }
  } else {
    for (std::size_t i = bits.size(); i-- > 0;) {
      sum += 2 * static_cast<int>(bits[i]) - 1;
      z = std::max(z, std::llabs(sum));
    }
  }
  const double zd = static_cast<double>(z);
  const double sqrt_n = std::sqrt(n);
  double sum1 = 0.0;
  for (long long k = static_cast<long long>(std::floor((-n / zd + 1.0) / 4.0));
       k <= static_cast<long long>(std::floor((n / zd - 1.0) / 4.0)); ++k) {
    const auto kd = static_cast<double>(k);
    sum1 += normal_cdf((4.0 * kd + 1.0) * zd / sqrt_n) - normal_cdf((4.0 * kd - 1.0) * zd / sqrt_n);
  }
  double sum2 = 0.0;
  for (long long k = static_cast<long long>(std::floor((-n / zd - 3.0) / 4.0));
       k <= static_cast<long long>(std::floor((n / zd - 1.0) / 4.0)); ++k) {
    const auto kd = static_cast<double>(k);
    sum2 += normal_cdf((4.0 * kd + 3.0) * zd / sqrt_n) - normal_cdf((4.0 * kd + 1.0) * zd / sqrt_n);
  }
  return {1.0 - sum1 + sum2, false};
}

BlockVerdict spectral_test(Bits bits) {
  const std::size_t n = bits.size();
  std::vector<double> data(n);
  for (std::size_t i = 0; i < n; ++i) data[i] = 2.0 * bits[i] - 1.0;

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, data);

  const double threshold = std::sqrt(std::log(1.0 / 0.05) * static_cast<double>(n));
  const std::size_t half = n / 2;
  std::size_t below = 0;
  for (std::size_t j = 0; j < half; ++j) below += (std::abs(spectrum[j]) < threshold);

  const double n0 = 0.95 * static_cast<double>(half);
  const double d = (static_cast<double>(below) - n0) /
                   std::sqrt(static_cast<double>(n) * 0.95 * 0.05 / 4.0);
  return {erfc(std::abs(d) / std::numbers::sqrt2), false};
}

// cyclic m-bit pattern counts shared by approx_entropy and serial
std::vector<std::uint32_t> pattern_counts(Bits bits, int m) {
  const std::size_t n = bits.size();
  std::vector<std::uint32_t> counts(std::size_t{1} << m, 0);
  const std::uint32_t mask = static_cast<std::uint32_t>((1u << m) - 1);
  std::uint32_t value = 0;
  for (std::size_t i = 0; i + 1 < static_cast<std::size_t>(m); ++i)
    value = (value << 1) | bits[i % n];
  for (std::size_t i = 0; i < n; ++i) {
    value = ((value << 1) | bits[(i + static_cast<std::size_t>(m) - 1) % n]) & mask;
    ++counts[value];
  }
  return counts;
}

int apen_block_len(std::size_t n) {
  const int m = static_cast<int>(std::floor(std::log2(static_cast<double>(n)))) - 6;
  return std::clamp(m, 1, 10);
}

int serial_block_len(std::size_t n) {
  const int m = static_cast<int>(std::floor(std::log2(static_cast<double>(n)))) - 4;
  return std::clamp(m, 3, 16);
}

BlockVerdict approx_entropy_test(Bits bits, std::map<std::string, double>* params) {
  const std::size_t n = bits.size();
  const int m = apen_block_len(n);
  record(params, "pattern_bits", static_cast<double>(m));

  double phi[2] = {0.0, 0.0};
  for (int r = 0; r < 2; ++r) {
    const auto counts = pattern_counts(bits, m + r);
    double acc = 0.0;
    for (auto c : counts) {
      if (c > 0) {
        const double f = static_cast<double>(c) / static_cast<double>(n);
        acc += f * std::log(f);
      }
    }
    phi[r] = acc;
  }
  const double apen = phi[0] - phi[1];
  const double chi2 = 2.0 * static_cast<double>(n) * (std::numbers::ln2 - apen);
  return {igamc(std::pow(2.0, m - 1), chi2 / 2.0), false};
}

double psi_squared(Bits bits, int m) {
  if (m <= 0) return 0.0;
  const auto counts = pattern_counts(bits, m);
  double sum = 0.0;
  for (auto c : counts) sum += static_cast<double>(c) * static_cast<double>(c);
  const auto n = static_cast<double>(bits.size());
  return sum * std::pow(2.0, m) / n - n;
}

BlockVerdict serial_test(Bits bits, std::map<std::string, double>* params) {
  const int m = serial_block_len(bits.size());
  record(params, "pattern_bits", static_cast<double>(m));
  const double del1 = psi_squared(bits, m) - psi_squared(bits, m - 1);
  return {igamc(std::pow(2.0, m - 2), del1 / 2.0), false};
}

}  // namespace

BlockVerdict statistic_p_value(Statistic s, Bits bits, const BatteryConfig& cfg,
                               std::map<std::string, double>* params) {
  if (bits.empty()) throw insufficient_data("insufficient bits");
  BlockVerdict verdict;
  switch (s) {
    case Statistic::frequency: verdict = frequency_test(bits); break;
    case Statistic::block_frequency:
      verdict = block_frequency_test(bits, cfg.block_bits, params);
      break;
    case Statistic::runs: verdict = runs_test(bits); break;
    case Statistic::longest_run: verdict = longest_run_test(bits, params); break;
    case Statistic::cumsum_fwd: verdict = cumsum_test(bits, true); break;
    case Statistic::cumsum_rev: verdict = cumsum_test(bits, false); break;
    case Statistic::spectral: verdict = spectral_test(bits); break;
    case Statistic::approx_entropy: verdict = approx_entropy_test(bits, params); break;
    case Statistic::serial: verdict = serial_test(bits, params); break;
  }
  // the cumulative-sums series can land a rounding hair outside [0, 1]
  verdict.p_value = std::clamp(verdict.p_value, 0.0, 1.0);
  return verdict;
}

TestOutcome run_test(const BitStream& stream, Statistic s, const BatteryConfig& cfg) {
  cfg.validate();
  const std::size_t n = stream.size();
  if (n < static_cast<std::size_t>(cfg.min_stream_bits)) throw insufficient_data("insufficient bits");

  // up to 100 evaluation blocks of at least min_stream_bits each
  const std::size_t blocks =
      std::min<std::size_t>(100, n / static_cast<std::size_t>(cfg.min_stream_bits));
  const std::size_t block_len = n / blocks;
  if (block_len < static_cast<std::size_t>(cfg.block_bits))
    throw config_error("block_bits exceeds the evaluation block length");

  TestOutcome outcome;
  outcome.test_name = statistic_name(s);
  outcome.p_values.reserve(blocks);
  const auto bits = stream.bits();
  for (std::size_t i = 0; i < blocks; ++i) {
    auto* params = (i == 0) ? &outcome.params : nullptr;
    const auto verdict = statistic_p_value(s, bits.subspan(i * block_len, block_len), cfg, params);
    outcome.p_values.push_back(verdict.p_value);
    outcome.prerequisite_failures += verdict.prerequisite_failed;
  }

  int passing = 0;
  for (double p : outcome.p_values) {
    const int decile = std::min(9, static_cast<int>(p * 10.0));
    ++outcome.deciles[static_cast<std::size_t>(decile)];
    passing += (p >= cfg.alpha);
  }
  const auto count = static_cast<double>(blocks);
  outcome.proportion_passing = static_cast<double>(passing) / count;
  outcome.proportion_threshold =
      (1.0 - cfg.alpha) - 3.0 * std::sqrt(cfg.alpha * (1.0 - cfg.alpha) / count);

  const double expected = count / 10.0;
  double chi2 = 0.0;
  for (int c : outcome.deciles) {
    chi2 += (static_cast<double>(c) - expected) * (static_cast<double>(c) - expected) / expected;
  }
  outcome.uniformity_p = igamc(4.5, chi2 / 2.0);
  outcome.passed = outcome.proportion_passing >= outcome.proportion_threshold &&
                   outcome.uniformity_p >= 1e-4;
  outcome.params["evaluation_blocks"] = count;
  outcome.params["evaluation_block_bits"] = static_cast<double>(block_len);
  return outcome;
}

BatteryReport run_battery(const BitStream& stream, const BatteryConfig& cfg) {
  BatteryReport report;
  report.total = static_cast<int>(kAllStatistics.size());
  for (Statistic s : kAllStatistics) {
    report.outcomes.push_back(run_test(stream, s, cfg));
    report.passed_count += report.outcomes.back().passed;
  }
  return report;
}

nlohmann::json TestOutcome::to_json() const {
  return nlohmann::json{{"test_name", test_name},
                        {"p_values", p_values},
                        {"deciles", deciles},
                        {"proportion_passing", proportion_passing},
                        {"proportion_threshold", proportion_threshold},
                        {"uniformity_p", uniformity_p},
                        {"prerequisite_failures", prerequisite_failures},
                        {"passed", passed},
                        {"params", params}};
}

nlohmann::json BatteryReport::to_json() const {
  nlohmann::json outs = nlohmann::json::array();
  for (const auto& o : outcomes) outs.push_back(o.to_json());
  return nlohmann::json{{"outcomes", outs},
                        {"aggregate", {{"passed_count", passed_count}, {"total", total}}}};
}

std::string BatteryReport::to_table() const {
  std::string table =
      "  C1  C2  C3  C4  C5  C6  C7  C8  C9 C10  uniformity  proportion  statistical test\n";
  char line[160];
  for (const auto& o : outcomes) {
    std::string row;
    for (int c : o.deciles) {
      std::snprintf(line, sizeof(line), "%4d", c);
      row += line;
    }
    std::snprintf(line, sizeof(line), "  %10.6f  %10.6f  %s%s\n", o.uniformity_p,
                  o.proportion_passing, o.test_name.c_str(), o.passed ? "" : " *");
    row += line;
    table += row;
  }
  table += "  (* = failed at alpha, proportion or uniformity below threshold)\n";
  return table;
}

}  // namespace still
