#pragma once

// Shared helpers for the test suites: seeded generators and independent
// reference implementations (oracles) kept deliberately separate from the
// library's own code paths.

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "still/bitstream.hpp"

namespace testutil {

inline still::BitStream random_bits(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::uint8_t> bits(n);
  std::uint64_t word = 0;
  int left = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (left == 0) {
      word = rng();
      left = 64;
    }
    bits[i] = word & 1u;
    word >>= 1;
    --left;
  }
  return still::BitStream(std::move(bits));
}

inline still::BitStream bernoulli_bits(std::mt19937_64& rng, std::size_t n, double p) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::uint8_t> bits(n);
  for (std::size_t i = 0; i < n; ++i) bits[i] = unit(rng) < p ? 1 : 0;
  return still::BitStream(std::move(bits));
}

// ---- window-by-window reference distiller ------------------------------
//
// Works on '0'/'1' strings with map/set machinery; shares no code with the
// library implementation. Lexicographic order of fixed-width bit strings
// is numeric order, so ties break the same way.

struct ReferenceResult {
  bool too_short = false;
  bool degenerate = false;
  std::string output;
};

inline ReferenceResult reference_moonshine(const std::string& bits, int k, int m) {
  ReferenceResult result;
  if (bits.size() < static_cast<std::size_t>(k)) {
    result.too_short = true;
    return result;
  }
  std::vector<std::string> windows;
  for (std::size_t off = 0; off + static_cast<std::size_t>(k) <= bits.size();
       off += static_cast<std::size_t>(k + m)) {
    windows.push_back(bits.substr(off, static_cast<std::size_t>(k)));
  }
  std::map<std::string, int> counts;
  std::vector<std::string> first_seen_order;
  for (const auto& w : windows) {
    if (counts[w]++ == 0) first_seen_order.push_back(w);
  }
  if (counts.size() < 2) {
    result.degenerate = true;
    return result;
  }
  std::vector<std::pair<int, std::string>> by_count;
  for (const auto& [w, c] : counts) by_count.emplace_back(c, w);
  std::sort(by_count.begin(), by_count.end());
  const std::size_t keep =
      std::min(counts.size() / 2, static_cast<std::size_t>(std::size_t{1} << (k - 1)));
  std::set<std::string> kept;
  for (std::size_t i = 0; i < keep; ++i) kept.insert(by_count[i].second);

  std::map<std::string, int> index;
  int next = 0;
  for (const auto& w : first_seen_order) {
    if (kept.count(w)) index[w] = next++;
  }
  for (const auto& w : windows) {
    auto it = index.find(w);
    if (it == index.end()) continue;
    for (int t = k - 2; t >= 0; --t) result.output.push_back((it->second >> t) & 1 ? '1' : '0');
  }
  return result;
}

// ---- random well-conditioned SPD Toeplitz lag vectors ------------------
//
// Built from a strictly positive spectrum, summed directly in long double;
// independent of the library's PSD-to-ACF path.

inline Eigen::Matrix<long double, Eigen::Dynamic, 1> random_spd_lags(std::mt19937_64& rng,
                                                                     int order) {
  std::uniform_real_distribution<double> level(0.1, 1.1);
  const int m = 64;
  std::vector<long double> spectrum(m);
  for (auto& s : spectrum) s = level(rng);
  Eigen::Matrix<long double, Eigen::Dynamic, 1> lags(order + 1);
  const long double pi = 3.14159265358979323846264338327950288L;
  for (int j = 0; j <= order; ++j) {
    long double acc = 0;
    for (int k = 0; k < m; ++k)
      acc += spectrum[static_cast<std::size_t>(k)] * std::cos(2.0L * pi * k * j / m);
    lags(j) = acc / m;
  }
  return lags;
}

inline Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic> toeplitz_ld(
    const Eigen::Matrix<long double, Eigen::Dynamic, 1>& lags) {
  const Eigen::Index n = lags.size();
  Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic> out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) out(i, j) = lags(i < j ? j - i : i - j);
  return out;
}

/// |K_p| / |K_{p-1}| by direct extended-precision determinants.
inline long double direct_det_ratio(const Eigen::Matrix<long double, Eigen::Dynamic, 1>& lags) {
  const auto full = toeplitz_ld(lags);
  const Eigen::Index n = full.rows();
  const long double det_p = full.partialPivLu().determinant();
  const long double det_p1 = full.topLeftCorner(n - 1, n - 1).partialPivLu().determinant();
  return det_p / det_p1;
}

inline double shannon_entropy_bits(const Eigen::VectorXd& p) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) > 0) h -= p(i) * std::log2(p(i));
  }
  return h;
}

}  // namespace testutil
