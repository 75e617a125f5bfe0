#include "still/entropy.hpp"

#include <cmath>
#include <numbers>
#include <unordered_map>

#include <Eigen/QR>
#include <nlohmann/json.hpp>
#include <unsupported/Eigen/FFT>

namespace still {

namespace {
constexpr double kTwoPiE = 2.0 * std::numbers::pi * std::numbers::e;
}

AcfSequence::AcfSequence(Eigen::VectorXd lags) : lags_(std::move(lags)) {
  if (lags_.size() < 1) throw config_error("empty autocorrelation sequence");
  if (!lags_.allFinite()) throw config_error("autocorrelation values must be finite");
  if (!(lags_(0) > 0.0)) throw config_error("zero-variance process");
  const double bound = lags_(0) * (1.0 + 1e-12);
  for (Eigen::Index j = 1; j < lags_.size(); ++j) {
    if (std::abs(lags_(j)) > bound)
      throw config_error("invalid autocorrelation: |alpha_j| exceeds alpha_0");
  }
}

const char* method_name(DetRatioMethod method) {
  switch (method) {
    case DetRatioMethod::levinson: return "levinson";
    case DetRatioMethod::qr_paper: return "qr_paper";
    case DetRatioMethod::direct: return "direct";
  }
  return "unknown";
}

AcfSequence acf_from_samples(const Eigen::Ref<const Eigen::VectorXd>& samples,
                             Eigen::Index max_lag) {
  const Eigen::Index n = samples.size();
  if (max_lag < 1) throw config_error("max_lag must be positive");
  if (n <= max_lag) throw insufficient_data("need more samples than lags");

  const Eigen::VectorXd centered = samples.array() - samples.mean();
  Eigen::VectorXd lags(max_lag + 1);
  for (Eigen::Index j = 0; j <= max_lag; ++j) {
    lags(j) = centered.head(n - j).dot(centered.tail(n - j)) / static_cast<double>(n);
  }
  return AcfSequence(std::move(lags));
}

AcfSequence acf_from_samples(const SampleStream& samples, Eigen::Index max_lag) {
  return acf_from_samples(samples.as_reals(), max_lag);
}

AcfSequence acf_from_psd(const Eigen::Ref<const Eigen::VectorXd>& psd, double sample_rate_hz) {
  if (!(sample_rate_hz > 0)) throw config_error("sample_rate_hz must be positive");
  if (psd.size() < 1) throw config_error("empty PSD");
  if (!psd.allFinite() || (psd.array() < 0.0).any())
    throw config_error("PSD values must be finite and non-negative");
  if ((psd.array() == 0.0).all()) throw config_error("zero-variance process");

  const Eigen::Index bins = psd.size();
  if (bins == 1) return AcfSequence(psd.head(1));

  // symmetric extension of length M = 2(bins-1); bin N-1 sits at Nyquist
  const Eigen::Index m = 2 * (bins - 1);
  Eigen::VectorXd lags(bins);
  for (Eigen::Index j = 0; j < bins; ++j) {
    double acc = psd(0);
    for (Eigen::Index k = 1; k + 1 < bins; ++k)
      acc += 2.0 * psd(k) * std::cos(2.0 * std::numbers::pi * static_cast<double>(k * j) /
                                     static_cast<double>(m));
    acc += psd(bins - 1) * ((j % 2 == 0) ? 1.0 : -1.0);
    lags(j) = acc / static_cast<double>(m);
  }
  return AcfSequence(std::move(lags));
}

Eigen::VectorXd psd_from_samples(const Eigen::Ref<const Eigen::VectorXd>& samples) {
  const Eigen::Index n = samples.size();
  if (n < 2) throw insufficient_data("need at least two samples for a periodogram");
  std::vector<double> centered(static_cast<std::size_t>(n));
  const double mean = samples.mean();
  for (Eigen::Index i = 0; i < n; ++i) centered[static_cast<std::size_t>(i)] = samples(i) - mean;

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, centered);

  Eigen::VectorXd psd(n / 2 + 1);
  for (Eigen::Index k = 0; k <= n / 2; ++k)
    psd(k) = std::norm(spectrum[static_cast<std::size_t>(k)]) / static_cast<double>(n);
  return psd;
}

Eigen::MatrixXd toeplitz(const AcfSequence& acf) { return toeplitz<double>(acf.lags()); }

double det_ratio_levinson(const AcfSequence& acf) {
  return detail::levinson<double>(acf.lags()).error_variance;
}

double det_ratio_qr(const Eigen::Ref<const Eigen::MatrixXd>& K) {
  if (K.rows() != K.cols() || K.rows() < 1) throw config_error("matrix must be square");
  if (!K.isApprox(K.transpose(), 1e-10)) throw config_error("matrix must be symmetric");

  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(K);
  const Eigen::VectorXd diag = qr.matrixQR().diagonal();
  // flipping row signs makes every diagonal entry positive, which is the
  // unique factorization the ratio statement is about
  const double scale = diag.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    if (std::abs(diag(i)) <= scale * 1e-13) throw config_error("matrix is rank deficient");
  }
  return std::abs(diag(K.rows() - 1));
}

EntropyReport shannon_rate(const AcfSequence& acf, DetRatioMethod method) {
  double ratio = 0.0;
  switch (method) {
    case DetRatioMethod::levinson:
      ratio = det_ratio_levinson(acf);
      break;
    case DetRatioMethod::qr_paper:
      ratio = det_ratio_qr(toeplitz(acf));
      break;
    case DetRatioMethod::direct:
      throw config_error("direct determinant ratio is a test oracle, not an estimator");
  }
  EntropyReport report;
  report.det_ratio = ratio;
  report.order = acf.order();
  report.method = method;
  report.shannon_rate_bits = 0.5 * std::log2(kTwoPiE * ratio);
  report.sigma_est = std::sqrt(ratio);
  report.renyi_rate_bits = renyi_awgn(*report.sigma_est);
  return report;
}

double shannon_gaussian(double sigma) {
  if (!(sigma > 0)) throw config_error("sigma must be positive");
  return std::log2(sigma * std::sqrt(kTwoPiE));
}

double renyi_awgn(double sigma) {
  if (!(sigma > 0)) throw config_error("sigma must be positive");
  return std::log2(2.0 * sigma * std::sqrt(std::numbers::pi));
}

double renyi_discrete(const Eigen::Ref<const Eigen::VectorXd>& p) {
  if (p.size() < 1) throw config_error("empty distribution");
  if (!p.allFinite() || (p.array() < 0.0).any())
    throw config_error("probabilities must be finite and non-negative");
  if (std::abs(p.sum() - 1.0) > 1e-9) throw config_error("probabilities must sum to 1");
  return -std::log2(p.squaredNorm());
}

Eigen::VectorXd solve_yule_walker(const AcfSequence& acf) {
  return -detail::levinson<double>(acf.lags()).phi;
}

nlohmann::json EntropyReport::to_json() const {
  nlohmann::json j{{"shannon_rate_bits", shannon_rate_bits},
                   {"renyi_rate_bits", renyi_rate_bits},
                   {"det_ratio", det_ratio},
                   {"order", order},
                   {"method", method_name(method)}};
  if (sigma_est)
    j["sigma_est"] = *sigma_est;
  else
    j["sigma_est"] = nullptr;
  return j;
}

namespace {

double entropy_bits(const std::vector<double>& counts, double total) {
  double h = 0.0;
  for (double c : counts) {
    if (c > 0) h -= (c / total) * std::log2(c / total);
  }
  return h;
}

}  // namespace

MiReport mutual_information(const SampleStream& a, const SampleStream& b,
                            Eigen::Index block_len, int quant_bits) {
  if (a.size() != b.size()) throw config_error("streams must have equal length");
  if (quant_bits < 1 || quant_bits > 12) throw config_error("quant_bits must lie in [1, 12]");
  if (block_len < 1) throw config_error("block_len must be positive");
  if (a.size() < block_len) throw insufficient_data("stream shorter than one block");

  const int shift_a = std::max(0, a.adc_bits - quant_bits);
  const int shift_b = std::max(0, b.adc_bits - quant_bits);
  const std::size_t cells = std::size_t{1} << quant_bits;

  MiReport report;
  report.block_len = block_len;
  report.quant_bits = quant_bits;

  const Eigen::Index blocks = a.size() / block_len;
  for (Eigen::Index blk = 0; blk < blocks; ++blk) {
    std::vector<double> marg_a(cells, 0.0), marg_b(cells, 0.0);
    std::unordered_map<std::uint32_t, double> joint;
    joint.reserve(static_cast<std::size_t>(block_len));
    for (Eigen::Index i = blk * block_len; i < (blk + 1) * block_len; ++i) {
      const auto xa = static_cast<std::uint32_t>(a.samples(i) >> shift_a);
      const auto xb = static_cast<std::uint32_t>(b.samples(i) >> shift_b);
      marg_a[xa] += 1.0;
      marg_b[xb] += 1.0;
      joint[(xa << quant_bits) | xb] += 1.0;
    }
    const double n = static_cast<double>(block_len);
    double mi = 0.0;
    for (const auto& [key, c] : joint) {
      const double px = marg_a[key >> quant_bits] / n;
      const double py = marg_b[key & (cells - 1)] / n;
      const double pxy = c / n;
      mi += pxy * std::log2(pxy / (px * py));
    }
    report.block_mi.push_back(mi);
    report.block_entropy_a.push_back(entropy_bits(marg_a, n));
    report.block_entropy_b.push_back(entropy_bits(marg_b, n));
  }
  double sum = 0.0;
  for (double v : report.block_mi) sum += v;
  report.mi_bits_per_sample = sum / static_cast<double>(report.block_mi.size());
  return report;
}

nlohmann::json MiReport::to_json() const {
  return nlohmann::json{{"mi_bits_per_sample", mi_bits_per_sample},
                        {"block_mi", block_mi},
                        {"block_entropy_a", block_entropy_a},
                        {"block_entropy_b", block_entropy_b},
                        {"block_len", block_len},
                        {"quant_bits", quant_bits}};
}

}  // namespace still
