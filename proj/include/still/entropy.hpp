#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "still/bitstream.hpp"

namespace still {

/// Autocorrelation values alpha_0..alpha_p of a wide-sense stationary
/// process. Requires alpha_0 > 0 and |alpha_j| <= alpha_0.
class AcfSequence {
 public:
  explicit AcfSequence(Eigen::VectorXd lags);

  Eigen::Index order() const { return lags_.size() - 1; }
  const Eigen::VectorXd& lags() const { return lags_; }
  double operator[](Eigen::Index j) const { return lags_[j]; }

 private:
  Eigen::VectorXd lags_;
};

enum class DetRatioMethod { levinson, qr_paper, direct };

const char* method_name(DetRatioMethod method);

/// Entropy-rate estimate and the determinant ratio it came from.
struct EntropyReport {
  double shannon_rate_bits = 0.0;
  double renyi_rate_bits = 0.0;  // AWGN-model rate from sigma_est
  double det_ratio = 0.0;        // |K_p| / |K_{p-1}|
  Eigen::Index order = 0;
  DetRatioMethod method = DetRatioMethod::levinson;
  std::optional<double> sigma_est;  // innovation standard deviation

  nlohmann::json to_json() const;
};

/// Biased (divide by n) autocorrelation estimate after mean removal;
/// the bias buys a positive-semidefinite lag sequence.
AcfSequence acf_from_samples(const Eigen::Ref<const Eigen::VectorXd>& samples,
                             Eigen::Index max_lag);
AcfSequence acf_from_samples(const SampleStream& samples, Eigen::Index max_lag);

/// Inverse DFT of the symmetric extension of a one-sided PSD (N bins
/// covering [0, fs/2], extension length M = 2(N-1)). With this 1/M
/// normalization alpha_0 equals the mean spectral power.
AcfSequence acf_from_psd(const Eigen::Ref<const Eigen::VectorXd>& psd,
                         double sample_rate_hz);

/// One-sided periodogram |X_k|^2 / n of the mean-removed samples,
/// bins 0..floor(n/2). Inverse of acf_from_psd up to the circular
/// wrap-around of the biased ACF (use even n for exact framing).
Eigen::VectorXd psd_from_samples(const Eigen::Ref<const Eigen::VectorXd>& samples);

/// (p+1) x (p+1) symmetric constant-diagonal matrix with entry
/// (i, j) = lags[|i - j|].
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> toeplitz(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& lags) {
  const Eigen::Index n = lags.size();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) out(i, j) = lags(i < j ? j - i : i - j);
  return out;
}

Eigen::MatrixXd toeplitz(const AcfSequence& acf);

namespace detail {

/// Levinson-Durbin recursion on lags alpha_0..alpha_p. phi holds the
/// forward prediction coefficients (x_t ~ sum phi_i x_{t-i});
/// error_variance is the order-p one-step prediction error, which equals
/// the Toeplitz determinant ratio |K_p| / |K_{p-1}|.
template <typename Scalar>
struct LevinsonResult {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> phi;
  Scalar error_variance;
};

template <typename Scalar>
LevinsonResult<Scalar> levinson(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& lags) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Eigen::Index p = lags.size() - 1;
  if (!(lags(0) > Scalar(0))) throw config_error("not positive definite");

  Vector phi = Vector::Zero(p);
  Scalar error = lags(0);
  for (Eigen::Index j = 1; j <= p; ++j) {
    Scalar acc = lags(j);
    for (Eigen::Index i = 1; i < j; ++i) acc -= phi(i - 1) * lags(j - i);
    const Scalar kappa = acc / error;
    if (!(kappa < Scalar(1) && kappa > Scalar(-1))) throw config_error("not positive definite");
    Vector prev = phi;
    phi(j - 1) = kappa;
    for (Eigen::Index i = 1; i < j; ++i) phi(i - 1) = prev(i - 1) - kappa * prev(j - i - 1);
    error *= (Scalar(1) - kappa * kappa);
  }
  return {std::move(phi), error};
}

}  // namespace detail

/// |K_p| / |K_{p-1}| via the Levinson recursion, with no determinant in
/// sight: the ratio is the order-p prediction error variance.
double det_ratio_levinson(const AcfSequence& acf);

/// The QR route to the same ratio: factor K with positive R diagonal
/// (that choice makes the factorization unique) and return the last
/// diagonal entry r_pp. Disagrees with det_ratio_levinson in general;
/// both are reported so the difference is visible.
double det_ratio_qr(const Eigen::Ref<const Eigen::MatrixXd>& K);

/// Differential entropy rate 0.5 * log2(2 pi e * |K_p|/|K_{p-1}|) of the
/// max-entropy Gauss-Markov process matching the lag constraints.
EntropyReport shannon_rate(const AcfSequence& acf,
                           DetRatioMethod method = DetRatioMethod::levinson);

/// log2(sigma * sqrt(2 pi e)) - white-Gaussian specialization.
double shannon_gaussian(double sigma);

/// Collision (order-2 Renyi) entropy rate of quantized white Gaussian
/// noise: log2(2 sigma sqrt(pi)).
double renyi_awgn(double sigma);

/// -log2 sum p(x)^2 for a finite distribution.
double renyi_discrete(const Eigen::Ref<const Eigen::VectorXd>& p);

/// Yule-Walker solve returning coefficients a_1..a_p of
/// x_m = -sum_k a_k x_{m-k} + z_m (note the leading minus).
Eigen::VectorXd solve_yule_walker(const AcfSequence& acf);

/// Histogram plug-in mutual information between two equally long sample
/// streams, requantized to quant_bits, averaged over blocks.
struct MiReport {
  double mi_bits_per_sample = 0.0;  // mean over blocks
  std::vector<double> block_mi;
  std::vector<double> block_entropy_a;
  std::vector<double> block_entropy_b;
  Eigen::Index block_len = 0;
  int quant_bits = 0;

  nlohmann::json to_json() const;
};

MiReport mutual_information(const SampleStream& a, const SampleStream& b,
                            Eigen::Index block_len, int quant_bits = 6);

}  // namespace still
