#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "still/bitstream.hpp"
#include "still/entropy.hpp"

namespace still {

/// Synthetic noise source: a random-phase harmonic series plus white
/// Gaussian noise, split into a component common to all devices and a
/// per-device independent component.
struct SourceModel {
  Eigen::VectorXd coeffs;        ///< harmonic amplitudes a_1..a_N
  double fundamental_hz = 60.0;
  double sigma_common = 0.0;     ///< noise shared by every device
  double sigma_device = 0.0;     ///< independent noise per device
  int adc_bits = 12;
  double full_scale = 3.3;
  double sample_rate_hz = 8000.0;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
  static SourceModel from_json(const nlohmann::json& j);
};

struct GeneratedStreams {
  std::vector<SampleStream> devices;
  /// Pre-quantization taps, one per device, for checks that must not be
  /// polluted by ADC error.
  std::vector<Eigen::VectorXd> analog;
  std::int64_t saturation_count = 0;
};

/// Draw one phase and one common-noise path, then give every device its
/// own independent-noise path on top. Samples are offset to mid-scale and
/// clipped into [0, 2^b - 1]. Deterministic in (model, seed).
GeneratedStreams generate(const SourceModel& model, Eigen::Index n_samples, int n_devices);

/// Closed-form lag sequence of the model: each harmonic contributes
/// (a_k^2 / 2) cos(2 pi k f j dt); the noise contributes only at lag 0.
AcfSequence acf_analytic(const SourceModel& model, Eigen::Index lags);

}  // namespace still
