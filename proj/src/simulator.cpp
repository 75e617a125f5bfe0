#include "still/simulator.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <nlohmann/json.hpp>

namespace still {

void SourceModel::validate() const {
  const bool has_tone = coeffs.size() > 0 && coeffs.cwiseAbs().maxCoeff() > 0.0;
  if (!has_tone && sigma_common <= 0.0 && sigma_device <= 0.0)
    throw config_error("degenerate source: no harmonics and no noise");
  if (sigma_common < 0.0 || sigma_device < 0.0) throw config_error("sigma must be non-negative");
  if (!(fundamental_hz > 0.0)) throw config_error("fundamental_hz must be positive");
  if (!(sample_rate_hz > 0.0)) throw config_error("sample_rate_hz must be positive");
  if (adc_bits < 1 || adc_bits > 32) throw config_error("adc_bits must lie in [1, 32]");
  if (!(full_scale > 0.0)) throw config_error("full_scale must be positive");
}

GeneratedStreams generate(const SourceModel& model, Eigen::Index n_samples, int n_devices) {
  model.validate();
  if (n_samples < 1) throw config_error("n_samples must be positive");
  if (n_devices < 1) throw config_error("n_devices must be positive");

  std::mt19937_64 rng(model.seed);
  std::uniform_real_distribution<double> phase_dist(-std::numbers::pi, std::numbers::pi);
  std::normal_distribution<double> unit_normal(0.0, 1.0);

  const double theta = phase_dist(rng);  // one draw, shared across devices
  const double dt = 1.0 / model.sample_rate_hz;

  Eigen::VectorXd shared(n_samples);
  for (Eigen::Index i = 0; i < n_samples; ++i) {
    const double t = static_cast<double>(i) * dt;
    double d = 0.0;
    for (Eigen::Index h = 0; h < model.coeffs.size(); ++h) {
      d += model.coeffs(h) *
           std::cos(2.0 * std::numbers::pi * static_cast<double>(h + 1) * model.fundamental_hz * t +
                    theta);
    }
    shared(i) = d;
  }
  if (model.sigma_common > 0.0) {
    for (Eigen::Index i = 0; i < n_samples; ++i)
      shared(i) += model.sigma_common * unit_normal(rng);
  }

  const std::int64_t top = (std::int64_t{1} << model.adc_bits) - 1;
  const double code_per_volt = static_cast<double>(top) / model.full_scale;

  GeneratedStreams out;
  out.devices.reserve(static_cast<std::size_t>(n_devices));
  out.analog.reserve(static_cast<std::size_t>(n_devices));
  for (int dev = 0; dev < n_devices; ++dev) {
    Eigen::VectorXd x = shared;
    if (model.sigma_device > 0.0) {
      for (Eigen::Index i = 0; i < n_samples; ++i) x(i) += model.sigma_device * unit_normal(rng);
    }
    SampleVector codes(n_samples);
    for (Eigen::Index i = 0; i < n_samples; ++i) {
      const double level = (x(i) + model.full_scale / 2.0) * code_per_volt;
      auto code = static_cast<std::int64_t>(std::llround(level));
      if (code < 0) {
        code = 0;
        ++out.saturation_count;
      } else if (code > top) {
        code = top;
        ++out.saturation_count;
      }
      codes(i) = code;
    }
    out.devices.emplace_back(std::move(codes), model.adc_bits, model.sample_rate_hz,
                             model.full_scale);
    out.analog.push_back(std::move(x));
  }
  return out;
}

AcfSequence acf_analytic(const SourceModel& model, Eigen::Index lags) {
  model.validate();
  if (lags < 1) throw config_error("lags must be positive");
  const double dt = 1.0 / model.sample_rate_hz;
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(lags + 1);
  for (Eigen::Index j = 0; j <= lags; ++j) {
    double acc = 0.0;
    for (Eigen::Index h = 0; h < model.coeffs.size(); ++h) {
      const double a = model.coeffs(h);
      acc += 0.5 * a * a *
             std::cos(2.0 * std::numbers::pi * static_cast<double>(h + 1) * model.fundamental_hz *
                      static_cast<double>(j) * dt);
    }
    alpha(j) = acc;
  }
  alpha(0) += model.sigma_common * model.sigma_common + model.sigma_device * model.sigma_device;
  return AcfSequence(std::move(alpha));
}

nlohmann::json SourceModel::to_json() const {
  return nlohmann::json{{"coeffs", std::vector<double>(coeffs.begin(), coeffs.end())},
                        {"fundamental_hz", fundamental_hz},
                        {"sigma_common", sigma_common},
                        {"sigma_device", sigma_device},
                        {"adc_bits", adc_bits},
                        {"full_scale", full_scale},
                        {"sample_rate_hz", sample_rate_hz},
                        {"seed", seed}};
}

namespace {

SourceModel from_json_impl(const nlohmann::json& j) {
  SourceModel model;
  const auto coeffs = j.value("coeffs", std::vector<double>{});
  model.coeffs = Eigen::Map<const Eigen::VectorXd>(coeffs.data(),
                                                   static_cast<Eigen::Index>(coeffs.size()));
  model.fundamental_hz = j.value("fundamental_hz", model.fundamental_hz);
  model.sigma_common = j.value("sigma_common", model.sigma_common);
  model.sigma_device = j.value("sigma_device", model.sigma_device);
  model.adc_bits = j.value("adc_bits", model.adc_bits);
  model.full_scale = j.value("full_scale", model.full_scale);
  model.sample_rate_hz = j.value("sample_rate_hz", model.sample_rate_hz);
  model.seed = j.value("seed", model.seed);
  return model;
}

}  // namespace

SourceModel SourceModel::from_json(const nlohmann::json& j) {
  SourceModel model;
  try {
    model = from_json_impl(j);
  } catch (const nlohmann::json::exception& e) {
    throw io_error(std::string("bad source model: ") + e.what());
  }
  model.validate();
  return model;
}

}  // namespace still
