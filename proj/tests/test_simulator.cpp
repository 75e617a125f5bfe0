#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>
#include <numbers>

#include "still/simulator.hpp"

using namespace still;

namespace {

SourceModel three_tone_model() {
  SourceModel model;
  model.coeffs = Eigen::VectorXd(3);
  model.coeffs << 0.5, 0.3, 0.15;
  model.fundamental_hz = 32.0;
  model.sample_rate_hz = 1024.0;
  model.sigma_common = 0.0;
  model.sigma_device = 0.02;
  model.adc_bits = 12;
  model.full_scale = 3.3;
  model.seed = 7;
  return model;
}

double relative_rms(const Eigen::VectorXd& got, const Eigen::VectorXd& expected) {
  return (got - expected).norm() / expected.norm();
}

}  // namespace

TEST_CASE("generate: no noise means identical devices") {
  SourceModel model;
  model.coeffs = Eigen::VectorXd(1);
  model.coeffs << 0.8;
  model.fundamental_hz = 60.0;
  model.sample_rate_hz = 8000.0;
  model.seed = 1;
  const auto gen = generate(model, 4000, 2);
  REQUIRE(gen.devices.size() == 2);
  CHECK(gen.devices[0].samples == gen.devices[1].samples);
  CHECK(gen.saturation_count == 0);

  // quantized pure tone: swings around mid-scale
  const auto& s = gen.devices[0].samples;
  CHECK(s.maxCoeff() > 3000);
  CHECK(s.minCoeff() < 1100);
}

TEST_CASE("generate: same seed twice is bit-identical") {
  const auto model = three_tone_model();
  const auto a = generate(model, 2000, 2);
  const auto b = generate(model, 2000, 2);
  for (int dev = 0; dev < 2; ++dev) {
    CHECK(a.devices[static_cast<std::size_t>(dev)].samples ==
          b.devices[static_cast<std::size_t>(dev)].samples);
  }
}

TEST_CASE("generate: samples stay inside the ADC range and clipping is counted") {
  SourceModel model;
  model.coeffs = Eigen::VectorXd(1);
  model.coeffs << 4.0;  // exceeds full_scale/2, must clip
  model.fundamental_hz = 50.0;
  model.sample_rate_hz = 5000.0;
  model.full_scale = 3.3;
  model.adc_bits = 10;
  model.seed = 3;
  const auto gen = generate(model, 5000, 1);
  CHECK(gen.saturation_count > 0);
  CHECK(gen.devices[0].samples.minCoeff() >= 0);
  CHECK(gen.devices[0].samples.maxCoeff() <= 1023);
}

TEST_CASE("generate: device order does not matter statistically") {
  auto model = three_tone_model();
  model.sigma_device = 0.1;
  model.seed = 10;
  const auto a = generate(model, 60000, 2);
  model.seed = 11;
  const auto b = generate(model, 60000, 2);
  const double mean0 = a.analog[0].mean();
  const double mean1 = b.analog[1].mean();
  const double var0 = (a.analog[0].array() - mean0).square().mean();
  const double var1 = (b.analog[1].array() - mean1).square().mean();
  CHECK(std::abs(mean0 - mean1) < 0.02);
  CHECK(std::abs(var0 - var1) / var0 < 0.05);
}

TEST_CASE("acf_analytic: single tone and pure noise") {
  SourceModel model;
  model.coeffs = Eigen::VectorXd(1);
  model.coeffs << 1.0;
  model.fundamental_hz = 50.0;
  model.sample_rate_hz = 1000.0;
  model.seed = 0;
  const auto acf = acf_analytic(model, 16);
  for (Eigen::Index j = 0; j <= 16; ++j) {
    CHECK(acf[j] == doctest::Approx(0.5 * std::cos(2.0 * std::numbers::pi * 50.0 * j / 1000.0))
                        .epsilon(1e-12));
  }

  SourceModel noise;
  noise.coeffs = Eigen::VectorXd();
  noise.sigma_common = 1.0;
  const auto white = acf_analytic(noise, 8);
  CHECK(white[0] == doctest::Approx(1.0));
  for (Eigen::Index j = 1; j <= 8; ++j) CHECK(white[j] == doctest::Approx(0.0));
}

TEST_CASE("acf_analytic: matches the empirical ACF of the analog tap") {
  auto model = three_tone_model();
  const Eigen::Index n = 8192, lags = 48;
  const auto expected = acf_analytic(model, lags);
  Eigen::VectorXd mean_acf = Eigen::VectorXd::Zero(lags + 1);
  const int realizations = 200;
  for (int r = 0; r < realizations; ++r) {
    model.seed = static_cast<std::uint64_t>(1000 + r);
    const auto gen = generate(model, n, 1);
    mean_acf += acf_from_samples(gen.analog[0], lags).lags() / realizations;
  }
  CHECK(relative_rms(mean_acf, expected.lags()) < 0.02);
}

TEST_CASE("stationarity: windows at different start times agree") {
  auto model = three_tone_model();
  model.sigma_device = 0.0;
  const Eigen::Index n = 3 * 4096, lags = 32;
  Eigen::VectorXd window0 = Eigen::VectorXd::Zero(lags + 1);
  Eigen::VectorXd window1 = Eigen::VectorXd::Zero(lags + 1);
  const int realizations = 100;
  for (int r = 0; r < realizations; ++r) {
    model.seed = static_cast<std::uint64_t>(50 + r);
    const auto gen = generate(model, n, 1);
    window0 += acf_from_samples(gen.analog[0].segment(0, 4096), lags).lags() / realizations;
    window1 += acf_from_samples(gen.analog[0].segment(8192, 4096), lags).lags() / realizations;
  }
  CHECK(relative_rms(window0, window1) < 0.02);
}

TEST_CASE("model: validation and json round trip") {
  SourceModel empty;
  empty.coeffs = Eigen::VectorXd();
  empty.sigma_common = 0.0;
  empty.sigma_device = 0.0;
  CHECK_THROWS_AS(empty.validate(), config_error);

  const auto model = three_tone_model();
  const auto back = SourceModel::from_json(model.to_json());
  CHECK(back.coeffs == model.coeffs);
  CHECK(back.fundamental_hz == model.fundamental_hz);
  CHECK(back.sigma_common == model.sigma_common);
  CHECK(back.sigma_device == model.sigma_device);
  CHECK(back.adc_bits == model.adc_bits);
  CHECK(back.seed == model.seed);
}
