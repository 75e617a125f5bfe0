#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <random>

#include "still/bitstream.hpp"
#include "test_util.hpp"

using namespace still;

namespace {

SampleStream stream_of(std::vector<std::int64_t> v, int bits = 12) {
  SampleVector s = Eigen::Map<const SampleVector>(v.data(), static_cast<Eigen::Index>(v.size()));
  return SampleStream(std::move(s), bits, 1000.0, 3.3);
}

}  // namespace

TEST_CASE("extract_bits: two-level signal") {
  const auto bits = extract_bits(stream_of({0, 0, 0, 0, 9, 9, 9, 9}), 4);
  CHECK(bits.to_string() == "01");
}

TEST_CASE("extract_bits: constant input never exceeds the window mean") {
  const auto bits = extract_bits(stream_of(std::vector<std::int64_t>(20, 5)), 10);
  CHECK(bits.to_string() == "00");
}

TEST_CASE("extract_bits: quantized AWGN is roughly balanced") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> noise(2048.0, 200.0);
  std::vector<std::int64_t> v(1000);
  for (auto& x : v) x = std::clamp<std::int64_t>(std::llround(noise(rng)), 0, 4095);
  const auto bits = extract_bits(stream_of(std::move(v)), 10);
  REQUIRE(bits.size() == 100);
  CHECK(bits.ones_fraction() >= 0.35);
  CHECK(bits.ones_fraction() <= 0.65);
}

TEST_CASE("extract_bits: errors") {
  CHECK_THROWS_WITH_AS(extract_bits(stream_of({}), 4), "no samples", config_error);
  CHECK_THROWS_WITH_AS(extract_bits(stream_of({1, 2}), 0), "invalid bin size", config_error);
}

TEST_CASE("extract_bits: length and offset invariance properties") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::int64_t> level(0, 1000);
  for (int trial = 0; trial < 50; ++trial) {
    const auto n = 1 + static_cast<std::size_t>(rng() % 300);
    const auto bin =
        1 + static_cast<Eigen::Index>(rng() % std::min<std::uint64_t>(20, n));
    std::vector<std::int64_t> v(n);
    for (auto& x : v) x = level(rng);
    auto shifted = v;
    for (auto& x : shifted) x += 500;  // stays inside 12-bit range

    const auto bits = extract_bits(stream_of(v), bin);
    CHECK(bits.size() == n / static_cast<std::size_t>(bin));
    CHECK(extract_bits(stream_of(shifted), bin) == bits);
  }
}

TEST_CASE("read_bits: ascii01 skips whitespace") {
  const auto bits = read_bits(std::string_view("0110\n10"), BitFormat::ascii01);
  CHECK(bits.to_string() == "011010");
  CHECK(bits.size() == 6);
}

TEST_CASE("read_bits: packed msb-first with bit count") {
  const std::vector<std::uint8_t> bytes{0xA0};
  CHECK(read_bits(std::span<const std::uint8_t>(bytes), BitFormat::packed_msb, 4).to_string() ==
        "1010");
}

TEST_CASE("read_bits: packed without bit count keeps every bit") {
  const std::vector<std::uint8_t> bytes{0xFF, 0x00};
  const auto bits = read_bits(std::span<const std::uint8_t>(bytes), BitFormat::packed_msb);
  CHECK(bits.size() == 16);
  CHECK(bits.to_string() == "1111111100000000");
}

TEST_CASE("read_bits: errors name the offset / overflow") {
  CHECK_THROWS_WITH_AS(read_bits(std::string_view("01x0"), BitFormat::ascii01),
                       "illegal character in ascii01 input at offset 2", io_error);
  const std::vector<std::uint8_t> one{0xFF};
  CHECK_THROWS_AS(read_bits(std::span<const std::uint8_t>(one), BitFormat::packed_msb, 9),
                  io_error);
}

TEST_CASE("write_bits: worked examples") {
  CHECK(write_bits(BitStream::from_string("1010"), BitFormat::packed_msb) ==
        std::vector<std::uint8_t>{0xA0});
  const auto ascii = write_bits(BitStream::from_string("011010"), BitFormat::ascii01);
  CHECK(std::string(ascii.begin(), ascii.end()) == "011010");
  CHECK(write_bits(BitStream(), BitFormat::packed_msb).empty());
  CHECK(write_bits(BitStream(), BitFormat::ascii01).empty());
}

TEST_CASE("round trip: write then read is the identity in both formats") {
  std::mt19937_64 rng(123);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = static_cast<std::size_t>(rng() % 4097);
    const auto bits = testutil::random_bits(rng, n);
    for (auto format : {BitFormat::ascii01, BitFormat::packed_msb}) {
      const auto bytes = write_bits(bits, format);
      CHECK(read_bits(std::span<const std::uint8_t>(bytes), format, n) == bits);
    }
  }
}

TEST_CASE("file io: bits and csv round trips") {
  const auto dir = std::filesystem::temp_directory_path() / "still_bitstream_test";
  std::filesystem::create_directories(dir);

  std::mt19937_64 rng(5);
  const auto bits = testutil::random_bits(rng, 777);
  write_bits_file(dir / "x.bits", bits, BitFormat::ascii01);
  CHECK(read_bits_file(dir / "x.bits", BitFormat::ascii01) == bits);
  write_bits_file(dir / "x.bin", bits, BitFormat::packed_msb);
  CHECK(read_bits_file(dir / "x.bin", BitFormat::packed_msb, bits.size()) == bits);

  SampleVector samples(4);
  samples << 0, 17, 4095, 33;
  write_samples_csv(dir / "s.csv", samples);
  CHECK(read_samples_csv(dir / "s.csv") == samples);

  std::FILE* f = std::fopen((dir / "r.csv").c_str(), "w");
  std::fputs("psd\n1.5\n0.25\n3e-2\n", f);
  std::fclose(f);
  const auto reals = read_reals_csv(dir / "r.csv");
  REQUIRE(reals.size() == 3);
  CHECK(reals(0) == doctest::Approx(1.5));
  CHECK(reals(2) == doctest::Approx(0.03));

  CHECK_THROWS_AS(read_bits_file(dir / "missing.bits", BitFormat::ascii01), io_error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("sample stream validation") {
  SampleVector bad(1);
  bad << 4096;
  CHECK_THROWS_AS(SampleStream(bad, 12, 1000.0, 3.3), config_error);
  CHECK_THROWS_AS(SampleStream(SampleVector(), 0, 1000.0, 3.3), config_error);
  CHECK_THROWS_AS(SampleStream(SampleVector(), 12, 0.0, 3.3), config_error);
}
