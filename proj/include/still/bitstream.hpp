#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "still/errors.hpp"

namespace still {

/// Ordered finite sequence of bits. The common currency between the
/// pipeline stages: extraction, correction, testing.
class BitStream {
 public:
  BitStream() = default;
  explicit BitStream(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
    for (auto b : bits_) {
      if (b > 1) throw config_error("BitStream: bit values must be 0 or 1");
    }
  }

  /// Parse a literal like "0110". Whitespace is not allowed here;
  /// use read_bits() for file content.
  static BitStream from_string(std::string_view s);

  std::size_t size() const { return bits_.size(); }
  bool empty() const { return bits_.empty(); }
  std::uint8_t operator[](std::size_t i) const { return bits_[i]; }

  void push_back(std::uint8_t bit) { bits_.push_back(bit & 1u); }
  void reserve(std::size_t n) { bits_.reserve(n); }

  /// Append `width` bits of `value`, most significant first.
  void append_value(std::uint64_t value, int width);

  std::span<const std::uint8_t> bits() const { return bits_; }
  std::string to_string() const;

  std::size_t count_ones() const;
  double ones_fraction() const;

  friend bool operator==(const BitStream&, const BitStream&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

using SampleVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

/// Quantized ADC samples plus the converter metadata needed to interpret
/// them. Samples must lie in [0, 2^adc_bits - 1].
struct SampleStream {
  SampleStream() = default;
  SampleStream(SampleVector samples, int adc_bits, double sample_rate_hz,
               double full_scale);

  SampleVector samples;
  int adc_bits = 12;
  double sample_rate_hz = 1.0;
  double full_scale = 3.3;  // volts; simulator provenance only

  Eigen::Index size() const { return samples.size(); }
  Eigen::VectorXd as_reals() const { return samples.cast<double>(); }
};

enum class BitFormat { ascii01, packed_msb };

/// Threshold each bin of `bin_size` samples against the mean of the whole
/// window: bin mean strictly above the window mean emits 1, otherwise 0.
/// The trailing partial bin is discarded.
BitStream extract_bits(const SampleStream& samples, Eigen::Index bin_size);

/// Decode a byte sequence into bits. ascii01 accepts '0', '1' and
/// whitespace; packed_msb unpacks bytes most-significant-bit first and
/// truncates to `bit_count` when given.
BitStream read_bits(std::span<const std::uint8_t> source, BitFormat format,
                    std::optional<std::size_t> bit_count = std::nullopt);
BitStream read_bits(std::string_view source, BitFormat format,
                    std::optional<std::size_t> bit_count = std::nullopt);

/// Inverse of read_bits. packed_msb zero-pads the final byte on the
/// least-significant side; the true bit count travels out of band.
std::vector<std::uint8_t> write_bits(const BitStream& stream, BitFormat format);

// --- file helpers (formats shared with the CLI) ---

BitStream read_bits_file(const std::filesystem::path& path, BitFormat format,
                         std::optional<std::size_t> bit_count = std::nullopt);
void write_bits_file(const std::filesystem::path& path, const BitStream& stream,
                     BitFormat format);

/// Single-column CSV of integers, optional leading "samples" header.
SampleVector read_samples_csv(const std::filesystem::path& path);
void write_samples_csv(const std::filesystem::path& path, const SampleVector& samples);

/// Single-column CSV of reals (ACF / PSD input), optional header line.
Eigen::VectorXd read_reals_csv(const std::filesystem::path& path);

}  // namespace still
