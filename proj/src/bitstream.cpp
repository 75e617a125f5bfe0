#include "still/bitstream.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace still {

BitStream BitStream::from_string(std::string_view s) {
  BitStream out;
  out.reserve(s.size());
  for (char c : s) {
    if (c != '0' && c != '1') throw config_error("BitStream literal: expected only '0'/'1'");
    out.push_back(c == '1' ? 1 : 0);
  }
  return out;
}

void BitStream::append_value(std::uint64_t value, int width) {
  for (int t = width - 1; t >= 0; --t) bits_.push_back((value >> t) & 1u);
}

std::string BitStream::to_string() const {
  std::string s;
  s.reserve(bits_.size());
  for (auto b : bits_) s.push_back(b ? '1' : '0');
  return s;
}

std::size_t BitStream::count_ones() const {
  std::size_t n = 0;
  for (auto b : bits_) n += b;
  return n;
}

double BitStream::ones_fraction() const {
  if (bits_.empty()) return 0.0;
  return static_cast<double>(count_ones()) / static_cast<double>(bits_.size());
}

SampleStream::SampleStream(SampleVector s, int bits, double rate_hz, double fs)
    : samples(std::move(s)), adc_bits(bits), sample_rate_hz(rate_hz), full_scale(fs) {
  if (adc_bits < 1 || adc_bits > 32) throw config_error("adc_bits must lie in [1, 32]");
  if (!(sample_rate_hz > 0)) throw config_error("sample_rate_hz must be positive");
  if (!(full_scale > 0)) throw config_error("full_scale must be positive");
  const std::int64_t top = (std::int64_t{1} << adc_bits) - 1;
  for (Eigen::Index i = 0; i < samples.size(); ++i) {
    if (samples[i] < 0 || samples[i] > top)
      throw config_error("sample out of ADC range at index " + std::to_string(i));
  }
}

BitStream extract_bits(const SampleStream& samples, Eigen::Index bin_size) {
  if (bin_size < 1) throw config_error("invalid bin size");
  const Eigen::Index n = samples.size();
  if (n == 0) throw config_error("no samples");
  if (n < bin_size) throw insufficient_data("fewer samples than one bin");

  const Eigen::VectorXd x = samples.as_reals();
  const double window_mean = x.mean();
  const Eigen::Index bins = n / bin_size;
  BitStream out;
  out.reserve(static_cast<std::size_t>(bins));
  for (Eigen::Index b = 0; b < bins; ++b) {
    const double bin_mean = x.segment(b * bin_size, bin_size).mean();
    out.push_back(bin_mean > window_mean ? 1 : 0);
  }
  return out;
}

BitStream read_bits(std::span<const std::uint8_t> source, BitFormat format,
                    std::optional<std::size_t> bit_count) {
  BitStream out;
  if (format == BitFormat::ascii01) {
    out.reserve(source.size());
    for (std::size_t i = 0; i < source.size(); ++i) {
      const char c = static_cast<char>(source[i]);
      if (c == '0' || c == '1') {
        out.push_back(c == '1' ? 1 : 0);
      } else if (!std::isspace(static_cast<unsigned char>(c))) {
        throw io_error("illegal character in ascii01 input at offset " + std::to_string(i));
      }
    }
  } else {
    out.reserve(source.size() * 8);
    for (std::uint8_t byte : source) {
      for (int t = 7; t >= 0; --t) out.push_back((byte >> t) & 1u);
    }
  }
  if (bit_count) {
    if (*bit_count > out.size())
      throw io_error("bit count " + std::to_string(*bit_count) + " exceeds available " +
                     std::to_string(out.size()) + " bits");
    std::vector<std::uint8_t> clipped(out.bits().begin(),
                                      out.bits().begin() + static_cast<std::ptrdiff_t>(*bit_count));
    return BitStream(std::move(clipped));
  }
  return out;
}

BitStream read_bits(std::string_view source, BitFormat format,
                    std::optional<std::size_t> bit_count) {
  return read_bits(
      std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(source.data()),
                                    source.size()),
      format, bit_count);
}

std::vector<std::uint8_t> write_bits(const BitStream& stream, BitFormat format) {
  std::vector<std::uint8_t> out;
  if (format == BitFormat::ascii01) {
    out.reserve(stream.size());
    for (auto b : stream.bits()) out.push_back(b ? '1' : '0');
  } else {
    out.assign((stream.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < stream.size(); ++i) {
      if (stream[i]) out[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
    }
  }
  return out;
}

BitStream read_bits_file(const std::filesystem::path& path, BitFormat format,
                         std::optional<std::size_t> bit_count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return read_bits(std::span<const std::uint8_t>(bytes), format, bit_count);
}

void write_bits_file(const std::filesystem::path& path, const BitStream& stream,
                     BitFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");
  const auto bytes = write_bits(stream, format);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (format == BitFormat::ascii01) out.put('\n');
  if (!out) throw io_error("short write to " + path.string());
}

namespace {

template <typename Parse>
auto read_csv_column(const std::filesystem::path& path, const char* what, Parse parse) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path.string());
  std::vector<decltype(parse(std::string{}, 0))> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    std::string field = line.substr(start);
    if (lineno == 1 && !field.empty() && !std::isdigit(static_cast<unsigned char>(field[0])) &&
        field[0] != '-' && field[0] != '+' && field[0] != '.') {
      continue;  // header line
    }
    values.push_back(parse(field, lineno));
  }
  if (values.empty()) throw io_error(std::string("no ") + what + " in " + path.string());
  return values;
}

}  // namespace

SampleVector read_samples_csv(const std::filesystem::path& path) {
  auto values = read_csv_column(path, "samples", [&](const std::string& f, std::size_t lineno) {
    std::size_t pos = 0;
    std::int64_t v = 0;
    try {
      v = std::stoll(f, &pos);
    } catch (const std::exception&) {
      throw io_error("bad integer sample on line " + std::to_string(lineno) + " of " +
                     path.string());
    }
    if (pos != f.size())
      throw io_error("bad integer sample on line " + std::to_string(lineno) + " of " +
                     path.string());
    return v;
  });
  return Eigen::Map<const SampleVector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

void write_samples_csv(const std::filesystem::path& path, const SampleVector& samples) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");
  out << "samples\n";
  for (Eigen::Index i = 0; i < samples.size(); ++i) out << samples[i] << '\n';
  if (!out) throw io_error("short write to " + path.string());
}

Eigen::VectorXd read_reals_csv(const std::filesystem::path& path) {
  auto values = read_csv_column(path, "values", [&](const std::string& f, std::size_t lineno) {
    std::size_t pos = 0;
    double v = 0;
    try {
      v = std::stod(f, &pos);
    } catch (const std::exception&) {
      throw io_error("bad value on line " + std::to_string(lineno) + " of " + path.string());
    }
    if (pos != f.size())
      throw io_error("bad value on line " + std::to_string(lineno) + " of " + path.string());
    return v;
  });
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace still
