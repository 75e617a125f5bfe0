// entropy-still: distill noise-harvested bitstreams into key material,
// estimate source entropy rates, and score streams with a NIST-style
// randomness battery.

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "still/correctors.hpp"
#include "still/entropy.hpp"
#include "still/randtests.hpp"
#include "still/simulator.hpp"

namespace {

using nlohmann::json;

constexpr const char* kTool = "entropy-still";
#ifndef STILL_VERSION
#define STILL_VERSION "0.0.0"
#endif

void emit(const json& params, const json& results) {
  const json envelope{
      {"tool", kTool}, {"version", STILL_VERSION}, {"params", params}, {"results", results}};
  std::cout << envelope.dump(2) << '\n';
}

still::BitFormat parse_format(const std::string& name, const std::filesystem::path& path) {
  if (name == "ascii01") return still::BitFormat::ascii01;
  if (name == "packed_msb") return still::BitFormat::packed_msb;
  if (!name.empty()) throw still::config_error("unknown bit format: " + name);
  return path.extension() == ".bin" ? still::BitFormat::packed_msb : still::BitFormat::ascii01;
}

struct BitsInput {
  std::string path;
  std::string format;  // empty = infer from extension
  std::optional<std::size_t> bit_count;

  still::BitStream load() const {
    return still::read_bits_file(path, parse_format(format, path), bit_count);
  }
};

void add_bits_input(CLI::App* cmd, BitsInput& in) {
  cmd->add_option("input", in.path, "input bitstream (.bits ascii or .bin packed)")->required();
  cmd->add_option("--format", in.format, "ascii01 | packed_msb (default: by extension)");
  cmd->add_option("--bit-count", in.bit_count, "bit length of a packed input");
}

json write_output_bits(const std::string& out_path, const std::string& out_format,
                       const still::BitStream& bits) {
  if (out_path.empty()) return nullptr;
  still::write_bits_file(out_path, bits, parse_format(out_format, out_path));
  return out_path;
}

double retention_of(std::size_t output_bits, std::size_t input_bits) {
  return input_bits == 0 ? 0.0
                         : static_cast<double>(output_bits) / static_cast<double>(input_bits);
}

struct Range {
  int lo = 0, hi = 0;
  std::vector<int> values() const {
    std::vector<int> v;
    for (int x = lo; x <= hi; ++x) v.push_back(x);
    return v;
  }
};

Range parse_range(const std::string& text) {
  try {
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
      const int v = std::stoi(text);
      return {v, v};
    }
    const Range r{std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
    if (r.hi < r.lo) throw still::config_error("empty range: " + text);
    return r;
  } catch (const std::invalid_argument&) {
    throw still::config_error("bad range: " + text);
  } catch (const std::out_of_range&) {
    throw still::config_error("bad range: " + text);
  }
}

// ---- distill ----------------------------------------------------------

int cmd_distill(const BitsInput& in, int k, int m, double warmup, const std::string& table_in,
                const std::string& table_out, const std::string& out_path,
                const std::string& out_format) {
  const auto input = in.load();
  const still::DistillConfig cfg{k, m};

  still::BitStream output;
  still::RemapTable table;
  if (!table_in.empty()) {
    std::ifstream tf(table_in);
    if (!tf) throw still::io_error("cannot open " + table_in);
    json j;
    try {
      tf >> j;
    } catch (const json::exception& e) {
      throw still::io_error("bad table JSON: " + std::string(e.what()));
    }
    table = still::RemapTable::from_json(j);
    if (table.k != k) throw still::config_error("table/config mismatch");
    output = still::distill(input, cfg, table);
  } else {
    auto result = still::moonshine(input, cfg, warmup);
    output = std::move(result.output);
    table = std::move(result.table);
  }

  json results{{"input_bits", input.size()},
               {"output_bits", output.size()},
               {"retention", retention_of(output.size(), input.size())}};
  results["output_file"] = write_output_bits(out_path, out_format, output);
  if (!table_out.empty()) {
    std::ofstream tf(table_out);
    if (!tf) throw still::io_error("cannot open " + table_out + " for writing");
    tf << table.to_json().dump(2) << '\n';
    results["table_file"] = table_out;
  }
  emit(json{{"command", "distill"},
            {"k", k},
            {"m", m},
            {"warmup_fraction", warmup},
            {"table_in", table_in.empty() ? json(nullptr) : json(table_in)}},
       results);
  return 0;
}

// ---- vn ---------------------------------------------------------------

int cmd_vn(const BitsInput& in, const std::string& out_path, const std::string& out_format) {
  const auto input = in.load();
  const auto output = still::von_neumann(input);
  json results{{"input_bits", input.size()},
               {"output_bits", output.size()},
               {"retention", retention_of(output.size(), input.size())}};
  results["output_file"] = write_output_bits(out_path, out_format, output);
  emit(json{{"command", "vn"}}, results);
  return 0;
}

// ---- entropy ----------------------------------------------------------

int cmd_entropy(const std::string& acf_path, const std::string& psd_path,
                const std::string& samples_path, double sample_rate, int max_lag,
                const std::string& method_name) {
  still::DetRatioMethod method;
  if (method_name == "levinson") {
    method = still::DetRatioMethod::levinson;
  } else if (method_name == "qr_paper") {
    method = still::DetRatioMethod::qr_paper;
  } else {
    throw still::config_error("unknown method: " + method_name);
  }

  const int sources = !acf_path.empty() + !psd_path.empty() + !samples_path.empty();
  if (sources != 1)
    throw still::config_error("exactly one of --acf, --psd, --samples is required");

  std::optional<still::AcfSequence> acf;
  if (!acf_path.empty()) {
    acf.emplace(still::read_reals_csv(acf_path));
  } else if (!psd_path.empty()) {
    acf.emplace(still::acf_from_psd(still::read_reals_csv(psd_path), sample_rate));
  } else {
    acf.emplace(still::acf_from_samples(still::read_reals_csv(samples_path), max_lag));
  }

  const auto report = still::shannon_rate(*acf, method);
  // both determinant-ratio routes, so their disagreement is visible
  emit(json{{"command", "entropy"},
            {"method", method_name},
            {"order", acf->order()},
            {"sample_rate_hz", sample_rate}},
       json{{"report", report.to_json()},
            {"det_ratio_levinson", still::det_ratio_levinson(*acf)},
            {"det_ratio_qr", still::det_ratio_qr(still::toeplitz(*acf))}});
  return 0;
}

// ---- test -------------------------------------------------------------

int cmd_test(const BitsInput& in, const still::BatteryConfig& cfg, bool as_table) {
  const auto input = in.load();
  const auto report = still::run_battery(input, cfg);
  if (as_table) {
    std::cout << report.to_table();
  } else {
    emit(json{{"command", "test"},
              {"alpha", cfg.alpha},
              {"block_bits", cfg.block_bits},
              {"min_stream_bits", cfg.min_stream_bits}},
         report.to_json());
  }
  return 0;
}

// ---- simulate ---------------------------------------------------------

int cmd_simulate(const std::string& config_path, Eigen::Index n_samples, int n_devices,
                 const std::string& out_prefix, std::optional<std::uint64_t> seed) {
  std::ifstream cf(config_path);
  if (!cf) throw still::io_error("cannot open " + config_path);
  json j;
  try {
    cf >> j;
  } catch (const json::exception& e) {
    throw still::io_error("bad model JSON: " + std::string(e.what()));
  }
  auto model = still::SourceModel::from_json(j);
  if (seed) model.seed = *seed;

  const auto streams = still::generate(model, n_samples, n_devices);
  json files = json::array();
  for (int dev = 0; dev < n_devices; ++dev) {
    const std::string path = out_prefix + "_dev" + std::to_string(dev) + ".csv";
    still::write_samples_csv(path, streams.devices[static_cast<std::size_t>(dev)].samples);
    files.push_back(path);
  }
  emit(json{{"command", "simulate"},
            {"model", model.to_json()},
            {"samples", n_samples},
            {"devices", n_devices}},
       json{{"files", files}, {"saturation_count", streams.saturation_count}});
  return 0;
}

// ---- mi ---------------------------------------------------------------

int cmd_mi(const std::string& a_path, const std::string& b_path, Eigen::Index block_len,
           int quant_bits, int adc_bits) {
  const still::SampleStream a(still::read_samples_csv(a_path), adc_bits, 1.0, 1.0);
  const still::SampleStream b(still::read_samples_csv(b_path), adc_bits, 1.0, 1.0);
  const auto report = still::mutual_information(a, b, block_len, quant_bits);
  emit(json{{"command", "mi"},
            {"block_len", block_len},
            {"quant_bits", quant_bits},
            {"adc_bits", adc_bits}},
       report.to_json());
  return 0;
}

// ---- sweep ------------------------------------------------------------

struct SweepCell {
  int k = 0, m = 0;
  std::string status = "ok";  // ok | insufficient | degenerate
  double retention = 0.0;
  std::size_t output_bits = 0;
  double pass_fraction = 0.0;
};

int cmd_sweep(const BitsInput& in, const std::string& k_range_text,
              const std::string& m_range_text, double alpha, int jobs,
              const std::string& out_prefix) {
  const auto input = in.load();
  const auto k_values = parse_range(k_range_text).values();
  const auto m_values = parse_range(m_range_text).values();
  still::BatteryConfig battery_cfg;
  battery_cfg.alpha = alpha;

  std::vector<SweepCell> cells;
  for (int m : m_values)
    for (int k : k_values) cells.push_back({.k = k, .m = m});

  // workers pull cells from a shared counter; results land at fixed
  // indices, so the output order never depends on scheduling
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      SweepCell& cell = cells[i];
      try {
        const auto result = still::moonshine(input, {cell.k, cell.m}, 1.0);
        cell.output_bits = result.output.size();
        cell.retention = retention_of(cell.output_bits, input.size());
        if (cell.output_bits < static_cast<std::size_t>(battery_cfg.min_stream_bits)) {
          cell.status = "insufficient";
        } else {
          const auto report = still::run_battery(result.output, battery_cfg);
          cell.pass_fraction =
              static_cast<double>(report.passed_count) / static_cast<double>(report.total);
        }
      } catch (const still::insufficient_data&) {
        cell.status = "insufficient";
      } catch (const still::config_error&) {
        cell.status = "degenerate";
      }
    }
  };
  const int thread_count = std::max(1, jobs);
  std::vector<std::thread> pool;
  for (int t = 1; t < thread_count; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  const std::string retention_path = out_prefix + "_retention.csv";
  const std::string passfrac_path = out_prefix + "_passfrac.csv";
  auto write_grid = [&](const std::string& path, auto&& value_of) {
    std::ofstream out(path);
    if (!out) throw still::io_error("cannot open " + path + " for writing");
    out << "m/k";
    for (int k : k_values) out << ',' << k;
    out << '\n';
    std::size_t i = 0;
    for (int m : m_values) {
      out << m;
      for (std::size_t c = 0; c < k_values.size(); ++c, ++i) out << ',' << value_of(cells[i]);
      out << '\n';
    }
  };
  write_grid(retention_path, [](const SweepCell& c) {
    return c.status == "degenerate" ? std::string("degenerate") : std::to_string(c.retention);
  });
  write_grid(passfrac_path, [](const SweepCell& c) {
    return c.status == "ok" ? std::to_string(c.pass_fraction) : c.status;
  });

  json cell_index = json::array();
  bool any_ok = false;
  for (const auto& cell : cells) {
    any_ok = any_ok || cell.status == "ok";
    cell_index.push_back(
        json{{"k", cell.k},
             {"m", cell.m},
             {"status", cell.status},
             {"retention", cell.retention},
             {"output_bits", cell.output_bits},
             {"pass_fraction", cell.status == "ok" ? json(cell.pass_fraction) : json(nullptr)}});
  }
  emit(json{{"command", "sweep"},
            {"k_values", k_values},
            {"m_values", m_values},
            {"alpha", alpha}},
       json{{"retention_csv", retention_path},
            {"passfrac_csv", passfrac_path},
            {"cells", cell_index}});
  if (!any_ok) {
    std::cerr << kTool << ": every sweep cell is insufficient or degenerate\n";
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"randomness distillation, entropy-rate estimation and randomness testing"};
  app.require_subcommand(1);

  BitsInput distill_in;
  int k = 8, m = 0;
  double warmup = 1.0;
  std::string table_in, table_out, out_path, out_format;
  auto* distill = app.add_subcommand("distill", "run the typical-set distiller");
  add_bits_input(distill, distill_in);
  distill->add_option("--k", k, "subsequence length in bits")->required();
  distill->add_option("--m", m, "bits to skip after each subsequence");
  auto* warmup_opt =
      distill->add_option("--warmup-fraction", warmup, "prefix fraction used for the histogram");
  distill->add_option("--table-in", table_in, "use a peer's remap table (JSON)")
      ->excludes(warmup_opt);
  distill->add_option("--table-out", table_out, "write the derived remap table (JSON)");
  distill->add_option("-o,--out", out_path, "output bitstream path");
  distill->add_option("--out-format", out_format, "output format (default: by extension)");

  BitsInput vn_in;
  std::string vn_out, vn_out_format;
  auto* vn = app.add_subcommand("vn", "run the Von Neumann corrector");
  add_bits_input(vn, vn_in);
  vn->add_option("-o,--out", vn_out, "output bitstream path");
  vn->add_option("--out-format", vn_out_format, "output format (default: by extension)");

  std::string acf_path, psd_path, samples_path, method = "levinson";
  double sample_rate = 1.0;
  int max_lag = 64;
  auto* entropy = app.add_subcommand("entropy", "estimate the entropy rate");
  entropy->add_option("--acf", acf_path, "autocorrelation CSV (lag 0..p)");
  entropy->add_option("--psd", psd_path, "one-sided PSD CSV");
  entropy->add_option("--samples", samples_path, "sample CSV (real-valued)");
  entropy->add_option("--sample-rate", sample_rate, "sample rate tied to the PSD bins");
  entropy->add_option("--max-lag", max_lag, "AR order when estimating from samples");
  entropy->add_option("--method", method, "levinson | qr_paper");

  BitsInput test_in;
  still::BatteryConfig battery_cfg;
  bool as_table = false;
  auto* test = app.add_subcommand("test", "run the randomness battery");
  add_bits_input(test, test_in);
  test->add_option("--alpha", battery_cfg.alpha, "significance level");
  test->add_option("--block-bits", battery_cfg.block_bits, "sub-block size");
  test->add_option("--min-stream-bits", battery_cfg.min_stream_bits, "evaluation block floor");
  test->add_flag("--table", as_table, "print a final-analysis style table instead of JSON");

  std::string sim_config, sim_prefix;
  Eigen::Index sim_samples = 0;
  int sim_devices = 2;
  std::optional<std::uint64_t> seed_flag;
  auto* simulate = app.add_subcommand("simulate", "generate synthetic source samples");
  simulate->add_option("--config", sim_config, "source model JSON")->required();
  simulate->add_option("--samples", sim_samples, "samples per device")->required();
  simulate->add_option("--devices", sim_devices, "device count");
  simulate->add_option("--out-prefix", sim_prefix, "output CSV prefix")->required();
  simulate->add_option("--seed", seed_flag, "override the model seed (or ENTROPY_STILL_SEED)");

  std::string mi_a, mi_b;
  Eigen::Index mi_block = 150000;
  int mi_quant = 6, mi_adc = 12;
  auto* mi = app.add_subcommand("mi", "mutual information between two sample files");
  mi->add_option("a", mi_a, "first sample CSV")->required();
  mi->add_option("b", mi_b, "second sample CSV")->required();
  mi->add_option("--block-len", mi_block, "samples per block");
  mi->add_option("--quant-bits", mi_quant, "requantization width");
  mi->add_option("--adc-bits", mi_adc, "ADC width of the recorded samples");

  BitsInput sweep_in;
  std::string k_range = "4:12", m_range = "0:16", sweep_prefix = "sweep";
  double sweep_alpha = 0.01;
  int jobs = std::max(1u, std::thread::hardware_concurrency());
  auto* sweep = app.add_subcommand("sweep", "distill + battery over a (k, m) grid");
  add_bits_input(sweep, sweep_in);
  sweep->add_option("--k-range", k_range, "inclusive range lo:hi");
  sweep->add_option("--m-range", m_range, "inclusive range lo:hi");
  sweep->add_option("--alpha", sweep_alpha, "battery significance level");
  sweep->add_option("--jobs", jobs, "worker threads");
  sweep->add_option("--out-prefix", sweep_prefix, "CSV/JSON output prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (!seed_flag) {
    if (const char* env = std::getenv("ENTROPY_STILL_SEED")) {
      seed_flag = std::strtoull(env, nullptr, 10);
    }
  }

  try {
    if (*distill)
      return cmd_distill(distill_in, k, m, warmup, table_in, table_out, out_path, out_format);
    if (*vn) return cmd_vn(vn_in, vn_out, vn_out_format);
    if (*entropy)
      return cmd_entropy(acf_path, psd_path, samples_path, sample_rate, max_lag, method);
    if (*test) return cmd_test(test_in, battery_cfg, as_table);
    if (*simulate) return cmd_simulate(sim_config, sim_samples, sim_devices, sim_prefix, seed_flag);
    if (*mi) return cmd_mi(mi_a, mi_b, mi_block, mi_quant, mi_adc);
    if (*sweep) return cmd_sweep(sweep_in, k_range, m_range, sweep_alpha, jobs, sweep_prefix);
  } catch (const still::io_error& e) {
    std::cerr << kTool << ": " << e.what() << '\n';
    return 1;
  } catch (const still::config_error& e) {
    std::cerr << kTool << ": " << e.what() << '\n';
    return 2;
  } catch (const still::insufficient_data& e) {
    std::cerr << kTool << ": " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << kTool << ": " << e.what() << '\n';
    return 1;
  }
  return 0;
}
