#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gwdc/audio_io.hpp"
#include "gwdc/container.hpp"

namespace {

unsigned default_workers() {
  if (const char* env = std::getenv("GWDC_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end && *end == '\0' && v > 0) return unsigned(v);
  }
  return 1;
}

void kv(const char* key, const std::string& value) {
  std::printf("%s=%s\n", key, value.c_str());
}

void kv_u64(const char* key, std::uint64_t value) {
  std::printf("%s=%llu\n", key, static_cast<unsigned long long>(value));
}

void kv_db(const char* key, double value) { kv(key, gwdc::format_db(value)); }

void kv_g(const char* key, double value) {
  std::printf("%s=%.9g\n", key, value);
}

std::vector<gwdc::PrototypeAtom> parse_prototypes(const std::string& text) {
  std::string body = text;
  if (!text.empty() && text[0] != '[') {
    const auto bytes = gwdc::read_file(text);
    body.assign(bytes.begin(), bytes.end());
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw gwdc::ConfigError(std::string("prototypes: ") + e.what());
  }
  if (!doc.is_array() || doc.empty())
    throw gwdc::ConfigError("prototypes: expected a non-empty JSON array");
  std::vector<gwdc::PrototypeAtom> out;
  for (const auto& entry : doc) {
    if (!entry.is_array() || entry.empty())
      throw gwdc::ConfigError(
          "prototypes: each prototype is a non-empty array of numbers");
    gwdc::PrototypeAtom atom;
    for (const auto& v : entry) {
      if (!v.is_number())
        throw gwdc::ConfigError("prototypes: samples must be numbers");
      atom.samples.push_back(v.get<double>());
    }
    atom.label = "p" + std::to_string(out.size() + 1);
    out.push_back(std::move(atom));
  }
  return out;
}

struct EncodeArgs {
  std::string input;
  std::string output;
  std::uint32_t block_size = 2048;
  std::uint32_t redundancy = 2;
  std::string prototypes;
  double target_snr = 0.0;
  double target_mean_snr = 0.0;
  double rho_db = 0.0;
  double tolerance = 0.5;
  double delta = 0.0;
  unsigned workers = 0;
  bool has_target_snr = false;
  bool has_target_mean = false;
  bool has_rho = false;
};

int run_encode(const EncodeArgs& args) {
  const int modes =
      int(args.has_target_snr) + int(args.has_target_mean) + int(args.has_rho);
  if (modes != 1) {
    std::fprintf(stderr,
                 "error: exactly one of --target-snr, --target-mean-snr, "
                 "--rho-db is required\n");
    return 2;
  }

  const gwdc::Signal signal = gwdc::read_wav_file(args.input);
  const std::uint64_t original_bytes = gwdc::read_file(args.input).size();

  gwdc::DictionaryConfig config =
      gwdc::DictionaryConfig::with_geometry(args.block_size, args.redundancy);
  if (!args.prototypes.empty())
    config.prototypes = parse_prototypes(args.prototypes);

  gwdc::RateTarget target;
  if (args.has_target_snr)
    target = gwdc::RateTarget::match_snr(args.target_snr, args.tolerance);
  else if (args.has_target_mean)
    target = gwdc::RateTarget::match_mean_snr(args.target_mean_snr, args.tolerance);
  else
    target = gwdc::RateTarget::fixed(args.rho_db, args.delta);

  const unsigned workers = args.workers ? args.workers : default_workers();
  gwdc::RateControlResult result = gwdc::rate_control_search(
      signal.samples, signal.sample_rate, config, target, workers);

  gwdc::write_file(args.output, result.encode.bytes);

  kv("input", args.input);
  kv_u64("samples", signal.samples.size());
  kv_u64("sample_rate", signal.sample_rate);
  kv_u64("block_size", args.block_size);
  kv_u64("blocks", result.encode.quantized.size());
  if (args.has_target_snr) {
    kv("mode", "match-snr");
    kv_db("target_snr_db", args.target_snr);
  } else if (args.has_target_mean) {
    kv("mode", "match-mean-snr");
    kv_db("target_mean_snr_db", args.target_mean_snr);
  } else {
    kv("mode", "fixed");
    kv_db("rho_db", args.rho_db);
  }
  kv_db("quality_db", result.quality_db);
  kv_g("delta", result.delta);
  kv_u64("atoms", result.encode.coded_atoms);
  double energy = 0.0;
  for (double s : signal.samples) energy += s * s;
  if (energy > 0.0) {
    kv_db("snr_db", gwdc::snr_db(signal.samples, result.encode.reconstruction));
    const auto stats = gwdc::block_snr_stats(
        signal.samples, result.encode.reconstruction, args.block_size);
    kv_db("mean_snr_db", stats.mean_db);
    if (stats.std_db) kv_db("std_snr_db", *stats.std_db);
  }
  kv("converged", result.converged ? "yes" : "no");
  kv_u64("bisection_steps", result.bisection_steps);
  kv_u64("compressed_bytes", result.encode.bytes.size());
  kv_u64("original_bytes", original_bytes);
  kv_db("compression_ratio",
        gwdc::compression_ratio(original_bytes, result.encode.bytes.size()));
  kv("output", args.output);
  return result.converged ? 0 : 3;
}

struct DecodeArgs {
  std::string input;
  std::string output;
  int bit_depth = 16;
};

int run_decode(const DecodeArgs& args) {
  const auto bytes = gwdc::read_file(args.input);
  const gwdc::DecodeResult decoded = gwdc::decode_signal(bytes);
  gwdc::Signal out;
  out.samples = decoded.samples;
  out.sample_rate = decoded.sample_rate;
  const std::size_t clipped =
      gwdc::write_wav_file(args.output, out, args.bit_depth);
  kv("input", args.input);
  kv_u64("samples", decoded.samples.size());
  kv_u64("sample_rate", decoded.sample_rate);
  kv_u64("bit_depth", std::uint64_t(args.bit_depth));
  kv_u64("clipped", clipped);
  kv("output", args.output);
  return 0;
}

struct MetricsArgs {
  std::string reference;
  std::string decoded;
  std::uint32_t block_size = 2048;
  std::string csv;
  bool align = false;
};

int run_metrics(const MetricsArgs& args) {
  gwdc::Signal ref = gwdc::read_wav_file(args.reference);
  gwdc::Signal dec = gwdc::read_wav_file(args.decoded);
  if (ref.samples.size() != dec.samples.size()) {
    const size_t n = std::min(ref.samples.size(), dec.samples.size());
    std::fprintf(stderr,
                 "warning: lengths differ (%zu vs %zu); comparing the first "
                 "%zu samples\n",
                 ref.samples.size(), dec.samples.size(), n);
    ref.samples.resize(n);
    dec.samples.resize(n);
  }

  std::vector<double> approx = dec.samples;
  if (args.align) {
    const gwdc::AlignmentResult al =
        gwdc::align_reference(ref.samples, dec.samples);
    std::printf("shift=%lld\n", static_cast<long long>(al.shift));
    kv_g("scale", al.scale);
    kv_g("offset", al.offset);
    approx = al.aligned;
  }

  const double global = gwdc::snr_db(ref.samples, approx);
  const auto stats = gwdc::block_snr_stats(ref.samples, approx, args.block_size);
  kv_u64("samples", ref.samples.size());
  kv_u64("block_size", args.block_size);
  kv_u64("blocks", stats.block_snr_db.size());
  kv_u64("skipped_blocks", stats.skipped_blocks.size());
  kv_db("snr_db", global);
  kv_db("mean_snr_db", stats.mean_db);
  if (stats.std_db) kv_db("std_snr_db", *stats.std_db);
  if (!args.csv.empty()) {
    std::ofstream out(args.csv, std::ios::binary);
    if (!out) throw gwdc::InputError("cannot open " + args.csv + " for writing");
    gwdc::write_metrics_csv(out, stats, global);
    kv("csv", args.csv);
  }
  return 0;
}

struct SummaryArgs {
  std::string input;
  std::string csv;
};

int run_summary(const SummaryArgs& args) {
  const auto bytes = gwdc::read_file(args.input);
  const gwdc::ParsedModel model = gwdc::parse_model(bytes);
  std::vector<std::uint32_t> counts;
  counts.reserve(model.blocks.size());
  std::uint64_t total = 0;
  for (const auto& b : model.blocks) {
    counts.push_back(std::uint32_t(b.atom_indices.size()));
    total += b.atom_indices.size();
  }
  const auto points = gwdc::sparsity_summary(counts, model.header.block_size);
  if (args.csv.empty()) {
    gwdc::write_summary_csv(std::cout, points);
  } else {
    std::ofstream out(args.csv, std::ios::binary);
    if (!out) throw gwdc::InputError("cannot open " + args.csv + " for writing");
    gwdc::write_summary_csv(out, points);
    kv_u64("blocks", model.blocks.size());
    kv_u64("atoms", total);
    kv("csv", args.csv);
  }
  return 0;
}

int run_dump_header(const std::string& path) {
  const auto bytes = gwdc::read_file(path);
  const gwdc::ContainerHeader h = gwdc::read_header(bytes);
  kv_u64("version", h.version);
  kv_u64("sample_rate", h.sample_rate);
  kv_u64("samples", h.original_length);
  kv_u64("pad", h.pad_length);
  kv_u64("block_size", h.block_size);
  kv_u64("blocks", h.block_count);
  kv_g("delta", h.delta);
  kv_u64("trig_size", h.dict_config.trig_size);
  kv_u64("prototypes", h.dict_config.prototypes.size());
  std::string supports;
  for (const auto& p : h.dict_config.prototypes) {
    if (!supports.empty()) supports += ",";
    supports += std::to_string(p.samples.size());
  }
  kv("prototype_supports", supports);
  kv_u64("atom_count", h.dict_config.atom_count());
  kv_u64("file_bytes", bytes.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse trigonometric-pulse signal codec"};
  app.require_subcommand(1);

  EncodeArgs enc;
  CLI::App* enc_cmd = app.add_subcommand("encode", "compress a WAV file");
  enc_cmd->add_option("input", enc.input, "input WAV")->required();
  enc_cmd->add_option("output", enc.output, "output container")->required();
  enc_cmd->add_option("--block-size", enc.block_size, "samples per block")
      ->check(CLI::Range(std::uint32_t(2), std::uint32_t(65536)));
  enc_cmd->add_option("--redundancy", enc.redundancy,
                      "trig family size as a multiple of the block size")
      ->check(CLI::Range(std::uint32_t(1), std::uint32_t(64)));
  enc_cmd->add_option("--prototypes", enc.prototypes,
                      "pulse prototypes, JSON array of arrays (inline or @file path)");
  auto* opt_snr = enc_cmd->add_option("--target-snr", enc.target_snr,
                                      "match the global SNR in dB");
  auto* opt_mean = enc_cmd->add_option("--target-mean-snr", enc.target_mean_snr,
                                       "match the mean block SNR in dB");
  auto* opt_rho = enc_cmd->add_option(
      "--rho-db", enc.rho_db, "fixed per-block residual target in dB, no search");
  opt_snr->excludes(opt_mean)->excludes(opt_rho);
  opt_mean->excludes(opt_rho);
  enc_cmd->add_option("--tolerance", enc.tolerance,
                      "SNR window width above the target, dB")
      ->check(CLI::PositiveNumber);
  enc_cmd->add_option("--delta", enc.delta, "fixed quantization step")
      ->needs(opt_rho);
  enc_cmd->add_option("--workers", enc.workers,
                      "pursuit threads (default: GWDC_WORKERS or 1)");

  DecodeArgs dec;
  CLI::App* dec_cmd = app.add_subcommand("decode", "reconstruct a WAV file");
  dec_cmd->add_option("input", dec.input, "input container")->required();
  dec_cmd->add_option("output", dec.output, "output WAV")->required();
  dec_cmd->add_option("--bit-depth", dec.bit_depth, "PCM bit depth")
      ->check(CLI::IsMember({16, 24, 32}));

  MetricsArgs met;
  CLI::App* met_cmd =
      app.add_subcommand("metrics", "compare a decoded file to its reference");
  met_cmd->add_option("reference", met.reference, "reference WAV")->required();
  met_cmd->add_option("decoded", met.decoded, "decoded WAV")->required();
  met_cmd->add_option("--block-size", met.block_size, "samples per block")
      ->check(CLI::Range(std::uint32_t(2), std::uint32_t(65536)));
  met_cmd->add_option("--csv", met.csv, "write per-block SNR rows to this file");
  met_cmd->add_flag("--align", met.align,
                    "undo an integer shift and amplitude/offset distortion first");

  SummaryArgs sum;
  CLI::App* sum_cmd =
      app.add_subcommand("summary", "per-block sparsity profile of a container");
  sum_cmd->add_option("input", sum.input, "input container")->required();
  sum_cmd->add_option("--csv", sum.csv, "write the profile to this file");

  std::string dump_path;
  CLI::App* dump_cmd = app.add_subcommand("dump-header", "print container header");
  dump_cmd->add_option("input", dump_path, "input container")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (enc_cmd->parsed()) {
      enc.has_target_snr = opt_snr->count() > 0;
      enc.has_target_mean = opt_mean->count() > 0;
      enc.has_rho = opt_rho->count() > 0;
      return run_encode(enc);
    }
    if (dec_cmd->parsed()) return run_decode(dec);
    if (met_cmd->parsed()) return run_metrics(met);
    if (sum_cmd->parsed()) return run_summary(sum);
    if (dump_cmd->parsed()) return run_dump_header(dump_path);
  } catch (const gwdc::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
