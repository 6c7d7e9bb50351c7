#include "gwdc/container.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <mutex>
#include <thread>

namespace gwdc {

namespace {

class ByteWriter {
 public:
  std::vector<std::uint8_t> buf;

  void u8(std::uint8_t v) { buf.push_back(v); }
  void u16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) buf.push_back(std::uint8_t(v >> (8 * i)));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(std::uint8_t(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(std::uint8_t(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(const void* p, size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf.insert(buf.end(), b, b + n);
  }
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : buf_(bytes) {}

  size_t offset() const { return pos_; }
  size_t remaining() const { return buf_.size() - pos_; }

  std::uint8_t u8(const char* what) {
    need(1, what);
    return buf_[pos_++];
  }
  std::uint16_t u16(const char* what) {
    need(2, what);
    std::uint16_t v = 0;
    for (int i = 0; i < 2; ++i) v |= std::uint16_t(buf_[pos_ + i]) << (8 * i);
    pos_ += 2;
    return v;
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(buf_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(buf_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
  std::span<const std::uint8_t> raw(size_t n, const char* what) {
    need(n, what);
    auto out = buf_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

 private:
  void need(size_t n, const char* what) const {
    if (pos_ + n > buf_.size())
      throw CorruptionError(std::string("truncated container: ") + what, pos_);
  }

  std::span<const std::uint8_t> buf_;
  size_t pos_ = 0;
};

void write_header(ByteWriter& w, const ContainerHeader& h) {
  w.raw(kContainerMagic, 4);
  w.u16(h.version);
  w.u32(h.sample_rate);
  w.u64(h.original_length);
  w.u32(h.pad_length);
  w.u32(h.block_size);
  w.f64(h.delta);
  w.u32(h.dict_config.block_size);
  w.u32(h.dict_config.trig_size);
  w.u8(std::uint8_t(h.dict_config.prototypes.size()));
  for (const auto& p : h.dict_config.prototypes) {
    w.u16(std::uint16_t(p.samples.size()));
    for (double s : p.samples) w.f64(s);
  }
  w.u32(h.block_count);
}

ContainerHeader parse_header(ByteReader& r) {
  {
    const size_t at = r.offset();
    const auto magic = r.raw(4, "magic");
    if (std::memcmp(magic.data(), kContainerMagic, 4) != 0)
      throw CorruptionError("bad magic", at);
  }
  ContainerHeader h;
  {
    const size_t at = r.offset();
    h.version = r.u16("version");
    if (h.version != kContainerVersion)
      throw CorruptionError("unsupported container version " +
                                std::to_string(h.version),
                            at);
  }
  h.sample_rate = r.u32("sample rate");
  {
    const size_t at = r.offset();
    h.original_length = r.u64("signal length");
    if (h.original_length == 0)
      throw CorruptionError("zero signal length", at);
  }
  h.pad_length = r.u32("pad length");
  h.block_size = r.u32("block size");
  {
    const size_t at = r.offset();
    h.delta = r.f64("quantization step");
    if (!(h.delta > 0.0) || !std::isfinite(h.delta))
      throw CorruptionError("invalid quantization step", at);
  }
  const size_t config_at = r.offset();
  h.dict_config.block_size = r.u32("dictionary block size");
  if (h.dict_config.block_size != h.block_size)
    throw CorruptionError("dictionary block size disagrees with container",
                          config_at);
  h.dict_config.trig_size = r.u32("dictionary trig size");
  const std::uint8_t proto_count = r.u8("prototype count");
  if (proto_count == 0)
    throw CorruptionError("dictionary has no prototypes", config_at);
  for (std::uint8_t p = 0; p < proto_count; ++p) {
    const size_t at = r.offset();
    const std::uint16_t support = r.u16("prototype support");
    if (support == 0 || support > h.block_size)
      throw CorruptionError("prototype support outside the block", at);
    PrototypeAtom atom;
    atom.label = "p" + std::to_string(p + 1);
    atom.samples.resize(support);
    for (std::uint16_t j = 0; j < support; ++j)
      atom.samples[j] = r.f64("prototype sample");
    h.dict_config.prototypes.push_back(std::move(atom));
  }
  try {
    h.dict_config.validate();
  } catch (const ConfigError& e) {
    throw CorruptionError(std::string("invalid dictionary config: ") + e.what(),
                          config_at);
  }
  {
    const size_t at = r.offset();
    h.block_count = r.u32("block count");
    if (h.block_count == 0) throw CorruptionError("zero block count", at);
    if (h.pad_length >= h.block_size)
      throw CorruptionError("pad length not smaller than block size", at);
    const std::uint64_t span =
        std::uint64_t(h.block_count) * h.block_size - h.pad_length;
    if (span != h.original_length)
      throw CorruptionError("block geometry disagrees with signal length", at);
  }
  return h;
}

CodedStream read_stream(ByteReader& r, const char* name) {
  CodedStream s;
  s.symbol_count = r.u64(name);
  s.alphabet_size = r.u32(name);
  const std::uint64_t len = r.u64(name);
  const auto payload = r.raw(size_t(len), name);
  s.payload.assign(payload.begin(), payload.end());
  return s;
}

void write_stream(ByteWriter& w, const CodedStream& s) {
  w.u64(s.symbol_count);
  w.u32(s.alphabet_size);
  w.u64(s.payload.size());
  w.raw(s.payload.data(), s.payload.size());
}

double default_delta(const std::vector<AtomicDecomposition>& decompositions) {
  double cmax = 0.0;
  for (const auto& d : decompositions)
    for (double c : d.coefficients) cmax = std::max(cmax, std::abs(c));
  return cmax > 0.0 ? cmax / 65536.0 : 1.0;
}

EncodeResult finalize_encode(std::span<const double> signal,
                             std::uint32_t sample_rate, const Dictionary& dict,
                             const Partition& partition,
                             std::vector<AtomicDecomposition> decompositions,
                             double delta) {
  EncodeResult result;
  if (delta <= 0.0) delta = default_delta(decompositions);
  result.delta = delta;

  result.quantized.reserve(decompositions.size());
  for (const auto& d : decompositions)
    result.quantized.push_back(quantize_block(d, delta));

  std::vector<std::vector<double>> recon(result.quantized.size());
  for (size_t q = 0; q < result.quantized.size(); ++q) {
    recon[q] = reconstruct_quantized(result.quantized[q], delta, dict);
    result.coded_atoms += result.quantized[q].atom_indices.size();
  }
  result.reconstruction = assemble_signal(recon, partition.pad_length);

  ContainerHeader header;
  header.sample_rate = sample_rate;
  header.original_length = signal.size();
  header.pad_length = partition.pad_length;
  header.block_size = dict.block_size();
  header.delta = delta;
  header.dict_config = dict.config();
  header.block_count = std::uint32_t(partition.blocks.size());

  ByteWriter w;
  write_header(w, header);
  write_stream(w, arith_encode(build_index_stream(result.quantized)));
  write_stream(w, arith_encode(build_coeff_stream(result.quantized)));
  write_stream(w, arith_encode(build_sign_stream(result.quantized)));
  result.bytes = std::move(w.buf);
  result.decompositions = std::move(decompositions);
  return result;
}

}  // namespace

std::vector<double> reconstruct_quantized(const QuantizedBlock& block,
                                          double delta, const Dictionary& dict) {
  const std::vector<double> coefficients = dequantize_block(block, delta);
  std::vector<double> out(dict.block_size(), 0.0);
  std::vector<double> atom(dict.block_size());
  for (size_t i = 0; i < block.atom_indices.size(); ++i) {
    dict.materialize(block.atom_indices[i], atom);
    const double c = coefficients[i];
    for (size_t t = 0; t < out.size(); ++t) out[t] += c * atom[t];
  }
  return out;
}

std::vector<AtomicDecomposition> pursue_blocks(const Dictionary& dict,
                                               const Partition& partition,
                                               const StopRule& stop,
                                               unsigned workers) {
  const size_t q_count = partition.blocks.size();
  std::vector<AtomicDecomposition> out(q_count);
  const unsigned n_workers =
      std::uint32_t(std::min<size_t>(std::max(1u, workers), q_count));

  if (n_workers == 1) {
    CorrelationWorkspace ws(dict);
    for (size_t q = 0; q < q_count; ++q)
      out[q] = pursue_block(dict, partition.blocks[q],
                                std::uint32_t(q + 1), stop, ws);
    return out;
  }

  std::atomic<size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto work = [&]() {
    try {
      CorrelationWorkspace ws(dict);
      for (;;) {
        const size_t q = next.fetch_add(1);
        if (q >= q_count) break;
        out[q] = pursue_block(dict, partition.blocks[q],
                                  std::uint32_t(q + 1), stop, ws);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(n_workers);
  for (unsigned t = 0; t < n_workers; ++t) threads.emplace_back(work);
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

EncodeResult encode_signal(std::span<const double> signal,
                           std::uint32_t sample_rate,
                           const DictionaryConfig& dict_config,
                           const StopRule& stop, double delta,
                           unsigned workers) {
  if (signal.empty()) throw InputError("cannot encode an empty signal");
  Dictionary dict(dict_config);
  const Partition partition = partition_signal(signal, dict_config.block_size);
  auto decompositions = pursue_blocks(dict, partition, stop, workers);
  return finalize_encode(signal, sample_rate, dict, partition,
                         std::move(decompositions), delta);
}

ContainerHeader read_header(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  return parse_header(r);
}

ParsedModel parse_model(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  ParsedModel model;
  model.header = parse_header(r);

  const CodedStream ind = read_stream(r, "index stream");
  const CodedStream cf = read_stream(r, "coefficient stream");
  const CodedStream sg = read_stream(r, "sign stream");
  if (r.remaining() != 0)
    throw CorruptionError("trailing bytes after the last stream", r.offset());

  const SymbolStream ind_symbols = arith_decode(ind);
  const SymbolStream cf_symbols = arith_decode(cf);
  const SymbolStream sg_symbols = arith_decode(sg);

  const auto index_lists =
      parse_index_stream(ind_symbols, model.header.block_count);
  std::uint64_t total_entries = 0;
  for (const auto& list : index_lists) total_entries += list.size();
  if (cf_symbols.symbols.size() != total_entries)
    throw CorruptionError("coefficient stream length disagrees with index stream");
  if (sg_symbols.symbols.size() != total_entries)
    throw CorruptionError("sign stream length disagrees with index stream");

  const std::uint32_t atom_count = model.header.dict_config.atom_count();
  model.blocks.resize(index_lists.size());
  size_t cursor = 0;
  for (size_t q = 0; q < index_lists.size(); ++q) {
    auto& block = model.blocks[q];
    block.atom_indices = index_lists[q];
    for (std::uint32_t idx : block.atom_indices)
      if (idx > atom_count)
        throw CorruptionError("atom index " + std::to_string(idx) +
                              " outside dictionary of " +
                              std::to_string(atom_count));
    block.magnitudes.reserve(block.atom_indices.size());
    block.signs.reserve(block.atom_indices.size());
    for (size_t i = 0; i < block.atom_indices.size(); ++i, ++cursor) {
      const std::uint32_t magnitude = cf_symbols.symbols[cursor];
      if (magnitude == 0) throw CorruptionError("zero coded magnitude");
      const std::uint32_t sign = sg_symbols.symbols[cursor];
      if (sign > 1) throw CorruptionError("sign symbol outside alphabet");
      block.magnitudes.push_back(magnitude);
      block.signs.push_back(std::uint8_t(sign));
    }
  }
  return model;
}

DecodeResult decode_signal(std::span<const std::uint8_t> bytes) {
  const ParsedModel model = parse_model(bytes);
  const Dictionary dict(model.header.dict_config);
  std::vector<std::vector<double>> blocks(model.blocks.size());
  for (size_t q = 0; q < model.blocks.size(); ++q)
    blocks[q] = reconstruct_quantized(model.blocks[q], model.header.delta, dict);
  DecodeResult out;
  out.samples = assemble_signal(blocks, model.header.pad_length);
  out.sample_rate = model.header.sample_rate;
  return out;
}

RateTarget RateTarget::match_snr(double target_db, double tolerance_db) {
  RateTarget t;
  t.mode = Mode::MatchSnr;
  t.target_db = target_db;
  t.tolerance_db = tolerance_db;
  return t;
}

RateTarget RateTarget::match_mean_snr(double target_db, double tolerance_db) {
  RateTarget t;
  t.mode = Mode::MatchMeanSnr;
  t.target_db = target_db;
  t.tolerance_db = tolerance_db;
  return t;
}

RateTarget RateTarget::fixed(double quality_db, double delta) {
  RateTarget t;
  t.mode = Mode::Fixed;
  t.fixed_quality_db = quality_db;
  t.fixed_delta = delta;
  return t;
}

namespace {

double model_metric(std::span<const double> signal, const Partition& partition,
                    const std::vector<AtomicDecomposition>& decompositions,
                    const Dictionary& dict, double delta,
                    RateTarget::Mode mode) {
  std::vector<std::vector<double>> recon(decompositions.size());
  for (size_t q = 0; q < decompositions.size(); ++q) {
    const QuantizedBlock qb = quantize_block(decompositions[q], delta);
    recon[q] = reconstruct_quantized(qb, delta, dict);
  }
  const auto assembled = assemble_signal(recon, partition.pad_length);
  if (mode == RateTarget::Mode::MatchMeanSnr)
    return block_snr_stats(signal, assembled, dict.block_size()).mean_db;
  return snr_db(signal, assembled);
}

double unquantized_metric(std::span<const double> signal,
                          const Partition& partition,
                          const std::vector<AtomicDecomposition>& decompositions,
                          const Dictionary& dict, RateTarget::Mode mode) {
  std::vector<std::vector<double>> recon(decompositions.size());
  for (size_t q = 0; q < decompositions.size(); ++q)
    recon[q] = reconstruct_block(decompositions[q], dict);
  const auto assembled = assemble_signal(recon, partition.pad_length);
  if (mode == RateTarget::Mode::MatchMeanSnr)
    return block_snr_stats(signal, assembled, dict.block_size()).mean_db;
  return snr_db(signal, assembled);
}

}  // namespace

RateControlResult rate_control_search(std::span<const double> signal,
                                      std::uint32_t sample_rate,
                                      const DictionaryConfig& dict_config,
                                      const RateTarget& target,
                                      unsigned workers) {
  if (signal.empty()) throw InputError("cannot encode an empty signal");
  if (target.mode != RateTarget::Mode::Fixed && !(target.tolerance_db > 0.0))
    throw ConfigError("tolerance must be positive");

  Dictionary dict(dict_config);
  const Partition partition = partition_signal(signal, dict_config.block_size);

  double energy = 0.0;
  for (double s : signal) energy += s * s;

  RateControlResult result;

  if (target.mode == RateTarget::Mode::Fixed) {
    const StopRule stop = StopRule::block_snr(target.fixed_quality_db);
    auto decompositions = pursue_blocks(dict, partition, stop, workers);
    result.encode = finalize_encode(signal, sample_rate, dict, partition,
                                    std::move(decompositions),
                                    target.fixed_delta);
    result.quality_db = target.fixed_quality_db;
    result.delta = result.encode.delta;
    result.achieved_db =
        energy > 0.0 ? snr_db(signal, result.encode.reconstruction)
                     : std::numeric_limits<double>::quiet_NaN();
    return result;
  }

  if (energy == 0.0) {
    // Nothing to match against; emit the trivial (empty) model.
    const StopRule stop = StopRule::block_snr(target.target_db);
    auto decompositions = pursue_blocks(dict, partition, stop, workers);
    result.encode = finalize_encode(signal, sample_rate, dict, partition,
                                    std::move(decompositions), 0.0);
    result.quality_db = target.target_db;
    result.delta = result.encode.delta;
    result.achieved_db = std::numeric_limits<double>::quiet_NaN();
    return result;
  }

  const double window_lo = target.target_db;
  const double window_hi = target.target_db + target.tolerance_db;

  // The per-block residual targets must leave headroom above the window so
  // quantization can be bisected down into it.
  double quality = target.target_db + std::max(1.0, 2.0 * target.tolerance_db);
  std::vector<AtomicDecomposition> decompositions;
  double unquantized = -std::numeric_limits<double>::infinity();
  for (int attempt = 0; attempt < 5; ++attempt) {
    if (attempt > 0) quality += 6.0;
    decompositions = pursue_blocks(dict, partition,
                                   StopRule::block_snr(quality), workers);
    unquantized =
        unquantized_metric(signal, partition, decompositions, dict, target.mode);
    if (unquantized >= window_hi) break;
  }
  result.quality_db = quality;

  double cmax = 0.0;
  for (const auto& d : decompositions)
    for (double c : d.coefficients) cmax = std::max(cmax, std::abs(c));
  if (cmax == 0.0) {
    result.encode = finalize_encode(signal, sample_rate, dict, partition,
                                    std::move(decompositions), 0.0);
    result.delta = result.encode.delta;
    result.achieved_db = -std::numeric_limits<double>::infinity();
    result.converged = false;
    return result;
  }

  std::uint32_t steps = 0;
  bool converged = false;
  double chosen = 0.0;
  double achieved = 0.0;

  // Best fallback: the smallest metric at or above the window floor, else the
  // largest metric seen.
  double best_delta = 0.0;
  double best_metric = -std::numeric_limits<double>::infinity();
  const auto remember = [&](double delta, double metric) {
    const bool old_ok = best_metric >= window_lo;
    const bool new_ok = metric >= window_lo;
    if ((new_ok && (!old_ok || metric < best_metric)) ||
        (!new_ok && !old_ok && metric > best_metric)) {
      best_metric = metric;
      best_delta = delta;
    }
  };
  const auto probe = [&](double delta) {
    ++steps;
    const double metric =
        model_metric(signal, partition, decompositions, dict, delta, target.mode);
    remember(delta, metric);
    return metric;
  };

  // Finest step that still keeps every coded magnitude inside the coder's
  // alphabet bound; coarsest step prunes everything.
  double fine = cmax * std::pow(2.0, -25);
  double coarse = 2.0 * cmax;
  const double metric_fine = probe(fine);
  const double metric_coarse = probe(coarse);

  if (metric_fine >= window_lo && metric_fine <= window_hi) {
    converged = true;
    chosen = fine;
    achieved = metric_fine;
  } else if (metric_coarse >= window_lo && metric_coarse <= window_hi) {
    converged = true;
    chosen = coarse;
    achieved = metric_coarse;
  } else if (metric_fine < window_lo) {
    // Even negligible quantization cannot reach the target.
    converged = false;
  } else {
    while (steps < 40) {
      const double mid = std::sqrt(fine * coarse);
      const double metric = probe(mid);
      if (metric >= window_lo && metric <= window_hi) {
        converged = true;
        chosen = mid;
        achieved = metric;
        break;
      }
      if (metric < window_lo)
        coarse = mid;  // too coarse, overshoot in error
      else
        fine = mid;  // still above the window, can afford a coarser step
    }
  }

  if (!converged) {
    chosen = best_delta > 0.0 ? best_delta : fine;
    achieved = best_metric;
  }

  result.encode = finalize_encode(signal, sample_rate, dict, partition,
                                  std::move(decompositions), chosen);
  result.delta = result.encode.delta;
  result.achieved_db = achieved;
  result.converged = converged;
  result.bisection_steps = steps;
  return result;
}

}  // namespace gwdc
