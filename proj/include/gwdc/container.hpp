#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gwdc/dictionary.hpp"
#include "gwdc/entropy.hpp"
#include "gwdc/metrics.hpp"
#include "gwdc/pursuit.hpp"
#include "gwdc/quantizer.hpp"

namespace gwdc {

inline constexpr char kContainerMagic[4] = {'G', 'W', 'D', 'C'};
inline constexpr std::uint16_t kContainerVersion = 1;

struct ContainerHeader {
  std::uint16_t version = kContainerVersion;
  std::uint32_t sample_rate = 0;
  std::uint64_t original_length = 0;
  std::uint32_t pad_length = 0;
  std::uint32_t block_size = 0;
  double delta = 0.0;
  DictionaryConfig dict_config;
  std::uint32_t block_count = 0;
};

struct EncodeResult {
  std::vector<std::uint8_t> bytes;
  std::vector<double> reconstruction;  // what a decoder will produce, bit for bit
  std::vector<AtomicDecomposition> decompositions;
  std::vector<QuantizedBlock> quantized;
  double delta = 0.0;
  std::uint64_t coded_atoms = 0;  // surviving entries across all blocks
};

// Single-pass encode. delta <= 0 selects the default step: the largest
// coefficient magnitude divided by 2^16.
EncodeResult encode_signal(std::span<const double> signal,
                           std::uint32_t sample_rate,
                           const DictionaryConfig& dict_config,
                           const StopRule& stop, double delta = 0.0,
                           unsigned workers = 1);

struct DecodeResult {
  std::vector<double> samples;
  std::uint32_t sample_rate = 0;
};

DecodeResult decode_signal(std::span<const std::uint8_t> bytes);

ContainerHeader read_header(std::span<const std::uint8_t> bytes);

struct ParsedModel {
  ContainerHeader header;
  std::vector<QuantizedBlock> blocks;
};

ParsedModel parse_model(std::span<const std::uint8_t> bytes);

// Decoder-side block synthesis: atoms accumulated in ascending index order.
// The encoder reports its reconstruction through the same routine, which is
// what makes decode output bit-identical to the encoder's.
std::vector<double> reconstruct_quantized(const QuantizedBlock& block,
                                          double delta, const Dictionary& dict);

// Per-block pursuit over a partition; blocks are distributed over `workers`
// threads and results are ordered by block, so the outcome does not depend on
// the worker count.
std::vector<AtomicDecomposition> pursue_blocks(const Dictionary& dict,
                                               const Partition& partition,
                                               const StopRule& stop,
                                               unsigned workers = 1);

struct RateTarget {
  enum class Mode { MatchSnr, MatchMeanSnr, Fixed };
  Mode mode = Mode::MatchSnr;
  double target_db = 0.0;
  double tolerance_db = 0.5;
  double fixed_quality_db = 0.0;  // per-block rho scale for Fixed mode
  double fixed_delta = 0.0;       // 0 selects the default step

  static RateTarget match_snr(double target_db, double tolerance_db = 0.5);
  static RateTarget match_mean_snr(double target_db, double tolerance_db = 0.5);
  static RateTarget fixed(double quality_db, double delta = 0.0);
};

struct RateControlResult {
  EncodeResult encode;
  double quality_db = 0.0;  // per-block rho scale actually used
  double delta = 0.0;
  double achieved_db = 0.0;  // measured metric of the final model; NaN if the
                             // input carries no energy
  bool converged = true;
  std::uint32_t bisection_steps = 0;
};

// Derives per-block residual targets from a global quality scalar
// (rho_q = ||f_q|| * 10^(-g/20)), then bisects the quantization step until the
// decoded metric lands in [target, target + tolerance]. Escalates the quality
// scalar when the unquantized model cannot reach the window; gives up after 40
// bisection steps and returns the best effort with converged = false.
RateControlResult rate_control_search(std::span<const double> signal,
                                      std::uint32_t sample_rate,
                                      const DictionaryConfig& dict_config,
                                      const RateTarget& target,
                                      unsigned workers = 1);

}  // namespace gwdc
