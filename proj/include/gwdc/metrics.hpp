#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "gwdc/pursuit.hpp"

namespace gwdc {

// 10*log10(||f||^2 / ||f - approx||^2). A zero error vector yields +infinity,
// the lossless sentinel (formatted as "inf" in reports).
double snr_db(std::span<const double> reference, std::span<const double> approx);

struct BlockSnrStats {
  std::vector<double> block_snr_db;       // NaN for skipped (zero-norm) blocks
  std::vector<std::uint32_t> skipped_blocks;  // 1-based indices of those blocks
  double mean_db = 0.0;
  std::optional<double> std_db;           // absent when fewer than 2 usable blocks
};

// Per-block SNR over the partition of the reference (last block may be
// shorter). Mean and standard deviation (n-1 divisor) run over blocks with a
// nonzero reference norm.
BlockSnrStats block_snr_stats(std::span<const double> reference,
                              std::span<const double> approx,
                              std::uint32_t block_size);

struct AlignmentResult {
  std::int64_t shift = 0;  // samples the reference copy lags the original
  double scale = 1.0;      // OLS fit: original ~ scale * shifted copy + offset
  double offset = 0.0;
  std::vector<double> aligned;
};

// Integer-lag cross-correlation alignment over [-N/2, N/2] with zero
// extension, followed by an ordinary least-squares amplitude/offset fit.
AlignmentResult align_reference(std::span<const double> original,
                                std::span<const double> copy);

double compression_ratio(std::uint64_t original_bytes,
                         std::uint64_t compressed_bytes);

struct SummaryPoint {
  double center_sample;  // (q - 1/2) * block_size
  double k_tilde;        // block atom count / total atom count
};

std::vector<SummaryPoint> sparsity_summary(
    const std::vector<AtomicDecomposition>& decompositions,
    std::uint32_t block_size);
std::vector<SummaryPoint> sparsity_summary(const std::vector<std::uint32_t>& counts,
                                           std::uint32_t block_size);

// CSV writers (UTF-8, fixed 6-decimal values, "inf" for lossless).
void write_metrics_csv(std::ostream& out, const BlockSnrStats& stats,
                       double global_snr_db);
void write_summary_csv(std::ostream& out, const std::vector<SummaryPoint>& points);

std::string format_db(double value);  // 6 decimals, or "inf"

namespace detail {
// Both correlation routes are exposed for cross-checking; align_reference
// switches to the transform route above 2^18 samples.
std::vector<double> cross_correlation_direct(std::span<const double> f,
                                             std::span<const double> g);
std::vector<double> cross_correlation_fft(std::span<const double> f,
                                          std::span<const double> g);
}  // namespace detail

}  // namespace gwdc
