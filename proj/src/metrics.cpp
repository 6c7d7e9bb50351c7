#include "gwdc/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

#include "fft_util.hpp"

namespace gwdc {

namespace {

constexpr size_t kDirectCorrelationLimit = size_t(1) << 18;

void check_pair(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw DimensionError("signals have different lengths");
  if (a.empty()) throw InputError("signals are empty");
}

}  // namespace

double snr_db(std::span<const double> reference, std::span<const double> approx) {
  check_pair(reference, approx);
  double signal = 0.0;
  double error = 0.0;
  for (size_t i = 0; i < reference.size(); ++i) {
    signal += reference[i] * reference[i];
    const double e = reference[i] - approx[i];
    error += e * e;
  }
  if (signal == 0.0) throw InputError("reference signal has zero norm");
  if (error == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(signal / error);
}

BlockSnrStats block_snr_stats(std::span<const double> reference,
                              std::span<const double> approx,
                              std::uint32_t block_size) {
  check_pair(reference, approx);
  if (block_size < 1) throw ConfigError("block_size must be at least 1");
  const size_t n = reference.size();
  const size_t q_count = (n + block_size - 1) / block_size;

  BlockSnrStats stats;
  stats.block_snr_db.resize(q_count);
  double sum = 0.0;
  double sum_sq = 0.0;
  size_t used = 0;
  for (size_t q = 0; q < q_count; ++q) {
    const size_t begin = q * block_size;
    const size_t end = std::min(n, begin + block_size);
    double signal = 0.0;
    double error = 0.0;
    for (size_t i = begin; i < end; ++i) {
      signal += reference[i] * reference[i];
      const double e = reference[i] - approx[i];
      error += e * e;
    }
    if (signal == 0.0) {
      stats.block_snr_db[q] = std::numeric_limits<double>::quiet_NaN();
      stats.skipped_blocks.push_back(std::uint32_t(q + 1));
      continue;
    }
    const double db = (error == 0.0)
                          ? std::numeric_limits<double>::infinity()
                          : 10.0 * std::log10(signal / error);
    stats.block_snr_db[q] = db;
    sum += db;
    sum_sq += db * db;
    ++used;
  }
  stats.mean_db = used > 0 ? sum / double(used)
                           : std::numeric_limits<double>::quiet_NaN();
  if (used >= 2) {
    // n-1 divisor; clamp tiny negative roundoff before the square root
    const double var =
        (sum_sq - sum * sum / double(used)) / double(used - 1);
    stats.std_db = std::sqrt(std::max(0.0, var));
  }
  return stats;
}

namespace detail {

std::vector<double> cross_correlation_direct(std::span<const double> f,
                                             std::span<const double> g) {
  const std::int64_t n = std::int64_t(f.size());
  const std::int64_t h = n / 2;
  std::vector<double> corr(size_t(2 * h + 1));
  for (std::int64_t tau = -h; tau <= h; ++tau) {
    const std::int64_t begin = std::max<std::int64_t>(0, -tau);
    const std::int64_t end = std::min<std::int64_t>(n, n - tau);
    double acc = 0.0;
    for (std::int64_t i = begin; i < end; ++i) acc += f[size_t(i)] * g[size_t(i + tau)];
    corr[size_t(tau + h)] = acc;
  }
  return corr;
}

std::vector<double> cross_correlation_fft(std::span<const double> f,
                                          std::span<const double> g) {
  const size_t n = f.size();
  const std::int64_t h = std::int64_t(n) / 2;
  size_t len = 1;
  while (len < 2 * n) len <<= 1;

  std::vector<double> fin(len, 0.0), gin(len, 0.0), hout(len, 0.0);
  std::copy(f.begin(), f.end(), fin.begin());
  std::copy(g.begin(), g.end(), gin.begin());
  // double[2] layout matches fftw_complex
  std::vector<std::array<double, 2>> ff(len / 2 + 1), gf(len / 2 + 1);
  auto* ffc = reinterpret_cast<fftw_complex*>(ff.data());
  auto* gfc = reinterpret_cast<fftw_complex*>(gf.data());

  {
    std::lock_guard<std::mutex> lock(detail::plan_mutex());
    fftw_plan pf = fftw_plan_dft_r2c_1d(int(len), fin.data(), ffc,
                                        FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_plan pg = fftw_plan_dft_r2c_1d(int(len), gin.data(), gfc,
                                        FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_plan pb = fftw_plan_dft_c2r_1d(int(len), ffc, hout.data(),
                                        FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_execute(pf);
    fftw_execute(pg);
    // conj(F) * G; the inverse transform of that is the circular correlation
    for (size_t k = 0; k < ff.size(); ++k) {
      const double re = ff[k][0] * gf[k][0] + ff[k][1] * gf[k][1];
      const double im = ff[k][0] * gf[k][1] - ff[k][1] * gf[k][0];
      ff[k][0] = re;
      ff[k][1] = im;
    }
    fftw_execute(pb);
    fftw_destroy_plan(pf);
    fftw_destroy_plan(pg);
    fftw_destroy_plan(pb);
  }

  std::vector<double> corr(size_t(2 * h + 1));
  const double scale = 1.0 / double(len);
  for (std::int64_t tau = -h; tau <= h; ++tau) {
    const size_t src = tau >= 0 ? size_t(tau) : len - size_t(-tau);
    corr[size_t(tau + h)] = hout[src] * scale;
  }
  return corr;
}

}  // namespace detail

AlignmentResult align_reference(std::span<const double> original,
                                std::span<const double> copy) {
  check_pair(original, copy);
  const size_t n = original.size();
  if (n < 2) throw InputError("alignment needs at least 2 samples");

  const auto corr = n > kDirectCorrelationLimit
                        ? detail::cross_correlation_fft(original, copy)
                        : detail::cross_correlation_direct(original, copy);
  const std::int64_t h = std::int64_t(n) / 2;
  std::int64_t best_tau = -h;
  double best = -std::numeric_limits<double>::infinity();
  for (std::int64_t tau = -h; tau <= h; ++tau) {
    const double v = corr[size_t(tau + h)];
    if (v > best) {
      best = v;
      best_tau = tau;
    }
  }

  AlignmentResult result;
  result.shift = best_tau;
  std::vector<double> shifted(n, 0.0);
  for (std::int64_t i = 0; i < std::int64_t(n); ++i) {
    const std::int64_t j = i + best_tau;
    if (j >= 0 && j < std::int64_t(n)) shifted[size_t(i)] = copy[size_t(j)];
  }

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sx += shifted[i];
    sy += original[i];
    sxx += shifted[i] * shifted[i];
    sxy += shifted[i] * original[i];
  }
  const double var = sxx - sx * sx / double(n);
  if (var <= 0.0)
    throw InputError("shifted reference is constant; amplitude fit undefined");
  result.scale = (sxy - sx * sy / double(n)) / var;
  result.offset = (sy - result.scale * sx) / double(n);
  result.aligned.resize(n);
  for (size_t i = 0; i < n; ++i)
    result.aligned[i] = result.scale * shifted[i] + result.offset;
  return result;
}

double compression_ratio(std::uint64_t original_bytes,
                         std::uint64_t compressed_bytes) {
  if (original_bytes == 0 || compressed_bytes == 0)
    throw InputError("byte counts must be positive");
  return double(original_bytes) / double(compressed_bytes);
}

std::vector<SummaryPoint> sparsity_summary(
    const std::vector<AtomicDecomposition>& decompositions,
    std::uint32_t block_size) {
  std::vector<std::uint32_t> counts(decompositions.size());
  for (size_t i = 0; i < decompositions.size(); ++i)
    counts[i] = decompositions[i].iterations();
  return sparsity_summary(counts, block_size);
}

std::vector<SummaryPoint> sparsity_summary(const std::vector<std::uint32_t>& counts,
                                           std::uint32_t block_size) {
  if (block_size < 1) throw ConfigError("block_size must be at least 1");
  std::uint64_t total = 0;
  for (std::uint32_t k : counts) total += k;
  if (total == 0) throw InputError("model has no atoms; summary undefined");
  std::vector<SummaryPoint> points(counts.size());
  for (size_t q = 0; q < counts.size(); ++q) {
    points[q].center_sample = (double(q) + 0.5) * double(block_size);
    points[q].k_tilde = double(counts[q]) / double(total);
  }
  return points;
}

std::string format_db(double value) {
  if (std::isinf(value) && value > 0) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", value);
  return buf;
}

void write_metrics_csv(std::ostream& out, const BlockSnrStats& stats,
                       double global_snr_db) {
  out << "block_index,snr_db\n";
  for (size_t q = 0; q < stats.block_snr_db.size(); ++q) {
    out << (q + 1) << ",";
    if (std::isnan(stats.block_snr_db[q]))
      out << "skipped";
    else
      out << format_db(stats.block_snr_db[q]);
    out << "\n";
  }
  out << "global," << format_db(global_snr_db) << "\n";
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryPoint>& points) {
  out << "center_sample,k_tilde\n";
  char buf[96];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f\n", p.center_sample, p.k_tilde);
    out << buf;
  }
}

}  // namespace gwdc
