#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

// Reference implementations the tests trust instead of the library: plain
// loops and textbook normal equations, no shared code with src/.
namespace oracle {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// Solves the square system M x = y by Gaussian elimination with partial
// pivoting. Throws on a numerically singular pivot.
inline std::vector<double> solve_linear(std::vector<std::vector<double>> m,
                                        std::vector<double> y) {
  const size_t n = y.size();
  for (size_t col = 0; col < n; ++col) {
    size_t pivot = col;
    for (size_t r = col + 1; r < n; ++r)
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    if (std::abs(m[pivot][col]) < 1e-13)
      throw std::runtime_error("singular system in oracle");
    std::swap(m[col], m[pivot]);
    std::swap(y[col], y[pivot]);
    for (size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double factor = m[r][col] / m[col][col];
      for (size_t c = col; c < n; ++c) m[r][c] -= factor * m[col][c];
      y[r] -= factor * y[col];
    }
  }
  std::vector<double> x(n);
  for (size_t i = 0; i < n; ++i) x[i] = y[i] / m[i][i];
  return x;
}

// Least squares of f against the given atoms via normal equations.
inline std::vector<double> least_squares(
    const std::vector<std::vector<double>>& atoms, std::span<const double> f) {
  const size_t k = atoms.size();
  std::vector<std::vector<double>> gram(k, std::vector<double>(k));
  std::vector<double> rhs(k);
  for (size_t i = 0; i < k; ++i) {
    rhs[i] = dot(atoms[i], f);
    for (size_t j = 0; j < k; ++j) gram[i][j] = dot(atoms[i], atoms[j]);
  }
  return solve_linear(std::move(gram), std::move(rhs));
}

inline double projection_residual_norm(
    const std::vector<std::vector<double>>& atoms, std::span<const double> f) {
  const auto coef = least_squares(atoms, f);
  std::vector<double> r(f.begin(), f.end());
  for (size_t i = 0; i < atoms.size(); ++i)
    for (size_t t = 0; t < r.size(); ++t) r[t] -= coef[i] * atoms[i][t];
  return norm(r);
}

// Brute-force next selection: the candidate (0-based position) whose addition
// to the support minimizes the exact least-squares residual norm. Ties go to
// the smallest index. Candidates that leave the system singular are skipped.
inline int best_next_atom(const std::vector<std::vector<double>>& dict_atoms,
                          const std::vector<int>& selected,
                          std::span<const double> f) {
  int best = -1;
  double best_norm = 0.0;
  for (int n = 0; n < int(dict_atoms.size()); ++n) {
    bool used = false;
    for (int s : selected) used = used || s == n;
    if (used) continue;
    std::vector<std::vector<double>> atoms;
    for (int s : selected) atoms.push_back(dict_atoms[s]);
    atoms.push_back(dict_atoms[n]);
    double rn;
    try {
      rn = projection_residual_norm(atoms, f);
    } catch (const std::runtime_error&) {
      continue;
    }
    if (best < 0 || rn < best_norm) {
      best = n;
      best_norm = rn;
    }
  }
  return best;
}

inline std::vector<double> naive_correlate(
    const std::vector<std::vector<double>>& atoms, std::span<const double> v) {
  std::vector<double> out(atoms.size());
  for (size_t n = 0; n < atoms.size(); ++n) out[n] = dot(atoms[n], v);
  return out;
}

inline double naive_snr_db(std::span<const double> f,
                           std::span<const double> fr) {
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < f.size(); ++i) {
    num += f[i] * f[i];
    const double e = f[i] - fr[i];
    den += e * e;
  }
  return 10.0 * std::log10(num / den);
}

struct NaiveBlockStats {
  std::vector<double> snr;
  double mean = 0.0;
  double std_dev = 0.0;
  size_t used = 0;
};

inline NaiveBlockStats naive_block_stats(std::span<const double> f,
                                         std::span<const double> fr,
                                         size_t block_size) {
  NaiveBlockStats out;
  for (size_t start = 0; start < f.size(); start += block_size) {
    const size_t len = std::min(block_size, f.size() - start);
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < len; ++i) {
      num += f[start + i] * f[start + i];
      const double e = f[start + i] - fr[start + i];
      den += e * e;
    }
    if (num == 0.0) continue;
    out.snr.push_back(10.0 * std::log10(num / den));
  }
  out.used = out.snr.size();
  for (double s : out.snr) out.mean += s;
  out.mean /= double(out.used);
  double acc = 0.0;
  for (double s : out.snr) acc += (s - out.mean) * (s - out.mean);
  out.std_dev = out.used > 1 ? std::sqrt(acc / double(out.used - 1)) : 0.0;
  return out;
}

// corr[h + tau] = sum_n f(n) g(n + tau), tau in [-h, h], zero extension.
inline std::vector<double> naive_xcorr(std::span<const double> f,
                                       std::span<const double> g) {
  const std::int64_t n = std::int64_t(f.size());
  const std::int64_t h = n / 2;
  std::vector<double> out(size_t(2 * h + 1), 0.0);
  for (std::int64_t tau = -h; tau <= h; ++tau) {
    double s = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      const std::int64_t j = i + tau;
      if (j >= 0 && j < n) s += f[size_t(i)] * g[size_t(j)];
    }
    out[size_t(tau + h)] = s;
  }
  return out;
}

inline std::vector<double> random_unit_vector(std::mt19937& rng, size_t n) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> v(n);
  double nn = 0.0;
  while (nn == 0.0) {
    for (auto& x : v) x = gauss(rng);
    nn = norm(v);
  }
  for (auto& x : v) x /= nn;
  return v;
}

}  // namespace oracle
