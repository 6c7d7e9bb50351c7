#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gwdc/dictionary.hpp"

namespace gwdc {

struct Partition {
  std::vector<std::vector<double>> blocks;  // each of length block_size
  std::uint32_t pad_length = 0;             // zeros appended to the last block
};

Partition partition_signal(std::span<const double> signal, std::uint32_t block_size);
std::vector<double> assemble_signal(const std::vector<std::vector<double>>& blocks,
                                    std::uint32_t pad_length);

struct StopRule {
  enum class Kind { ResidualNorm, BlockSnrDb };
  Kind kind = Kind::ResidualNorm;
  double value = 0.0;          // residual 2-norm bound, or a per-block dB target
  std::uint32_t max_atoms = 0; // 0 means block_size

  static StopRule residual(double rho, std::uint32_t max_atoms = 0);
  static StopRule block_snr(double db, std::uint32_t max_atoms = 0);
};

struct AtomicDecomposition {
  std::uint32_t block_index = 0;            // 1-based position in the partition
  std::vector<std::uint32_t> atom_indices;  // selection order
  std::vector<double> coefficients;

  std::uint32_t iterations() const { return std::uint32_t(atom_indices.size()); }
};

// One greedy selection state over a single block. step() performs a full
// iteration: pick the best admissible atom, extend the orthogonal and
// biorthogonal bases, update the residual and the per-atom caches. It returns
// false (and changes nothing) when no admissible atom remains.
class PursuitEngine {
 public:
  PursuitEngine(const Dictionary& dict, std::span<const double> block,
                CorrelationWorkspace& ws);

  bool step();
  std::optional<std::uint32_t> select_next_atom() const;

  double residual_norm() const { return residual_norm_; }
  double block_norm() const { return block_norm_; }
  std::span<const double> residual() const { return residual_; }
  const std::vector<std::uint32_t>& selected() const { return selected_; }
  std::span<const double> orthogonal_basis(size_t i) const { return w_[i]; }
  std::span<const double> biorthogonal(size_t i) const { return b_[i]; }
  std::span<const double> correlation_cache() const { return corr_; }
  std::span<const double> denominator_cache() const { return denom_; }

  // <b_n, f> for every selected atom, in selection order.
  std::vector<double> coefficients() const;

 private:
  const Dictionary& dict_;
  CorrelationWorkspace& ws_;
  std::vector<double> block_;
  std::vector<double> residual_;
  double block_norm_ = 0.0;
  double residual_norm_ = 0.0;
  std::vector<std::uint32_t> selected_;
  std::vector<char> in_span_;
  std::vector<std::vector<double>> w_;  // orthonormal basis of the span
  std::vector<std::vector<double>> b_;  // biorthogonal set
  std::vector<double> corr_;            // <d_n, residual>
  std::vector<double> denom_;           // 1 - sum_i <d_n, w_i>^2
  std::vector<double> atom_;            // scratch
  std::vector<double> gram_;            // scratch
};

AtomicDecomposition pursue_block(const Dictionary& dict,
                                     std::span<const double> block,
                                     std::uint32_t block_index,
                                     const StopRule& stop,
                                     CorrelationWorkspace& ws);

// Sum of coefficient * atom in stored (selection) order.
std::vector<double> reconstruct_block(const AtomicDecomposition& decomposition,
                                      const Dictionary& dict);

}  // namespace gwdc
