#include "gwdc/pursuit.hpp"

#include <algorithm>
#include <cmath>

namespace gwdc {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace

Partition partition_signal(std::span<const double> signal,
                           std::uint32_t block_size) {
  if (signal.empty()) throw InputError("cannot partition an empty signal");
  if (block_size < 2) throw ConfigError("block_size must be at least 2");
  const size_t q = (signal.size() + block_size - 1) / block_size;
  Partition part;
  part.blocks.resize(q);
  for (size_t k = 0; k < q; ++k) {
    part.blocks[k].assign(block_size, 0.0);
    const size_t begin = k * block_size;
    const size_t len = std::min<size_t>(block_size, signal.size() - begin);
    std::copy(signal.begin() + begin, signal.begin() + begin + len,
              part.blocks[k].begin());
  }
  part.pad_length = std::uint32_t(q * block_size - signal.size());
  return part;
}

std::vector<double> assemble_signal(const std::vector<std::vector<double>>& blocks,
                                    std::uint32_t pad_length) {
  if (blocks.empty()) throw InputError("cannot assemble zero blocks");
  const size_t block_size = blocks.front().size();
  for (const auto& b : blocks)
    if (b.size() != block_size)
      throw DimensionError("blocks have unequal lengths");
  if (pad_length >= block_size)
    throw DimensionError("pad length is not smaller than the block size");
  std::vector<double> out;
  out.reserve(blocks.size() * block_size - pad_length);
  for (const auto& b : blocks) out.insert(out.end(), b.begin(), b.end());
  out.resize(out.size() - pad_length);
  return out;
}

StopRule StopRule::residual(double rho, std::uint32_t max_atoms) {
  if (rho < 0.0) throw ConfigError("residual tolerance must be nonnegative");
  return {Kind::ResidualNorm, rho, max_atoms};
}

StopRule StopRule::block_snr(double db, std::uint32_t max_atoms) {
  return {Kind::BlockSnrDb, db, max_atoms};
}

PursuitEngine::PursuitEngine(const Dictionary& dict,
                             std::span<const double> block,
                             CorrelationWorkspace& ws)
    : dict_(dict), ws_(ws), block_(block.begin(), block.end()) {
  if (block.size() != dict.block_size())
    throw DimensionError("block length does not match dictionary block size");
  residual_ = block_;
  block_norm_ = norm(block_);
  residual_norm_ = block_norm_;
  in_span_.assign(dict.total_atoms(), 0);
  denom_.assign(dict.total_atoms(), 1.0);
  corr_.resize(dict.total_atoms());
  gram_.resize(dict.total_atoms());
  atom_.resize(dict.block_size());
  dict_.correlate_all(residual_, ws_, corr_);
}

std::optional<std::uint32_t> PursuitEngine::select_next_atom() const {
  // Maximizes corr^2 / denom over admissible atoms; the strict inequality on
  // an ascending scan resolves ties to the smallest index. Atoms whose
  // projection energy is exhausted (denominator under the guard) and atoms
  // uncorrelated with the residual are inadmissible.
  double best_score = 0.0;
  std::uint32_t best = 0;
  for (std::uint32_t n = 0; n < corr_.size(); ++n) {
    if (in_span_[n]) continue;
    const double d = denom_[n];
    if (d < kDenominatorGuard) continue;
    const double score = corr_[n] * corr_[n] / d;
    if (score > best_score) {
      best_score = score;
      best = n + 1;
    }
  }
  if (best == 0) return std::nullopt;
  return best;
}

bool PursuitEngine::step() {
  const auto pick = select_next_atom();
  if (!pick) return false;
  const std::uint32_t index = *pick;
  dict_.materialize(index, atom_);

  // Orthogonalize the atom against the current basis, then run one
  // re-orthogonalization pass to push the span leakage to roundoff level.
  // Both passes are classical Gram-Schmidt: coefficients are taken against
  // the vector as it stood at the start of the pass.
  std::vector<double> w = atom_;
  const size_t k = w_.size();
  std::vector<double> proj(k);
  for (size_t i = 0; i < k; ++i) proj[i] = dot(w_[i], atom_);
  for (size_t i = 0; i < k; ++i) {
    const double c = proj[i];
    const auto& wi = w_[i];
    for (size_t t = 0; t < w.size(); ++t) w[t] -= c * wi[t];
  }
  for (size_t i = 0; i < k; ++i) proj[i] = dot(w_[i], w);
  for (size_t i = 0; i < k; ++i) {
    const double c = proj[i];
    const auto& wi = w_[i];
    for (size_t t = 0; t < w.size(); ++t) w[t] -= c * wi[t];
  }

  const double w_norm = norm(w);
  if (!(w_norm > 0.0)) {
    // Numerically inside the span despite the denominator guard; retire the
    // atom and try the next candidate.
    denom_[index - 1] = 0.0;
    return step();
  }
  const double inv_norm = 1.0 / w_norm;
  for (double& t : w) t *= inv_norm;  // w is now the unit vector w~

  // New biorthogonal member b_{k+1} = w / ||w||^2 = w~ / ||w||, and the
  // downdate b_n <- b_n - b_{k+1} <d_new, b_n> for the existing members.
  std::vector<double> b_new(w.size());
  for (size_t t = 0; t < w.size(); ++t) b_new[t] = w[t] * inv_norm;
  for (auto& bn : b_) {
    const double c = dot(atom_, bn);
    for (size_t t = 0; t < bn.size(); ++t) bn[t] -= c * b_new[t];
  }

  const double alpha = dot(w, block_);
  for (size_t t = 0; t < residual_.size(); ++t) residual_[t] -= alpha * w[t];
  residual_norm_ = norm(residual_);

  // Rank-1 cache updates: one dictionary correlation against the new basis
  // vector serves both the selection denominators and the residual
  // correlations.
  dict_.correlate_all(w, ws_, gram_);
  for (size_t n = 0; n < gram_.size(); ++n) {
    const double g = gram_[n];
    denom_[n] -= g * g;
    corr_[n] -= alpha * g;
  }

  w_.push_back(std::move(w));
  b_.push_back(std::move(b_new));
  selected_.push_back(index);
  in_span_[index - 1] = 1;
  return true;
}

std::vector<double> PursuitEngine::coefficients() const {
  std::vector<double> out(b_.size());
  for (size_t i = 0; i < b_.size(); ++i) out[i] = dot(b_[i], block_);
  return out;
}

AtomicDecomposition pursue_block(const Dictionary& dict,
                                     std::span<const double> block,
                                     std::uint32_t block_index,
                                     const StopRule& stop,
                                     CorrelationWorkspace& ws) {
  AtomicDecomposition decomposition;
  decomposition.block_index = block_index;

  double f_norm = 0.0;
  for (double s : block) f_norm += s * s;
  f_norm = std::sqrt(f_norm);
  if (f_norm == 0.0) return decomposition;  // all-zero block: empty model

  const double rho = (stop.kind == StopRule::Kind::ResidualNorm)
                         ? stop.value
                         : f_norm * std::pow(10.0, -stop.value / 20.0);
  std::uint32_t max_atoms = stop.max_atoms == 0 ? dict.block_size()
                                                : stop.max_atoms;
  max_atoms = std::min(max_atoms, dict.block_size());

  PursuitEngine engine(dict, block, ws);
  while (engine.residual_norm() >= rho &&
         engine.selected().size() < max_atoms) {
    if (!engine.step()) break;  // span exhausted: treated as converged
  }
  decomposition.atom_indices = engine.selected();
  decomposition.coefficients = engine.coefficients();
  return decomposition;
}

std::vector<double> reconstruct_block(const AtomicDecomposition& decomposition,
                                      const Dictionary& dict) {
  if (decomposition.atom_indices.size() != decomposition.coefficients.size())
    throw DimensionError("decomposition index/coefficient length mismatch");
  std::vector<double> out(dict.block_size(), 0.0);
  std::vector<double> atom(dict.block_size());
  for (size_t i = 0; i < decomposition.atom_indices.size(); ++i) {
    const std::uint32_t index = decomposition.atom_indices[i];
    if (index == 0 || index > dict.total_atoms())
      throw CorruptionError("atom index " + std::to_string(index) +
                            " outside dictionary of " +
                            std::to_string(dict.total_atoms()));
    dict.materialize(index, atom);
    const double c = decomposition.coefficients[i];
    for (size_t t = 0; t < out.size(); ++t) out[t] += c * atom[t];
  }
  return out;
}

}  // namespace gwdc
