#include "gwdc/dictionary.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>

#include "fft_util.hpp"

namespace gwdc {

namespace {

// Raw (unnormalized) sample of trig atom n at 1-based position i.
double trig_sample(TrigKind kind, std::uint32_t trig_size, std::uint32_t n,
                   std::uint32_t i) {
  const std::int64_t phase = (kind == TrigKind::Cos)
                                 ? std::int64_t(2 * i - 1) * std::int64_t(n - 1)
                                 : std::int64_t(2 * i - 1) * std::int64_t(n);
  const double theta =
      std::numbers::pi * double(phase) / (2.0 * double(trig_size));
  return (kind == TrigKind::Cos) ? std::cos(theta) : std::sin(theta);
}

void eval_trig_atom(TrigKind kind, std::uint32_t block_size,
                    std::uint32_t trig_size, std::uint32_t n, double normalizer,
                    std::span<double> out) {
  for (std::uint32_t i = 1; i <= block_size; ++i)
    out[i - 1] = normalizer * trig_sample(kind, trig_size, n, i);
}

std::vector<double> trig_normalizers(TrigKind kind, std::uint32_t block_size,
                                     std::uint32_t trig_size) {
  std::vector<double> normalizers(trig_size);
  for (std::uint32_t n = 1; n <= trig_size; ++n) {
    double energy = 0.0;
    for (std::uint32_t i = 1; i <= block_size; ++i) {
      const double s = trig_sample(kind, trig_size, n, i);
      energy += s * s;
    }
    if (energy <= 0.0)
      throw ConfigError("degenerate trigonometric atom " + std::to_string(n));
    normalizers[n - 1] = 1.0 / std::sqrt(energy);
  }
  return normalizers;
}

std::vector<double> normalize_prototype(const PrototypeAtom& prototype,
                                        std::uint32_t block_size) {
  if (prototype.samples.empty())
    throw ConfigError("prototype '" + prototype.label + "' is empty");
  if (prototype.samples.size() > block_size)
    throw ConfigError("prototype '" + prototype.label +
                      "' is longer than the block size");
  double energy = 0.0;
  for (double s : prototype.samples) energy += s * s;
  if (energy <= 0.0)
    throw ConfigError("prototype '" + prototype.label + "' has no nonzero sample");
  const double normalizer = 1.0 / std::sqrt(energy);
  std::vector<double> out(prototype.samples.size());
  for (size_t j = 0; j < out.size(); ++j) out[j] = prototype.samples[j] * normalizer;
  return out;
}

}  // namespace

std::vector<PrototypeAtom> DictionaryConfig::default_prototypes() {
  return {{{1.0}, "p1"}, {{1.0, 1.0}, "p2"}, {{1.0, 2.0, 1.0}, "p3"}};
}

DictionaryConfig DictionaryConfig::with_geometry(std::uint32_t block_size,
                                                 std::uint32_t trig_redundancy) {
  DictionaryConfig cfg;
  cfg.block_size = block_size;
  cfg.trig_size = block_size * trig_redundancy;
  cfg.prototypes = default_prototypes();
  return cfg;
}

void DictionaryConfig::validate() const {
  if (block_size < 2) throw ConfigError("block_size must be at least 2");
  if (trig_size < block_size)
    throw ConfigError("trig_size must be at least block_size");
  if (prototypes.empty()) throw ConfigError("prototype list is empty");
  for (const auto& p : prototypes) normalize_prototype(p, block_size);
}

std::uint32_t DictionaryConfig::atom_count() const {
  std::uint64_t total = 2ull * trig_size;
  for (const auto& p : prototypes)
    total += block_size - std::uint32_t(p.samples.size()) + 1;
  if (total > std::numeric_limits<std::uint32_t>::max())
    throw ConfigError("dictionary atom count overflows 32 bits");
  return std::uint32_t(total);
}

std::vector<std::vector<double>> build_trig_family(std::uint32_t block_size,
                                                   std::uint32_t trig_size,
                                                   TrigKind kind) {
  if (block_size < 2) throw ConfigError("block_size must be at least 2");
  if (trig_size < 1) throw ConfigError("trig_size must be at least 1");
  const auto normalizers = trig_normalizers(kind, block_size, trig_size);
  std::vector<std::vector<double>> atoms(trig_size);
  for (std::uint32_t n = 1; n <= trig_size; ++n) {
    atoms[n - 1].resize(block_size);
    eval_trig_atom(kind, block_size, trig_size, n, normalizers[n - 1],
                   atoms[n - 1]);
  }
  return atoms;
}

std::vector<std::vector<double>> build_pulse_family(const PrototypeAtom& prototype,
                                                    std::uint32_t block_size) {
  const auto samples = normalize_prototype(prototype, block_size);
  const std::uint32_t support = std::uint32_t(samples.size());
  std::vector<std::vector<double>> atoms(block_size - support + 1);
  for (std::uint32_t start = 0; start < atoms.size(); ++start) {
    atoms[start].assign(block_size, 0.0);
    for (std::uint32_t j = 0; j < support; ++j)
      atoms[start][start + j] = samples[j];
  }
  return atoms;
}

struct Dictionary::Impl {
  std::optional<DictionaryConfig> config;
  std::uint32_t block_size = 0;
  std::uint32_t total = 0;
  std::vector<AtomFamily> families;

  // Config-built dictionaries: trig families evaluated on the fly, pulses
  // stored as normalized prototypes.
  std::uint32_t trig_size = 0;
  std::vector<double> cos_normalizer;
  std::vector<double> sin_normalizer;
  detail::R2RPlan cos_plan;  // REDFT10 (DCT-II) of length trig_size
  detail::R2RPlan sin_plan;  // RODFT10 (DST-II) of length trig_size
  std::vector<std::vector<double>> pulse_samples;

  // Explicit dictionaries.
  std::vector<std::vector<double>> explicit_atoms;
};

struct CorrelationWorkspace::Impl {
  std::vector<double> in;
  std::vector<double> out;
};

Dictionary::Dictionary() : impl_(new Impl) {}

Dictionary::Dictionary(DictionaryConfig config) : impl_(new Impl) {
  config.validate();
  impl_->block_size = config.block_size;
  impl_->trig_size = config.trig_size;
  impl_->cos_normalizer =
      trig_normalizers(TrigKind::Cos, config.block_size, config.trig_size);
  impl_->sin_normalizer =
      trig_normalizers(TrigKind::Sin, config.block_size, config.trig_size);
  impl_->cos_plan = detail::R2RPlan(int(config.trig_size), FFTW_REDFT10);
  impl_->sin_plan = detail::R2RPlan(int(config.trig_size), FFTW_RODFT10);

  std::uint32_t next = 1;
  impl_->families.push_back({FamilyKind::Cos, next, config.trig_size, -1});
  next += config.trig_size;
  impl_->families.push_back({FamilyKind::Sin, next, config.trig_size, -1});
  next += config.trig_size;
  for (size_t p = 0; p < config.prototypes.size(); ++p) {
    impl_->pulse_samples.push_back(
        normalize_prototype(config.prototypes[p], config.block_size));
    const std::uint32_t count =
        config.block_size - std::uint32_t(config.prototypes[p].samples.size()) + 1;
    impl_->families.push_back({FamilyKind::Pulse, next, count, int(p)});
    next += count;
  }
  impl_->total = next - 1;
  impl_->config = std::move(config);
}

Dictionary Dictionary::from_atoms(std::uint32_t block_size,
                                  std::vector<std::vector<double>> atoms) {
  if (block_size < 2) throw ConfigError("block_size must be at least 2");
  if (atoms.empty()) throw ConfigError("explicit atom list is empty");
  Dictionary dict;
  for (auto& a : atoms) {
    if (a.size() != block_size)
      throw DimensionError("explicit atom length does not match block size");
    double energy = 0.0;
    for (double s : a) energy += s * s;
    if (energy <= 0.0) throw ConfigError("explicit atom has zero norm");
    const double normalizer = 1.0 / std::sqrt(energy);
    for (double& s : a) s *= normalizer;
  }
  dict.impl_->block_size = block_size;
  dict.impl_->total = std::uint32_t(atoms.size());
  dict.impl_->families.push_back(
      {FamilyKind::Explicit, 1, std::uint32_t(atoms.size()), -1});
  dict.impl_->explicit_atoms = std::move(atoms);
  return dict;
}

Dictionary::~Dictionary() = default;
Dictionary::Dictionary(Dictionary&&) noexcept = default;
Dictionary& Dictionary::operator=(Dictionary&&) noexcept = default;

std::uint32_t Dictionary::block_size() const { return impl_->block_size; }
std::uint32_t Dictionary::total_atoms() const { return impl_->total; }
bool Dictionary::has_config() const { return impl_->config.has_value(); }

const DictionaryConfig& Dictionary::config() const {
  if (!impl_->config) throw ConfigError("dictionary carries no config");
  return *impl_->config;
}

const std::vector<AtomFamily>& Dictionary::families() const {
  return impl_->families;
}

const AtomFamily& Dictionary::family_of(std::uint32_t atom_index) const {
  if (atom_index < 1 || atom_index > impl_->total)
    throw InputError("atom index " + std::to_string(atom_index) +
                     " outside 1.." + std::to_string(impl_->total));
  for (const auto& f : impl_->families)
    if (atom_index < f.first_index + f.count) return f;
  throw InputError("atom index outside family table");
}

void Dictionary::materialize(std::uint32_t atom_index, std::span<double> out) const {
  if (out.size() != impl_->block_size)
    throw DimensionError("output span does not match block size");
  const AtomFamily& fam = family_of(atom_index);
  const std::uint32_t local = atom_index - fam.first_index;  // 0-based in family
  switch (fam.kind) {
    case FamilyKind::Cos:
      eval_trig_atom(TrigKind::Cos, impl_->block_size, impl_->trig_size,
                     local + 1, impl_->cos_normalizer[local], out);
      break;
    case FamilyKind::Sin:
      eval_trig_atom(TrigKind::Sin, impl_->block_size, impl_->trig_size,
                     local + 1, impl_->sin_normalizer[local], out);
      break;
    case FamilyKind::Pulse: {
      std::fill(out.begin(), out.end(), 0.0);
      const auto& samples = impl_->pulse_samples[size_t(fam.prototype)];
      for (size_t j = 0; j < samples.size(); ++j) out[local + j] = samples[j];
      break;
    }
    case FamilyKind::Explicit: {
      const auto& a = impl_->explicit_atoms[local];
      std::copy(a.begin(), a.end(), out.begin());
      break;
    }
  }
}

std::vector<double> Dictionary::atom(std::uint32_t atom_index) const {
  std::vector<double> out(impl_->block_size);
  materialize(atom_index, out);
  return out;
}

void Dictionary::correlate_all(std::span<const double> v, CorrelationWorkspace& ws,
                               std::span<double> out,
                               std::span<const std::uint32_t> excluded) const {
  if (v.size() != impl_->block_size)
    throw DimensionError("input length does not match block size");
  if (out.size() != impl_->total)
    throw DimensionError("output length does not match atom count");

  for (const auto& fam : impl_->families) {
    double* res = out.data() + (fam.first_index - 1);
    switch (fam.kind) {
      case FamilyKind::Cos:
      case FamilyKind::Sin: {
        // The family inner products form a DCT-II/DST-II of the zero-padded
        // block; FFTW's unnormalized transforms carry a factor of 2.
        std::copy(v.begin(), v.end(), ws.impl_->in.begin());
        std::fill(ws.impl_->in.begin() + impl_->block_size, ws.impl_->in.end(),
                  0.0);
        const bool is_cos = fam.kind == FamilyKind::Cos;
        const auto& plan = is_cos ? impl_->cos_plan : impl_->sin_plan;
        const auto& normalizer =
            is_cos ? impl_->cos_normalizer : impl_->sin_normalizer;
        plan.execute(ws.impl_->in.data(), ws.impl_->out.data());
        for (std::uint32_t k = 0; k < fam.count; ++k)
          res[k] = 0.5 * ws.impl_->out[k] * normalizer[k];
        break;
      }
      case FamilyKind::Pulse: {
        const auto& samples = impl_->pulse_samples[size_t(fam.prototype)];
        for (std::uint32_t start = 0; start < fam.count; ++start) {
          double acc = 0.0;
          for (size_t j = 0; j < samples.size(); ++j)
            acc += samples[j] * v[start + j];
          res[start] = acc;
        }
        break;
      }
      case FamilyKind::Explicit: {
        for (std::uint32_t k = 0; k < fam.count; ++k) {
          const auto& a = impl_->explicit_atoms[k];
          double acc = 0.0;
          for (std::uint32_t i = 0; i < impl_->block_size; ++i) acc += a[i] * v[i];
          res[k] = acc;
        }
        break;
      }
    }
  }

  for (std::uint32_t idx : excluded) {
    if (idx < 1 || idx > impl_->total)
      throw InputError("excluded atom index outside dictionary");
    out[idx - 1] = std::numeric_limits<double>::quiet_NaN();
  }
}

std::vector<double> Dictionary::correlate_all(
    std::span<const double> v, CorrelationWorkspace& ws,
    std::span<const std::uint32_t> excluded) const {
  std::vector<double> out(impl_->total);
  correlate_all(v, ws, out, excluded);
  return out;
}

CorrelationWorkspace::CorrelationWorkspace(const Dictionary& dict)
    : impl_(new Impl) {
  const std::uint32_t n =
      std::max(dict.impl_->trig_size, dict.impl_->block_size);
  impl_->in.resize(n);
  impl_->out.resize(n);
}

CorrelationWorkspace::~CorrelationWorkspace() = default;
CorrelationWorkspace::CorrelationWorkspace(CorrelationWorkspace&&) noexcept = default;
CorrelationWorkspace& CorrelationWorkspace::operator=(CorrelationWorkspace&&) noexcept =
    default;

}  // namespace gwdc
