#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gwdc/errors.hpp"

namespace gwdc {

// Candidates with a projected-energy denominator below this are treated as
// numerically inside the selected span and become inadmissible.
inline constexpr double kDenominatorGuard = 1e-10;

struct PrototypeAtom {
  std::vector<double> samples;  // stored as given; normalized when atoms are built
  std::string label;
};

struct DictionaryConfig {
  std::uint32_t block_size = 2048;
  std::uint32_t trig_size = 4096;  // atoms per trigonometric family
  std::vector<PrototypeAtom> prototypes;

  // Unit impulse, two-sample boxcar, three-sample triangle.
  static std::vector<PrototypeAtom> default_prototypes();

  static DictionaryConfig with_geometry(std::uint32_t block_size,
                                        std::uint32_t trig_redundancy = 2);

  void validate() const;  // throws ConfigError
  std::uint32_t atom_count() const;
};

enum class TrigKind { Cos, Sin };
enum class FamilyKind { Cos, Sin, Pulse, Explicit };

struct AtomFamily {
  FamilyKind kind;
  std::uint32_t first_index;  // 1-based global index of the family's first atom
  std::uint32_t count;
  int prototype = -1;  // position in config prototypes for Pulse families
};

// Dense reference builders. Atom n of the cos family samples
// cos(pi*(2i-1)*(n-1)/(2*trig_size)) and the sin family
// sin(pi*(2i-1)*n/(2*trig_size)), i = 1..block_size, each scaled to unit norm.
std::vector<std::vector<double>> build_trig_family(std::uint32_t block_size,
                                                   std::uint32_t trig_size,
                                                   TrigKind kind);

// All fully interior translates of the (normalized) prototype.
std::vector<std::vector<double>> build_pulse_family(const PrototypeAtom& prototype,
                                                    std::uint32_t block_size);

class CorrelationWorkspace;

class Dictionary {
 public:
  explicit Dictionary(DictionaryConfig config);

  // Diagnostic path: wraps an explicit set of dense atoms (each normalized to
  // unit norm). Dictionaries built this way carry no config and cannot be
  // serialized into a container.
  static Dictionary from_atoms(std::uint32_t block_size,
                               std::vector<std::vector<double>> atoms);

  ~Dictionary();
  Dictionary(Dictionary&&) noexcept;
  Dictionary& operator=(Dictionary&&) noexcept;
  Dictionary(const Dictionary&) = delete;
  Dictionary& operator=(const Dictionary&) = delete;

  std::uint32_t block_size() const;
  std::uint32_t total_atoms() const;
  bool has_config() const;
  const DictionaryConfig& config() const;  // throws ConfigError when absent
  const std::vector<AtomFamily>& families() const;
  const AtomFamily& family_of(std::uint32_t atom_index) const;

  // Writes atom samples for the 1-based global index.
  void materialize(std::uint32_t atom_index, std::span<double> out) const;
  std::vector<double> atom(std::uint32_t atom_index) const;

  // out[n-1] = <d_n, v> for every atom. Indices listed in `excluded` are
  // flagged with a quiet NaN instead of a value.
  void correlate_all(std::span<const double> v, CorrelationWorkspace& ws,
                     std::span<double> out,
                     std::span<const std::uint32_t> excluded = {}) const;
  std::vector<double> correlate_all(std::span<const double> v,
                                    CorrelationWorkspace& ws,
                                    std::span<const std::uint32_t> excluded = {}) const;

 private:
  Dictionary();
  struct Impl;
  std::unique_ptr<Impl> impl_;
  friend class CorrelationWorkspace;
};

// Per-thread scratch buffers for Dictionary::correlate_all. A workspace may
// only be used with the dictionary it was created for, by one thread at a time.
class CorrelationWorkspace {
 public:
  explicit CorrelationWorkspace(const Dictionary& dict);
  ~CorrelationWorkspace();
  CorrelationWorkspace(CorrelationWorkspace&&) noexcept;
  CorrelationWorkspace& operator=(CorrelationWorkspace&&) noexcept;
  CorrelationWorkspace(const CorrelationWorkspace&) = delete;
  CorrelationWorkspace& operator=(const CorrelationWorkspace&) = delete;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  friend class Dictionary;
};

}  // namespace gwdc
