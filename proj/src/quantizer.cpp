#include "gwdc/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gwdc {

QuantizedBlock quantize_block(const AtomicDecomposition& decomposition,
                              double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw ConfigError("quantization step must be positive and finite");
  if (decomposition.atom_indices.size() != decomposition.coefficients.size())
    throw DimensionError("decomposition index/coefficient length mismatch");

  struct Entry {
    std::uint32_t index;
    std::uint32_t magnitude;
    std::uint8_t sign;
  };
  std::vector<Entry> entries;
  entries.reserve(decomposition.atom_indices.size());
  for (size_t i = 0; i < decomposition.atom_indices.size(); ++i) {
    const double c = decomposition.coefficients[i];
    const double level = std::floor(std::abs(c) / delta + 0.5);
    if (level == 0.0) continue;  // pruned: |c| < delta/2
    if (level > double(std::numeric_limits<std::uint32_t>::max()))
      throw ConfigError("quantization step too small for coefficient range");
    entries.push_back({decomposition.atom_indices[i], std::uint32_t(level),
                       std::uint8_t(c < 0.0 ? 1 : 0)});
  }
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.index < b.index; });

  QuantizedBlock out;
  out.atom_indices.reserve(entries.size());
  out.magnitudes.reserve(entries.size());
  out.signs.reserve(entries.size());
  for (const auto& e : entries) {
    out.atom_indices.push_back(e.index);
    out.magnitudes.push_back(e.magnitude);
    out.signs.push_back(e.sign);
  }
  return out;
}

std::vector<double> dequantize_block(const QuantizedBlock& block, double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw ConfigError("quantization step must be positive and finite");
  if (block.magnitudes.size() != block.atom_indices.size() ||
      block.signs.size() != block.atom_indices.size())
    throw DimensionError("quantized block field length mismatch");
  std::vector<double> out(block.magnitudes.size());
  for (size_t i = 0; i < out.size(); ++i) {
    const double v = delta * double(block.magnitudes[i]);
    out[i] = block.signs[i] ? -v : v;
  }
  return out;
}

}  // namespace gwdc
