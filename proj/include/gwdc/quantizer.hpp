#pragma once

#include <cstdint>
#include <vector>

#include "gwdc/pursuit.hpp"

namespace gwdc {

// One block's coded model: surviving atoms sorted by ascending index, with
// unsigned magnitudes (all >= 1) and sign bits (0 positive, 1 negative).
struct QuantizedBlock {
  std::vector<std::uint32_t> atom_indices;
  std::vector<std::uint32_t> magnitudes;
  std::vector<std::uint8_t> signs;
};

// Midtread quantization: magnitude = floor(|c|/delta + 1/2), rounding half up.
// Entries quantizing to zero are pruned.
QuantizedBlock quantize_block(const AtomicDecomposition& decomposition,
                              double delta);

// Signed coefficients (sign * delta * magnitude) in the block's stored order.
std::vector<double> dequantize_block(const QuantizedBlock& block, double delta);

}  // namespace gwdc
