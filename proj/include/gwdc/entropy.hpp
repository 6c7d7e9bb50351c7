#pragma once

#include <cstdint>
#include <vector>

#include "gwdc/quantizer.hpp"

namespace gwdc {

struct SymbolStream {
  std::vector<std::uint32_t> symbols;
  std::uint32_t alphabet_size = 1;  // 1 + max symbol value (1 when empty)
};

// Index stream: each block contributes its first atom index followed by the
// successive index deltas; a 0 separates consecutive blocks (none after the
// last). Empty blocks contribute empty segments, so consecutive separators
// are legal.
SymbolStream build_index_stream(const std::vector<QuantizedBlock>& blocks);
std::vector<std::vector<std::uint32_t>> parse_index_stream(
    const SymbolStream& stream, std::uint32_t block_count);

// Concatenated magnitudes / sign bits in block order.
SymbolStream build_coeff_stream(const std::vector<QuantizedBlock>& blocks);
SymbolStream build_sign_stream(const std::vector<QuantizedBlock>& blocks);

struct CodedStream {
  std::vector<std::uint8_t> payload;
  std::uint64_t symbol_count = 0;
  std::uint32_t alphabet_size = 1;
};

// Adaptive order-0 arithmetic coder. The model starts with every count at 1,
// adds 1 to a symbol's count after it is coded, and halves all counts
// (rounding up) once the total exceeds 2^16. These parameters are part of the
// wire format: the byte payload is a pure function of the symbol sequence and
// alphabet size.
CodedStream arith_encode(const SymbolStream& stream);
SymbolStream arith_decode(const CodedStream& coded);

}  // namespace gwdc
