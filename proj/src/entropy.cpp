#include "gwdc/entropy.hpp"

#include <algorithm>
#include <limits>

namespace gwdc {

namespace {

constexpr std::uint32_t kHalf = 0x80000000u;
constexpr std::uint32_t kQuarter = 0x40000000u;
constexpr std::uint32_t kThreeQuarter = 0xC0000000u;
constexpr std::uint64_t kRescaleThreshold = 1ull << 16;
constexpr std::uint32_t kMaxAlphabet = 1u << 26;

// Order-0 adaptive frequency model over a Fenwick tree. Counts start at 1,
// grow by 1 per coded symbol, and are halved (rounding up, so nothing drops
// below 1) once the total exceeds kRescaleThreshold. Only counts >= 2 change
// under halving, so the rescan is limited to the symbols seen since the
// counts were last flat ("hot" list); large, mostly idle alphabets rescale in
// O(1) instead of O(alphabet).
class AdaptiveModel {
 public:
  explicit AdaptiveModel(std::uint32_t alphabet)
      : alphabet_(alphabet), freq_(alphabet, 1), tree_(alphabet + 1, 0),
        total_(alphabet) {
    for (std::uint32_t i = 1; i <= alphabet_; ++i)
      tree_[i] = std::int64_t(i & (~i + 1));  // all-ones prefix sums
    top_ = 1;
    while ((top_ << 1) <= alphabet_) top_ <<= 1;
  }

  std::uint64_t total() const { return total_; }

  void range_of(std::uint32_t symbol, std::uint64_t& cum_lo,
                std::uint64_t& cum_hi) const {
    std::uint64_t acc = 0;
    for (std::uint32_t i = symbol; i > 0; i -= i & (~i + 1))
      acc += std::uint64_t(tree_[i]);
    cum_lo = acc;
    cum_hi = acc + freq_[symbol];
  }

  std::uint32_t find(std::uint64_t target, std::uint64_t& cum_lo,
                     std::uint64_t& cum_hi) const {
    std::uint32_t idx = 0;
    std::uint64_t acc = 0;
    for (std::uint32_t step = top_; step > 0; step >>= 1) {
      const std::uint32_t next = idx + step;
      if (next <= alphabet_ && acc + std::uint64_t(tree_[next]) <= target) {
        idx = next;
        acc += std::uint64_t(tree_[next]);
      }
    }
    cum_lo = acc;
    cum_hi = acc + freq_[idx];
    return idx;
  }

  void record(std::uint32_t symbol) {
    add(symbol, 1);
    if (++freq_[symbol] == 2) hot_.push_back(symbol);
    ++total_;
    if (total_ > kRescaleThreshold) halve();
  }

 private:
  void add(std::uint32_t symbol, std::int64_t delta) {
    for (std::uint32_t i = symbol + 1; i <= alphabet_; i += i & (~i + 1))
      tree_[i] += delta;
  }

  void halve() {
    std::vector<std::uint32_t> still_hot;
    for (std::uint32_t s : hot_) {
      const std::uint32_t c = freq_[s];
      const std::uint32_t nc = (c + 1) >> 1;
      if (nc != c) {
        add(s, std::int64_t(nc) - std::int64_t(c));
        total_ -= c - nc;
        freq_[s] = nc;
      }
      if (nc >= 2) still_hot.push_back(s);
    }
    hot_.swap(still_hot);
  }

  std::uint32_t alphabet_;
  std::uint32_t top_ = 1;
  std::vector<std::uint32_t> freq_;
  std::vector<std::int64_t> tree_;
  std::uint64_t total_;
  std::vector<std::uint32_t> hot_;
};

class BitWriter {
 public:
  explicit BitWriter(std::vector<std::uint8_t>& out) : out_(out) {}

  void put(int bit) {
    bits_ = (bits_ << 1) | std::uint32_t(bit);
    if (++nbits_ == 8) {
      out_.push_back(std::uint8_t(bits_));
      bits_ = 0;
      nbits_ = 0;
    }
  }

  void flush() {
    while (nbits_ != 0) put(0);
  }

 private:
  std::vector<std::uint8_t>& out_;
  std::uint32_t bits_ = 0;
  int nbits_ = 0;
};

class BitReader {
 public:
  explicit BitReader(const std::vector<std::uint8_t>& in) : in_(in) {}

  int next() {
    if (pos_ >= in_.size()) return 0;  // zero padding past the payload
    const int b = (in_[pos_] >> (7 - bit_)) & 1;
    if (++bit_ == 8) {
      bit_ = 0;
      ++pos_;
    }
    return b;
  }

 private:
  const std::vector<std::uint8_t>& in_;
  size_t pos_ = 0;
  int bit_ = 0;
};

void check_alphabet(std::uint32_t alphabet) {
  if (alphabet == 0) throw ConfigError("alphabet size must be at least 1");
  if (alphabet > kMaxAlphabet)
    throw ConfigError("alphabet size " + std::to_string(alphabet) +
                      " exceeds coder limit");
}

}  // namespace

SymbolStream build_index_stream(const std::vector<QuantizedBlock>& blocks) {
  SymbolStream stream;
  std::uint32_t max_symbol = 0;
  for (size_t q = 0; q < blocks.size(); ++q) {
    if (q > 0) stream.symbols.push_back(0);
    std::uint32_t prev = 0;
    for (std::uint32_t idx : blocks[q].atom_indices) {
      if (idx <= prev)
        throw InputError("block atom indices must be >= 1 and strictly increasing");
      const std::uint32_t sym = idx - prev;  // first index, then deltas
      stream.symbols.push_back(sym);
      max_symbol = std::max(max_symbol, sym);
      prev = idx;
    }
  }
  stream.alphabet_size = max_symbol + 1;
  return stream;
}

std::vector<std::vector<std::uint32_t>> parse_index_stream(
    const SymbolStream& stream, std::uint32_t block_count) {
  if (block_count == 0) throw InputError("block count must be at least 1");
  std::vector<std::vector<std::uint32_t>> blocks(block_count);
  size_t q = 0;
  std::uint64_t prev = 0;
  for (std::uint32_t sym : stream.symbols) {
    if (sym == 0) {
      if (++q >= block_count)
        throw CorruptionError("index stream has too many block separators");
      prev = 0;
      continue;
    }
    const std::uint64_t idx = prev + sym;
    if (idx > std::numeric_limits<std::uint32_t>::max())
      throw CorruptionError("index stream accumulates past 32 bits");
    blocks[q].push_back(std::uint32_t(idx));
    prev = idx;
  }
  if (q != block_count - 1)
    throw CorruptionError("index stream separator count does not match block count");
  return blocks;
}

SymbolStream build_coeff_stream(const std::vector<QuantizedBlock>& blocks) {
  SymbolStream stream;
  std::uint64_t max_symbol = 0;
  for (const auto& b : blocks) {
    for (std::uint32_t m : b.magnitudes) {
      if (m == 0) throw InputError("quantized magnitudes must be >= 1");
      stream.symbols.push_back(m);
      max_symbol = std::max<std::uint64_t>(max_symbol, m);
    }
  }
  if (max_symbol + 1 > std::numeric_limits<std::uint32_t>::max())
    throw ConfigError("magnitude alphabet overflows 32 bits");
  stream.alphabet_size = std::uint32_t(max_symbol + 1);
  return stream;
}

SymbolStream build_sign_stream(const std::vector<QuantizedBlock>& blocks) {
  SymbolStream stream;
  stream.alphabet_size = 2;
  for (const auto& b : blocks)
    for (std::uint8_t s : b.signs) {
      if (s > 1) throw InputError("sign bits must be 0 or 1");
      stream.symbols.push_back(s);
    }
  return stream;
}

CodedStream arith_encode(const SymbolStream& stream) {
  check_alphabet(stream.alphabet_size);
  CodedStream coded;
  coded.symbol_count = stream.symbols.size();
  coded.alphabet_size = stream.alphabet_size;
  if (stream.symbols.empty()) return coded;

  AdaptiveModel model(stream.alphabet_size);
  BitWriter writer(coded.payload);
  std::uint32_t lo = 0;
  std::uint32_t hi = 0xFFFFFFFFu;
  std::uint64_t pending = 0;
  const auto emit = [&](int bit) {
    writer.put(bit);
    for (; pending > 0; --pending) writer.put(bit ^ 1);
  };

  for (std::uint32_t s : stream.symbols) {
    if (s >= stream.alphabet_size)
      throw InputError("symbol outside declared alphabet");
    std::uint64_t cum_lo, cum_hi;
    model.range_of(s, cum_lo, cum_hi);
    const std::uint64_t total = model.total();
    const std::uint64_t range = std::uint64_t(hi) - lo + 1;
    const std::uint64_t base = lo;
    hi = std::uint32_t(base + (range * cum_hi) / total - 1);
    lo = std::uint32_t(base + (range * cum_lo) / total);
    for (;;) {
      if (hi < kHalf) {
        emit(0);
      } else if (lo >= kHalf) {
        emit(1);
        lo -= kHalf;
        hi -= kHalf;
      } else if (lo >= kQuarter && hi < kThreeQuarter) {
        ++pending;
        lo -= kQuarter;
        hi -= kQuarter;
      } else {
        break;
      }
      lo <<= 1;
      hi = (hi << 1) | 1u;
    }
    model.record(s);
  }

  // Two disambiguating bits pin the final interval; the decoder reads zeros
  // past the end of the payload.
  ++pending;
  emit(lo >= kQuarter ? 1 : 0);
  writer.flush();
  return coded;
}

SymbolStream arith_decode(const CodedStream& coded) {
  check_alphabet(coded.alphabet_size);
  SymbolStream stream;
  stream.alphabet_size = coded.alphabet_size;
  if (coded.symbol_count == 0) return stream;
  if (coded.payload.empty())
    throw CorruptionError("empty payload with nonzero symbol count");

  AdaptiveModel model(coded.alphabet_size);
  BitReader reader(coded.payload);
  std::uint32_t lo = 0;
  std::uint32_t hi = 0xFFFFFFFFu;
  std::uint32_t code = 0;
  for (int i = 0; i < 32; ++i) code = (code << 1) | std::uint32_t(reader.next());

  stream.symbols.reserve(size_t(coded.symbol_count));
  for (std::uint64_t n = 0; n < coded.symbol_count; ++n) {
    const std::uint64_t total = model.total();
    const std::uint64_t range = std::uint64_t(hi) - lo + 1;
    const std::uint64_t target =
        ((std::uint64_t(code - lo) + 1) * total - 1) / range;
    std::uint64_t cum_lo, cum_hi;
    const std::uint32_t s = model.find(target, cum_lo, cum_hi);
    const std::uint64_t base = lo;
    hi = std::uint32_t(base + (range * cum_hi) / total - 1);
    lo = std::uint32_t(base + (range * cum_lo) / total);
    for (;;) {
      if (hi < kHalf) {
        // nothing to subtract
      } else if (lo >= kHalf) {
        lo -= kHalf;
        hi -= kHalf;
        code -= kHalf;
      } else if (lo >= kQuarter && hi < kThreeQuarter) {
        lo -= kQuarter;
        hi -= kQuarter;
        code -= kQuarter;
      } else {
        break;
      }
      lo <<= 1;
      hi = (hi << 1) | 1u;
      code = (code << 1) | std::uint32_t(reader.next());
    }
    model.record(s);
    stream.symbols.push_back(s);
  }
  return stream;
}

}  // namespace gwdc
