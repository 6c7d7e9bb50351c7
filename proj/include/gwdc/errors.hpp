#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gwdc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid build-time parameters (dictionary geometry, quantizer step, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Mismatched vector/block lengths between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Unusable input data (empty signal, unsupported file, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

// Malformed or truncated coded data. Container-level failures carry the byte
// offset at which parsing stopped; stream-level failures may omit it.
class CorruptionError : public Error {
 public:
  static constexpr std::size_t kNoOffset = static_cast<std::size_t>(-1);

  explicit CorruptionError(const std::string& what)
      : Error(what), byte_offset_(kNoOffset) {}

  CorruptionError(const std::string& what, std::size_t byte_offset)
      : Error(what + " (byte offset " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}

  bool has_byte_offset() const { return byte_offset_ != kNoOffset; }
  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

}  // namespace gwdc
