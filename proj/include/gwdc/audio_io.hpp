#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gwdc/errors.hpp"

namespace gwdc {

struct Signal {
  std::vector<double> samples;  // first channel, scaled to [-1, 1) for PCM
  std::uint32_t sample_rate = 0;
  int source_bit_depth = 0;
};

// RIFF/WAVE reader: PCM 16/24/32-bit and 32-bit float, first channel only.
// Integer samples are normalized by 2^(bits-1). Extensible-format files are
// rejected.
Signal read_wav(const std::vector<std::uint8_t>& bytes);
Signal read_wav_file(const std::string& path);

struct WavWriteResult {
  std::vector<std::uint8_t> bytes;
  std::size_t clipped = 0;  // samples clamped into range
};

// Canonical 44-byte-header PCM writer; bit_depth is 16, 24, or 32.
WavWriteResult write_wav(const Signal& signal, int bit_depth = 16);
std::size_t write_wav_file(const std::string& path, const Signal& signal,
                           int bit_depth = 16);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes);

}  // namespace gwdc
