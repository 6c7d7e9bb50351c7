#include "gwdc/audio_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace gwdc {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(const std::uint8_t* p) {
  return std::uint16_t(p[0] | (std::uint16_t(p[1]) << 8));
}

std::uint32_t read_u32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) |
         (std::uint32_t(p[2]) << 16) | (std::uint32_t(p[3]) << 24);
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(std::uint8_t(v & 0xFF));
  out.push_back(std::uint8_t(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(std::uint8_t(v & 0xFF));
  out.push_back(std::uint8_t((v >> 8) & 0xFF));
  out.push_back(std::uint8_t((v >> 16) & 0xFF));
  out.push_back(std::uint8_t((v >> 24) & 0xFF));
}

}  // namespace

Signal read_wav(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw CorruptionError("not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0, block_align = 0;
  std::uint32_t sample_rate = 0;
  bool have_fmt = false;
  const std::uint8_t* data = nullptr;
  std::uint32_t data_size = 0;

  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
    const std::uint32_t size = read_u32(bytes.data() + pos + 4);
    pos += 8;
    if (pos + size > bytes.size())
      throw CorruptionError("WAV chunk extends past end of file");
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (size < 16) throw CorruptionError("WAV fmt chunk too short");
      format = read_u16(bytes.data() + pos);
      channels = read_u16(bytes.data() + pos + 2);
      sample_rate = read_u32(bytes.data() + pos + 4);
      block_align = read_u16(bytes.data() + pos + 12);
      bits = read_u16(bytes.data() + pos + 14);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = bytes.data() + pos;
      data_size = size;
      if (have_fmt) break;
    }
    pos += size + (size & 1);  // chunks are word aligned
  }

  if (!have_fmt) throw CorruptionError("WAV file has no fmt chunk");
  if (data == nullptr) throw CorruptionError("WAV file has no data chunk");
  if (format == kFormatExtensible)
    throw CorruptionError("extensible-format WAV files are not supported");
  if (channels == 0) throw CorruptionError("WAV file declares zero channels");
  const bool is_float = format == kFormatFloat;
  if (!is_float && format != kFormatPcm)
    throw CorruptionError("unsupported WAV format code " + std::to_string(format));
  if (is_float && bits != 32)
    throw CorruptionError("only 32-bit float WAV data is supported");
  if (!is_float && bits != 16 && bits != 24 && bits != 32)
    throw CorruptionError("unsupported PCM bit depth " + std::to_string(bits));

  const std::uint32_t bytes_per_sample = bits / 8;
  const std::uint32_t frame = block_align != 0 ? block_align
                                               : bytes_per_sample * channels;
  if (frame < bytes_per_sample * channels)
    throw CorruptionError("WAV block alignment is inconsistent");
  const size_t frames = data_size / frame;
  if (frames == 0) throw CorruptionError("WAV file has no samples");

  Signal signal;
  signal.sample_rate = sample_rate;
  signal.source_bit_depth = bits;
  signal.samples.resize(frames);
  for (size_t i = 0; i < frames; ++i) {
    const std::uint8_t* p = data + i * frame;  // channel 0 leads the frame
    if (is_float) {
      float v;
      std::memcpy(&v, p, 4);
      signal.samples[i] = double(v);
    } else if (bits == 16) {
      const std::int16_t v = std::int16_t(read_u16(p));
      signal.samples[i] = double(v) / 32768.0;
    } else if (bits == 24) {
      std::int32_t v = std::int32_t(p[0]) | (std::int32_t(p[1]) << 8) |
                       (std::int32_t(p[2]) << 16);
      if (v & 0x800000) v -= 0x1000000;  // sign extend
      signal.samples[i] = double(v) / 8388608.0;
    } else {
      const std::int32_t v = std::int32_t(read_u32(p));
      signal.samples[i] = double(v) / 2147483648.0;
    }
  }
  return signal;
}

WavWriteResult write_wav(const Signal& signal, int bit_depth) {
  if (bit_depth != 16 && bit_depth != 24 && bit_depth != 32)
    throw ConfigError("bit depth must be 16, 24, or 32");
  if (signal.samples.empty()) throw InputError("cannot write an empty signal");
  if (signal.sample_rate == 0) throw InputError("sample rate must be positive");

  const std::uint32_t bytes_per_sample = std::uint32_t(bit_depth) / 8;
  const std::uint64_t data_size64 =
      std::uint64_t(signal.samples.size()) * bytes_per_sample;
  if (data_size64 > 0xFFFFFFFFu - 36u)
    throw InputError("signal too long for a WAV container");
  const std::uint32_t data_size = std::uint32_t(data_size64);

  WavWriteResult result;
  auto& out = result.bytes;
  out.reserve(44 + data_size + 1);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32(out, 36 + data_size);
  out.insert(out.end(), {'W', 'A', 'V', 'E'});
  out.insert(out.end(), {'f', 'm', 't', ' '});
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);  // mono
  put_u32(out, signal.sample_rate);
  put_u32(out, signal.sample_rate * bytes_per_sample);
  put_u16(out, std::uint16_t(bytes_per_sample));
  put_u16(out, std::uint16_t(bit_depth));
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32(out, data_size);

  const double full_scale = double(std::int64_t(1) << (bit_depth - 1));
  const std::int64_t max_code = std::int64_t(1ll << (bit_depth - 1)) - 1;
  const std::int64_t min_code = -(std::int64_t(1) << (bit_depth - 1));
  for (double s : signal.samples) {
    std::int64_t code = std::llround(s * full_scale);
    if (code > max_code) {
      code = max_code;
      ++result.clipped;
    } else if (code < min_code) {
      code = min_code;
      ++result.clipped;
    }
    const std::uint32_t u = std::uint32_t(std::int32_t(code));
    for (std::uint32_t b = 0; b < bytes_per_sample; ++b)
      out.push_back(std::uint8_t((u >> (8 * b)) & 0xFF));
  }
  if (data_size & 1) out.push_back(0);  // RIFF word alignment
  return result;
}

Signal read_wav_file(const std::string& path) { return read_wav(read_file(path)); }

std::size_t write_wav_file(const std::string& path, const Signal& signal,
                           int bit_depth) {
  const WavWriteResult result = write_wav(signal, bit_depth);
  write_file(path, result.bytes);
  return result.clipped;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "' for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw InputError("read failed for '" + path + "'");
  return bytes;
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            std::streamsize(bytes.size()));
  if (!out) throw InputError("write failed for '" + path + "'");
}

}  // namespace gwdc
