#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstring>
#include <random>

#include "doctest.h"
#include "gwdc/container.hpp"
#include "support.hpp"

using namespace gwdc;

namespace {

DictionaryConfig small_config() {
  DictionaryConfig cfg;
  cfg.block_size = 64;
  cfg.trig_size = 128;
  cfg.prototypes = DictionaryConfig::default_prototypes();
  return cfg;
}

std::vector<double> random_signal(std::mt19937& rng, size_t n) {
  std::uniform_real_distribution<double> uni(-0.9, 0.9);
  std::vector<double> s(n);
  for (auto& x : s) x = uni(rng);
  return s;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         (a.empty() ||
          std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

}  // namespace

TEST_CASE("zero signal produces a header-only container that decodes to zeros") {
  const std::vector<double> zeros(4096, 0.0);
  const auto enc = encode_signal(zeros, 8000, small_config(),
                                 StopRule::residual(1e-6));
  CHECK(enc.coded_atoms == 0);

  const auto header = read_header(enc.bytes);
  CHECK(header.block_count == 64);  // 4096 / 64
  CHECK(header.original_length == 4096);
  CHECK(header.pad_length == 0);

  const auto dec = decode_signal(enc.bytes);
  CHECK(dec.sample_rate == 8000);
  REQUIRE(dec.samples.size() == 4096);
  for (double v : dec.samples) CHECK(v == 0.0);
}

TEST_CASE("in-span signals decode at very high fidelity with a fine step") {
  std::mt19937 rng(42);
  const auto cfg = small_config();
  Dictionary dict(cfg);
  std::uniform_int_distribution<std::uint32_t> pick(1, dict.total_atoms());
  std::uniform_real_distribution<double> camp(0.5, 2.0);

  std::vector<double> signal;
  for (int q = 0; q < 4; ++q) {
    std::vector<double> block(64, 0.0);
    for (int a = 0; a < 5; ++a) {
      const auto atom = dict.atom(pick(rng));
      const double c = camp(rng);
      for (size_t i = 0; i < 64; ++i) block[i] += c * atom[i];
    }
    signal.insert(signal.end(), block.begin(), block.end());
  }

  const auto enc = encode_signal(signal, 8000, cfg,
                                 StopRule::residual(1e-10), 1e-7);
  const auto dec = decode_signal(enc.bytes);
  CHECK(snr_db(signal, dec.samples) >= 120.0);
}

TEST_CASE("decode reproduces the encoder-side reconstruction bit for bit") {
  std::mt19937 rng(4242);
  const auto cfg = small_config();
  for (int trial = 0; trial < 10; ++trial) {
    const auto signal = random_signal(rng, 300 + 17 * trial);
    const auto enc =
        encode_signal(signal, 8000, cfg, StopRule::block_snr(25.0));
    const auto dec = decode_signal(enc.bytes);
    CHECK(bit_equal(dec.samples, enc.reconstruction));
  }
}

TEST_CASE("encoding is deterministic across calls and worker counts") {
  std::mt19937 rng(11);
  const auto cfg = small_config();
  const auto signal = random_signal(rng, 1000);

  const auto a = encode_signal(signal, 8000, cfg, StopRule::block_snr(30.0));
  const auto b = encode_signal(signal, 8000, cfg, StopRule::block_snr(30.0));
  CHECK(a.bytes == b.bytes);

  for (unsigned workers : {2u, 8u}) {
    const auto c =
        encode_signal(signal, 8000, cfg, StopRule::block_snr(30.0), 0.0, workers);
    CHECK(a.bytes == c.bytes);
  }
}

TEST_CASE("parse_model returns exactly the coded blocks") {
  std::mt19937 rng(77);
  const auto cfg = small_config();
  const auto signal = random_signal(rng, 500);
  const auto enc = encode_signal(signal, 8000, cfg, StopRule::block_snr(20.0));

  const auto model = parse_model(enc.bytes);
  REQUIRE(model.blocks.size() == enc.quantized.size());
  for (size_t q = 0; q < model.blocks.size(); ++q) {
    CHECK(model.blocks[q].atom_indices == enc.quantized[q].atom_indices);
    CHECK(model.blocks[q].magnitudes == enc.quantized[q].magnitudes);
    CHECK(model.blocks[q].signs == enc.quantized[q].signs);
  }
  CHECK(model.header.delta == enc.delta);
}

TEST_CASE("header fields round trip, including prototype samples") {
  std::mt19937 rng(99);
  DictionaryConfig cfg;
  cfg.block_size = 32;
  cfg.trig_size = 64;
  cfg.prototypes = {PrototypeAtom{{1.0, 3.0, 1.0}, "p1"},
                    PrototypeAtom{{0.5}, "p2"}};
  const auto signal = random_signal(rng, 100);
  const auto enc = encode_signal(signal, 44100, cfg, StopRule::block_snr(20.0));

  const auto h = read_header(enc.bytes);
  CHECK(h.version == kContainerVersion);
  CHECK(h.sample_rate == 44100);
  CHECK(h.original_length == 100);
  CHECK(h.block_size == 32);
  CHECK(h.pad_length == 28);
  CHECK(h.block_count == 4);
  CHECK(h.delta == enc.delta);
  CHECK(h.dict_config.trig_size == 64);
  REQUIRE(h.dict_config.prototypes.size() == 2);
  CHECK(h.dict_config.prototypes[0].samples == std::vector<double>({1.0, 3.0, 1.0}));
  CHECK(h.dict_config.prototypes[1].samples == std::vector<double>({0.5}));
}

TEST_CASE("corruption is reported with a byte offset") {
  std::mt19937 rng(13);
  const auto cfg = small_config();
  const auto signal = random_signal(rng, 200);
  auto enc = encode_signal(signal, 8000, cfg, StopRule::block_snr(20.0));

  SUBCASE("bad magic at offset 0") {
    auto bad = enc.bytes;
    bad[0] = 'X';
    try {
      decode_signal(bad);
      FAIL("expected a corruption error");
    } catch (const CorruptionError& e) {
      CHECK(e.has_byte_offset());
      CHECK(e.byte_offset() == 0);
    }
  }
  SUBCASE("unsupported version at offset 4") {
    auto bad = enc.bytes;
    bad[4] = 0x77;
    try {
      decode_signal(bad);
      FAIL("expected a corruption error");
    } catch (const CorruptionError& e) {
      CHECK(e.byte_offset() == 4);
    }
  }
  SUBCASE("truncation anywhere is caught") {
    for (size_t cut : {3ul, 11ul, 29ul, 40ul, enc.bytes.size() - 1}) {
      std::vector<std::uint8_t> bad(enc.bytes.begin(),
                                    enc.bytes.begin() + long(cut));
      CHECK_THROWS_AS(decode_signal(bad), CorruptionError);
    }
  }
  SUBCASE("trailing bytes are rejected") {
    auto bad = enc.bytes;
    bad.push_back(0);
    CHECK_THROWS_AS(decode_signal(bad), CorruptionError);
  }
  SUBCASE("mismatched dictionary block size") {
    auto bad = enc.bytes;
    // dict block_size u32 sits right after the f64 delta
    const size_t at = 4 + 2 + 4 + 8 + 4 + 4 + 8;
    bad[at] = std::uint8_t(bad[at] + 1);
    CHECK_THROWS_AS(decode_signal(bad), CorruptionError);
  }
  SUBCASE("empty input") {
    CHECK_THROWS_AS(decode_signal(std::vector<std::uint8_t>{}), CorruptionError);
  }
}

TEST_CASE("decoded error obeys the quantization triangle bound") {
  std::mt19937 rng(21);
  const auto cfg = small_config();
  Dictionary dict(cfg);
  const auto signal = random_signal(rng, 640);
  const double delta = 0.01;
  const auto enc =
      encode_signal(signal, 8000, cfg, StopRule::block_snr(35.0), delta);

  // unquantized model
  const auto partition = partition_signal(signal, cfg.block_size);
  std::vector<std::vector<double>> blocks(enc.decompositions.size());
  std::uint64_t total_atoms = 0;
  for (size_t q = 0; q < enc.decompositions.size(); ++q) {
    blocks[q] = reconstruct_block(enc.decompositions[q], dict);
    total_atoms += enc.decompositions[q].iterations();
  }
  const auto unquantized = assemble_signal(blocks, partition.pad_length);

  double err = 0.0;
  for (size_t i = 0; i < unquantized.size(); ++i) {
    const double d = unquantized[i] - enc.reconstruction[i];
    err += d * d;
  }
  CHECK(std::sqrt(err) <= (delta / 2.0) * double(total_atoms) + 1e-12);
}

TEST_CASE("decreasing delta never hurts the decoded SNR") {
  std::mt19937 rng(31);
  const auto cfg = small_config();
  const auto signal = random_signal(rng, 512);
  double prev = -1e300;
  for (const double delta : {0.1, 0.01, 0.001, 0.0001}) {
    const auto enc =
        encode_signal(signal, 8000, cfg, StopRule::block_snr(40.0), delta);
    const auto dec = decode_signal(enc.bytes);
    const double snr = snr_db(signal, dec.samples);
    CHECK(snr >= prev - 1e-9);
    prev = snr;
  }
}

TEST_CASE("rate control: fixed mode is a single pass") {
  std::mt19937 rng(41);
  const auto signal = random_signal(rng, 512);
  const auto res = rate_control_search(signal, 8000, small_config(),
                                       RateTarget::fixed(30.0, 0.001));
  CHECK(res.converged);
  CHECK(res.bisection_steps == 0);
  CHECK(res.delta == 0.001);
  CHECK(res.quality_db == 30.0);
  CHECK(std::isfinite(res.achieved_db));
}

TEST_CASE("rate control: match-snr lands inside the window") {
  std::mt19937 rng(51);
  std::vector<double> signal(2048);
  for (size_t i = 0; i < signal.size(); ++i)
    signal[i] = 0.6 * std::sin(0.061 * double(i)) +
                0.25 * std::sin(0.173 * double(i) + 0.5);

  const auto res = rate_control_search(signal, 8000, small_config(),
                                       RateTarget::match_snr(40.0, 0.5));
  REQUIRE(res.converged);
  CHECK(res.achieved_db >= 40.0);
  CHECK(res.achieved_db <= 40.5);

  const auto dec = decode_signal(res.encode.bytes);
  CHECK(snr_db(signal, dec.samples) == doctest::Approx(res.achieved_db));
}

TEST_CASE("rate control: match-mean-snr lands inside the window") {
  std::mt19937 rng(61);
  const auto signal = random_signal(rng, 1024);
  const auto res = rate_control_search(signal, 8000, small_config(),
                                       RateTarget::match_mean_snr(25.0, 0.5));
  REQUIRE(res.converged);
  CHECK(res.achieved_db >= 25.0);
  CHECK(res.achieved_db <= 25.5);

  const auto dec = decode_signal(res.encode.bytes);
  const auto stats = block_snr_stats(signal, dec.samples, 64);
  CHECK(stats.mean_db == doctest::Approx(res.achieved_db));
}

TEST_CASE("rate control: unreachable target is flagged, file still written") {
  std::mt19937 rng(71);
  const auto signal = random_signal(rng, 256);
  const auto res = rate_control_search(signal, 8000, small_config(),
                                       RateTarget::match_snr(400.0, 0.5));
  CHECK(!res.converged);
  CHECK(!res.encode.bytes.empty());
  CHECK_NOTHROW(decode_signal(res.encode.bytes));
  CHECK(res.achieved_db < 400.0);
}

TEST_CASE("rate control: zero signal converges trivially") {
  const std::vector<double> zeros(256, 0.0);
  const auto res = rate_control_search(zeros, 8000, small_config(),
                                       RateTarget::match_snr(40.0, 0.5));
  CHECK(res.converged);
  CHECK(std::isnan(res.achieved_db));
  const auto dec = decode_signal(res.encode.bytes);
  for (double v : dec.samples) CHECK(v == 0.0);
}

TEST_CASE("rate control validates its inputs") {
  const std::vector<double> signal(64, 0.5);
  CHECK_THROWS_AS(rate_control_search({}, 8000, small_config(),
                                      RateTarget::match_snr(30.0)),
                  InputError);
  CHECK_THROWS_AS(rate_control_search(signal, 8000, small_config(),
                                      RateTarget::match_snr(30.0, 0.0)),
                  ConfigError);
}

TEST_CASE("encode rejects an empty signal") {
  CHECK_THROWS_AS(
      encode_signal({}, 8000, small_config(), StopRule::residual(1e-3)),
      InputError);
}
