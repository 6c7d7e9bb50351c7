#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "gwdc/quantizer.hpp"

using namespace gwdc;

namespace {

AtomicDecomposition make_decomp(std::vector<std::uint32_t> idx,
                                std::vector<double> coef) {
  AtomicDecomposition d;
  d.block_index = 1;
  d.atom_indices = std::move(idx);
  d.coefficients = std::move(coef);
  return d;
}

}  // namespace

TEST_CASE("worked example: prune, sort, split sign") {
  const auto d = make_decomp({9, 4, 2}, {1.3, -0.2, 0.76});
  const auto q = quantize_block(d, 0.5);
  REQUIRE(q.atom_indices.size() == 2);
  CHECK(q.atom_indices[0] == 2);
  CHECK(q.atom_indices[1] == 9);
  CHECK(q.magnitudes[0] == 2);  // floor(0.76/0.5 + 0.5) = floor(2.02)
  CHECK(q.magnitudes[1] == 3);  // floor(1.3/0.5 + 0.5) = floor(3.1)
  CHECK(q.signs[0] == 0);
  CHECK(q.signs[1] == 0);
}

TEST_CASE("negative coefficients carry sign bit 1") {
  const auto q = quantize_block(make_decomp({5, 3}, {-1.0, 2.0}), 0.5);
  REQUIRE(q.atom_indices.size() == 2);
  CHECK(q.atom_indices[0] == 3);
  CHECK(q.signs[0] == 0);
  CHECK(q.atom_indices[1] == 5);
  CHECK(q.signs[1] == 1);
}

TEST_CASE("empty decomposition quantizes to an empty block") {
  const auto q = quantize_block(make_decomp({}, {}), 0.5);
  CHECK(q.atom_indices.empty());
  CHECK(q.magnitudes.empty());
  CHECK(q.signs.empty());
}

TEST_CASE("exact half-step magnitudes round up") {
  const auto q = quantize_block(make_decomp({1, 2}, {0.25, -0.25}), 0.5);
  REQUIRE(q.magnitudes.size() == 2);
  CHECK(q.magnitudes[0] == 1);
  CHECK(q.magnitudes[1] == 1);
  CHECK(q.signs[1] == 1);
}

TEST_CASE("invalid delta is rejected") {
  const auto d = make_decomp({1}, {1.0});
  CHECK_THROWS_AS(quantize_block(d, 0.0), ConfigError);
  CHECK_THROWS_AS(quantize_block(d, -0.5), ConfigError);
  CHECK_THROWS_AS(quantize_block(d, std::nan("")), ConfigError);
}

TEST_CASE("dequantize applies sign and step") {
  QuantizedBlock q;
  q.atom_indices = {2, 9};
  q.magnitudes = {2, 3};
  q.signs = {0, 1};
  const auto c = dequantize_block(q, 0.5);
  REQUIRE(c.size() == 2);
  CHECK(c[0] == 1.0);
  CHECK(c[1] == -1.5);

  QuantizedBlock empty;
  CHECK(dequantize_block(empty, 0.5).empty());

  q.signs.resize(1);
  CHECK_THROWS_AS(dequantize_block(q, 0.5), DimensionError);
}

TEST_CASE("per-entry reconstruction bound and pruning boundary") {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> uni(-3.0, 3.0);
  for (double delta : {1e-4, 1e-2, 0.5}) {
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<std::uint32_t> idx;
      std::vector<double> coef;
      for (std::uint32_t i = 1; i <= 50; ++i) {
        idx.push_back(i);
        coef.push_back(uni(rng));
      }
      const auto d = make_decomp(idx, coef);
      const auto q = quantize_block(d, delta);

      size_t qi = 0;
      for (size_t i = 0; i < coef.size(); ++i) {
        const bool survived =
            qi < q.atom_indices.size() && q.atom_indices[qi] == idx[i];
        if (survived) {
          CHECK(std::abs(delta * double(q.magnitudes[qi]) - std::abs(coef[i])) <=
                delta / 2 + 1e-15);
          ++qi;
        } else {
          CHECK(std::abs(coef[i]) < delta / 2);
        }
      }
      CHECK(qi == q.atom_indices.size());
    }
  }
}

TEST_CASE("quantize-dequantize is a fixed point") {
  std::mt19937 rng(0x5eed);
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  const double delta = 0.01;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::uint32_t> idx;
    std::vector<double> coef;
    for (std::uint32_t i = 1; i <= 20; ++i) {
      idx.push_back(i * 3);
      coef.push_back(uni(rng));
    }
    const auto q1 = quantize_block(make_decomp(idx, coef), delta);
    const auto c1 = dequantize_block(q1, delta);

    AtomicDecomposition round;
    round.block_index = 1;
    round.atom_indices = q1.atom_indices;
    round.coefficients = c1;
    const auto q2 = quantize_block(round, delta);
    CHECK(q2.atom_indices == q1.atom_indices);
    CHECK(q2.magnitudes == q1.magnitudes);
    CHECK(q2.signs == q1.signs);
  }
}

TEST_CASE("output indices are strictly increasing") {
  std::mt19937 rng(1234);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::uniform_int_distribution<std::uint32_t> pick(1, 1000);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::uint32_t> idx;
    std::vector<double> coef;
    std::vector<bool> seen(1001, false);
    while (idx.size() < 30) {
      const auto n = pick(rng);
      if (seen[n]) continue;
      seen[n] = true;
      idx.push_back(n);
      coef.push_back(uni(rng));
    }
    const auto q = quantize_block(make_decomp(idx, coef), 0.05);
    for (size_t i = 1; i < q.atom_indices.size(); ++i)
      CHECK(q.atom_indices[i] > q.atom_indices[i - 1]);
  }
}
