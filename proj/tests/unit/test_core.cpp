#include "doctest.h"

#include <cmath>
#include <limits>

#include "embopt/embedding.hpp"
#include "embopt/error.hpp"
#include "embopt/random.hpp"

using namespace embopt;

TEST_CASE("embedding validates shape and values") {
  EmbeddingVector e({1.0, 2.0, 3.0, 4.0, 5.0, 6.0}, {2, 3});
  CHECK(e.size() == 6);
  CHECK(e.shape() == std::vector<std::size_t>{2, 3});
  CHECK(EmbeddingVector({1.0, 2.0}).shape() == std::vector<std::size_t>{2});

  CHECK_THROWS_AS(EmbeddingVector({1.0, 2.0, 3.0}, {2, 2}), ValidationError);
  CHECK_THROWS_AS(EmbeddingVector({}, {0}), ValidationError);
  CHECK_THROWS_AS(EmbeddingVector({1.0, std::nan("")}, {2}), ValidationError);
  CHECK_THROWS_AS(EmbeddingVector({1.0, std::numeric_limits<double>::infinity()}), ValidationError);
  CHECK_THROWS_AS(e.with_data({1.0}), ValidationError);
  CHECK(e.with_data({0, 0, 0, 0, 0, 1}).shape() == e.shape());
}

TEST_CASE("flatten and unflatten round-trip on random shapes") {
  Rng rng(RngSeed{7});
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t rank = 1 + rng.next_u64() % 4;
    std::vector<std::size_t> shape;
    for (std::size_t k = 0; k < rank; ++k) shape.push_back(1 + rng.next_u64() % 5);
    const auto n = shape_product(shape);
    ShapedTensor t{shape, standard_normal_draws(rng, n)};
    const auto flat = flatten(t);
    CHECK(flat.size() == n);
    const auto back = unflatten(flat);
    CHECK(back.shape == t.shape);
    CHECK(back.values == t.values);
    CHECK(flatten(back) == flat);
  }
}

TEST_CASE("SplitMix64 and Box-Muller match the reference stream") {
  Rng a(RngSeed{42});
  CHECK(a.next_u64() == 0xbdd732262feb6e95ULL);
  CHECK(a.next_u64() == 0x28efe333b266f103ULL);
  CHECK(a.next_u64() == 0x47526757130f9f52ULL);

  Rng b(RngSeed{42});
  const double expected[] = {0.8822489062222688, 1.388473285287707, -0.4508498757188601, 0.6707164409024291};
  for (double x : expected) CHECK(b.normal() == doctest::Approx(x).epsilon(1e-15));

  CHECK(fnv1a64("hello") == 0xa430d84680aabd0bULL);
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
}

TEST_CASE("normal draws are deterministic per seed") {
  Rng a(RngSeed{123});
  Rng b(RngSeed{123});
  CHECK(standard_normal_draws(a, 5) == standard_normal_draws(b, 5));
  CHECK_THROWS_AS(standard_normal_draws(a, 0), ValidationError);

  Rng parent(RngSeed{9});
  Rng child = parent.split();
  CHECK(child.next_u64() != parent.next_u64());
}

TEST_CASE("normal sampler moment test at n = 1e6") {
  Rng rng(RngSeed{2024});
  const auto x = standard_normal_draws(rng, 1'000'000);
  double sum = 0.0;
  for (double v : x) sum += v;
  const double mean = sum / x.size();
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double var = ss / (x.size() - 1);
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("uniform stays in [0, 1)") {
  Rng rng(RngSeed{0});
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
  }
}
