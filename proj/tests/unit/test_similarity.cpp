#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "embopt/error.hpp"
#include "embopt/image.hpp"
#include "embopt/random.hpp"
#include "embopt/similarity.hpp"

using namespace embopt;

namespace {

// Same formula as tests/oracles/oracle.py.
ImageBuffer formula_image(int w, int h) {
  std::vector<double> px;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      px.push_back(std::floor(127.5 + 100.0 * std::sin(x / 5.0) * std::cos(y / 7.0) + 20.0 * std::sin((x + 2.0 * y) / 3.0)));
    }
  }
  return make_image(w, h, 1, SampleRange::byte, px);
}

ImageBuffer random_image(Rng& rng, int w, int h, int channels, SampleRange range) {
  std::vector<double> px(static_cast<std::size_t>(w) * h * channels);
  for (auto& v : px) v = range == SampleRange::byte ? std::floor(256.0 * rng.uniform()) : rng.uniform();
  return make_image(w, h, channels, range, px);
}

}  // namespace

TEST_CASE("grayscale conversion") {
  const auto white = to_grayscale(make_image(1, 1, 3, SampleRange::byte, {255, 255, 255}));
  CHECK(white.channels == 1);
  CHECK(white.data[0] == 255.0);
  CHECK(to_grayscale(make_image(1, 1, 3, SampleRange::byte, {255, 0, 0})).data[0] == 76.0);
  CHECK(to_grayscale(make_image(1, 1, 3, SampleRange::unit, {1.0, 0.0, 0.0})).data[0] ==
        doctest::Approx(0.299));
  Rng rng(RngSeed{1});
  const auto g = random_image(rng, 7, 5, 1, SampleRange::byte);
  CHECK(to_grayscale(g).data == g.data);
  ImageBuffer bad{2, 2, 2, SampleRange::byte, std::vector<double>(8, 0.0)};
  CHECK_THROWS_AS(to_grayscale(bad), ValidationError);
}

TEST_CASE("ssim oracles") {
  const auto ua = make_image(16, 16, 1, SampleRange::unit, std::vector<double>(256, 0.2));
  const auto ub = make_image(16, 16, 1, SampleRange::unit, std::vector<double>(256, 0.8));
  CHECK(std::abs(ssim(ua, ub) - 0.4707) <= 1e-3);
  // scikit-image structural_similarity(gaussian_weights, sigma 1.5, population covariance)
  CHECK(ssim(ua, ub) == doctest::Approx(0.47066607851786496).epsilon(1e-12));

  const auto a = formula_image(64, 48);
  auto b = a;
  for (int y = 0; y < 48; ++y) {
    for (int x = 0; x < 64; ++x) {
      auto& v = b.data[y * 64 + x];
      v = std::clamp(v + std::floor(30.0 * std::cos(x / 9.0)), 0.0, 255.0);
    }
  }
  CHECK(ssim(a, b) == doctest::Approx(0.9578317296612653).epsilon(1e-10));

  const auto big = formula_image(512, 512);
  auto flipped = big;
  auto& px = flipped.data[200 * 512 + 300];
  CHECK(px == 171.0);
  px = 255.0 - px;
  const double s = ssim(big, flipped);
  CHECK(s > 0.999);
  CHECK(s < 1.0);
  CHECK(s == doctest::Approx(0.9999842594989469).epsilon(1e-10));
}

TEST_CASE("ssim and cosine distance identities on random images") {
  Rng rng(RngSeed{44});
  for (int i = 0; i < 20; ++i) {
    const auto range = i % 2 ? SampleRange::unit : SampleRange::byte;
    const auto a = random_image(rng, 11 + i, 13 + 2 * i, 1, range);
    const auto b = random_image(rng, 11 + i, 13 + 2 * i, 1, range);
    CHECK(ssim(a, a) == 1.0);
    CHECK(cosine_distance(a, a) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(std::abs(ssim(a, b) - ssim(b, a)) <= 1e-12);
    CHECK(std::abs(cosine_distance(a, b) - cosine_distance(b, a)) <= 1e-12);
    const double s = ssim(a, b);
    CHECK(s >= -1.0);
    CHECK(s <= 1.0);

    auto as = a, bs = b;
    for (auto& v : as.data) v *= 3.5;
    for (auto& v : bs.data) v *= 3.5;
    CHECK(cosine_distance(as, bs) == doctest::Approx(cosine_distance(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("cosine distance edge cases") {
  const std::vector<double> x{0.2, -0.5, 0.7};
  const std::vector<double> neg{-0.2, 0.5, -0.7};
  CHECK(cosine_distance(x, neg) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(cosine_distance(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == 1.0);
  CHECK_THROWS_AS(cosine_distance(std::vector<double>{0, 0}, std::vector<double>{0, 1}), DomainError);
  CHECK_THROWS_AS(cosine_distance(std::vector<double>{1, 0}, std::vector<double>{1}), ValidationError);
}

TEST_CASE("ssim preconditions") {
  Rng rng(RngSeed{2});
  const auto a = random_image(rng, 20, 20, 1, SampleRange::byte);
  CHECK_THROWS_AS(ssim(a, random_image(rng, 21, 20, 1, SampleRange::byte)), ValidationError);
  CHECK_THROWS_AS(ssim(random_image(rng, 10, 20, 1, SampleRange::byte), random_image(rng, 10, 20, 1, SampleRange::byte)),
                  ValidationError);
  CHECK_THROWS_AS(ssim(random_image(rng, 20, 20, 3, SampleRange::byte), random_image(rng, 20, 20, 3, SampleRange::byte)),
                  ValidationError);
  CHECK_THROWS_AS(ssim(a, random_image(rng, 20, 20, 1, SampleRange::unit)), ValidationError);
}

TEST_CASE("png round trip") {
  Rng rng(RngSeed{6});
  for (int channels : {1, 3}) {
    const auto img = random_image(rng, 33, 17, channels, SampleRange::byte);
    const auto back = decode_png(encode_png(img));
    CHECK(back.width == 33);
    CHECK(back.height == 17);
    CHECK(back.channels == channels);
    CHECK(back.data == img.data);
  }
  const auto path = std::filesystem::temp_directory_path() / "embopt_png_roundtrip.png";
  const auto img = random_image(rng, 8, 8, 3, SampleRange::byte);
  write_png_file(path.string(), img);
  CHECK(read_png_file(path.string()).data == img.data);
  std::filesystem::remove(path);

  const std::vector<std::uint8_t> junk{1, 2, 3, 4, 5};
  CHECK_THROWS_AS(decode_png(junk), ValidationError);
}
