#include "embopt/mock_backend.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "embopt/error.hpp"
#include "embopt/objective.hpp"
#include "embopt/random.hpp"

namespace embopt {

MockBackend::MockBackend(MockBackendConfig config) : config_(std::move(config)) {
  dimension_ = shape_product(config_.shape);
  if (dimension_ == 0) throw ValidationError("mock backend: shape must be non-empty with positive extents");
  if (!(config_.target_correlation >= -1.0 && config_.target_correlation <= 1.0)) {
    throw ValidationError("mock backend: target correlation must lie in [-1, 1]");
  }
}

HealthResponse MockBackend::health() { return HealthResponse{"ok", "mock", config_.shape}; }

EmbeddingVector MockBackend::encode_prompt(const std::string& prompt) {
  if (prompt.empty()) throw ValidationError("encode_prompt: empty prompt");
  Rng rng(RngSeed{fnv1a64(prompt)});
  return EmbeddingVector(standard_normal_draws(rng, dimension_), config_.shape);
}

std::vector<double> MockBackend::target(const std::string& prompt) const {
  Rng rng(RngSeed{fnv1a64(prompt)});
  const auto encoding = standard_normal_draws(rng, dimension_);
  const auto noise = standard_normal_draws(rng, dimension_);
  const double rho = config_.target_correlation;
  const double rest = std::sqrt(1.0 - rho * rho);
  std::vector<double> t(dimension_);
  for (std::size_t j = 0; j < dimension_; ++j) t[j] = rho * encoding[j] + rest * noise[j];
  return t;
}

ScoreResponse MockBackend::generate_and_score(const GenerationRequest& request) {
  request.validate();
  if (request.embedding.size() != dimension_) {
    throw ValidationError("mock backend: embedding has " + std::to_string(request.embedding.size()) +
                          " entries, expected " + std::to_string(dimension_));
  }
  const auto scores = synthetic_scores(request.embedding.view(), target(request.prompt));
  ScoreResponse r;
  r.aesthetic = scores.aesthetic;
  r.clip = scores.clip;
  r.image_id = mock_image_id(request);
  if (request.return_image) {
    r.image_png = encode_png(
        mock_image(fnv1a64(request.prompt), scores.aesthetic, scores.clip, request.width, request.height));
  }
  return r;
}

std::string mock_image_id(const GenerationRequest& request) {
  std::string bytes = request.prompt;
  bytes.push_back('\0');
  for (double x : request.embedding.data()) {
    const auto bits = std::bit_cast<std::uint64_t>(x);
    for (int k = 0; k < 8; ++k) bytes.push_back(static_cast<char>((bits >> (8 * k)) & 0xFF));
  }
  for (int k = 0; k < 8; ++k) bytes.push_back(static_cast<char>((request.seed >> (8 * k)) & 0xFF));
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return hex;
}

ImageBuffer mock_image(std::uint64_t prompt_hash, double aesthetic, double clip, int width, int height) {
  // Scores are quantized so tiny moves do not change a single pixel.
  const double freq_a = 1.0 + 3.0 * (std::round(aesthetic * 10.0) / 10.0);
  const double shift_c = std::round(clip * 20.0) / 20.0;
  const double base[3] = {static_cast<double>(prompt_hash & 0xFF) / 255.0,
                          static_cast<double>((prompt_hash >> 8) & 0xFF) / 255.0,
                          static_cast<double>((prompt_hash >> 16) & 0xFF) / 255.0};
  constexpr double two_pi = 2.0 * std::numbers::pi;

  ImageBuffer img{width, height, 3, SampleRange::byte, {}};
  img.data.resize(static_cast<std::size_t>(width) * height * 3);
  for (int y = 0; y < height; ++y) {
    const double v = static_cast<double>(y) / height;
    for (int x = 0; x < width; ++x) {
      const double u = static_cast<double>(x) / width;
      const double wave[3] = {0.5 + 0.5 * std::sin(two_pi * (freq_a * u + shift_c * v)),
                              0.5 + 0.5 * std::cos(two_pi * (freq_a * v - shift_c * u)),
                              0.5 + 0.5 * std::sin(two_pi * freq_a * (u + v) / 2.0)};
      double* px = &img.data[(static_cast<std::size_t>(y) * width + x) * 3];
      for (int c = 0; c < 3; ++c) px[c] = std::floor(255.0 * (0.5 * base[c] + 0.5 * wave[c]) + 0.5);
    }
  }
  return img;
}

}  // namespace embopt
