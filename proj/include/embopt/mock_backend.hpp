#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "embopt/backend.hpp"
#include "embopt/image.hpp"

namespace embopt {

struct MockBackendConfig {
  std::vector<std::size_t> shape{4, 64};
  /// Correlation between the encoded prompt embedding and the hidden target.
  double target_correlation = 0.3;
};

/// Deterministic stand-in for the generate-and-score service.
///
/// For a prompt with h = fnv1a64(prompt), a SplitMix64/Box-Muller stream seeded
/// with h yields d normals e (the encoding) followed by d normals n, and the
/// hidden target is z* = rho * e + sqrt(1 - rho^2) * n. Scores follow the
/// synthetic formulae against z*. The returned image depends only on h and the
/// rounded scores, so it changes whenever the scores move noticeably.
class MockBackend final : public Backend {
 public:
  explicit MockBackend(MockBackendConfig config = {});

  HealthResponse health() override;
  EmbeddingVector encode_prompt(const std::string& prompt) override;
  ScoreResponse generate_and_score(const GenerationRequest& request) override;

  std::size_t dimension() const noexcept { return dimension_; }
  const MockBackendConfig& config() const noexcept { return config_; }
  /// The hidden optimum for a prompt.
  std::vector<double> target(const std::string& prompt) const;

 private:
  MockBackendConfig config_;
  std::size_t dimension_;
};

/// RGB image derived from the prompt hash and scores (see MockBackend).
ImageBuffer mock_image(std::uint64_t prompt_hash, double aesthetic, double clip, int width, int height);

/// Stable id of a request: 16 hex digits of FNV-1a over prompt, embedding bytes, and seed.
std::string mock_image_id(const GenerationRequest& request);

}  // namespace embopt
