#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "embopt/embedding.hpp"

namespace embopt {

struct GenerationRequest {
  std::string prompt;
  EmbeddingVector embedding;
  std::uint64_t seed = 0;
  int inference_steps = 1;
  double guidance_scale = 0.0;
  int width = 512;
  int height = 512;
  bool return_image = false;

  /// Throws ValidationError on empty prompt, steps < 1, negative guidance, or non-positive size.
  void validate() const;
  bool operator==(const GenerationRequest&) const = default;
};

struct ScoreResponse {
  double aesthetic = 0.0;
  double clip = 0.0;
  std::string image_id;
  std::optional<std::vector<std::uint8_t>> image_png;

  bool operator==(const ScoreResponse&) const = default;
};

struct HealthResponse {
  std::string status;
  std::string backend;  // "mock" or "real"
  std::vector<std::size_t> embedding_shape;

  bool operator==(const HealthResponse&) const = default;
};

/// The generate-and-score service as seen by the engine.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual HealthResponse health() = 0;
  virtual EmbeddingVector encode_prompt(const std::string& prompt) = 0;
  virtual ScoreResponse generate_and_score(const GenerationRequest& request) = 0;
};

}  // namespace embopt
