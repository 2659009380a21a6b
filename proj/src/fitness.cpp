#include "embopt/fitness.hpp"

#include <cmath>

#include "embopt/error.hpp"

namespace embopt {

double clip_score(std::span<const double> image_embedding, std::span<const double> text_embedding) {
  if (image_embedding.size() != text_embedding.size()) {
    throw ValidationError("clip_score: length mismatch");
  }
  if (image_embedding.empty()) throw ValidationError("clip_score: empty vectors");
  double dot = 0.0;
  double nu = 0.0;
  double nv = 0.0;
  for (std::size_t i = 0; i < image_embedding.size(); ++i) {
    dot += image_embedding[i] * text_embedding[i];
    nu += image_embedding[i] * image_embedding[i];
    nv += text_embedding[i] * text_embedding[i];
  }
  if (nu == 0.0 || nv == 0.0) throw DomainError("clip_score: zero-norm vector");
  const double s = dot / (std::sqrt(nu) * std::sqrt(nv));
  // rounding can push |s| a hair past 1 for parallel vectors
  return std::fmax(-1.0, std::fmin(1.0, s));
}

double normalize(double raw, double divisor) {
  if (!(divisor > 0.0)) throw ValidationError("normalize: divisor must be positive");
  return raw / divisor;
}

FitnessValue fitness(const MetricScores& scores, const FitnessConfig& cfg) {
  cfg.validate();
  FitnessValue out;
  out.norm_aesthetic = normalize(scores.aesthetic, cfg.aesthetic_divisor);
  out.norm_clip = normalize(scores.clip, cfg.clip_divisor);
  out.value = cfg.a * out.norm_aesthetic + cfg.b * out.norm_clip;
  return out;
}

}  // namespace embopt
