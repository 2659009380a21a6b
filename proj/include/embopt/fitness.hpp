#pragma once

#include <span>

#include "embopt/types.hpp"

namespace embopt {

/// Scalarized fitness together with the normalized terms it was built from.
struct FitnessValue {
  double value = 0.0;
  double norm_aesthetic = 0.0;
  double norm_clip = 0.0;
};

/// Cosine similarity <u,v> / (|u||v|), the CLIPScore core.
/// Throws ValidationError on length mismatch or empty input, DomainError on a zero-norm vector.
double clip_score(std::span<const double> image_embedding, std::span<const double> text_embedding);

/// raw / divisor. No clamping. Throws ValidationError if divisor <= 0.
double normalize(double raw, double divisor);

/// a * aesthetic / D_a + b * clip / D_c.
FitnessValue fitness(const MetricScores& scores, const FitnessConfig& cfg);

/// Minimization target for gradient methods: 1 - F.
inline double loss(double fitness_value) { return 1.0 - fitness_value; }

}  // namespace embopt
