#pragma once

namespace embopt {

/// Raw scorer output for one generated image.
/// Aesthetic is nominally in [1,10] and clip in [-1,1]; neither range is enforced.
struct MetricScores {
  double aesthetic = 0.0;
  double clip = 0.0;
  double eval_wall_time = 0.0;

  bool operator==(const MetricScores&) const = default;
};

/// Weights (a, b) and normalization divisors for the scalarized fitness.
struct FitnessConfig {
  double a = 0.5;
  double b = 0.5;
  double aesthetic_divisor = 10.0;
  double clip_divisor = 0.5;

  /// Throws ValidationError on negative weights, a+b == 0, or non-positive divisors.
  void validate() const;

  bool operator==(const FitnessConfig&) const = default;
};

}  // namespace embopt
