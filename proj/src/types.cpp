#include "embopt/types.hpp"

#include <cmath>

#include "embopt/error.hpp"

namespace embopt {

void FitnessConfig::validate() const {
  if (!std::isfinite(a) || !std::isfinite(b) || a < 0.0 || b < 0.0) {
    throw ValidationError("fitness config: weights must be finite and non-negative");
  }
  if (a + b <= 0.0) throw ValidationError("fitness config: a + b must be positive");
  if (!(aesthetic_divisor > 0.0) || !(clip_divisor > 0.0) || !std::isfinite(aesthetic_divisor) ||
      !std::isfinite(clip_divisor)) {
    throw ValidationError("fitness config: normalization divisors must be positive");
  }
}

}  // namespace embopt
