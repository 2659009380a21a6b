#include "embopt/backend.hpp"

#include <cmath>

#include "embopt/error.hpp"

namespace embopt {

void GenerationRequest::validate() const {
  if (prompt.empty()) throw ValidationError("generation request: empty prompt");
  if (embedding.size() == 0) throw ValidationError("generation request: empty embedding");
  if (inference_steps < 1) throw ValidationError("generation request: steps must be >= 1");
  if (!(guidance_scale >= 0.0) || !std::isfinite(guidance_scale)) {
    throw ValidationError("generation request: guidance must be >= 0");
  }
  if (width <= 0 || height <= 0) throw ValidationError("generation request: image size must be positive");
}

}  // namespace embopt
