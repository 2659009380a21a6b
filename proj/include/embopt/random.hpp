#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace embopt {

struct RngSeed {
  std::uint64_t value = 0;
};

/// SplitMix64 stream with Box-Muller normals.
///
/// The generator is deliberately tiny and fully specified so that other
/// implementations of the mock backend can reproduce the exact same draws:
///   uniform  = (next() >> 11) * 2^-53          in [0, 1)
///   normal   = sqrt(-2 ln(1 - u1)) * cos(2 pi u2), then the sin() partner
class Rng {
 public:
  explicit Rng(RngSeed seed) : state_(seed.value) {}

  std::uint64_t next_u64();
  double uniform();
  double normal();
  /// Independent child stream; advances this stream by one draw.
  Rng split();

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// n i.i.d. N(0,1) draws. Throws ValidationError for n == 0.
std::vector<double> standard_normal_draws(Rng& rng, std::size_t n);

/// FNV-1a 64-bit hash over raw bytes.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace embopt
