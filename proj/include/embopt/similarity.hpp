#pragma once

#include <span>

#include "embopt/image.hpp"

namespace embopt {

/// Rec. 601 luma. Byte images are rounded half-up to integers; single-channel input is returned unchanged.
ImageBuffer to_grayscale(const ImageBuffer& image);

struct SsimOptions {
  int window = 11;
  double gaussian_sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
};

/// Mean SSIM over every fully contained Gaussian window (no padding).
/// Both images must be single-channel with equal size and sample range.
double ssim(const ImageBuffer& a, const ImageBuffer& b, const SsimOptions& options = {});

/// 1 - cosine similarity of two equally sized vectors, in [0, 2].
/// Throws DomainError if either has zero norm.
double cosine_distance(std::span<const double> a, std::span<const double> b);
/// Cosine distance over flattened raw pixel values.
double cosine_distance(const ImageBuffer& a, const ImageBuffer& b);

}  // namespace embopt
