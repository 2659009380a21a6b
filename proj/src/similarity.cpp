#include "embopt/similarity.hpp"

#include <cmath>
#include <vector>

#include "embopt/error.hpp"
#include "embopt/fitness.hpp"

namespace embopt {

ImageBuffer to_grayscale(const ImageBuffer& image) {
  image.validate();
  if (image.channels == 1) return image;

  ImageBuffer out{image.width, image.height, 1, image.range, {}};
  const std::size_t n = static_cast<std::size_t>(image.width) * image.height;
  out.data.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* px = &image.data[3 * i];
    const double luma = 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
    out.data[i] = image.range == SampleRange::byte ? std::floor(luma + 0.5) : luma;
  }
  return out;
}

namespace {

std::vector<double> gaussian_kernel(int size, double sigma) {
  std::vector<double> k(size);
  const double center = (size - 1) / 2.0;
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    const double x = i - center;
    k[i] = std::exp(-(x * x) / (2.0 * sigma * sigma));
    sum += k[i];
  }
  for (auto& v : k) v /= sum;
  return k;
}

/// Separable "valid" filtering: output is (w - n + 1) x (h - n + 1).
std::vector<double> filter_valid(const std::vector<double>& src, int w, int h, const std::vector<double>& k) {
  const int n = static_cast<int>(k.size());
  const int ow = w - n + 1;
  const int oh = h - n + 1;
  std::vector<double> tmp(static_cast<std::size_t>(ow) * h);
  for (int y = 0; y < h; ++y) {
    const double* row = &src[static_cast<std::size_t>(y) * w];
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += k[i] * row[x + i];
      tmp[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += k[i] * tmp[static_cast<std::size_t>(y + i) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  return out;
}

}  // namespace

double ssim(const ImageBuffer& a, const ImageBuffer& b, const SsimOptions& options) {
  a.validate();
  b.validate();
  if (a.channels != 1 || b.channels != 1) throw ValidationError("ssim: convert images to grayscale first");
  if (a.width != b.width || a.height != b.height) throw ValidationError("ssim: dimension mismatch");
  if (a.range != b.range) throw ValidationError("ssim: sample range mismatch");
  if (a.width < options.window || a.height < options.window) {
    throw ValidationError("ssim: image smaller than the window");
  }

  const int w = a.width;
  const int h = a.height;
  const std::size_t n = a.data.size();
  std::vector<double> aa(n), bb(n), ab(n);
  for (std::size_t i = 0; i < n; ++i) {
    aa[i] = a.data[i] * a.data[i];
    bb[i] = b.data[i] * b.data[i];
    ab[i] = a.data[i] * b.data[i];
  }

  const auto kernel = gaussian_kernel(options.window, options.gaussian_sigma);
  const auto mu_a = filter_valid(a.data, w, h, kernel);
  const auto mu_b = filter_valid(b.data, w, h, kernel);
  const auto e_aa = filter_valid(aa, w, h, kernel);
  const auto e_bb = filter_valid(bb, w, h, kernel);
  const auto e_ab = filter_valid(ab, w, h, kernel);

  const double range = a.dynamic_range();
  const double c1 = (options.k1 * range) * (options.k1 * range);
  const double c2 = (options.k2 * range) * (options.k2 * range);

  double total = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double ma = mu_a[i];
    const double mb = mu_b[i];
    const double var_a = e_aa[i] - ma * ma;
    const double var_b = e_bb[i] - mb * mb;
    const double cov = e_ab[i] - ma * mb;
    const double num = (2.0 * ma * mb + c1) * (2.0 * cov + c2);
    const double den = (ma * ma + mb * mb + c1) * (var_a + var_b + c2);
    total += num / den;
  }
  return total / static_cast<double>(mu_a.size());
}

double cosine_distance(std::span<const double> a, std::span<const double> b) {
  return 1.0 - clip_score(a, b);
}

double cosine_distance(const ImageBuffer& a, const ImageBuffer& b) {
  a.validate();
  b.validate();
  if (a.width != b.width || a.height != b.height || a.channels != b.channels) {
    throw ValidationError("cosine_distance: dimension mismatch");
  }
  return cosine_distance(std::span<const double>(a.data), std::span<const double>(b.data));
}

}  // namespace embopt
