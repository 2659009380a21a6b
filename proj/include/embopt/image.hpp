#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace embopt {

enum class SampleRange {
  byte,  // samples in [0, 255]
  unit   // samples in [0, 1]
};

/// Row-major interleaved pixels. Samples are stored as doubles whatever the range,
/// so 8-bit images hold integral values.
struct ImageBuffer {
  int width = 0;
  int height = 0;
  int channels = 1;
  SampleRange range = SampleRange::byte;
  std::vector<double> data;

  /// Throws ValidationError unless dimensions are positive, channels is 1 or 3,
  /// and data.size() == width * height * channels.
  void validate() const;
  double dynamic_range() const { return range == SampleRange::byte ? 255.0 : 1.0; }
};

ImageBuffer make_image(int width, int height, int channels, SampleRange range, std::vector<double> data);

/// Decode an 8-bit grayscale or RGB(A) PNG (alpha is dropped). Throws ValidationError on bad data.
ImageBuffer decode_png(std::span<const std::uint8_t> bytes);
/// Encode an 8-bit image (unit-range images are scaled to bytes).
std::vector<std::uint8_t> encode_png(const ImageBuffer& image);

ImageBuffer read_png_file(const std::string& path);
void write_png_file(const std::string& path, const ImageBuffer& image);

}  // namespace embopt
