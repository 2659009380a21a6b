#include "embopt/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "embopt/error.hpp"

namespace embopt {

void ImageBuffer::validate() const {
  if (width <= 0 || height <= 0) throw ValidationError("image: dimensions must be positive");
  if (channels != 1 && channels != 3) throw ValidationError("image: channels must be 1 or 3");
  if (data.size() != static_cast<std::size_t>(width) * height * channels) {
    throw ValidationError("image: data length does not match width * height * channels");
  }
}

ImageBuffer make_image(int width, int height, int channels, SampleRange range, std::vector<double> data) {
  ImageBuffer img{width, height, channels, range, std::move(data)};
  img.validate();
  return img;
}

namespace {

struct ReadCursor {
  std::span<const std::uint8_t> bytes;
  std::size_t offset = 0;
};

void read_callback(png_structp png, png_bytep out, png_size_t count) {
  auto* cursor = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cursor->offset + count > cursor->bytes.size()) png_error(png, "truncated PNG");
  std::memcpy(out, cursor->bytes.data() + cursor->offset, count);
  cursor->offset += count;
}

void write_callback(png_structp png, png_bytep in, png_size_t count) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), in, in + count);
}

void flush_callback(png_structp) {}

void error_callback(png_structp png, png_const_charp message) {
  *static_cast<std::string*>(png_get_error_ptr(png)) = message;
  png_longjmp(png, 1);
}

void warning_callback(png_structp, png_const_charp) {}

}  // namespace

ImageBuffer decode_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) throw ValidationError("png: bad signature");

  std::string error;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, error_callback, warning_callback);
  if (!png) throw ValidationError("png: cannot allocate decoder");
  png_infop info = png_create_info_struct(png);
  ReadCursor cursor{bytes, 0};
  ImageBuffer img;
  std::vector<png_byte> raw;
  std::vector<png_bytep> rows;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ValidationError("png: " + error);
  }
  png_set_read_fn(png, &cursor, read_callback);
  png_read_info(png, info);

  const auto color = png_get_color_type(png, info);
  if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  img.channels = png_get_channels(png, info);
  img.range = SampleRange::byte;
  const std::size_t stride = png_get_rowbytes(png, info);
  raw.resize(stride * img.height);
  rows.resize(img.height);
  for (int y = 0; y < img.height; ++y) rows[y] = raw.data() + y * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  if (img.channels != 1 && img.channels != 3) throw ValidationError("png: unsupported channel layout");
  img.data.resize(static_cast<std::size_t>(img.width) * img.height * img.channels);
  const std::size_t row_len = static_cast<std::size_t>(img.width) * img.channels;
  for (int y = 0; y < img.height; ++y) {
    for (std::size_t i = 0; i < row_len; ++i) img.data[y * row_len + i] = rows[y][i];
  }
  return img;
}

std::vector<std::uint8_t> encode_png(const ImageBuffer& image) {
  image.validate();
  const double scale = image.range == SampleRange::byte ? 1.0 : 255.0;
  const std::size_t row_len = static_cast<std::size_t>(image.width) * image.channels;
  std::vector<png_byte> raw(row_len * image.height);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    raw[i] = static_cast<png_byte>(std::clamp(std::floor(image.data[i] * scale + 0.5), 0.0, 255.0));
  }

  std::string error;
  std::vector<std::uint8_t> out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, error_callback, warning_callback);
  if (!png) throw ValidationError("png: cannot allocate encoder");
  png_infop info = png_create_info_struct(png);
  std::vector<png_bytep> rows(image.height);
  for (int y = 0; y < image.height; ++y) rows[y] = raw.data() + y * row_len;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw ValidationError("png: " + error);
  }
  png_set_write_fn(png, &out, write_callback, flush_callback);
  png_set_IHDR(png, info, image.width, image.height, 8,
               image.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

ImageBuffer read_png_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("png: cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_png(bytes);
}

void write_png_file(const std::string& path, const ImageBuffer& image) {
  const auto bytes = encode_png(image);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("png: cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace embopt
