#include "embopt/embedding.hpp"

#include <cmath>
#include <string>

#include "embopt/error.hpp"

namespace embopt {

std::size_t shape_product(std::span<const std::size_t> shape) {
  if (shape.empty()) return 0;
  std::size_t n = 1;
  for (auto extent : shape) n *= extent;
  return n;
}

void require_finite(std::span<const double> values, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw ValidationError(std::string(what) + ": non-finite entry at index " + std::to_string(i));
    }
  }
}

EmbeddingVector::EmbeddingVector(std::vector<double> data, std::vector<std::size_t> shape)
    : data_(std::move(data)), shape_(std::move(shape)) {
  const auto n = shape_product(shape_);
  if (n == 0) throw ValidationError("embedding: shape must be non-empty with positive extents");
  if (n != data_.size()) {
    throw ValidationError("embedding: shape product " + std::to_string(n) + " does not match length " +
                          std::to_string(data_.size()));
  }
  require_finite(data_, "embedding");
}

EmbeddingVector::EmbeddingVector(std::vector<double> data) {
  if (data.empty()) throw ValidationError("embedding: shape must be non-empty with positive extents");
  require_finite(data, "embedding");
  shape_ = {data.size()};
  data_ = std::move(data);
}

EmbeddingVector EmbeddingVector::with_data(std::vector<double> data) const {
  return EmbeddingVector(std::move(data), shape_);
}

EmbeddingVector flatten(const ShapedTensor& tensor) {
  return EmbeddingVector(tensor.values, tensor.shape);
}

ShapedTensor unflatten(const EmbeddingVector& embedding) {
  return ShapedTensor{embedding.shape(), embedding.data()};
}

}  // namespace embopt
