#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace embopt {

/// Flat prompt embedding with its shape carried alongside.
///
/// Optimizers only ever see `data`; `shape` is kept so that the backend can
/// reassemble the tensor (e.g. a token sequence plus a pooled vector packed
/// into one row-major buffer).
class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  /// Throws ValidationError if product(shape) != data.size(), any extent is
  /// zero, or any entry is non-finite.
  EmbeddingVector(std::vector<double> data, std::vector<std::size_t> shape);
  /// One-dimensional embedding of shape {data.size()}.
  explicit EmbeddingVector(std::vector<double> data);

  std::size_t size() const noexcept { return data_.size(); }
  const std::vector<double>& data() const noexcept { return data_; }
  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::span<const double> view() const noexcept { return data_; }

  /// Same shape, new values. Validates finiteness and length.
  EmbeddingVector with_data(std::vector<double> data) const;

  bool operator==(const EmbeddingVector&) const = default;

 private:
  std::vector<double> data_;
  std::vector<std::size_t> shape_;
};

/// Nested tensor as delivered by a backend: a shape and row-major values.
struct ShapedTensor {
  std::vector<std::size_t> shape;
  std::vector<double> values;
};

std::size_t shape_product(std::span<const std::size_t> shape);

EmbeddingVector flatten(const ShapedTensor& tensor);
ShapedTensor unflatten(const EmbeddingVector& embedding);

/// Throws ValidationError if any value is NaN or infinite.
void require_finite(std::span<const double> values, const char* what);

}  // namespace embopt
