#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace pgig {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);

/// Dense row-major array of doubles, rank 1 or 2.
///
/// Tensors are immutable once built. Construction rejects non-finite values
/// with NumericError, so a NaN can never travel silently between modules.
class Tensor {
 public:
  /// Empty rank-1 tensor.
  Tensor();
  Tensor(Shape shape, std::vector<double> values);

  static Tensor vector(std::vector<double> values);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  static Tensor zeros(Shape shape);
  static Tensor filled(Shape shape, double value);
  static Tensor identity(std::size_t n);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t rows() const;
  std::size_t cols() const;

  double operator[](std::size_t i) const { return data_[i]; }
  double at(std::size_t row, std::size_t col) const;

  std::span<const double> values() const noexcept { return data_; }
  std::span<const double> row(std::size_t r) const;
  const std::vector<double>& to_vector() const noexcept { return data_; }

  bool same_shape(const Tensor& other) const noexcept { return shape_ == other.shape_; }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// w x for w of shape (out, in) and x of length in. Each output sums
/// w[j][i] * x[i] in ascending i.
Tensor matvec(const Tensor& w, const Tensor& x);

/// wᵀ y for w of shape (out, in) and y of length out; ascending j per output.
Tensor matvec_transposed(const Tensor& w, const Tensor& y);

Tensor operator+(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a, const Tensor& b);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
double dot(const Tensor& a, const Tensor& b);

// Reductions visit the values in ascending numeric order, so any permutation
// of a tensor reduces to a bit-identical result. mean and variance use a
// running (Welford) update over that order; variance is the population form.
double sum(const Tensor& t);
double mean(const Tensor& t);
double variance(const Tensor& t);

double max_abs(const Tensor& t);
/// First index of the maximum.
std::size_t argmax(const Tensor& t);

/// Throws NumericError naming `what` if any value is not finite.
void require_finite(std::span<const double> values, const std::string& what);

}  // namespace pgig
