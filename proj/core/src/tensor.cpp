#include "pgig/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "pgig/error.hpp"

namespace pgig {

namespace {

std::size_t element_count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": shapes " + shape_string(a.shape()) + " and " +
                         shape_string(b.shape()) + " differ");
  }
}

template <typename Op>
Tensor elementwise(const Tensor& a, const Tensor& b, const char* name, Op op) {
  require_same_shape(a, b, name);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = op(a[i], b[i]);
  return Tensor(a.shape(), std::move(out));
}

std::vector<double> sorted_copy(const Tensor& t) {
  std::vector<double> v(t.values().begin(), t.values().end());
  std::sort(v.begin(), v.end());
  return v;
}

struct Moments {
  double mean = 0.0;
  double m2 = 0.0;
};

Moments welford(const std::vector<double>& values) {
  Moments m;
  std::size_t n = 0;
  for (double v : values) {
    ++n;
    const double delta = v - m.mean;
    m.mean += delta / static_cast<double>(n);
    m.m2 += delta * (v - m.mean);
  }
  return m;
}

}  // namespace

std::string shape_string(const Shape& shape) {
  std::string out = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(shape[i]);
  }
  return out + ")";
}

void require_finite(std::span<const double> values, const std::string& what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw NumericError(what + ": non-finite value at index " + std::to_string(i));
    }
  }
}

Tensor::Tensor() : shape_{0} {}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  if (shape_.empty() || shape_.size() > 2) {
    throw DimensionError("tensor rank must be 1 or 2, got shape " + shape_string(shape_));
  }
  if (element_count(shape_) != data_.size()) {
    throw DimensionError("shape " + shape_string(shape_) + " needs " +
                         std::to_string(element_count(shape_)) + " values, got " +
                         std::to_string(data_.size()));
  }
  require_finite(data_, "tensor");
}

Tensor Tensor::vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

Tensor Tensor::zeros(Shape shape) { return filled(std::move(shape), 0.0); }

Tensor Tensor::filled(Shape shape, double value) {
  const std::size_t n = element_count(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::identity(std::size_t n) {
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  return matrix(n, n, std::move(v));
}

std::size_t Tensor::rows() const {
  if (rank() != 2) throw DimensionError("rows() needs a rank-2 tensor, got " + shape_string(shape_));
  return shape_[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) throw DimensionError("cols() needs a rank-2 tensor, got " + shape_string(shape_));
  return shape_[1];
}

double Tensor::at(std::size_t row, std::size_t col) const { return data_[row * cols() + col]; }

std::span<const double> Tensor::row(std::size_t r) const {
  const std::size_t c = cols();
  return std::span<const double>(data_).subspan(r * c, c);
}

Tensor matvec(const Tensor& w, const Tensor& x) {
  if (w.rank() != 2 || x.rank() != 1 || w.cols() != x.size()) {
    throw DimensionError("matvec: cannot multiply " + shape_string(w.shape()) + " by " +
                         shape_string(x.shape()));
  }
  std::vector<double> out(w.rows(), 0.0);
  for (std::size_t j = 0; j < out.size(); ++j) {
    const auto row = w.row(j);
    double acc = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) acc += row[i] * x[i];
    out[j] = acc;
  }
  return Tensor::vector(std::move(out));
}

Tensor matvec_transposed(const Tensor& w, const Tensor& y) {
  if (w.rank() != 2 || y.rank() != 1 || w.rows() != y.size()) {
    throw DimensionError("matvec_transposed: cannot multiply transpose of " +
                         shape_string(w.shape()) + " by " + shape_string(y.shape()));
  }
  std::vector<double> out(w.cols(), 0.0);
  for (std::size_t j = 0; j < w.rows(); ++j) {
    const auto row = w.row(j);
    for (std::size_t i = 0; i < row.size(); ++i) out[i] += row[i] * y[j];
  }
  return Tensor::vector(std::move(out));
}

Tensor operator+(const Tensor& a, const Tensor& b) {
  return elementwise(a, b, "add", [](double u, double v) { return u + v; });
}

Tensor operator-(const Tensor& a, const Tensor& b) {
  return elementwise(a, b, "subtract", [](double u, double v) { return u - v; });
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  return elementwise(a, b, "hadamard", [](double u, double v) { return u * v; });
}

Tensor scale(const Tensor& a, double factor) {
  std::vector<double> out(a.values().begin(), a.values().end());
  for (double& v : out) v *= factor;
  return Tensor(a.shape(), std::move(out));
}

double dot(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size()) {
    throw DimensionError("dot: shapes " + shape_string(a.shape()) + " and " +
                         shape_string(b.shape()) + " differ");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double sum(const Tensor& t) {
  double acc = 0.0;
  for (double v : sorted_copy(t)) acc += v;
  if (!std::isfinite(acc)) throw NumericError("sum overflowed");
  return acc;
}

double mean(const Tensor& t) {
  if (t.size() == 0) throw ArgumentError("mean of an empty tensor");
  return welford(sorted_copy(t)).mean;
}

double variance(const Tensor& t) {
  if (t.size() == 0) throw ArgumentError("variance of an empty tensor");
  const double v = welford(sorted_copy(t)).m2 / static_cast<double>(t.size());
  if (!std::isfinite(v)) throw NumericError("variance overflowed");
  return v;
}

double max_abs(const Tensor& t) {
  double m = 0.0;
  for (double v : t.values()) m = std::max(m, std::abs(v));
  return m;
}

std::size_t argmax(const Tensor& t) {
  if (t.size() == 0) throw ArgumentError("argmax of an empty tensor");
  const auto v = t.values();
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace pgig
