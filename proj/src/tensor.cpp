#include "dialweight/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>

#include "dialweight/error.hpp"

namespace dialweight {

namespace {

std::size_t product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(product(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (product(shape_) != data_.size()) {
    throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_string());
  }
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string Tensor::shape_string() const {
  std::string s = "[";
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape_[i]);
  }
  return s + "]";
}

void matvec_add(const Tensor& m, std::span<const double> x, std::span<double> out) {
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  const double* w = m.values().data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* wr = w + r * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * x[c];
    out[r] += acc;
  }
}

void matvec_t_add(const Tensor& m, std::span<const double> y, std::span<double> out) {
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  const double* w = m.values().data();
  double* o = out.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double yr = y[r];
    if (yr == 0.0) continue;
    const double* wr = w + r * cols;
    for (std::size_t c = 0; c < cols; ++c) o[c] += wr[c] * yr;
  }
}

void outer_add(std::span<const double> y, std::span<const double> x, Tensor& m) {
  const std::size_t cols = m.cols();
  double* w = m.values().data();
  for (std::size_t r = 0; r < y.size(); ++r) {
    const double yr = y[r];
    if (yr == 0.0) continue;
    double* wr = w + r * cols;
    for (std::size_t c = 0; c < cols; ++c) wr[c] += yr * x[c];
  }
}

}  // namespace dialweight
