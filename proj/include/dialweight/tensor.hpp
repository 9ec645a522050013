#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace dialweight {

// Dense row-major tensor of doubles. Rank 1 and rank 2 are what the layers
// use; higher ranks are storable (checkpoints) but have no accessors.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  static Tensor vector(std::size_t n, double fill = 0.0) { return Tensor({n}, fill); }
  static Tensor matrix(std::size_t rows, std::size_t cols, double fill = 0.0) {
    return Tensor({rows, cols}, fill);
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
  // Trailing extent for matrices; 1 for vectors.
  std::size_t cols() const { return shape_.size() >= 2 ? shape_[1] : 1; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols(), cols()}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols(), cols()}; }

  void fill(double v);
  bool all_finite() const;
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  std::string shape_string() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

// out += M * x  (M is rows x cols, x has cols entries, out has rows entries)
void matvec_add(const Tensor& m, std::span<const double> x, std::span<double> out);
// out += M^T * y
void matvec_t_add(const Tensor& m, std::span<const double> y, std::span<double> out);
// M += y * x^T
void outer_add(std::span<const double> y, std::span<const double> x, Tensor& m);

}  // namespace dialweight
