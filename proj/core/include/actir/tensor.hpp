#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace actir {

/// Dense 64-bit float array with a row-major layout. Rank 1 and 2 cover
/// everything in this project; shapes are explicit and never broadcast
/// except for the dedicated bias-add op on the tape.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> values;

  Tensor() = default;
  Tensor(std::vector<std::size_t> shape_, std::vector<double> values_);

  static Tensor zeros(std::vector<std::size_t> shape);
  static Tensor full(std::vector<std::size_t> shape, double v);
  static Tensor from_vector(std::vector<double> v);
  static Tensor from_matrix(std::size_t rows, std::size_t cols, std::vector<double> v);

  std::size_t numel() const;
  bool is_scalar() const { return numel() == 1; }
  bool is_matrix() const { return shape.size() == 2; }

  std::size_t rows() const;
  std::size_t cols() const;

  double& at(std::size_t i, std::size_t j) { return values[i * cols() + j]; }
  double at(std::size_t i, std::size_t j) const { return values[i * cols() + j]; }

  bool same_shape(const Tensor& other) const { return shape == other.shape; }
  bool all_finite() const;
  bool bitwise_equal(const Tensor& other) const;

  std::string shape_str() const;
};

std::size_t shape_numel(const std::vector<std::size_t>& shape);

}  // namespace actir
