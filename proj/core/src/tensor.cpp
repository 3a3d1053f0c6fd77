#include "actir/tensor.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace actir {

std::size_t shape_numel(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

Tensor::Tensor(std::vector<std::size_t> shape_, std::vector<double> values_)
    : shape(std::move(shape_)), values(std::move(values_)) {
  if (shape.empty()) throw std::invalid_argument("Tensor: empty shape");
  for (std::size_t d : shape) {
    if (d == 0) throw std::invalid_argument("Tensor: zero dimension in shape");
  }
  if (shape_numel(shape) != values.size()) {
    throw std::invalid_argument("Tensor: shape " + shape_str() + " does not match " +
                                std::to_string(values.size()) + " values");
  }
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
  std::size_t n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, 0.0));
}

Tensor Tensor::full(std::vector<std::size_t> shape, double v) {
  std::size_t n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, v));
}

Tensor Tensor::from_vector(std::vector<double> v) {
  std::size_t n = v.size();
  return Tensor({n}, std::move(v));
}

Tensor Tensor::from_matrix(std::size_t rows, std::size_t cols, std::vector<double> v) {
  return Tensor({rows, cols}, std::move(v));
}

std::size_t Tensor::numel() const { return values.size(); }

std::size_t Tensor::rows() const {
  if (shape.size() != 2) throw std::logic_error("Tensor::rows on non-matrix " + shape_str());
  return shape[0];
}

std::size_t Tensor::cols() const {
  if (shape.size() != 2) throw std::logic_error("Tensor::cols on non-matrix " + shape_str());
  return shape[1];
}

bool Tensor::all_finite() const {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

bool Tensor::bitwise_equal(const Tensor& other) const {
  if (shape != other.shape) return false;
  return std::memcmp(values.data(), other.values.data(), values.size() * sizeof(double)) == 0;
}

std::string Tensor::shape_str() const {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

}  // namespace actir
