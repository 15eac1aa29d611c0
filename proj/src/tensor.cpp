#include "defx/tensor.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace defx {

Tensor Tensor::zeros(const std::vector<int>& shape) {
  return filled(shape, 0.0);
}

Tensor Tensor::filled(const std::vector<int>& shape, double value) {
  Tensor t;
  t.shape = shape;
  std::int64_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw std::invalid_argument("Tensor: non-positive dimension");
    n *= d;
  }
  t.data.assign(static_cast<std::size_t>(n), value);
  return t;
}

Tensor Tensor::scalar(double v) {
  Tensor t;
  t.shape = {1};
  t.data = {v};
  return t;
}

Tensor Tensor::vec(std::initializer_list<double> values) {
  Tensor t;
  t.shape = {static_cast<int>(values.size())};
  t.data.assign(values.begin(), values.end());
  return t;
}

Tensor Tensor::mat(std::initializer_list<std::initializer_list<double>> rows) {
  Tensor t;
  const int m = static_cast<int>(rows.size());
  const int n = m > 0 ? static_cast<int>(rows.begin()->size()) : 0;
  t.shape = {m, n};
  t.data.reserve(static_cast<std::size_t>(m) * static_cast<std::size_t>(n));
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != n)
      throw std::invalid_argument("Tensor::mat: ragged rows");
    t.data.insert(t.data.end(), row.begin(), row.end());
  }
  return t;
}

std::int64_t Tensor::numel() const {
  std::int64_t n = 1;
  for (int d : shape) n *= d;
  return n;
}

int Tensor::rows() const {
  if (rank() != 2) throw std::logic_error("Tensor::rows on rank-" + std::to_string(rank()));
  return shape[0];
}

int Tensor::cols() const {
  if (rank() != 2) throw std::logic_error("Tensor::cols on rank-" + std::to_string(rank()));
  return shape[1];
}

int Tensor::len() const {
  if (rank() != 1) throw std::logic_error("Tensor::len on rank-" + std::to_string(rank()));
  return shape[0];
}

bool Tensor::all_finite() const {
  for (double v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string Tensor::shape_str() const {
  std::string s = "{";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  s += "}";
  return s;
}

}  // namespace defx
