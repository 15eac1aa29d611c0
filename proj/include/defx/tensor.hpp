#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace defx {

// Dense row-major tensor of doubles. Everything in this codebase is rank 1
// or rank 2; scalars are rank-1 tensors of length 1.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;

  static Tensor zeros(const std::vector<int>& shape);
  static Tensor filled(const std::vector<int>& shape, double value);
  static Tensor scalar(double v);
  static Tensor vec(std::initializer_list<double> values);
  static Tensor mat(std::initializer_list<std::initializer_list<double>> rows);

  int rank() const { return static_cast<int>(shape.size()); }
  std::int64_t numel() const;

  int rows() const;  // rank-2 only
  int cols() const;  // rank-2 only
  int len() const;   // rank-1 only

  double& at(int i) { return data[static_cast<std::size_t>(i)]; }
  double at(int i) const { return data[static_cast<std::size_t>(i)]; }
  double& at(int i, int j) {
    return data[static_cast<std::size_t>(i) * static_cast<std::size_t>(shape[1]) + static_cast<std::size_t>(j)];
  }
  double at(int i, int j) const {
    return data[static_cast<std::size_t>(i) * static_cast<std::size_t>(shape[1]) + static_cast<std::size_t>(j)];
  }

  bool same_shape(const Tensor& other) const { return shape == other.shape; }
  bool all_finite() const;
  std::string shape_str() const;  // e.g. "{3,4}"
};

}  // namespace defx
