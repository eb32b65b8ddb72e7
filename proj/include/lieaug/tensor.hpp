#pragma once

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace lieaug {

// Dense row-major tensor of 64-bit floats. Rank is 0 (scalar), 1 or 2;
// that is all the models here need.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s);
  static Tensor scalar(double v);
  static Tensor zeros(std::size_t rows, std::size_t cols);
  static Tensor zeros_like(const Tensor& t);
  static Tensor vec(std::initializer_list<double> v);
  static Tensor mat(std::size_t rows, std::size_t cols,
                    std::initializer_list<double> v);
  static Tensor identity(std::size_t d);

  std::size_t numel() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }
  std::size_t rows() const;
  std::size_t cols() const;
  bool is_scalar() const { return data.size() == 1 && shape.empty(); }

  double& at(std::size_t i, std::size_t j);
  double at(std::size_t i, std::size_t j) const;

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
  bool all_finite() const;
};

struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string shape_str(const Tensor& t);

double frobenius_norm(const Tensor& t);
double dot_flat(const Tensor& a, const Tensor& b);
double max_abs_diff(const Tensor& a, const Tensor& b);

}  // namespace lieaug
