#include "lieaug/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace lieaug {

Tensor::Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  data.assign(n, 0.0);
}

Tensor Tensor::scalar(double v) {
  Tensor t;
  t.data = {v};
  return t;
}

Tensor Tensor::zeros(std::size_t rows, std::size_t cols) {
  return Tensor({rows, cols});
}

Tensor Tensor::zeros_like(const Tensor& t) {
  Tensor z;
  z.shape = t.shape;
  z.data.assign(t.data.size(), 0.0);
  return z;
}

Tensor Tensor::vec(std::initializer_list<double> v) {
  Tensor t;
  t.shape = {v.size()};
  t.data.assign(v.begin(), v.end());
  return t;
}

Tensor Tensor::mat(std::size_t rows, std::size_t cols,
                   std::initializer_list<double> v) {
  if (v.size() != rows * cols) throw ShapeError("mat: wrong literal size");
  Tensor t;
  t.shape = {rows, cols};
  t.data.assign(v.begin(), v.end());
  return t;
}

Tensor Tensor::identity(std::size_t d) {
  Tensor t({d, d});
  for (std::size_t i = 0; i < d; ++i) t.data[i * d + i] = 1.0;
  return t;
}

std::size_t Tensor::rows() const {
  if (shape.size() == 2) return shape[0];
  if (shape.size() == 1) return shape[0];
  return 1;
}

std::size_t Tensor::cols() const {
  if (shape.size() == 2) return shape[1];
  return 1;
}

double& Tensor::at(std::size_t i, std::size_t j) {
  if (i >= rows() || j >= cols())
    throw ShapeError("at(" + std::to_string(i) + "," + std::to_string(j) +
                     "): out of range for " + shape_str(*this));
  return data[i * cols() + j];
}

double Tensor::at(std::size_t i, std::size_t j) const {
  if (i >= rows() || j >= cols())
    throw ShapeError("at(" + std::to_string(i) + "," + std::to_string(j) +
                     "): out of range for " + shape_str(*this));
  return data[i * cols() + j];
}

bool Tensor::all_finite() const {
  for (double v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

std::string shape_str(const Tensor& t) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < t.shape.size(); ++i)
    os << (i ? "," : "") << t.shape[i];
  os << "]";
  return os.str();
}

double frobenius_norm(const Tensor& t) {
  double s = 0;
  for (double v : t.data) s += v * v;
  return std::sqrt(s);
}

double dot_flat(const Tensor& a, const Tensor& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * b.data[i];
  return s;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    m = std::max(m, std::fabs(a.data[i] - b.data[i]));
  return m;
}

}  // namespace lieaug
