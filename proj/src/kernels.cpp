#include "lieaug/kernels.hpp"

#include <cstring>

#ifdef LIEAUG_OPENMP
#include <omp.h>
#endif

namespace lieaug {

namespace {

inline void row_kernel(const double* __restrict a, const double* __restrict b,
                       double* __restrict c, std::size_t q, std::size_t r) {
  // c[0..r) = sum_k a[k] * b[k, 0..r); vectorizes over r.
  std::memset(c, 0, r * sizeof(double));
  for (std::size_t k = 0; k < q; ++k) {
    const double aik = a[k];
    const double* bk = b + k * r;
    for (std::size_t j = 0; j < r; ++j) c[j] += aik * bk[j];
  }
}

}  // namespace

namespace ref {

void matmul(const double* a, const double* b, double* c, std::size_t p,
            std::size_t q, std::size_t r) {
  for (std::size_t i = 0; i < p; ++i)
    row_kernel(a + i * q, b, c + i * r, q, r);
}

void matmul_acc_at(const double* a, const double* b, double* c, std::size_t p,
                   std::size_t q, std::size_t r) {
  // c (p x r) += a^T (p x q, stored as q x p) * b (q x r)
  for (std::size_t i = 0; i < p; ++i) {
    double* ci = c + i * r;
    for (std::size_t k = 0; k < q; ++k) {
      const double aki = a[k * p + i];
      const double* bk = b + k * r;
      for (std::size_t j = 0; j < r; ++j) ci[j] += aki * bk[j];
    }
  }
}

void matmul_acc_bt(const double* a, const double* b, double* c, std::size_t p,
                   std::size_t q, std::size_t r) {
  // c (p x r) += a (p x q) * b^T (q x r, b stored as r x q)
  for (std::size_t i = 0; i < p; ++i) {
    const double* ai = a + i * q;
    double* ci = c + i * r;
    for (std::size_t j = 0; j < r; ++j) {
      const double* bj = b + j * q;
      double s = 0;
      for (std::size_t k = 0; k < q; ++k) s += ai[k] * bj[k];
      ci[j] += s;
    }
  }
}

}  // namespace ref

void matmul(const double* a, const double* b, double* c, std::size_t p,
            std::size_t q, std::size_t r) {
#ifdef LIEAUG_OPENMP
  if (p >= 64 && q * r >= 4096) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(p); ++i)
      row_kernel(a + i * q, b, c + i * r, q, r);
    return;
  }
#endif
  ref::matmul(a, b, c, p, q, r);
}

void matmul_acc_at(const double* a, const double* b, double* c, std::size_t p,
                   std::size_t q, std::size_t r) {
  ref::matmul_acc_at(a, b, c, p, q, r);
}

void matmul_acc_bt(const double* a, const double* b, double* c, std::size_t p,
                   std::size_t q, std::size_t r) {
#ifdef LIEAUG_OPENMP
  if (p >= 64 && q * r >= 4096) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(p); ++i) {
      const double* ai = a + i * q;
      double* ci = c + i * r;
      for (std::size_t j = 0; j < r; ++j) {
        const double* bj = b + j * q;
        double s = 0;
        for (std::size_t k = 0; k < q; ++k) s += ai[k] * bj[k];
        ci[j] += s;
      }
    }
    return;
  }
#endif
  ref::matmul_acc_bt(a, b, c, p, q, r);
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.rows())
    throw ShapeError("matmul: incompatible shapes " + shape_str(a) + " x " +
                     shape_str(b));
  Tensor c({a.rows(), b.cols()});
  matmul(a.data.data(), b.data.data(), c.data.data(), a.rows(), a.cols(),
         b.cols());
  return c;
}

Tensor block_apply(const Tensor& g, const Tensor& x) {
  const std::size_t d = g.rows();
  if (g.cols() != d) throw ShapeError("block_apply: g not square");
  const std::size_t n = x.cols();
  if (n % d != 0)
    throw ShapeError("block_apply: width " + std::to_string(n) +
                     " not divisible by block dim " + std::to_string(d));
  const std::size_t T = n / d;
  Tensor out = Tensor::zeros_like(x);
  for (std::size_t row = 0; row < x.rows(); ++row) {
    const double* xr = x.data.data() + row * n;
    double* or_ = out.data.data() + row * n;
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t i = 0; i < d; ++i) {
        double s = 0;
        for (std::size_t j = 0; j < d; ++j) s += g.data[i * d + j] * xr[t * d + j];
        or_[t * d + i] = s;
      }
  }
  return out;
}

}  // namespace lieaug
