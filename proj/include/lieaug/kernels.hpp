#pragma once

#include "lieaug/tensor.hpp"

namespace lieaug {

// Dense kernels. The serial reference implementations in kernels::ref are
// the ground truth for testing; the default entry points may distribute
// rows across OpenMP threads. Both compute each output element with the
// same sequential accumulation order, so results are bitwise identical
// regardless of thread count.

namespace ref {
void matmul(const double* a, const double* b, double* c, std::size_t p,
            std::size_t q, std::size_t r);
void matmul_acc_at(const double* a, const double* b, double* c, std::size_t p,
                   std::size_t q, std::size_t r);   // c += a^T * b, a is q x p
void matmul_acc_bt(const double* a, const double* b, double* c, std::size_t p,
                   std::size_t q, std::size_t r);   // c += a * b^T, b is r x q
}  // namespace ref

void matmul(const double* a, const double* b, double* c, std::size_t p,
            std::size_t q, std::size_t r);
void matmul_acc_at(const double* a, const double* b, double* c, std::size_t p,
                   std::size_t q, std::size_t r);
void matmul_acc_bt(const double* a, const double* b, double* c, std::size_t p,
                   std::size_t q, std::size_t r);

Tensor matmul(const Tensor& a, const Tensor& b);

// Apply g (d x d) to each contiguous d-block of every row of x (rows x T*d):
// out[row, t*d + i] = sum_j g[i,j] * x[row, t*d + j].
Tensor block_apply(const Tensor& g, const Tensor& x);

}  // namespace lieaug
