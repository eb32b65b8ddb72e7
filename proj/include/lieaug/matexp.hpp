#pragma once

#include "lieaug/tensor.hpp"

namespace lieaug {

// Matrix exponential by scaling-and-squaring with a degree-13 Pade
// approximant, plus its Frechet derivative and the adjoint rule used by the
// tape to backpropagate through exp(A).

Tensor expm(const Tensor& a);

struct FrechetResult {
  Tensor exp_a;
  Tensor deriv;  // d/dt exp(a + t e) at t = 0
};

// Computed through the block identity
//   exp([[A, E], [0, A]]) = [[exp A, D], [0, exp A]].
FrechetResult expm_frechet(const Tensor& a, const Tensor& e);

// Gradient of a scalar loss w.r.t. A given the upstream gradient G w.r.t.
// exp(A); equals the Frechet derivative of exp at A^T applied to G.
Tensor expm_adjoint(const Tensor& a, const Tensor& g);

}  // namespace lieaug
