#pragma once

#include <vector>

#include "lieaug/tape.hpp"

namespace lieaug {

// Smoothing width for the |z| ~ sqrt(z^2 + tau^2) surrogate used wherever a
// loss term contains an l1 norm or absolute value.
constexpr double kSmoothTau = 1e-8;

struct LossWeights {
  double alpha = 1.0;
  double beta = 0.0;
  double lambda = 0.0;
  double nu = 0.0;
  double eta = 0.0;
  int k_augment = 0;  // augmentations per sample; 0 disables beta/lambda terms

  void validate() const;
};

struct LossBreakdown {
  double emp = 0, equiv = 0, areg = 0, bsreg = 0, bcreg = 0, total = 0;
};

// Mean over batch rows of the squared l2 residual.
NodeId loss_emp(Tape& tape, NodeId yhat, NodeId y);

// One sampled-transformation term of the equivariance loss: smoothed l1
// deviation between predictions on a transformed batch and the transformed
// targets, averaged over the batch. The caller averages the K terms.
NodeId equiv_term(Tape& tape, NodeId pred_aug, NodeId y_aug);

// One sampled-transformation term of the augmentation regularizer: mean
// |cos| similarity between each input row and its transformed variant.
NodeId areg_term(Tape& tape, NodeId x, NodeId x_aug);

// Smoothed entrywise l1 norm summed over all generators.
NodeId reg_bsreg(Tape& tape, const std::vector<NodeId>& gen_leaves);

// Sum over generator pairs of |cos| similarity between flattened matrices.
NodeId reg_bcreg(Tape& tape, const std::vector<NodeId>& gen_leaves);

struct LossNodes {
  NodeId emp = -1, equiv = -1, areg = -1, bsreg = -1, bcreg = -1, total = -1;
};

// Weighted sum of the present terms; fills nodes.total and returns it.
NodeId loss_total(Tape& tape, LossNodes& nodes, const LossWeights& weights);

LossBreakdown read_breakdown(const Tape& tape, const LossNodes& nodes,
                             const LossWeights& weights);

// Tape-free MSE for evaluation.
double mse(const Tensor& yhat, const Tensor& y);

}  // namespace lieaug
