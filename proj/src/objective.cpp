#include "lieaug/objective.hpp"

#include <cmath>

namespace lieaug {

void LossWeights::validate() const {
  if (alpha < 0 || beta < 0 || lambda < 0 || nu < 0 || eta < 0)
    throw ContractError("LossWeights: weights must be nonnegative");
  if (k_augment < 0)
    throw ContractError("LossWeights: k_augment must be nonnegative");
}

NodeId loss_emp(Tape& tape, NodeId yhat, NodeId y) {
  const double rows = static_cast<double>(tape.value(yhat).rows());
  return tape.scale(tape.sum(tape.square(tape.sub(yhat, y))), 1.0 / rows);
}

NodeId equiv_term(Tape& tape, NodeId pred_aug, NodeId y_aug) {
  const double rows = static_cast<double>(tape.value(pred_aug).rows());
  return tape.scale(
      tape.sum(tape.smooth_abs(tape.sub(pred_aug, y_aug), kSmoothTau)),
      1.0 / rows);
}

NodeId areg_term(Tape& tape, NodeId x, NodeId x_aug) {
  return tape.rowwise_abs_cos_mean(x, x_aug);
}

NodeId reg_bsreg(Tape& tape, const std::vector<NodeId>& gen_leaves) {
  NodeId total = -1;
  for (NodeId g : gen_leaves) {
    NodeId term = tape.sum(tape.smooth_abs(g, kSmoothTau));
    total = total < 0 ? term : tape.add(total, term);
  }
  return total;
}

NodeId reg_bcreg(Tape& tape, const std::vector<NodeId>& gen_leaves) {
  NodeId total = -1;
  for (std::size_t i = 0; i < gen_leaves.size(); ++i)
    for (std::size_t j = i + 1; j < gen_leaves.size(); ++j) {
      NodeId term = tape.smooth_abs(
          tape.cosine_similarity(gen_leaves[i], gen_leaves[j]), kSmoothTau);
      total = total < 0 ? term : tape.add(total, term);
    }
  if (total < 0) total = tape.leaf(Tensor::scalar(0.0));
  return total;
}

NodeId loss_total(Tape& tape, LossNodes& nodes, const LossWeights& weights) {
  weights.validate();
  NodeId total = tape.scale(nodes.emp, weights.alpha);
  auto add_term = [&](NodeId term, double w) {
    if (term >= 0 && w != 0.0) total = tape.add(total, tape.scale(term, w));
  };
  if (weights.k_augment > 0) {
    add_term(nodes.equiv, weights.beta);
    add_term(nodes.areg, weights.lambda);
  }
  add_term(nodes.bsreg, weights.nu);
  add_term(nodes.bcreg, weights.eta);
  nodes.total = total;
  return total;
}

LossBreakdown read_breakdown(const Tape& tape, const LossNodes& nodes,
                             const LossWeights& weights) {
  LossBreakdown b;
  auto val = [&](NodeId id) { return id >= 0 ? tape.value(id).data[0] : 0.0; };
  b.emp = val(nodes.emp);
  if (weights.k_augment > 0) {
    b.equiv = val(nodes.equiv);
    b.areg = val(nodes.areg);
  }
  b.bsreg = val(nodes.bsreg);
  b.bcreg = val(nodes.bcreg);
  b.total = weights.alpha * b.emp + weights.beta * b.equiv +
            weights.lambda * b.areg + weights.nu * b.bsreg +
            weights.eta * b.bcreg;
  return b;
}

double mse(const Tensor& yhat, const Tensor& y) {
  if (!yhat.same_shape(y)) throw ShapeError("mse: shape mismatch");
  double s = 0;
  for (std::size_t i = 0; i < yhat.data.size(); ++i) {
    const double d = yhat.data[i] - y.data[i];
    s += d * d;
  }
  return s / static_cast<double>(yhat.rows());
}

}  // namespace lieaug
