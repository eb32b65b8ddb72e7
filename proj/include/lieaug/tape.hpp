#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "lieaug/tensor.hpp"

namespace lieaug {

using NodeId = std::int32_t;

struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

// Reverse-mode autodiff tape over dense tensors. Nodes are appended in
// topological order; backward() walks them once in reverse. One tape per
// thread; a tape is built per forward pass and thrown away.
class Tape {
 public:
  NodeId leaf(Tensor value, bool requires_grad = false);

  NodeId matmul(NodeId a, NodeId b);
  NodeId add(NodeId a, NodeId b);        // same shape
  NodeId add_bias(NodeId x, NodeId b);   // rows of x + bias vector b
  NodeId sub(NodeId a, NodeId b);
  NodeId scale(NodeId a, double s);
  NodeId relu(NodeId a);
  NodeId tanh_act(NodeId a);
  NodeId square(NodeId a);
  NodeId smooth_abs(NodeId a, double tau);  // sqrt(x^2 + tau^2), elementwise
  NodeId sum(NodeId a);                     // scalar
  NodeId mean(NodeId a);                    // scalar
  NodeId cosine_similarity(NodeId u, NodeId v);  // flat tensors -> scalar
  // mean over rows of |cos(x_row, y_row)|; gradient flows to both inputs
  NodeId rowwise_abs_cos_mean(NodeId x, NodeId y);
  NodeId expm(NodeId a);                    // matrix exponential, d <= 64
  // apply g to each d-block of every row of x
  NodeId block_act(NodeId g, NodeId x);
  // rescale to a fixed Frobenius norm: target * a / ||a||_F
  NodeId frob_normalize(NodeId a, double target);
  // n stacked d x d blocks, block i = w[i] * gen; stacks for several
  // generators combine with add
  NodeId stack_scale(NodeId gen, std::vector<double> w);
  // per-block matrix exponential of an (n*d) x d stack
  NodeId expm_blocks(NodeId a);
  // row i of x transformed blockwise by the i-th stacked matrix
  NodeId block_act_rows(NodeId gstack, NodeId x);

  const Tensor& value(NodeId id) const { return nodes_[id].val; }
  // Valid after backward(); zero tensor if the node received no gradient.
  const Tensor& grad(NodeId id);

  void backward(NodeId loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  enum class Op {
    kLeaf, kMatmul, kAdd, kAddBias, kSub, kScale, kRelu, kTanh, kSquare,
    kSmoothAbs, kSum, kMean, kCosSim, kRowAbsCosMean, kExpm, kBlockAct,
    kStackScale, kExpmBlocks, kBlockActRows, kFrobNormalize,
  };

  struct Node {
    Op op;
    NodeId a = -1, b = -1;
    double aux = 0;
    std::vector<double> aux_vec;
    Tensor val;
    Tensor grad;
    bool needs_grad = false;
    bool grad_live = false;
  };

  NodeId push(Node n);
  Tensor& grad_buf(NodeId id);
  void accumulate(NodeId id, const Tensor& g);
  void backward_node(NodeId id);

  std::vector<Node> nodes_;
  Tensor zero_scalar_ = Tensor::scalar(0.0);
};

}  // namespace lieaug
