#include "lieaug/tape.hpp"

#include <algorithm>
#include <cmath>

#include "lieaug/kernels.hpp"
#include "lieaug/matexp.hpp"

namespace lieaug {

namespace {

void check_same_shape(const Tensor& a, const Tensor& b, const char* who) {
  if (!a.same_shape(b))
    throw ShapeError(std::string(who) + ": shape mismatch " + shape_str(a) +
                     " vs " + shape_str(b));
}

double cos_sim_flat(const Tensor& u, const Tensor& v, double* nu_out,
                    double* nv_out) {
  const double nu = frobenius_norm(u);
  const double nv = frobenius_norm(v);
  if (nu_out) *nu_out = nu;
  if (nv_out) *nv_out = nv;
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return dot_flat(u, v) / (nu * nv);
}

}  // namespace

NodeId Tape::push(Node n) {
  if (n.a >= 0) n.needs_grad = n.needs_grad || nodes_[n.a].needs_grad;
  if (n.b >= 0) n.needs_grad = n.needs_grad || nodes_[n.b].needs_grad;
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::leaf(Tensor value, bool requires_grad) {
  Node n;
  n.op = Op::kLeaf;
  n.val = std::move(value);
  n.needs_grad = requires_grad;
  return push(std::move(n));
}

NodeId Tape::matmul(NodeId a, NodeId b) {
  Node n;
  n.op = Op::kMatmul;
  n.a = a;
  n.b = b;
  n.val = lieaug::matmul(nodes_[a].val, nodes_[b].val);
  return push(std::move(n));
}

NodeId Tape::add(NodeId a, NodeId b) {
  check_same_shape(nodes_[a].val, nodes_[b].val, "add");
  Node n;
  n.op = Op::kAdd;
  n.a = a;
  n.b = b;
  n.val = nodes_[a].val;
  for (std::size_t i = 0; i < n.val.data.size(); ++i)
    n.val.data[i] += nodes_[b].val.data[i];
  return push(std::move(n));
}

NodeId Tape::add_bias(NodeId x, NodeId b) {
  const Tensor& xv = nodes_[x].val;
  const Tensor& bv = nodes_[b].val;
  if (bv.numel() != xv.cols())
    throw ShapeError("add_bias: bias length " + shape_str(bv) +
                     " vs row width " + shape_str(xv));
  Node n;
  n.op = Op::kAddBias;
  n.a = x;
  n.b = b;
  n.val = xv;
  const std::size_t r = xv.rows(), c = xv.cols();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) n.val.data[i * c + j] += bv.data[j];
  return push(std::move(n));
}

NodeId Tape::sub(NodeId a, NodeId b) {
  check_same_shape(nodes_[a].val, nodes_[b].val, "sub");
  Node n;
  n.op = Op::kSub;
  n.a = a;
  n.b = b;
  n.val = nodes_[a].val;
  for (std::size_t i = 0; i < n.val.data.size(); ++i)
    n.val.data[i] -= nodes_[b].val.data[i];
  return push(std::move(n));
}

NodeId Tape::scale(NodeId a, double s) {
  Node n;
  n.op = Op::kScale;
  n.a = a;
  n.aux = s;
  n.val = nodes_[a].val;
  for (double& v : n.val.data) v *= s;
  return push(std::move(n));
}

NodeId Tape::relu(NodeId a) {
  Node n;
  n.op = Op::kRelu;
  n.a = a;
  n.val = nodes_[a].val;
  for (double& v : n.val.data) v = v > 0.0 ? v : 0.0;
  return push(std::move(n));
}

NodeId Tape::tanh_act(NodeId a) {
  Node n;
  n.op = Op::kTanh;
  n.a = a;
  n.val = nodes_[a].val;
  for (double& v : n.val.data) v = std::tanh(v);
  return push(std::move(n));
}

NodeId Tape::square(NodeId a) {
  Node n;
  n.op = Op::kSquare;
  n.a = a;
  n.val = nodes_[a].val;
  for (double& v : n.val.data) v *= v;
  return push(std::move(n));
}

NodeId Tape::smooth_abs(NodeId a, double tau) {
  Node n;
  n.op = Op::kSmoothAbs;
  n.a = a;
  n.aux = tau;
  n.val = nodes_[a].val;
  for (double& v : n.val.data) v = std::sqrt(v * v + tau * tau);
  return push(std::move(n));
}

NodeId Tape::sum(NodeId a) {
  Node n;
  n.op = Op::kSum;
  n.a = a;
  double s = 0;
  for (double v : nodes_[a].val.data) s += v;
  n.val = Tensor::scalar(s);
  return push(std::move(n));
}

NodeId Tape::mean(NodeId a) {
  Node n;
  n.op = Op::kMean;
  n.a = a;
  double s = 0;
  for (double v : nodes_[a].val.data) s += v;
  n.val = Tensor::scalar(s / static_cast<double>(nodes_[a].val.numel()));
  return push(std::move(n));
}

NodeId Tape::cosine_similarity(NodeId u, NodeId v) {
  if (nodes_[u].val.numel() != nodes_[v].val.numel())
    throw ShapeError("cosine_similarity: length mismatch");
  Node n;
  n.op = Op::kCosSim;
  n.a = u;
  n.b = v;
  n.val = Tensor::scalar(cos_sim_flat(nodes_[u].val, nodes_[v].val, nullptr,
                                      nullptr));
  return push(std::move(n));
}

NodeId Tape::rowwise_abs_cos_mean(NodeId x, NodeId y) {
  check_same_shape(nodes_[x].val, nodes_[y].val, "rowwise_abs_cos_mean");
  const Tensor& xv = nodes_[x].val;
  const Tensor& yv = nodes_[y].val;
  const std::size_t r = xv.rows(), c = xv.cols();
  double acc = 0;
  for (std::size_t i = 0; i < r; ++i) {
    double nu = 0, nv = 0, d = 0;
    for (std::size_t j = 0; j < c; ++j) {
      const double a = xv.data[i * c + j], b = yv.data[i * c + j];
      nu += a * a;
      nv += b * b;
      d += a * b;
    }
    if (nu > 0 && nv > 0) acc += std::fabs(d / std::sqrt(nu * nv));
  }
  Node n;
  n.op = Op::kRowAbsCosMean;
  n.a = x;
  n.b = y;
  n.val = Tensor::scalar(acc / static_cast<double>(r));
  return push(std::move(n));
}

NodeId Tape::expm(NodeId a) {
  Node n;
  n.op = Op::kExpm;
  n.a = a;
  n.val = lieaug::expm(nodes_[a].val);
  return push(std::move(n));
}

NodeId Tape::block_act(NodeId g, NodeId x) {
  Node n;
  n.op = Op::kBlockAct;
  n.a = g;
  n.b = x;
  n.val = block_apply(nodes_[g].val, nodes_[x].val);
  return push(std::move(n));
}

NodeId Tape::frob_normalize(NodeId a, double target) {
  const Tensor& av = nodes_[a].val;
  const double norm = frobenius_norm(av);
  if (norm == 0.0)
    throw ContractError("frob_normalize: zero-norm input");
  Node n;
  n.op = Op::kFrobNormalize;
  n.a = a;
  n.aux = target;
  n.val = av;
  const double s = target / norm;
  for (double& v : n.val.data) v *= s;
  return push(std::move(n));
}

NodeId Tape::stack_scale(NodeId gen, std::vector<double> w) {
  const Tensor& gv = nodes_[gen].val;
  if (gv.rank() != 2 || gv.rows() != gv.cols())
    throw ShapeError("stack_scale: generator not square");
  if (w.empty()) throw ContractError("stack_scale: empty coefficient vector");
  const std::size_t d = gv.rows(), nrows = w.size();
  Node n;
  n.op = Op::kStackScale;
  n.a = gen;
  n.val = Tensor({nrows * d, d});
  for (std::size_t i = 0; i < nrows; ++i) {
    const double wi = w[i];
    for (std::size_t e = 0; e < d * d; ++e)
      n.val.data[i * d * d + e] = wi * gv.data[e];
  }
  n.aux_vec = std::move(w);
  return push(std::move(n));
}

NodeId Tape::expm_blocks(NodeId a) {
  const Tensor& av = nodes_[a].val;
  const std::size_t d = av.cols();
  if (av.rank() != 2 || d == 0 || av.rows() % d != 0)
    throw ShapeError("expm_blocks: expected an (n*d) x d stack, got " +
                     shape_str(av));
  const std::size_t nblocks = av.rows() / d;
  Node n;
  n.op = Op::kExpmBlocks;
  n.a = a;
  n.val = Tensor({av.rows(), d});
#ifdef LIEAUG_OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(nblocks); ++i) {
    Tensor blk({d, d});
    std::copy(av.data.begin() + static_cast<std::ptrdiff_t>(i * d * d),
              av.data.begin() + static_cast<std::ptrdiff_t>((i + 1) * d * d),
              blk.data.begin());
    const Tensor e = lieaug::expm(blk);
    std::copy(e.data.begin(), e.data.end(),
              n.val.data.begin() + static_cast<std::ptrdiff_t>(i * d * d));
  }
  return push(std::move(n));
}

NodeId Tape::block_act_rows(NodeId gstack, NodeId x) {
  const Tensor& gv = nodes_[gstack].val;
  const Tensor& xv = nodes_[x].val;
  const std::size_t d = gv.cols();
  if (gv.rank() != 2 || d == 0 || gv.rows() % d != 0)
    throw ShapeError("block_act_rows: bad stack shape " + shape_str(gv));
  const std::size_t nrows = gv.rows() / d;
  if (xv.rows() != nrows || xv.cols() % d != 0)
    throw ShapeError("block_act_rows: stack of " + std::to_string(nrows) +
                     " blocks vs x " + shape_str(xv));
  const std::size_t T = xv.cols() / d;
  Node n;
  n.op = Op::kBlockActRows;
  n.a = gstack;
  n.b = x;
  n.val = Tensor({nrows, xv.cols()});
  for (std::size_t i = 0; i < nrows; ++i) {
    const double* gi = gv.data.data() + i * d * d;
    for (std::size_t t = 0; t < T; ++t) {
      const double* xi = xv.data.data() + i * xv.cols() + t * d;
      double* yi = n.val.data.data() + i * xv.cols() + t * d;
      for (std::size_t k = 0; k < d; ++k) {
        double s = 0;
        for (std::size_t j = 0; j < d; ++j) s += gi[k * d + j] * xi[j];
        yi[k] = s;
      }
    }
  }
  return push(std::move(n));
}

Tensor& Tape::grad_buf(NodeId id) {
  Node& n = nodes_[id];
  if (!n.grad_live) {
    n.grad = Tensor::zeros_like(n.val);
    n.grad_live = true;
  }
  return n.grad;
}

const Tensor& Tape::grad(NodeId id) {
  Node& n = nodes_[id];
  if (!n.grad_live) {
    n.grad = Tensor::zeros_like(n.val);
    n.grad_live = true;
  }
  return n.grad;
}

void Tape::accumulate(NodeId id, const Tensor& g) {
  Tensor& dst = grad_buf(id);
  for (std::size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += g.data[i];
}

void Tape::backward(NodeId loss) {
  if (!nodes_[loss].val.is_scalar())
    throw ContractError("backward: loss node is not scalar");
  for (Node& n : nodes_) n.grad_live = false;
  grad_buf(loss).data[0] = 1.0;
  for (NodeId id = loss; id >= 0; --id) {
    const Node& n = nodes_[id];
    if (!n.needs_grad || !n.grad_live || n.op == Op::kLeaf) continue;
    backward_node(id);
  }
}

void Tape::backward_node(NodeId id) {
  Node& n = nodes_[id];
  const Tensor& g = n.grad;
  const bool need_a = n.a >= 0 && nodes_[n.a].needs_grad;
  const bool need_b = n.b >= 0 && nodes_[n.b].needs_grad;

  switch (n.op) {
    case Op::kMatmul: {
      const Tensor& av = nodes_[n.a].val;
      const Tensor& bv = nodes_[n.b].val;
      const std::size_t p = av.rows(), q = av.cols(), r = bv.cols();
      if (need_a)
        matmul_acc_bt(g.data.data(), bv.data.data(),
                      grad_buf(n.a).data.data(), p, r, q);
      if (need_b)
        matmul_acc_at(av.data.data(), g.data.data(),
                      grad_buf(n.b).data.data(), q, p, r);
      break;
    }
    case Op::kAdd:
      if (need_a) accumulate(n.a, g);
      if (need_b) accumulate(n.b, g);
      break;
    case Op::kAddBias: {
      if (need_a) accumulate(n.a, g);
      if (need_b) {
        Tensor& db = grad_buf(n.b);
        const std::size_t r = g.rows(), c = g.cols();
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < c; ++j) db.data[j] += g.data[i * c + j];
      }
      break;
    }
    case Op::kSub: {
      if (need_a) accumulate(n.a, g);
      if (need_b) {
        Tensor& db = grad_buf(n.b);
        for (std::size_t i = 0; i < g.data.size(); ++i)
          db.data[i] -= g.data[i];
      }
      break;
    }
    case Op::kScale: {
      if (need_a) {
        Tensor& da = grad_buf(n.a);
        for (std::size_t i = 0; i < g.data.size(); ++i)
          da.data[i] += n.aux * g.data[i];
      }
      break;
    }
    case Op::kRelu: {
      if (need_a) {
        const Tensor& xv = nodes_[n.a].val;
        Tensor& da = grad_buf(n.a);
        for (std::size_t i = 0; i < g.data.size(); ++i)
          if (xv.data[i] > 0.0) da.data[i] += g.data[i];
      }
      break;
    }
    case Op::kTanh: {
      if (need_a) {
        Tensor& da = grad_buf(n.a);
        for (std::size_t i = 0; i < g.data.size(); ++i)
          da.data[i] += (1.0 - n.val.data[i] * n.val.data[i]) * g.data[i];
      }
      break;
    }
    case Op::kSquare: {
      if (need_a) {
        const Tensor& xv = nodes_[n.a].val;
        Tensor& da = grad_buf(n.a);
        for (std::size_t i = 0; i < g.data.size(); ++i)
          da.data[i] += 2.0 * xv.data[i] * g.data[i];
      }
      break;
    }
    case Op::kSmoothAbs: {
      if (need_a) {
        const Tensor& xv = nodes_[n.a].val;
        Tensor& da = grad_buf(n.a);
        for (std::size_t i = 0; i < g.data.size(); ++i)
          da.data[i] += xv.data[i] / n.val.data[i] * g.data[i];
      }
      break;
    }
    case Op::kSum: {
      if (need_a) {
        Tensor& da = grad_buf(n.a);
        const double gs = g.data[0];
        for (double& v : da.data) v += gs;
      }
      break;
    }
    case Op::kMean: {
      if (need_a) {
        Tensor& da = grad_buf(n.a);
        const double gs = g.data[0] / static_cast<double>(da.numel());
        for (double& v : da.data) v += gs;
      }
      break;
    }
    case Op::kCosSim: {
      const Tensor& u = nodes_[n.a].val;
      const Tensor& v = nodes_[n.b].val;
      double nu, nv;
      const double c = cos_sim_flat(u, v, &nu, &nv);
      if (nu == 0.0 || nv == 0.0) break;  // degenerate: zero gradient
      const double gs = g.data[0];
      if (need_a) {
        Tensor& da = grad_buf(n.a);
        for (std::size_t i = 0; i < u.data.size(); ++i)
          da.data[i] +=
              gs * (v.data[i] / (nu * nv) - c * u.data[i] / (nu * nu));
      }
      if (need_b) {
        Tensor& db = grad_buf(n.b);
        for (std::size_t i = 0; i < v.data.size(); ++i)
          db.data[i] +=
              gs * (u.data[i] / (nu * nv) - c * v.data[i] / (nv * nv));
      }
      break;
    }
    case Op::kRowAbsCosMean: {
      const Tensor& xv = nodes_[n.a].val;
      const Tensor& yv = nodes_[n.b].val;
      const std::size_t r = xv.rows(), c = xv.cols();
      const double gs = g.data[0] / static_cast<double>(r);
      for (std::size_t i = 0; i < r; ++i) {
        double su = 0, sv = 0, d = 0;
        for (std::size_t j = 0; j < c; ++j) {
          const double a = xv.data[i * c + j], b = yv.data[i * c + j];
          su += a * a;
          sv += b * b;
          d += a * b;
        }
        if (su == 0.0 || sv == 0.0) continue;
        const double nu = std::sqrt(su), nv = std::sqrt(sv);
        const double cs = d / (nu * nv);
        const double sgn = cs >= 0.0 ? 1.0 : -1.0;
        if (need_a) {
          Tensor& da = grad_buf(n.a);
          for (std::size_t j = 0; j < c; ++j)
            da.data[i * c + j] +=
                gs * sgn *
                (yv.data[i * c + j] / (nu * nv) -
                 cs * xv.data[i * c + j] / su);
        }
        if (need_b) {
          Tensor& db = grad_buf(n.b);
          for (std::size_t j = 0; j < c; ++j)
            db.data[i * c + j] +=
                gs * sgn *
                (xv.data[i * c + j] / (nu * nv) -
                 cs * yv.data[i * c + j] / sv);
        }
      }
      break;
    }
    case Op::kExpm: {
      if (need_a) accumulate(n.a, expm_adjoint(nodes_[n.a].val, g));
      break;
    }
    case Op::kBlockAct: {
      const Tensor& gv = nodes_[n.a].val;
      const Tensor& xv = nodes_[n.b].val;
      const std::size_t d = gv.rows();
      const std::size_t nn = xv.cols();
      const std::size_t T = nn / d;
      if (need_a) {
        Tensor& dg = grad_buf(n.a);
        for (std::size_t row = 0; row < xv.rows(); ++row)
          for (std::size_t t = 0; t < T; ++t)
            for (std::size_t i = 0; i < d; ++i) {
              const double gi = g.data[row * nn + t * d + i];
              if (gi == 0.0) continue;
              for (std::size_t j = 0; j < d; ++j)
                dg.data[i * d + j] += gi * xv.data[row * nn + t * d + j];
            }
      }
      if (need_b) {
        Tensor gt({d, d});
        for (std::size_t i = 0; i < d; ++i)
          for (std::size_t j = 0; j < d; ++j)
            gt.data[i * d + j] = gv.data[j * d + i];
        accumulate(n.b, block_apply(gt, g));
      }
      break;
    }
    case Op::kFrobNormalize: {
      if (need_a) {
        const Tensor& av = nodes_[n.a].val;
        const double norm = frobenius_norm(av);
        const double s = n.aux / norm;
        double dot = 0;
        for (std::size_t i = 0; i < g.data.size(); ++i)
          dot += g.data[i] * av.data[i];
        const double radial = dot / (norm * norm);
        Tensor& da = grad_buf(n.a);
        for (std::size_t i = 0; i < g.data.size(); ++i)
          da.data[i] += s * (g.data[i] - radial * av.data[i]);
      }
      break;
    }
    case Op::kStackScale: {
      if (need_a) {
        const std::size_t d = n.val.cols();
        Tensor& dl = grad_buf(n.a);
        for (std::size_t i = 0; i < n.aux_vec.size(); ++i) {
          const double wi = n.aux_vec[i];
          if (wi == 0.0) continue;
          for (std::size_t e = 0; e < d * d; ++e)
            dl.data[e] += wi * g.data[i * d * d + e];
        }
      }
      break;
    }
    case Op::kExpmBlocks: {
      if (need_a) {
        const Tensor& av = nodes_[n.a].val;
        const std::size_t d = av.cols();
        const std::size_t nblocks = av.rows() / d;
        Tensor& da = grad_buf(n.a);
#ifdef LIEAUG_OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(nblocks);
             ++i) {
          Tensor blk({d, d}), gb({d, d});
          std::copy(
              av.data.begin() + static_cast<std::ptrdiff_t>(i * d * d),
              av.data.begin() + static_cast<std::ptrdiff_t>((i + 1) * d * d),
              blk.data.begin());
          std::copy(
              g.data.begin() + static_cast<std::ptrdiff_t>(i * d * d),
              g.data.begin() + static_cast<std::ptrdiff_t>((i + 1) * d * d),
              gb.data.begin());
          const Tensor adj = expm_adjoint(blk, gb);
          for (std::size_t e = 0; e < d * d; ++e)
            da.data[static_cast<std::size_t>(i) * d * d + e] += adj.data[e];
        }
      }
      break;
    }
    case Op::kBlockActRows: {
      const Tensor& gv = nodes_[n.a].val;
      const Tensor& xv = nodes_[n.b].val;
      const std::size_t d = gv.cols();
      const std::size_t nrows = gv.rows() / d;
      const std::size_t T = xv.cols() / d;
      if (need_a) {
        Tensor& dg = grad_buf(n.a);
        for (std::size_t i = 0; i < nrows; ++i)
          for (std::size_t t = 0; t < T; ++t)
            for (std::size_t k = 0; k < d; ++k) {
              const double gk = g.data[i * xv.cols() + t * d + k];
              if (gk == 0.0) continue;
              for (std::size_t j = 0; j < d; ++j)
                dg.data[(i * d + k) * d + j] +=
                    gk * xv.data[i * xv.cols() + t * d + j];
            }
      }
      if (need_b) {
        Tensor& dx = grad_buf(n.b);
        for (std::size_t i = 0; i < nrows; ++i) {
          const double* gi = gv.data.data() + i * d * d;
          for (std::size_t t = 0; t < T; ++t)
            for (std::size_t j = 0; j < d; ++j) {
              double s = 0;
              for (std::size_t k = 0; k < d; ++k)
                s += gi[k * d + j] * g.data[i * xv.cols() + t * d + k];
              dx.data[i * xv.cols() + t * d + j] += s;
            }
        }
      }
      break;
    }
    case Op::kLeaf:
      break;
  }
}

}  // namespace lieaug
