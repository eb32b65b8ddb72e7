#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "lieaug/model.hpp"
#include "lieaug/objective.hpp"
#include "testutil.hpp"

using namespace lieaug;
using test::gradcheck_rel_err;
using test::random_tensor;

TEST_CASE("mlp init bounds and naming") {
  ParamStore params;
  MlpSpec spec{4, 2, {8}, Activation::kRelu};
  Rng rng(51);
  mlp_init_params(params, spec, rng);
  CHECK(params.has("psi.l0.w"));
  CHECK(params.has("psi.l0.b"));
  CHECK(params.has("psi.l1.w"));
  CHECK(params.has("psi.l1.b"));
  const Tensor& w0 = params.at("psi.l0.w");
  CHECK(w0.rows() == 4);
  CHECK(w0.cols() == 8);
  const double bound = std::sqrt(6.0 / 4.0);
  for (double v : w0.data) {
    CHECK(v >= -bound);
    CHECK(v <= bound);
  }
  for (double v : params.at("psi.l0.b").data) CHECK(v == 0.0);
}

TEST_CASE("mlp_forward equals mlp_eval") {
  ParamStore params;
  MlpSpec spec{3, 2, {5, 4}, Activation::kTanh};
  Rng rng(52);
  mlp_init_params(params, spec, rng);
  Tensor x = random_tensor({7, 3}, rng);

  Tape tape;
  auto leaves = params.inject(tape);
  const NodeId out = mlp_forward(tape, leaves, tape.leaf(x), spec);
  CHECK(max_abs_diff(tape.value(out), mlp_eval(params, spec, x)) <= 1e-15);
}

TEST_CASE("mlp gradient check") {
  ParamStore params;
  MlpSpec spec{3, 2, {6}, Activation::kTanh};
  Rng rng(53);
  mlp_init_params(params, spec, rng);
  Tensor x = random_tensor({5, 3}, rng);
  Tensor y = random_tensor({5, 2}, rng);

  auto eval = [&](const ParamStore& p, std::vector<double>* grads) {
    Tape tape;
    auto leaves = p.inject(tape);
    const NodeId loss =
        loss_emp(tape, mlp_forward(tape, leaves, tape.leaf(x), spec),
                 tape.leaf(y));
    const double v = tape.value(loss).data[0];
    if (grads) {
      tape.backward(loss);
      *grads = p.gather_grads(tape, leaves);
    }
    return v;
  };
  std::vector<double> analytic;
  eval(params, &analytic);
  auto f = [&](const std::vector<double>& flat) {
    ParamStore p = params;
    p.set_flat(flat);
    return eval(p, nullptr);
  };
  CHECK(gradcheck_rel_err(f, params.flat(), analytic) <= 1e-6);
}

TEST_CASE("loss_emp equals tape-free mse") {
  Rng rng(54);
  Tensor yhat = random_tensor({6, 3}, rng);
  Tensor y = random_tensor({6, 3}, rng);
  Tape tape;
  const NodeId l = loss_emp(tape, tape.leaf(yhat), tape.leaf(y));
  CHECK(tape.value(l).data[0] == doctest::Approx(mse(yhat, y)).epsilon(1e-14));
}

TEST_CASE("equiv and areg terms match manual formulas") {
  Rng rng(55);
  Tensor pred = random_tensor({4, 2}, rng);
  Tensor target = random_tensor({4, 2}, rng);
  Tape tape;
  const NodeId e = equiv_term(tape, tape.leaf(pred), tape.leaf(target));
  double want = 0;
  for (std::size_t i = 0; i < pred.data.size(); ++i) {
    const double d = pred.data[i] - target.data[i];
    want += std::sqrt(d * d + kSmoothTau * kSmoothTau);
  }
  want /= 4.0;
  CHECK(tape.value(e).data[0] == doctest::Approx(want).epsilon(1e-13));

  Tensor x = random_tensor({4, 3}, rng);
  Tensor gx = random_tensor({4, 3}, rng);
  Tape t2;
  const NodeId a = areg_term(t2, t2.leaf(x), t2.leaf(gx));
  double acc = 0;
  for (std::size_t r = 0; r < 4; ++r) {
    double dot = 0, nx = 0, ng = 0;
    for (std::size_t j = 0; j < 3; ++j) {
      dot += x.at(r, j) * gx.at(r, j);
      nx += x.at(r, j) * x.at(r, j);
      ng += gx.at(r, j) * gx.at(r, j);
    }
    acc += std::abs(dot / std::sqrt(nx * ng));
  }
  CHECK(t2.value(a).data[0] == doctest::Approx(acc / 4.0).epsilon(1e-12));
}

TEST_CASE("basis regularizers") {
  Tensor g1 = Tensor::mat(2, 2, {1, -2, 0, 3});
  Tensor g2 = Tensor::mat(2, 2, {0, 1, 1, 0});
  Tape tape;
  std::vector<NodeId> leaves = {tape.leaf(g1), tape.leaf(g2)};
  const NodeId bs = reg_bsreg(tape, leaves);
  CHECK(tape.value(bs).data[0] == doctest::Approx(6.0 + 2.0).epsilon(1e-6));

  const NodeId bc = reg_bcreg(tape, leaves);
  const double cos12 = -2.0 / (std::sqrt(14.0) * std::sqrt(2.0));
  CHECK(tape.value(bc).data[0] ==
        doctest::Approx(std::abs(cos12)).epsilon(1e-6));

  // single generator: no pairs
  Tape t2;
  std::vector<NodeId> one = {t2.leaf(g1)};
  CHECK(t2.value(reg_bcreg(t2, one)).data[0] == 0.0);
}

TEST_CASE("total loss breakdown is consistent") {
  Rng rng(56);
  Tape tape;
  LossNodes nodes;
  nodes.emp = tape.leaf(Tensor::scalar(0.5));
  nodes.equiv = tape.leaf(Tensor::scalar(0.25));
  nodes.areg = tape.leaf(Tensor::scalar(0.8));
  nodes.bsreg = tape.leaf(Tensor::scalar(1.5));
  nodes.bcreg = tape.leaf(Tensor::scalar(0.1));
  LossWeights w{1.0, 10.0, 1.0, 1e-3, 0.5, 10};
  const NodeId total = loss_total(tape, nodes, w);
  const LossBreakdown b = read_breakdown(tape, nodes, w);
  CHECK(std::abs(b.total - tape.value(total).data[0]) <= 1e-12);
  CHECK(std::abs(b.total - (1.0 * 0.5 + 10.0 * 0.25 + 1.0 * 0.8 +
                            1e-3 * 1.5 + 0.5 * 0.1)) <= 1e-12);
}

TEST_CASE("k_augment = 0 disables the augmentation terms") {
  Tape tape;
  LossNodes nodes;
  nodes.emp = tape.leaf(Tensor::scalar(0.5));
  nodes.equiv = tape.leaf(Tensor::scalar(100.0));
  nodes.areg = tape.leaf(Tensor::scalar(100.0));
  LossWeights w{1.0, 10.0, 1.0, 0.0, 0.0, 0};
  loss_total(tape, nodes, w);
  const LossBreakdown b = read_breakdown(tape, nodes, w);
  CHECK(b.total == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(b.equiv == 0.0);
  CHECK(b.areg == 0.0);
}

TEST_CASE("weights validate") {
  LossWeights w;
  w.beta = -1;
  CHECK_THROWS_AS(w.validate(), ContractError);
}
