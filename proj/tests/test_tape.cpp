#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <functional>

#include "doctest.h"
#include "lieaug/tape.hpp"
#include "lieaug/rng.hpp"
#include "testutil.hpp"

using namespace lieaug;
using test::gradcheck_rel_err;
using test::random_tensor;

namespace {

// Finite-difference check of d(scalar loss)/d(leaf) for a unary builder.
void check_unary(const std::function<NodeId(Tape&, NodeId)>& build,
                 const Tensor& x0, double tol = 1e-6) {
  Tape tape;
  const NodeId x = tape.leaf(x0, true);
  const NodeId loss = build(tape, x);
  tape.backward(loss);
  const std::vector<double> analytic = tape.grad(x).data;
  auto f = [&](const std::vector<double>& p) {
    Tensor xx = x0;
    xx.data = p;
    Tape t;
    const NodeId xi = t.leaf(xx, true);
    return t.value(build(t, xi)).data[0];
  };
  CHECK(gradcheck_rel_err(f, x0.data, analytic) <= tol);
}

}  // namespace

TEST_CASE("elementwise and reduction op gradients") {
  Rng rng(21);
  Tensor x = random_tensor({3, 4}, rng);
  // keep relu inputs away from the kink
  for (double& v : x.data) v += (v >= 0 ? 0.3 : -0.3);

  check_unary([](Tape& t, NodeId a) { return t.sum(t.square(a)); }, x);
  check_unary([](Tape& t, NodeId a) { return t.mean(t.square(a)); }, x);
  check_unary([](Tape& t, NodeId a) { return t.sum(t.relu(a)); }, x);
  check_unary([](Tape& t, NodeId a) { return t.sum(t.square(t.tanh_act(a))); },
              x);
  check_unary([](Tape& t, NodeId a) { return t.sum(t.smooth_abs(a, 1e-3)); },
              x);
  check_unary([](Tape& t, NodeId a) { return t.sum(t.scale(a, -2.5)); }, x);
}

TEST_CASE("binary op gradients") {
  Rng rng(22);
  Tensor a0 = random_tensor({3, 4}, rng);
  Tensor b0 = random_tensor({4, 2}, rng);
  Tensor c0 = random_tensor({3, 4}, rng);
  Tensor bias0 = random_tensor({4}, rng);

  SUBCASE("matmul both sides") {
    Tape tape;
    const NodeId a = tape.leaf(a0, true);
    const NodeId b = tape.leaf(b0, true);
    const NodeId loss = tape.sum(tape.square(tape.matmul(a, b)));
    tape.backward(loss);
    auto fa = [&](const std::vector<double>& p) {
      Tensor aa = a0;
      aa.data = p;
      Tape t;
      return t.value(
                  t.sum(t.square(t.matmul(t.leaf(aa, true), t.leaf(b0)))))
          .data[0];
    };
    auto fb = [&](const std::vector<double>& p) {
      Tensor bb = b0;
      bb.data = p;
      Tape t;
      return t.value(
                  t.sum(t.square(t.matmul(t.leaf(a0), t.leaf(bb, true)))))
          .data[0];
    };
    CHECK(gradcheck_rel_err(fa, a0.data, tape.grad(a).data) <= 1e-6);
    CHECK(gradcheck_rel_err(fb, b0.data, tape.grad(b).data) <= 1e-6);
  }

  SUBCASE("add sub add_bias") {
    check_unary(
        [&](Tape& t, NodeId x) {
          return t.sum(t.square(t.add(x, t.leaf(c0))));
        },
        a0);
    check_unary(
        [&](Tape& t, NodeId x) {
          return t.sum(t.square(t.sub(t.leaf(c0), x)));
        },
        a0);
    check_unary(
        [&](Tape& t, NodeId x) {
          return t.sum(t.square(t.add_bias(t.leaf(a0), x)));
        },
        bias0);
  }
}

TEST_CASE("cosine similarity gradients and zero-norm convention") {
  Rng rng(23);
  Tensor u0 = random_tensor({3, 3}, rng);
  Tensor v0 = random_tensor({3, 3}, rng);
  check_unary(
      [&](Tape& t, NodeId x) {
        return t.square(t.cosine_similarity(x, t.leaf(v0)));
      },
      u0);

  Tape tape;
  const NodeId z = tape.leaf(Tensor::zeros(3, 3), true);
  const NodeId v = tape.leaf(v0);
  const NodeId c = tape.cosine_similarity(z, v);
  CHECK(tape.value(c).data[0] == 0.0);
  tape.backward(c);
  for (double g : tape.grad(z).data) CHECK(g == 0.0);
}

TEST_CASE("rowwise |cos| mean gradient") {
  Rng rng(24);
  Tensor x0 = random_tensor({4, 6}, rng);
  Tensor y0 = random_tensor({4, 6}, rng);
  check_unary(
      [&](Tape& t, NodeId x) {
        return t.rowwise_abs_cos_mean(x, t.leaf(y0));
      },
      x0);
  check_unary(
      [&](Tape& t, NodeId y) {
        return t.rowwise_abs_cos_mean(t.leaf(x0), y);
      },
      y0);
}

TEST_CASE("expm and block_act gradients") {
  Rng rng(25);
  Tensor a0 = random_tensor({4, 4}, rng, -0.4, 0.4);
  Tensor x0 = random_tensor({3, 8}, rng);  // two 4-blocks
  check_unary([](Tape& t, NodeId a) { return t.sum(t.square(t.expm(a))); },
              a0, 2e-6);
  check_unary(
      [&](Tape& t, NodeId a) {
        return t.sum(t.square(t.block_act(t.expm(a), t.leaf(x0))));
      },
      a0, 2e-6);
  check_unary(
      [&](Tape& t, NodeId x) {
        return t.sum(t.square(t.block_act(t.expm(t.leaf(a0)), x)));
      },
      x0);
}

TEST_CASE("frob_normalize value and gradient") {
  Rng rng(27);
  Tensor a0 = random_tensor({3, 3}, rng, -1.0, 1.0);
  Tape tape;
  const NodeId a = tape.leaf(a0, true);
  const NodeId out = tape.frob_normalize(a, 2.5);
  CHECK(frobenius_norm(tape.value(out)) == doctest::Approx(2.5).epsilon(1e-12));
  Tensor target = random_tensor({3, 3}, rng);
  check_unary(
      [&](Tape& t, NodeId x) {
        return t.sum(
            t.square(t.sub(t.frob_normalize(x, 2.5), t.leaf(target))));
      },
      a0, 2e-6);
  // a scale-invariant downstream loss has zero gradient through it
  Tape t2;
  const NodeId b = t2.leaf(a0, true);
  const NodeId loss = t2.sum(t2.square(t2.frob_normalize(b, 1.0)));
  t2.backward(loss);
  for (double v : t2.grad(b).data) CHECK(std::abs(v) <= 1e-12);

  Tape t3;
  const NodeId z = t3.leaf(Tensor::zeros(2, 2), true);
  CHECK_THROWS_AS(t3.frob_normalize(z, 1.0), ContractError);
}

TEST_CASE("per-row stacked group ops match the single-element path") {
  Rng rng(26);
  const std::size_t n = 3, d = 4;
  Tensor gen0 = random_tensor({d, d}, rng, -0.4, 0.4);
  Tensor x0 = random_tensor({n, 2 * d}, rng);  // two 4-blocks per row
  const std::vector<double> w = {0.7, -1.3, 0.2};

  // forward agreement with per-row expm + block_act
  Tape fwd;
  const NodeId gleaf = fwd.leaf(gen0);
  const NodeId stack = fwd.stack_scale(gleaf, w);
  const NodeId gstack = fwd.expm_blocks(stack);
  const NodeId y = fwd.block_act_rows(gstack, fwd.leaf(x0));
  for (std::size_t i = 0; i < n; ++i) {
    Tape one;
    Tensor scaled = gen0;
    for (double& v : scaled.data) v *= w[i];
    Tensor xi({1, 2 * d});
    for (std::size_t j = 0; j < 2 * d; ++j) xi.data[j] = x0.at(i, j);
    const NodeId yi =
        one.block_act(one.expm(one.leaf(scaled)), one.leaf(xi));
    for (std::size_t j = 0; j < 2 * d; ++j)
      CHECK(fwd.value(y).at(i, j) ==
            doctest::Approx(one.value(yi).data[j]).epsilon(1e-12));
  }

  // gradients through the full stacked chain
  check_unary(
      [&](Tape& t, NodeId g) {
        return t.sum(t.square(t.block_act_rows(
            t.expm_blocks(t.stack_scale(g, w)), t.leaf(x0))));
      },
      gen0, 2e-6);
  check_unary(
      [&](Tape& t, NodeId x) {
        return t.sum(t.square(t.block_act_rows(
            t.expm_blocks(t.stack_scale(t.leaf(gen0), w)), x)));
      },
      x0);
  // two generators combined through add
  Tensor gen1 = random_tensor({d, d}, rng, -0.3, 0.3);
  const std::vector<double> w1 = {-0.5, 0.9, 1.1};
  check_unary(
      [&](Tape& t, NodeId g) {
        const NodeId a = t.add(t.stack_scale(g, w),
                               t.stack_scale(t.leaf(gen1), w1));
        return t.sum(t.square(t.block_act_rows(t.expm_blocks(a), t.leaf(x0))));
      },
      gen0, 2e-6);
}

TEST_CASE("backward requires a scalar") {
  Tape tape;
  const NodeId x = tape.leaf(Tensor::mat(2, 2, {1, 2, 3, 4}), true);
  const NodeId y = tape.square(x);
  CHECK_THROWS_AS(tape.backward(y), ContractError);
}

TEST_CASE("gradient accumulates over reuse") {
  // loss = sum(x * x) built as sum(square) plus sum(x) twice
  Tensor x0 = Tensor::mat(1, 2, {2.0, -3.0});
  Tape tape;
  const NodeId x = tape.leaf(x0, true);
  const NodeId loss = tape.add(tape.sum(tape.square(x)),
                               tape.add(tape.sum(x), tape.sum(x)));
  tape.backward(loss);
  CHECK(tape.grad(x).data[0] == doctest::Approx(2 * 2.0 + 2.0));
  CHECK(tape.grad(x).data[1] == doctest::Approx(2 * -3.0 + 2.0));
}
