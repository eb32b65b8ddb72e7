#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "lieaug/augmenter.hpp"
#include "lieaug/kernels.hpp"
#include "testutil.hpp"

using namespace lieaug;
using test::random_tensor;

TEST_CASE("init_basis masks and d_norm bookkeeping") {
  const Tensor mask = mask_two_body(2);
  GeneratorBasis basis = init_basis(1, 8, mask, 1e-2, 8.0);
  CHECK(basis.count == 1);
  CHECK(basis.dim == 8);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) {
      const double v = basis.gens[0].at(i, j);
      if (mask.at(i, j) == 0.0)
        CHECK(v == 0.0);
      else
        CHECK(v == 1e-2);
    }
}

TEST_CASE("normalize_basis rescales to sqrt(d_norm) and flags collapse") {
  Rng rng(41);
  GeneratorBasis basis = init_basis(2, 4, mask_full(4), 1e-2, 4.0);
  basis.gens[0] = random_tensor({4, 4}, rng);
  basis.gens[1] = Tensor::zeros(4, 4);
  const std::vector<bool> collapsed = normalize_basis(basis);
  CHECK(frobenius_norm(basis.gens[0]) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_FALSE(collapsed[0]);
  CHECK(collapsed[1]);
}

TEST_CASE("two-body mask patterns") {
  // state layout per 2-block: q1 p1 q2 p2
  const Tensor m0 = mask_two_body(0);
  for (double v : m0.data) CHECK(v == 1.0);

  const Tensor m2 = mask_two_body(2);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j)
      CHECK(m2.at(i, j) == ((i / 2 == j / 2) ? 1.0 : 0.0));

  const Tensor m4 = mask_two_body(4);
  auto is_pos = [](std::size_t i) { return i <= 1 || (i >= 4 && i <= 5); };
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j)
      CHECK(m4.at(i, j) == ((is_pos(i) == is_pos(j)) ? 1.0 : 0.0));

  CHECK_THROWS(mask_two_body(3));
}

TEST_CASE("sampler support") {
  Rng rng(42);
  SamplerConfig cont{2.5, SamplerConfig::Kind::kContinuousUniform};
  bool nonzero = false;
  for (int i = 0; i < 2000; ++i) {
    const auto w = sample_coeffs(cont, 2, rng);
    CHECK(w.size() == 2);
    for (double v : w) {
      CHECK(v >= -2.5);
      CHECK(v <= 2.5);
      if (v != 0) nonzero = true;
    }
  }
  CHECK(nonzero);

  SamplerConfig grid{3.0, SamplerConfig::Kind::kIntegerGrid};
  bool hit[7] = {false};
  for (int i = 0; i < 2000; ++i) {
    const auto w = sample_coeffs(grid, 1, rng);
    CHECK(w[0] == std::round(w[0]));
    CHECK(std::abs(w[0]) <= 3.0);
    hit[static_cast<int>(w[0]) + 3] = true;
  }
  for (bool h : hit) CHECK(h);
}

TEST_CASE("group samples expose consistent inverses") {
  Rng rng(43);
  GeneratorBasis basis = init_basis(2, 4, mask_full(4), 1e-2, 4.0);
  basis.gens[0] = random_tensor({4, 4}, rng, -0.4, 0.4);
  basis.gens[1] = random_tensor({4, 4}, rng, -0.4, 0.4);
  SamplerConfig sampler{1.0, SamplerConfig::Kind::kContinuousUniform};
  const GroupSample gs = sample_group(basis, sampler, rng);
  CHECK(max_abs_diff(matmul(gs.g, gs.g_inv), Tensor::identity(4)) <= 1e-12);
}

TEST_CASE("group_from_coeffs matches the tape-side group element") {
  Rng rng(44);
  GeneratorBasis basis = init_basis(2, 3, mask_full(3), 1e-2, 3.0);
  basis.gens[0] = random_tensor({3, 3}, rng, -0.5, 0.5);
  basis.gens[1] = random_tensor({3, 3}, rng, -0.5, 0.5);
  const std::vector<double> w = {0.8, -1.3};
  const GroupSample gs = group_from_coeffs(basis, w);

  Tape tape;
  std::vector<NodeId> leaves = {tape.leaf(basis.gens[0], true),
                                tape.leaf(basis.gens[1], true)};
  const NodeId g = group_element_node(tape, leaves, w);
  CHECK(max_abs_diff(tape.value(g), gs.g) <= 1e-14);
}

TEST_CASE("input and output actions") {
  Rng rng(45);
  GeneratorBasis basis = init_basis(1, 2, mask_full(2), 1e-2, 2.0);
  basis.gens[0] = Tensor::mat(2, 2, {0, -1, 1, 0});
  const GroupSample gs = group_from_coeffs(basis, {0.6});

  ActionSpec inv{2, 2, 1, OutputAction::kInvariant};
  Tensor x = random_tensor({5, 4}, rng);  // two stacked 2-blocks
  const Tensor gx = act_input(gs, x, inv);
  CHECK(max_abs_diff(gx, block_apply(gs.g, x)) == 0.0);

  Tensor y = random_tensor({5, 1}, rng);
  CHECK(max_abs_diff(act_output(gs, y, inv), y) == 0.0);
  CHECK(max_abs_diff(inverse_act_output(gs, y, inv), y) == 0.0);

  ActionSpec equi{2, 1, 1, OutputAction::kEquivariantSameRep};
  Tensor y2 = random_tensor({5, 2}, rng);
  const Tensor gy = act_output(gs, y2, equi);
  CHECK(max_abs_diff(inverse_act_output(gs, gy, equi), y2) <= 1e-12);
}

TEST_CASE("apply_mask zeroes masked entries only") {
  Rng rng(46);
  Tensor m = random_tensor({3, 3}, rng);
  const Tensor orig = m;
  Tensor mask = Tensor::zeros(3, 3);
  mask.at(0, 1) = 1;
  mask.at(2, 2) = 1;
  apply_mask(mask, m);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(m.at(i, j) == (mask.at(i, j) == 1.0 ? orig.at(i, j) : 0.0));
}
