#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "lieaug/datasets.hpp"
#include "lieaug/kernels.hpp"
#include "lieaug/rng.hpp"

using namespace lieaug;

namespace {

TwoBodyConfig small_two_body() {
  TwoBodyConfig cfg;
  cfg.n_train = 400;
  cfg.n_val = 80;
  cfg.n_test = 120;
  return cfg;
}

}  // namespace

TEST_CASE("two-body energy is conserved along the integrator") {
  const TwoBodyConfig cfg;
  // circular orbit in the COM frame: v = 0.5 / sqrt(r)
  double state[8] = {0.9, 0.0, 0.0, 0.5 / std::sqrt(0.9),
                     -0.9, 0.0, 0.0, -0.5 / std::sqrt(0.9)};
  const double e0 = two_body_energy(state);
  double worst = 0;
  for (int s = 0; s < 400; ++s) {
    two_body_snapshot_step(cfg, state);
    worst = std::max(worst, std::abs(two_body_energy(state) - e0) /
                                std::abs(e0));
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("two-body targets equal the integration oracle") {
  const TwoBodyConfig cfg = small_two_body();
  const Dataset ds = gen_two_body(cfg, 17);
  CHECK(ds.xtr.rows() == 400);
  CHECK(ds.xva.rows() == 80);
  CHECK(ds.xte.rows() == 120);
  CHECK(ds.input_dim == 8);
  CHECK(ds.output_dim == 8);

  Tensor probe({10, 8});
  for (std::size_t i = 0; i < probe.data.size(); ++i)
    probe.data[i] = ds.xte.data[i];
  const Tensor want = two_body_predict(cfg, probe);
  for (std::size_t i = 0; i < probe.data.size(); ++i)
    CHECK(ds.yte.data[i] == doctest::Approx(want.data[i]).epsilon(1e-12));
}

TEST_CASE("two-body truth generator is the planar rotation") {
  const Dataset ds = gen_two_body(small_two_body(), 3);
  REQUIRE(ds.truth_generators.size() == 1);
  const Tensor& g = ds.truth_generators[0];
  for (std::size_t b = 0; b < 4; ++b) {
    CHECK(g.at(2 * b, 2 * b + 1) == -1.0);
    CHECK(g.at(2 * b + 1, 2 * b) == 1.0);
  }
  double off = 0;
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j)
      if (i / 2 != j / 2) off += std::abs(g.at(i, j));
  CHECK(off == 0.0);
}

TEST_CASE("rotating a two-body input rotates its target") {
  // equivariance of the simulator itself: integrate(R x) = R integrate(x)
  const TwoBodyConfig cfg = small_two_body();
  const Dataset ds = gen_two_body(cfg, 23);
  const double th = 0.73, c = std::cos(th), s = std::sin(th);
  Tensor rot = Tensor::zeros(8, 8);
  for (std::size_t b = 0; b < 4; ++b) {
    rot.at(2 * b, 2 * b) = c;
    rot.at(2 * b, 2 * b + 1) = -s;
    rot.at(2 * b + 1, 2 * b) = s;
    rot.at(2 * b + 1, 2 * b + 1) = c;
  }
  Tensor x({4, 8}), y({4, 8});
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    x.data[i] = ds.xtr.data[i];
    y.data[i] = ds.ytr.data[i];
  }
  const Tensor pred_rot = two_body_predict(cfg, block_apply(rot, x));
  CHECK(max_abs_diff(pred_rot, block_apply(rot, y)) <= 1e-9);
}

TEST_CASE("ood split separates quadrants of the first body") {
  TwoBodyConfig cfg = small_two_body();
  cfg.ood = true;
  const Dataset ds = gen_two_body(cfg, 5);
  auto quadrant_ok = [](double qx, double qy, bool train) {
    const bool in_train = (qx < 0 && qy > 0) || (qx > 0 && qy < 0);
    return train ? in_train : !in_train;
  };
  for (std::size_t r = 0; r < ds.xtr.rows(); ++r)
    CHECK(quadrant_ok(ds.xtr.at(r, 0), ds.xtr.at(r, 1), true));
  for (std::size_t r = 0; r < ds.xte.rows(); ++r)
    CHECK(quadrant_ok(ds.xte.at(r, 0), ds.xte.at(r, 1), false));
}

TEST_CASE("multi-step windows stack snapshots") {
  TwoBodyConfig cfg = small_two_body();
  cfg.timesteps_in = 3;
  cfg.timesteps_out = 3;
  const Dataset ds = gen_two_body(cfg, 29);
  CHECK(ds.input_dim == 24);
  CHECK(ds.output_dim == 24);
  CHECK(ds.action.timesteps_in == 3);
  // successive snapshots inside one window obey the integrator
  double state[8];
  for (int i = 0; i < 8; ++i) state[i] = ds.xtr.at(0, static_cast<std::size_t>(i));
  two_body_snapshot_step(cfg, state);
  for (int i = 0; i < 8; ++i)
    CHECK(ds.xtr.at(0, static_cast<std::size_t>(8 + i)) ==
          doctest::Approx(state[i]).epsilon(1e-12));
}

TEST_CASE("discrete rotation invariance") {
  const int k = 6;
  const Dataset ds =
      gen_discrete_rotation(k, SplitSizes{200, 50, 50}, 7);
  REQUIRE(ds.truth_generators.size() == 1);
  Rng rng(99);
  const double step = 2.0 * 3.14159265358979323846 / k;
  double worst_inv = 0, mean_half = 0;
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.normal(), y = rng.normal(), z = rng.normal();
    const double f0 = discrete_rotation_target(k, x, y, z);
    const double c = std::cos(step), s = std::sin(step);
    worst_inv = std::max(
        worst_inv, std::abs(discrete_rotation_target(k, c * x - s * y,
                                                     s * x + c * y, z) -
                            f0));
    const double ch = std::cos(step / 2), sh = std::sin(step / 2);
    mean_half += std::abs(discrete_rotation_target(k, ch * x - sh * y,
                                                   sh * x + ch * y, z) -
                          f0);
  }
  CHECK(worst_inv <= 1e-9);
  CHECK(mean_half / 1000.0 > 0.01);

  const Tensor& g = ds.truth_generators[0];
  CHECK(g.at(0, 1) == -1.0);
  CHECK(g.at(1, 0) == 1.0);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(g.at(i, 2) == 0.0);
    CHECK(g.at(2, i) == 0.0);
  }
}

TEST_CASE("partial permutation target identities") {
  Rng rng(13);
  for (int i = 0; i < 200; ++i) {
    double x[5];
    for (double& v : x) v = rng.uniform(-100, 100);
    const double f0 = partial_permutation_target(x);
    double perm[5] = {x[2], x[0], x[1], x[3], x[4]};
    CHECK(partial_permutation_target(perm) == doctest::Approx(f0));
    double swap45[5] = {x[0], x[1], x[2], x[4], x[3]};
    if (std::abs(x[3] * x[3] - x[4] * x[4]) > 1e-6)
      CHECK(partial_permutation_target(swap45) != doctest::Approx(f0));
  }
}

TEST_CASE("no-symmetry labels are deterministic and noise is separate") {
  const SplitSizes sizes{300, 60, 60};
  const Dataset a = gen_no_symmetry(sizes, 31);
  const Dataset b = gen_no_symmetry(sizes, 31);
  CHECK(a.ytr.data == b.ytr.data);
  CHECK(a.truth_generators.empty());

  const Dataset clean = gen_no_symmetry(sizes, 31, 0.0);
  CHECK(clean.xtr.data == a.xtr.data);  // inputs unaffected by noise stream
  double dev = 0, maxdev = 0;
  for (std::size_t i = 0; i < a.ytr.data.size(); ++i) {
    dev += std::abs(a.ytr.data[i] - clean.ytr.data[i]);
    maxdev = std::max(maxdev, std::abs(a.ytr.data[i] - clean.ytr.data[i]));
  }
  CHECK(dev > 0.0);
  CHECK(maxdev < 0.1);  // sigma = 0.01
}

TEST_CASE("dataset save/load round trip is bitwise") {
  const Dataset ds = gen_discrete_rotation(6, SplitSizes{50, 10, 10}, 3);
  const std::string path = "test_dataset_cache.bin";
  save_dataset(ds, path);
  const Dataset back = load_dataset(path);
  std::filesystem::remove(path);
  CHECK(back.task == ds.task);
  CHECK(back.xtr.data == ds.xtr.data);
  CHECK(back.yte.data == ds.yte.data);
  CHECK(back.truth_generators.size() == 1);
  CHECK(back.truth_generators[0].data == ds.truth_generators[0].data);
  CHECK(back.action.output_action == ds.action.output_action);
  CHECK(back.suggested_gamma == ds.suggested_gamma);
}

TEST_CASE("gen_task rejects unknown ids") {
  CHECK_THROWS(gen_task("three-body", 0));
}
