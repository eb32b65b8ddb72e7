#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "lieaug/kernels.hpp"
#include "lieaug/rng.hpp"
#include "testutil.hpp"

using namespace lieaug;
using test::random_tensor;

namespace {

// Textbook triple loop as the independent oracle for the blocked kernels.
Tensor naive_matmul(const Tensor& a, const Tensor& b) {
  Tensor c = Tensor::zeros(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0;
      for (std::size_t k = 0; k < a.cols(); ++k)
        s += a.at(i, k) * b.at(k, j);
      c.at(i, j) = s;
    }
  return c;
}

}  // namespace

TEST_CASE("matmul matches the naive oracle") {
  Rng rng(1);
  for (auto [p, q, r] : {std::tuple<std::size_t, std::size_t, std::size_t>{
                             3, 4, 5},
                         {1, 1, 1},
                         {17, 31, 9},
                         {64, 8, 128}}) {
    Tensor a = random_tensor({p, q}, rng);
    Tensor b = random_tensor({q, r}, rng);
    CHECK(max_abs_diff(matmul(a, b), naive_matmul(a, b)) < 1e-12);
  }
}

TEST_CASE("parallel entry point is bitwise identical to the reference") {
  Rng rng(2);
  // Sizes straddling the parallel-dispatch threshold.
  for (auto [p, q, r] : {std::tuple<std::size_t, std::size_t, std::size_t>{
                             8, 8, 8},
                         {128, 128, 128},
                         {300, 64, 64}}) {
    Tensor a = random_tensor({p, q}, rng);
    Tensor b = random_tensor({q, r}, rng);
    Tensor ref_out = Tensor::zeros(p, r);
    Tensor par_out = Tensor::zeros(p, r);
    ref::matmul(a.data.data(), b.data.data(), ref_out.data.data(), p, q, r);
    matmul(a.data.data(), b.data.data(), par_out.data.data(), p, q, r);
    CHECK(ref_out.data == par_out.data);
  }
}

TEST_CASE("accumulating transposed variants match explicit transposes") {
  Rng rng(3);
  const std::size_t p = 7, q = 11, r = 5;
  Tensor a = random_tensor({q, p}, rng);  // used as a^T (p x q)
  Tensor g = random_tensor({q, r}, rng);

  Tensor expected = naive_matmul(test::transpose(a), g);
  Tensor acc = random_tensor({p, r}, rng);
  Tensor acc_copy = acc;
  matmul_acc_at(a.data.data(), g.data.data(), acc.data.data(), p, q, r);
  for (std::size_t i = 0; i < acc.data.size(); ++i)
    CHECK(acc.data[i] ==
          doctest::Approx(acc_copy.data[i] + expected.data[i]).epsilon(1e-12));

  Tensor b = random_tensor({r, q}, rng);  // used as b^T (q x r)
  Tensor x = random_tensor({p, q}, rng);
  Tensor expected2 = naive_matmul(x, test::transpose(b));
  Tensor acc2 = Tensor::zeros(p, r);
  matmul_acc_bt(x.data.data(), b.data.data(), acc2.data.data(), p, q, r);
  CHECK(max_abs_diff(acc2, expected2) < 1e-12);
}

TEST_CASE("block_apply acts on each d-block of each row") {
  Rng rng(4);
  Tensor g = random_tensor({3, 3}, rng);
  Tensor x = random_tensor({4, 6}, rng);  // two 3-blocks per row
  Tensor out = block_apply(g, x);
  for (std::size_t row = 0; row < 4; ++row)
    for (int blk = 0; blk < 2; ++blk)
      for (std::size_t i = 0; i < 3; ++i) {
        double s = 0;
        for (std::size_t j = 0; j < 3; ++j)
          s += g.at(i, j) * x.at(row, 3 * static_cast<std::size_t>(blk) + j);
        CHECK(out.at(row, 3 * static_cast<std::size_t>(blk) + i) ==
              doctest::Approx(s).epsilon(1e-12));
      }
  CHECK_THROWS_AS(block_apply(g, random_tensor({2, 7}, rng)), ShapeError);
}
