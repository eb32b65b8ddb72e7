// Compares the serial reference matmul against the default (possibly
// OpenMP-parallel) kernel and reports throughput plus max deviation.
#include <chrono>
#include <cstdio>
#include <vector>

#include "lieaug/kernels.hpp"
#include "lieaug/rng.hpp"
#include "lieaug/tensor.hpp"

using namespace lieaug;

namespace {

double now_sec() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

int main() {
  Rng rng(7);
  struct Case {
    std::size_t p, q, r;
  };
  const std::vector<Case> cases = {
      {64, 8, 128}, {64, 128, 128}, {512, 128, 128}, {1024, 128, 128}};
  std::printf("%8s %8s %8s %12s %12s %10s\n", "p", "q", "r", "ref GF/s",
              "par GF/s", "max|diff|");
  for (const Case& c : cases) {
    Tensor a({c.p, c.q}), b({c.q, c.r});
    for (double& v : a.data) v = rng.uniform(-1, 1);
    for (double& v : b.data) v = rng.uniform(-1, 1);
    Tensor out_ref = Tensor::zeros(c.p, c.r);
    Tensor out_par = Tensor::zeros(c.p, c.r);
    const double flops = 2.0 * static_cast<double>(c.p * c.q * c.r);
    const int reps = static_cast<int>(std::max(1.0, 2e8 / flops));

    double t0 = now_sec();
    for (int i = 0; i < reps; ++i)
      ref::matmul(a.data.data(), b.data.data(), out_ref.data.data(), c.p, c.q,
                  c.r);
    const double dt_ref = (now_sec() - t0) / reps;

    t0 = now_sec();
    for (int i = 0; i < reps; ++i)
      matmul(a.data.data(), b.data.data(), out_par.data.data(), c.p, c.q,
             c.r);
    const double dt_par = (now_sec() - t0) / reps;

    std::printf("%8zu %8zu %8zu %12.2f %12.2f %10.2e\n", c.p, c.q, c.r,
                flops / dt_ref / 1e9, flops / dt_par / 1e9,
                max_abs_diff(out_ref, out_par));
  }
  return 0;
}
