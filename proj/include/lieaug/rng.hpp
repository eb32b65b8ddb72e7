#pragma once

#include <cmath>
#include <cstdint>

namespace lieaug {

// Counter-based splittable RNG. Every draw is a hash of (key, counter), so
// sub-streams derived with split() are reproducible independent of how many
// draws other streams have made.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(mix(seed ^ 0x5851f42d4c957f2dULL)) {}

  Rng split(std::uint64_t stream) const {
    Rng r(0);
    r.key_ = mix(key_ ^ mix(stream + 0x9e3779b97f4a7c15ULL));
    r.ctr_ = 0;
    return r;
  }

  std::uint64_t next_u64() {
    return mix(key_ + (++ctr_) * 0x9e3779b97f4a7c15ULL);
  }

  // uniform in [0, 1)
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [lo, hi] inclusive
  long long uniform_int(long long lo, long long hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<long long>(next_u64() % span);
  }

  double normal() {
    // Box-Muller; draws two uniforms per call, no caching.
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
};

}  // namespace lieaug
