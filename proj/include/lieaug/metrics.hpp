#pragma once

#include <functional>
#include <vector>

#include "lieaug/augmenter.hpp"
#include "lieaug/rng.hpp"
#include "lieaug/tensor.hpp"

namespace lieaug {

// Batch predictor abstraction so metrics work both for trained MLPs and for
// analytic reference predictors in tests.
using Predictor = std::function<Tensor(const Tensor&)>;

double cosine_sim_flat(const Tensor& a, const Tensor& b);

// Signed <learned, truth>_F / ||truth||_F^2.
double frobenius_projection(const Tensor& learned, const Tensor& truth);

struct BasisMatch {
  int learned_index = -1;
  int truth_index = -1;  // -1 when more learned generators than truths
  double sign = 1.0;     // applied to the learned generator for alignment
  double abs_cos = 0.0;
  double frob_projection = 0.0;  // after sign alignment
};

struct BasisReport {
  std::vector<BasisMatch> matches;
  double mean_abs_cos = 0.0;
  double mean_frob_projection = 0.0;
};

// Greedy injective matching maximizing |cos| between flattened matrices;
// ties broken by lowest truth index.
BasisReport basis_cosine_similarity(const std::vector<Tensor>& learned,
                                    const std::vector<Tensor>& truth);

// (1/N) sum_i || (1/K) sum_j rho_Y(g_j) Psi(x_i)
//              - (1/K) sum_j Psi(rho_X(g_j) x_i) ||_1
double equivariance_error(const Predictor& psi,
                          const std::vector<Tensor>& generators,
                          const Tensor& x, const ActionSpec& action,
                          const SamplerConfig& sampler, int k, Rng& rng);

// (1/NK) sum_{i,j} || Psi(rho_X(g_j) x_i) - rho_Y(g_j) Psi(x_i) ||_1
double equivariance_error_alt(const Predictor& psi,
                              const std::vector<Tensor>& generators,
                              const Tensor& x, const ActionSpec& action,
                              const SamplerConfig& sampler, int k, Rng& rng);

struct EntryCoord {
  int gen = 0, row = 0, col = 0;
  bool operator==(const EntryCoord&) const = default;
};

struct NoSymmetrySignature {
  std::vector<double> mass_fraction;  // largest-|entry| share of l1 mass
  std::vector<EntryCoord> top_entry;
  int distinct_locations = 0;
};

NoSymmetrySignature no_symmetry_signature(
    const std::vector<GeneratorBasis>& runs);

struct VarianceProbe {
  std::vector<int> k_values;
  std::vector<double> variances;
  double slope = 0.0;  // log-log least squares; NaN when degenerate
  bool degenerate = false;
};

VarianceProbe mc_variance_probe(const Predictor& psi,
                                const GeneratorBasis& basis, const Tensor& x,
                                const ActionSpec& action,
                                const SamplerConfig& sampler,
                                const std::vector<int>& k_list, int trials,
                                Rng& rng);

// Alternative-representation check: on states with q1 = -q2, p1 = -p2, does
// exp(wL) act as the planar rotation by w or by 2w? Tries both angle maps.
bool alternative_rep_check(const Tensor& l_learned,
                           const std::vector<double>& w_grid, double tol);

struct OodBoundCheck {
  std::vector<double> slack;  // bound minus shifted risk, per sampled g
  double min_slack = 0.0;
  int violations = 0;
};

// Numerical check of the transformation-shift risk bound with an
// l2-distance loss (invariant under the orthogonal output action and
// 1-Lipschitz w.r.t. the l1 norm).
OodBoundCheck ood_bound_check(const Predictor& psi, const Tensor& x,
                              const Tensor& y,
                              const std::vector<Tensor>& generators,
                              const ActionSpec& action,
                              const SamplerConfig& sampler, int n_group,
                              Rng& rng);

}  // namespace lieaug
