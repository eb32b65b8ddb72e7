#pragma once

#include <vector>

#include "lieaug/rng.hpp"
#include "lieaug/tape.hpp"
#include "lieaug/tensor.hpp"

namespace lieaug {

// Learnable Lie algebra basis: C generator matrices of size d x d sharing a
// boolean mask. Masked-out entries stay exactly zero at all times; after
// normalize_basis each generator has Frobenius norm sqrt(d_norm).
struct GeneratorBasis {
  int count = 0;
  int dim = 0;
  double d_norm = 0;  // squared target Frobenius norm
  Tensor mask;        // d x d, entries 0 or 1
  std::vector<Tensor> gens;
};

GeneratorBasis init_basis(int count, int dim, const Tensor& mask,
                          double init_value, double d_norm);

void apply_mask(const Tensor& mask, Tensor& m);

// Rescales each generator to Frobenius norm sqrt(d_norm). Zero-norm
// generators are skipped and flagged (signals collapse).
std::vector<bool> normalize_basis(GeneratorBasis& basis);

Tensor mask_full(int dim);
// 2-body masks over the per-timestep state (q1x,q1y,p1x,p1y,q2x,q2y,p2x,p2y):
// variant 0 = unconstrained, 2 = four 2x2 diagonal blocks, 4 = entries that
// couple positions with positions or momenta with momenta.
Tensor mask_two_body(int variant);

struct SamplerConfig {
  enum class Kind { kContinuousUniform, kIntegerGrid };
  double gamma = 1.0;
  Kind kind = Kind::kContinuousUniform;
};

std::vector<double> sample_coeffs(const SamplerConfig& sampler, int count,
                                  Rng& rng);

struct GroupSample {
  std::vector<double> w;
  Tensor g;
  Tensor g_inv;
};

GroupSample sample_group(const GeneratorBasis& basis,
                         const SamplerConfig& sampler, Rng& rng);
GroupSample group_from_coeffs(const GeneratorBasis& basis,
                              const std::vector<double>& w);

// Tape-side group element with gradients flowing to the generator leaves;
// the drawn coefficients are constants (reparameterization).
NodeId group_element_node(Tape& tape, const std::vector<NodeId>& gen_leaves,
                          const std::vector<double>& w);

enum class OutputAction { kInvariant, kEquivariantSameRep };

struct ActionSpec {
  int dim = 0;            // generator dimension d
  int timesteps_in = 1;   // input is timesteps_in stacked d-blocks
  int timesteps_out = 1;
  OutputAction output_action = OutputAction::kInvariant;
};

// Block-diagonal action of g on each d-block of x (rows are batch items).
Tensor act_input(const GroupSample& sample, const Tensor& x,
                 const ActionSpec& spec);
Tensor act_output(const GroupSample& sample, const Tensor& y,
                  const ActionSpec& spec);
Tensor inverse_act_output(const GroupSample& sample, const Tensor& yhat,
                          const ActionSpec& spec);

}  // namespace lieaug
