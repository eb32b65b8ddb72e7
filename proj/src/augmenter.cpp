#include "lieaug/augmenter.hpp"

#include <cmath>

#include "lieaug/kernels.hpp"
#include "lieaug/matexp.hpp"

namespace lieaug {

GeneratorBasis init_basis(int count, int dim, const Tensor& mask,
                          double init_value, double d_norm) {
  if (count <= 0 || dim <= 0)
    throw ContractError("init_basis: count and dim must be positive");
  if (mask.rank() != 2 || mask.rows() != static_cast<std::size_t>(dim) ||
      mask.cols() != static_cast<std::size_t>(dim))
    throw ShapeError("init_basis: mask shape " + shape_str(mask));
  GeneratorBasis b;
  b.count = count;
  b.dim = dim;
  b.d_norm = d_norm;
  b.mask = mask;
  for (int c = 0; c < count; ++c) {
    Tensor g({static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)});
    for (std::size_t i = 0; i < g.data.size(); ++i)
      g.data[i] = mask.data[i] != 0.0 ? init_value : 0.0;
    b.gens.push_back(std::move(g));
  }
  return b;
}

void apply_mask(const Tensor& mask, Tensor& m) {
  for (std::size_t i = 0; i < m.data.size(); ++i)
    if (mask.data[i] == 0.0) m.data[i] = 0.0;
}

std::vector<bool> normalize_basis(GeneratorBasis& basis) {
  std::vector<bool> collapsed(basis.gens.size(), false);
  const double target = std::sqrt(basis.d_norm);
  for (std::size_t c = 0; c < basis.gens.size(); ++c) {
    const double nrm = frobenius_norm(basis.gens[c]);
    if (nrm == 0.0) {
      collapsed[c] = true;
      continue;
    }
    const double f = target / nrm;
    for (double& v : basis.gens[c].data) v *= f;
  }
  return collapsed;
}

Tensor mask_full(int dim) {
  Tensor m({static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)});
  for (double& v : m.data) v = 1.0;
  return m;
}

Tensor mask_two_body(int variant) {
  const int d = 8;
  if (variant == 0) return mask_full(d);
  Tensor m({8, 8});
  if (variant == 2) {
    for (int blk = 0; blk < 4; ++blk)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          m.data[(blk * 2 + i) * d + blk * 2 + j] = 1.0;
    return m;
  }
  if (variant == 4) {
    // position coordinates: 0,1,4,5; momentum coordinates: 2,3,6,7
    auto is_pos = [](int i) { return i == 0 || i == 1 || i == 4 || i == 5; };
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        if (is_pos(i) == is_pos(j)) m.data[i * d + j] = 1.0;
    return m;
  }
  throw ContractError("mask_two_body: unknown variant " +
                      std::to_string(variant));
}

std::vector<double> sample_coeffs(const SamplerConfig& sampler, int count,
                                  Rng& rng) {
  if (!(sampler.gamma > 0.0) || !std::isfinite(sampler.gamma))
    throw ContractError("sample_coeffs: gamma must be finite and positive");
  std::vector<double> w(count);
  if (sampler.kind == SamplerConfig::Kind::kContinuousUniform) {
    for (double& v : w) v = rng.uniform(-sampler.gamma, sampler.gamma);
  } else {
    const long long lim = static_cast<long long>(std::floor(sampler.gamma));
    for (double& v : w)
      v = static_cast<double>(rng.uniform_int(-lim, lim));
  }
  return w;
}

GroupSample group_from_coeffs(const GeneratorBasis& basis,
                              const std::vector<double>& w) {
  const std::size_t d = static_cast<std::size_t>(basis.dim);
  Tensor alg({d, d});
  for (std::size_t c = 0; c < basis.gens.size(); ++c)
    for (std::size_t i = 0; i < alg.data.size(); ++i)
      alg.data[i] += w[c] * basis.gens[c].data[i];
  GroupSample s;
  s.w = w;
  s.g = expm(alg);
  for (double& v : alg.data) v = -v;
  s.g_inv = expm(alg);
  return s;
}

GroupSample sample_group(const GeneratorBasis& basis,
                         const SamplerConfig& sampler, Rng& rng) {
  return group_from_coeffs(basis, sample_coeffs(sampler, basis.count, rng));
}

NodeId group_element_node(Tape& tape, const std::vector<NodeId>& gen_leaves,
                          const std::vector<double>& w) {
  NodeId alg = tape.scale(gen_leaves[0], w[0]);
  for (std::size_t c = 1; c < gen_leaves.size(); ++c)
    alg = tape.add(alg, tape.scale(gen_leaves[c], w[c]));
  return tape.expm(alg);
}

namespace {

Tensor blockwise(const Tensor& g, const Tensor& x, int d, const char* who) {
  if (x.cols() % static_cast<std::size_t>(d) != 0)
    throw ShapeError(std::string(who) + ": width " +
                     std::to_string(x.cols()) + " not divisible by " +
                     std::to_string(d));
  return block_apply(g, x);
}

}  // namespace

Tensor act_input(const GroupSample& sample, const Tensor& x,
                 const ActionSpec& spec) {
  return blockwise(sample.g, x, spec.dim, "act_input");
}

Tensor act_output(const GroupSample& sample, const Tensor& y,
                  const ActionSpec& spec) {
  if (spec.output_action == OutputAction::kInvariant) return y;
  return blockwise(sample.g, y, spec.dim, "act_output");
}

Tensor inverse_act_output(const GroupSample& sample, const Tensor& yhat,
                          const ActionSpec& spec) {
  if (spec.output_action == OutputAction::kInvariant) return yhat;
  return blockwise(sample.g_inv, yhat, spec.dim, "inverse_act_output");
}

}  // namespace lieaug
