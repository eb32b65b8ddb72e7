#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "lieaug/param_store.hpp"
#include "lieaug/rng.hpp"
#include "lieaug/tape.hpp"

namespace lieaug {

enum class Activation { kRelu, kTanh };

struct MlpSpec {
  int input_dim = 0;
  int output_dim = 0;
  std::vector<int> hidden = {128, 128, 128};
  Activation activation = Activation::kRelu;

  void validate() const;
  int layer_count() const { return static_cast<int>(hidden.size()) + 1; }
};

// Registers weight/bias tensors named "psi.l<k>.w" / "psi.l<k>.b" with
// uniform fan-in initialization.
void mlp_init_params(ParamStore& params, const MlpSpec& spec, Rng& rng,
                     const std::string& prefix = "psi");

NodeId mlp_forward(Tape& tape,
                   const std::unordered_map<std::string, NodeId>& leaves,
                   NodeId x, const MlpSpec& spec,
                   const std::string& prefix = "psi");

// Tape-free forward pass for evaluation and metrics.
Tensor mlp_eval(const ParamStore& params, const MlpSpec& spec, const Tensor& x,
                const std::string& prefix = "psi");

}  // namespace lieaug
