#include "lieaug/model.hpp"

#include <cmath>

#include "lieaug/kernels.hpp"

namespace lieaug {

void MlpSpec::validate() const {
  if (input_dim <= 0 || output_dim <= 0)
    throw ContractError("MlpSpec: dims must be positive");
  if (hidden.empty())
    throw ContractError("MlpSpec: at least one hidden layer required");
  for (int h : hidden)
    if (h <= 0) throw ContractError("MlpSpec: hidden widths must be positive");
}

namespace {

std::string wname(const std::string& prefix, int k) {
  return prefix + ".l" + std::to_string(k) + ".w";
}
std::string bname(const std::string& prefix, int k) {
  return prefix + ".l" + std::to_string(k) + ".b";
}

std::vector<int> layer_dims(const MlpSpec& spec) {
  std::vector<int> dims;
  dims.push_back(spec.input_dim);
  dims.insert(dims.end(), spec.hidden.begin(), spec.hidden.end());
  dims.push_back(spec.output_dim);
  return dims;
}

}  // namespace

void mlp_init_params(ParamStore& params, const MlpSpec& spec, Rng& rng,
                     const std::string& prefix) {
  spec.validate();
  const auto dims = layer_dims(spec);
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    const int fan_in = dims[k];
    // He-style uniform bound for relu; the same bound works fine for tanh
    // at these scales.
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    Tensor w({static_cast<std::size_t>(dims[k]),
              static_cast<std::size_t>(dims[k + 1])});
    for (double& v : w.data) v = rng.uniform(-bound, bound);
    Tensor b({static_cast<std::size_t>(dims[k + 1])});
    params.add(wname(prefix, static_cast<int>(k)), std::move(w));
    params.add(bname(prefix, static_cast<int>(k)), std::move(b));
  }
}

NodeId mlp_forward(Tape& tape,
                   const std::unordered_map<std::string, NodeId>& leaves,
                   NodeId x, const MlpSpec& spec, const std::string& prefix) {
  spec.validate();
  if (tape.value(x).cols() != static_cast<std::size_t>(spec.input_dim))
    throw ShapeError("mlp_forward: input width mismatch");
  const int layers = spec.layer_count();
  NodeId h = x;
  for (int k = 0; k < layers; ++k) {
    h = tape.add_bias(tape.matmul(h, leaves.at(wname(prefix, k))),
                      leaves.at(bname(prefix, k)));
    if (k + 1 < layers)
      h = spec.activation == Activation::kRelu ? tape.relu(h)
                                               : tape.tanh_act(h);
  }
  return h;
}

Tensor mlp_eval(const ParamStore& params, const MlpSpec& spec, const Tensor& x,
                const std::string& prefix) {
  spec.validate();
  if (x.cols() != static_cast<std::size_t>(spec.input_dim))
    throw ShapeError("mlp_eval: input width mismatch");
  const int layers = spec.layer_count();
  Tensor h = x;
  for (int k = 0; k < layers; ++k) {
    const Tensor& w = params.at(wname(prefix, k));
    const Tensor& b = params.at(bname(prefix, k));
    Tensor z = matmul(h, w);
    const std::size_t r = z.rows(), c = z.cols();
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) z.data[i * c + j] += b.data[j];
    if (k + 1 < layers) {
      if (spec.activation == Activation::kRelu) {
        for (double& v : z.data) v = v > 0.0 ? v : 0.0;
      } else {
        for (double& v : z.data) v = std::tanh(v);
      }
    }
    h = std::move(z);
  }
  return h;
}

}  // namespace lieaug
