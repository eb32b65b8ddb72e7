#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lieaug/augmenter.hpp"
#include "lieaug/datasets.hpp"
#include "lieaug/model.hpp"
#include "lieaug/objective.hpp"
#include "lieaug/param_store.hpp"

namespace lieaug {

enum class TrainMode { kLieAugmenter, kTrivial, kOracleAug, kFixedAug };

TrainMode train_mode_from_string(const std::string& s);
std::string to_string(TrainMode m);

struct TrainConfig {
  std::string task = "two-body";
  TrainMode mode = TrainMode::kLieAugmenter;
  LossWeights weights;
  int epochs = 100;
  int batch_size = 64;
  double learning_rate = 1e-3;
  int mask_variant = 0;  // two-body tasks only: 0, 2 or 4
  std::uint64_t seed = 0;
  SamplerConfig sampler;
  int generator_count = 1;
  double d_norm = -1.0;  // target squared Frobenius norm; <0 means dim
  double generator_init = 1e-2;
  std::vector<int> hidden = {128, 128, 128};
  Activation activation = Activation::kRelu;
  std::vector<Tensor> fixed_generators;  // mode kFixedAug
};

struct TrainedState {
  ParamStore psi;
  MlpSpec mlp;
  GeneratorBasis basis;
  ActionSpec action;
  SamplerConfig sampler;
  std::vector<LossBreakdown> history;  // one per epoch, minibatch means
  std::vector<double> val_mse;         // one per epoch
  double wallclock_sec = 0;
  bool collapse_flag = false;
};

struct AdamState {
  std::vector<double> m, v;
  long long t = 0;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
};

void adam_step(std::vector<double>& params, const std::vector<double>& grads,
               AdamState& state, double lr);

TrainedState fit(const TrainConfig& cfg, const Dataset& data);

Tensor predict_direct(const TrainedState& state, const Tensor& x);
// Averaged inference: the direct prediction plus K
// inverse-transformed predictions on augmented views.
Tensor predict_augmented(const TrainedState& state, const Tensor& x, int k,
                         Rng& rng);

void save_checkpoint(const TrainedState& state, const std::string& path);
TrainedState load_checkpoint(const std::string& path);

}  // namespace lieaug
