#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "lieaug/datasets.hpp"
#include "lieaug/train.hpp"

namespace lieaug {

// Flat-JSON run configuration; every field that can affect numerics is a
// top-level key so the config hash covers it.
struct RunConfig {
  std::string task = "two-body";
  std::string mode = "lieaugmenter";
  std::uint64_t seed = 0;
  std::uint64_t dataset_seed = 12345;
  int epochs = 100;
  int batch_size = 64;
  double learning_rate = 1e-3;
  double alpha = 1.0, beta = 10.0, lambda = 1.0, nu = 1e-3, eta = 0.0;
  int k_augment = 10;
  double gamma = -1.0;  // <0 means use the task's suggested value
  std::string sampler = "continuous";  // or "integer"
  int mask_variant = 2;
  int generator_count = 1;
  double d_norm = -1.0;
  double generator_init = 1e-2;
  std::vector<int> hidden = {128, 128, 128};
  std::string activation = "relu";
  int eval_k = 10;    // augmented-inference samples
  int metric_k = 10;  // equivariance-error samples
  std::string dataset_cache;  // optional binary cache path
  std::string output_dir = "runs";
  std::vector<std::string> fixed_generator_csvs;

  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
};

RunConfig load_config(const std::string& path);

// "key=value" strings; values parsed as JSON when possible, else strings.
void apply_overrides(nlohmann::json& j,
                     const std::vector<std::string>& overrides);

// FNV-1a over the canonical (sorted-key) dump.
std::string config_hash(const nlohmann::json& j);

TrainConfig to_train_config(const RunConfig& cfg, const Dataset& data);

void write_loss_csv(const std::string& path,
                    const std::vector<LossBreakdown>& history,
                    const std::vector<double>& val_mse);

void write_generator_csv(const std::string& path, const Tensor& g);
Tensor read_generator_csv(const std::string& path);

void write_json_file(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::string& path);

// Resolves the run output directory: env LIEAUG_OUTPUT_DIR overrides the
// config value; the directory is created if missing.
std::string resolve_output_dir(const RunConfig& cfg);

}  // namespace lieaug
