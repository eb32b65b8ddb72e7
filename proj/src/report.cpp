#include "lieaug/report.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace lieaug {

using nlohmann::json;

json RunConfig::to_json() const {
  json j;
  j["task"] = task;
  j["mode"] = mode;
  j["seed"] = seed;
  j["dataset_seed"] = dataset_seed;
  j["epochs"] = epochs;
  j["batch_size"] = batch_size;
  j["learning_rate"] = learning_rate;
  j["alpha"] = alpha;
  j["beta"] = beta;
  j["lambda"] = lambda;
  j["nu"] = nu;
  j["eta"] = eta;
  j["k_augment"] = k_augment;
  j["gamma"] = gamma;
  j["sampler"] = sampler;
  j["mask_variant"] = mask_variant;
  j["generator_count"] = generator_count;
  j["d_norm"] = d_norm;
  j["generator_init"] = generator_init;
  j["hidden"] = hidden;
  j["activation"] = activation;
  j["eval_k"] = eval_k;
  j["metric_k"] = metric_k;
  j["dataset_cache"] = dataset_cache;
  j["output_dir"] = output_dir;
  j["fixed_generator_csvs"] = fixed_generator_csvs;
  return j;
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig cfg;
  const json defaults = cfg.to_json();
  for (const auto& [key, value] : j.items())
    if (!defaults.contains(key))
      throw std::runtime_error("config: unknown key '" + key + "'");
  if (!j.contains("task"))
    throw std::runtime_error("config: missing key 'task'");
  auto get = [&](const char* key, auto& out) {
    if (j.contains(key)) out = j.at(key).get<std::decay_t<decltype(out)>>();
  };
  get("task", cfg.task);
  get("mode", cfg.mode);
  get("seed", cfg.seed);
  get("dataset_seed", cfg.dataset_seed);
  get("epochs", cfg.epochs);
  get("batch_size", cfg.batch_size);
  get("learning_rate", cfg.learning_rate);
  get("alpha", cfg.alpha);
  get("beta", cfg.beta);
  get("lambda", cfg.lambda);
  get("nu", cfg.nu);
  get("eta", cfg.eta);
  get("k_augment", cfg.k_augment);
  get("gamma", cfg.gamma);
  get("sampler", cfg.sampler);
  get("mask_variant", cfg.mask_variant);
  get("generator_count", cfg.generator_count);
  get("d_norm", cfg.d_norm);
  get("generator_init", cfg.generator_init);
  get("hidden", cfg.hidden);
  get("activation", cfg.activation);
  get("eval_k", cfg.eval_k);
  get("metric_k", cfg.metric_k);
  get("dataset_cache", cfg.dataset_cache);
  get("output_dir", cfg.output_dir);
  get("fixed_generator_csvs", cfg.fixed_generator_csvs);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  return RunConfig::from_json(read_json_file(path));
}

void apply_overrides(json& j, const std::vector<std::string>& overrides) {
  for (const std::string& kv : overrides) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("override '" + kv + "' is not key=value");
    const std::string key = kv.substr(0, eq);
    const std::string raw = kv.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;  // bare string
    j[key] = value;
  }
}

std::string config_hash(const json& j) {
  const std::string canon = json(j).dump();  // nlohmann objects sort keys
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

TrainConfig to_train_config(const RunConfig& cfg, const Dataset& data) {
  TrainConfig tc;
  tc.task = cfg.task;
  tc.mode = train_mode_from_string(cfg.mode);
  tc.weights.alpha = cfg.alpha;
  tc.weights.beta = cfg.beta;
  tc.weights.lambda = cfg.lambda;
  tc.weights.nu = cfg.nu;
  tc.weights.eta = cfg.eta;
  tc.weights.k_augment = cfg.k_augment;
  tc.epochs = cfg.epochs;
  tc.batch_size = cfg.batch_size;
  tc.learning_rate = cfg.learning_rate;
  tc.mask_variant = cfg.mask_variant;
  tc.seed = cfg.seed;
  tc.sampler.gamma = cfg.gamma > 0 ? cfg.gamma : data.suggested_gamma;
  if (cfg.sampler == "integer")
    tc.sampler.kind = SamplerConfig::Kind::kIntegerGrid;
  else if (cfg.sampler == "continuous")
    tc.sampler.kind = SamplerConfig::Kind::kContinuousUniform;
  else
    throw std::runtime_error("config: unknown sampler '" + cfg.sampler + "'");
  tc.generator_count = cfg.generator_count;
  tc.d_norm = cfg.d_norm;
  tc.generator_init = cfg.generator_init;
  tc.hidden = cfg.hidden;
  if (cfg.activation == "relu")
    tc.activation = Activation::kRelu;
  else if (cfg.activation == "tanh")
    tc.activation = Activation::kTanh;
  else
    throw std::runtime_error("config: unknown activation '" + cfg.activation +
                             "'");
  for (const std::string& p : cfg.fixed_generator_csvs)
    tc.fixed_generators.push_back(read_generator_csv(p));
  return tc;
}

void write_loss_csv(const std::string& path,
                    const std::vector<LossBreakdown>& history,
                    const std::vector<double>& val_mse) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_loss_csv: cannot open " + path);
  os << "epoch,emp,equiv,areg,bsreg,bcreg,total,val_mse\n";
  char buf[64];
  for (std::size_t e = 0; e < history.size(); ++e) {
    const LossBreakdown& b = history[e];
    os << e;
    for (double v : {b.emp, b.equiv, b.areg, b.bsreg, b.bcreg, b.total,
                     e < val_mse.size() ? val_mse[e] : 0.0}) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      os << ',' << buf;
    }
    os << '\n';
  }
}

void write_generator_csv(const std::string& path, const Tensor& g) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_generator_csv: cannot open " + path);
  char buf[64];
  const std::size_t r = g.rows(), c = g.cols();
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", g.at(i, j));
      os << (j ? "," : "") << buf;
    }
    os << '\n';
  }
}

Tensor read_generator_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("read_generator_csv: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("read_generator_csv: empty file");
  Tensor t({rows.size(), rows[0].size()});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size())
      throw std::runtime_error("read_generator_csv: ragged rows");
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      t.at(i, j) = rows[i][j];
  }
  return t;
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_json_file: cannot open " + path);
  os << j.dump(2) << "\n";
}

json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config " + path);
  return json::parse(is);
}

std::string resolve_output_dir(const RunConfig& cfg) {
  std::string dir = cfg.output_dir;
  if (const char* env = std::getenv("LIEAUG_OUTPUT_DIR"); env && *env)
    dir = env;
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace lieaug
