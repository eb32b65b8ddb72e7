#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lieaug/datasets.hpp"
#include "lieaug/kernels.hpp"
#include "lieaug/matexp.hpp"
#include "lieaug/metrics.hpp"
#include "lieaug/report.hpp"
#include "lieaug/train.hpp"

using namespace lieaug;
using nlohmann::json;

namespace {

json load_effective_config(const std::string& path,
                           const std::vector<std::string>& overrides) {
  json j = read_json_file(path);
  apply_overrides(j, overrides);
  return j;
}

Dataset obtain_dataset(const RunConfig& cfg) {
  if (!cfg.dataset_cache.empty() &&
      std::filesystem::exists(cfg.dataset_cache))
    return load_dataset(cfg.dataset_cache);
  Dataset ds = gen_task(cfg.task, cfg.dataset_seed);
  if (!cfg.dataset_cache.empty()) save_dataset(ds, cfg.dataset_cache);
  return ds;
}

SamplerConfig metric_sampler(const RunConfig& cfg, const Dataset& data) {
  SamplerConfig s;
  s.gamma = cfg.gamma > 0 ? cfg.gamma : data.suggested_gamma;
  s.kind = cfg.sampler == "integer" ? SamplerConfig::Kind::kIntegerGrid
                                    : SamplerConfig::Kind::kContinuousUniform;
  return s;
}

struct RunResult {
  TrainedState state;
  json report;
  std::string dir;
};

RunResult run_one(const RunConfig& cfg, const json& echo) {
  const std::string hash = config_hash(echo);
  Dataset data = obtain_dataset(cfg);
  const TrainConfig tc = to_train_config(cfg, data);
  TrainedState state = fit(tc, data);

  const Predictor psi = [&state](const Tensor& x) {
    return predict_direct(state, x);
  };
  const double mse_direct = mse(psi(data.xte), data.yte);
  Rng eval_rng = Rng(cfg.seed).split(777);
  const double mse_aug =
      mse(predict_augmented(state, data.xte, cfg.eval_k, eval_rng), data.yte);

  json metrics;
  metrics["mse_direct"] = mse_direct;
  metrics["mse_augmented"] = mse_aug;
  metrics["final_train_loss"] = state.history.back().total;
  metrics["final_val_mse"] = state.val_mse.back();

  const SamplerConfig msampler = metric_sampler(cfg, data);
  if (!data.truth_generators.empty()) {
    Rng r1 = Rng(cfg.seed).split(888);
    Rng r2 = Rng(cfg.seed).split(889);
    metrics["equiv_error"] =
        equivariance_error(psi, data.truth_generators, data.xte, data.action,
                           msampler, cfg.metric_k, r1);
    metrics["equiv_error_alt"] =
        equivariance_error_alt(psi, data.truth_generators, data.xte,
                               data.action, msampler, cfg.metric_k, r2);
    const BasisReport br =
        basis_cosine_similarity(state.basis.gens, data.truth_generators);
    json matches = json::array();
    for (const BasisMatch& m : br.matches)
      matches.push_back({{"learned", m.learned_index},
                         {"truth", m.truth_index},
                         {"sign", m.sign},
                         {"abs_cos", m.abs_cos},
                         {"frob_projection", m.frob_projection}});
    metrics["basis"] = {{"matches", matches},
                        {"mean_abs_cos", br.mean_abs_cos},
                        {"mean_frob_projection", br.mean_frob_projection}};
  }
  if (cfg.task == "no-symmetry") {
    const NoSymmetrySignature sig = no_symmetry_signature({state.basis});
    metrics["no_symmetry_signature"] = {
        {"mass_fraction", sig.mass_fraction[0]},
        {"top_entry", {sig.top_entry[0].gen, sig.top_entry[0].row,
                       sig.top_entry[0].col}}};
  }

  const std::string base = resolve_output_dir(cfg);
  const std::string dir = base + "/" + cfg.task + "-" + cfg.mode + "-s" +
                          std::to_string(cfg.seed) + "-" + hash.substr(0, 8);
  std::filesystem::create_directories(dir);
  const std::string loss_csv = dir + "/losses.csv";
  write_loss_csv(loss_csv, state.history, state.val_mse);
  std::vector<std::string> gen_csvs;
  for (int c = 0; c < state.basis.count; ++c) {
    const std::string p = dir + "/generator_" + std::to_string(c) + ".csv";
    write_generator_csv(p, state.basis.gens[static_cast<std::size_t>(c)]);
    gen_csvs.push_back(p);
  }
  save_checkpoint(state, dir + "/checkpoint.bin");

  json report;
  report["config"] = echo;
  report["config_hash"] = hash;
  report["seed"] = cfg.seed;
  report["loss_csv"] = loss_csv;
  report["generator_csvs"] = gen_csvs;
  report["checkpoint"] = dir + "/checkpoint.bin";
  report["metrics"] = metrics;
  report["collapse_flag"] = state.collapse_flag;
  report["wallclock_sec"] = state.wallclock_sec;
  write_json_file(dir + "/report.json", report);
  return {std::move(state), std::move(report), dir};
}

int cmd_gen_data(const std::string& config_path,
                 const std::vector<std::string>& overrides) {
  const json echo = load_effective_config(config_path, overrides);
  RunConfig cfg = RunConfig::from_json(echo);
  if (cfg.dataset_cache.empty())
    cfg.dataset_cache = resolve_output_dir(cfg) + "/" + cfg.task + "-" +
                        std::to_string(cfg.dataset_seed) + ".bin";
  if (std::filesystem::exists(cfg.dataset_cache)) {
    std::printf("dataset cache exists: %s\n", cfg.dataset_cache.c_str());
    return 0;
  }
  const Dataset ds = gen_task(cfg.task, cfg.dataset_seed);
  save_dataset(ds, cfg.dataset_cache);
  std::printf("wrote %s (train=%zu val=%zu test=%zu)\n",
              cfg.dataset_cache.c_str(), ds.xtr.rows(), ds.xva.rows(),
              ds.xte.rows());
  return 0;
}

int cmd_train(const std::string& config_path,
              const std::vector<std::string>& overrides) {
  const json echo = load_effective_config(config_path, overrides);
  const RunConfig cfg = RunConfig::from_json(echo);
  const RunResult res = run_one(cfg, echo);
  std::printf("%s\n", res.report["metrics"].dump(2).c_str());
  std::printf("report: %s/report.json\n", res.dir.c_str());
  return 0;
}

int cmd_eval(const std::string& config_path, const std::string& checkpoint,
             const std::vector<std::string>& overrides) {
  const json echo = load_effective_config(config_path, overrides);
  const RunConfig cfg = RunConfig::from_json(echo);
  const Dataset data = obtain_dataset(cfg);
  TrainedState state = load_checkpoint(checkpoint);
  const Predictor psi = [&state](const Tensor& x) {
    return predict_direct(state, x);
  };
  Rng eval_rng = Rng(cfg.seed).split(777);
  json out;
  out["mse_direct"] = mse(psi(data.xte), data.yte);
  out["mse_augmented"] =
      mse(predict_augmented(state, data.xte, cfg.eval_k, eval_rng), data.yte);
  if (!data.truth_generators.empty()) {
    Rng r1 = Rng(cfg.seed).split(888);
    out["equiv_error"] = equivariance_error(psi, data.truth_generators,
                                            data.xte, data.action,
                                            metric_sampler(cfg, data),
                                            cfg.metric_k, r1);
  }
  std::printf("%s\n", out.dump(2).c_str());
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& seeds_arg,
              const std::vector<std::string>& overrides) {
  std::vector<std::uint64_t> seeds;
  {
    std::stringstream ss(seeds_arg);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) seeds.push_back(std::stoull(tok));
  }
  if (seeds.empty()) throw std::runtime_error("sweep: empty seed list");

  std::vector<json> reports;
  std::vector<GeneratorBasis> bases;
  RunConfig cfg0;
  for (std::uint64_t s : seeds) {
    json echo = load_effective_config(config_path, overrides);
    echo["seed"] = s;
    const RunConfig cfg = RunConfig::from_json(echo);
    cfg0 = cfg;
    RunResult res = run_one(cfg, echo);
    bases.push_back(res.state.basis);
    reports.push_back(res.report);
    std::printf("seed %llu: mse_direct=%g\n",
                static_cast<unsigned long long>(s),
                res.report["metrics"]["mse_direct"].get<double>());
  }

  auto collect = [&](const std::string& key) {
    std::vector<double> v;
    for (const json& r : reports)
      if (r["metrics"].contains(key))
        v.push_back(r["metrics"][key].get<double>());
    return v;
  };
  auto mean_std = [](const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    s = v.size() > 1 ? std::sqrt(s / static_cast<double>(v.size() - 1)) : 0.0;
    return std::pair<double, double>(m, s);
  };

  const std::string dir = resolve_output_dir(cfg0);
  const std::string csv_path = dir + "/sweep-" + cfg0.task + "-" + cfg0.mode +
                               ".csv";
  std::ofstream os(csv_path);
  os << "metric,mean,std,n\n";
  for (const std::string& key :
       {std::string("mse_direct"), std::string("mse_augmented"),
        std::string("equiv_error"), std::string("equiv_error_alt"),
        std::string("final_val_mse")}) {
    const std::vector<double> v = collect(key);
    if (v.empty()) continue;
    const auto [m, s] = mean_std(v);
    os << key << ',' << m << ',' << s << ',' << v.size() << '\n';
  }
  std::printf("sweep csv: %s\n", csv_path.c_str());

  if (cfg0.task == "no-symmetry") {
    const NoSymmetrySignature sig = no_symmetry_signature(bases);
    json sj;
    sj["mass_fraction"] = sig.mass_fraction;
    json tops = json::array();
    for (const EntryCoord& c : sig.top_entry)
      tops.push_back({c.gen, c.row, c.col});
    sj["top_entry"] = tops;
    sj["distinct_locations"] = sig.distinct_locations;
    write_json_file(dir + "/sweep-no-symmetry-signature.json", sj);
    std::printf("signature: %s\n", sj.dump().c_str());
  }
  return 0;
}

// ---- probes ----

int probe_expm() {
  Rng rng(99);
  double worst = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = 2 + static_cast<std::size_t>(trial % 7);
    Tensor a({d, d});
    for (double& v : a.data) v = rng.uniform(-1, 1);
    const double scale = rng.uniform(0.1, 5.0) / std::max(1e-12,
                                                          frobenius_norm(a));
    for (double& v : a.data) v *= scale;

    Tensor zero = Tensor::zeros(d, d);
    const Tensor ez = expm(zero);
    if (max_abs_diff(ez, Tensor::identity(d)) != 0.0) {
      std::printf("probe expm: exp(0) != I exactly\n");
      return 1;
    }
    Tensor na = a;
    for (double& v : na.data) v = -v;
    const Tensor prod = matmul(expm(a), expm(na));
    worst = std::max(worst, max_abs_diff(prod, Tensor::identity(d)));

    // skew-symmetric -> orthogonal
    Tensor s = a;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        s.at(i, j) = 0.5 * (a.at(i, j) - a.at(j, i));
    const Tensor q = expm(s);
    Tensor qt({d, d});
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) qt.at(i, j) = q.at(j, i);
    worst = std::max(worst,
                     max_abs_diff(matmul(q, qt), Tensor::identity(d)));
  }
  std::printf("probe expm: max identity deviation %.3e\n", worst);
  return worst <= 1e-10 ? 0 : 1;
}

int probe_gradcheck() {
  // End-to-end scalar loss through mlp + expm + block action; central
  // finite differences on every trainable leaf entry.
  Rng rng(4242);
  const int d = 4, n = 6;
  Tensor x({static_cast<std::size_t>(n), static_cast<std::size_t>(d)});
  Tensor y({static_cast<std::size_t>(n), 1});
  for (double& v : x.data) v = rng.uniform(-1, 1);
  for (double& v : y.data) v = rng.uniform(-1, 1);

  ParamStore params;
  MlpSpec spec{d, 1, {8, 8}, Activation::kTanh};
  Rng init = rng.split(1);
  mlp_init_params(params, spec, init);
  Tensor gen({static_cast<std::size_t>(d), static_cast<std::size_t>(d)});
  for (double& v : gen.data) v = rng.uniform(-0.3, 0.3);
  params.add("gen", gen);

  const std::vector<double> w = {0.7, -0.4};
  const std::vector<double> wrows = {0.9, -0.2, 0.5, -0.8, 0.1, 0.6};
  auto eval = [&](const ParamStore& p, Tensor* grads_out) {
    Tape tape;
    auto leaves = p.inject(tape);
    std::vector<NodeId> gl = {leaves.at("gen")};
    const NodeId xb = tape.leaf(x);
    const NodeId yb = tape.leaf(y);
    NodeId acc = -1;
    for (double wi : w) {
      const NodeId g = group_element_node(tape, gl, {wi});
      const NodeId xa = tape.block_act(g, xb);
      const NodeId pred = mlp_forward(tape, leaves, xa, spec);
      const NodeId term = equiv_term(tape, pred, yb);
      const NodeId areg = areg_term(tape, xb, xa);
      acc = acc < 0 ? term : tape.add(acc, term);
      acc = tape.add(acc, areg);
    }
    {
      // per-item stacked path with through-the-graph normalization, as
      // used by fit
      const NodeId gnorm = tape.frob_normalize(leaves.at("gen"), 1.7);
      const NodeId gstack = tape.expm_blocks(tape.stack_scale(gnorm, wrows));
      const NodeId xa = tape.block_act_rows(gstack, xb);
      const NodeId pred = mlp_forward(tape, leaves, xa, spec);
      acc = tape.add(acc, equiv_term(tape, pred, yb));
      acc = tape.add(acc, areg_term(tape, xb, xa));
    }
    acc = tape.add(acc, tape.sum(tape.smooth_abs(leaves.at("gen"), 1e-8)));
    const double val = (tape.backward(acc), tape.value(acc).data[0]);
    if (grads_out) {
      const std::vector<double> g = p.gather_grads(tape, leaves);
      grads_out->shape = {g.size()};
      grads_out->data = g;
    }
    return val;
  };

  Tensor grads;
  eval(params, &grads);
  std::vector<double> flat = params.flat();
  double max_rel = 0;
  const double h = 5e-6;  // central differences: truncation ~h^2, roundoff ~eps/h
  for (std::size_t i = 0; i < flat.size(); ++i) {
    std::vector<double> fp = flat, fm = flat;
    fp[i] += h;
    fm[i] -= h;
    ParamStore pp = params, pm = params;
    pp.set_flat(fp);
    pm.set_flat(fm);
    const double fd = (eval(pp, nullptr) - eval(pm, nullptr)) / (2 * h);
    const double an = grads.data[i];
    const double rel = std::abs(fd - an) /
                       std::max(1e-4, std::max(std::abs(fd), std::abs(an)));
    max_rel = std::max(max_rel, rel);
  }
  std::printf("probe gradcheck: max rel err %.3e over %zu params\n", max_rel,
              flat.size());
  return max_rel <= 1e-6 ? 0 : 1;
}

int probe_mcvariance() {
  TwoBodyConfig dcfg;
  dcfg.n_train = 256;
  dcfg.n_val = 64;
  dcfg.n_test = 64;
  const Dataset data = gen_two_body(dcfg, 31337);

  ParamStore params;
  MlpSpec spec{data.input_dim, data.output_dim, {32, 32}, Activation::kRelu};
  Rng init(555);
  mlp_init_params(params, spec, init);
  const Predictor psi = [&](const Tensor& x) {
    return mlp_eval(params, spec, x);
  };

  GeneratorBasis basis;
  basis.count = 1;
  basis.dim = 8;
  basis.d_norm = 8;
  basis.mask = mask_full(8);
  basis.gens = data.truth_generators;

  SamplerConfig sampler;
  sampler.gamma = 2.0;
  Tensor x({32, static_cast<std::size_t>(data.input_dim)});
  for (std::size_t i = 0; i < x.data.size(); ++i)
    x.data[i] = data.xte.data[i];

  Rng rng(777);
  const VarianceProbe probe = mc_variance_probe(
      psi, basis, x, data.action, sampler, {1, 2, 4, 8, 16, 32}, 300, rng);
  std::printf("probe mcvariance: slope %.4f (degenerate=%d)\n", probe.slope,
              probe.degenerate ? 1 : 0);
  for (std::size_t i = 0; i < probe.k_values.size(); ++i)
    std::printf("  K=%2d var=%.6e\n", probe.k_values[i], probe.variances[i]);
  return (!probe.degenerate && probe.slope >= -1.15 && probe.slope <= -0.85)
             ? 0
             : 1;
}

int probe_oodbound(const std::string& config_path,
                   const std::string& checkpoint,
                   const std::vector<std::string>& overrides) {
  const json echo = load_effective_config(config_path, overrides);
  const RunConfig cfg = RunConfig::from_json(echo);
  const Dataset data = obtain_dataset(cfg);
  TrainedState state = load_checkpoint(checkpoint);
  const Predictor psi = [&state](const Tensor& x) {
    return predict_direct(state, x);
  };
  const std::size_t n = std::min<std::size_t>(data.xte.rows(), 2048);
  Tensor x({n, data.xte.cols()}), y({n, data.yte.cols()});
  for (std::size_t i = 0; i < x.data.size(); ++i) x.data[i] = data.xte.data[i];
  for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] = data.yte.data[i];

  SamplerConfig sampler;
  sampler.gamma = cfg.gamma > 0 ? cfg.gamma : data.suggested_gamma;
  Rng rng(2024);
  const OodBoundCheck check = ood_bound_check(
      psi, x, y, data.truth_generators, data.action, sampler, 50, rng);
  std::printf("probe oodbound: min slack %.6e, violations %d/50\n",
              check.min_slack, check.violations);
  if (check.violations > 0)
    for (std::size_t i = 0; i < check.slack.size(); ++i)
      if (check.slack[i] < 0)
        std::printf("  violator g[%zu]: slack %.6e\n", i, check.slack[i]);
  return check.violations == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lie-algebra augmentation discovery for regression tasks"};
  app.require_subcommand(1);

  std::string config_path, checkpoint, seeds = "0,1,2", probe_id;
  std::vector<std::string> overrides;

  auto add_common = [&](CLI::App* sub, bool need_config = true) {
    sub->add_option("--config", config_path, "JSON config path")
        ->required(need_config);
    sub->add_option("--set", overrides, "override config key=value");
  };

  CLI::App* gen = app.add_subcommand("gen-data", "generate a dataset cache");
  add_common(gen);
  CLI::App* train = app.add_subcommand("train", "train one run");
  add_common(train);
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  add_common(eval_cmd);
  eval_cmd->add_option("--checkpoint", checkpoint, "checkpoint path")
      ->required();
  CLI::App* sweep = app.add_subcommand("sweep", "multi-seed sweep");
  add_common(sweep);
  sweep->add_option("--seeds", seeds, "comma-separated seed list");
  CLI::App* probe = app.add_subcommand("probe", "theory/consistency probes");
  probe->add_option("--id", probe_id,
                    "probe id: expm | gradcheck | mcvariance | oodbound")
      ->required();
  probe->add_option("--config", config_path, "JSON config path (oodbound)");
  probe->add_option("--checkpoint", checkpoint, "checkpoint (oodbound)");
  probe->add_option("--set", overrides, "override config key=value");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen_data(config_path, overrides);
    if (train->parsed()) return cmd_train(config_path, overrides);
    if (eval_cmd->parsed())
      return cmd_eval(config_path, checkpoint, overrides);
    if (sweep->parsed()) return cmd_sweep(config_path, seeds, overrides);
    if (probe->parsed()) {
      if (probe_id == "expm") return probe_expm();
      if (probe_id == "gradcheck") return probe_gradcheck();
      if (probe_id == "mcvariance") return probe_mcvariance();
      if (probe_id == "oodbound")
        return probe_oodbound(config_path, checkpoint, overrides);
      std::fprintf(stderr, "unknown probe '%s'\n", probe_id.c_str());
      return 2;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
