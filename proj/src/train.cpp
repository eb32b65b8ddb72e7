#include "lieaug/train.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "lieaug/kernels.hpp"
#include "json.hpp"

namespace lieaug {

TrainMode train_mode_from_string(const std::string& s) {
  if (s == "lieaugmenter") return TrainMode::kLieAugmenter;
  if (s == "trivial") return TrainMode::kTrivial;
  if (s == "oracle-aug") return TrainMode::kOracleAug;
  if (s == "fixed-aug") return TrainMode::kFixedAug;
  throw ContractError("unknown train mode: " + s);
}

std::string to_string(TrainMode m) {
  switch (m) {
    case TrainMode::kLieAugmenter: return "lieaugmenter";
    case TrainMode::kTrivial: return "trivial";
    case TrainMode::kOracleAug: return "oracle-aug";
    case TrainMode::kFixedAug: return "fixed-aug";
  }
  return "?";
}

void adam_step(std::vector<double>& params, const std::vector<double>& grads,
               AdamState& state, double lr) {
  if (params.size() != grads.size())
    throw ContractError("adam_step: size mismatch");
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size())
    throw ContractError("adam_step: stale optimizer state");
  ++state.t;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
  }
}

namespace {

Tensor take_rows(const Tensor& x, const std::vector<std::size_t>& idx,
                 std::size_t begin, std::size_t end) {
  const std::size_t c = x.cols();
  Tensor out({end - begin, c});
  for (std::size_t r = begin; r < end; ++r)
    for (std::size_t j = 0; j < c; ++j)
      out.data[(r - begin) * c + j] = x.data[idx[r] * c + j];
  return out;
}

GeneratorBasis frozen_basis(const std::vector<Tensor>& gens, int dim,
                            double d_norm, bool renormalize) {
  if (gens.empty())
    throw ContractError("frozen basis requires at least one generator");
  GeneratorBasis basis;
  basis.count = static_cast<int>(gens.size());
  basis.dim = dim;
  basis.d_norm = d_norm;
  basis.mask = mask_full(dim);
  basis.gens = gens;
  for (const Tensor& g : basis.gens)
    if (g.rows() != static_cast<std::size_t>(dim) ||
        g.cols() != static_cast<std::size_t>(dim))
      throw ShapeError("frozen basis: generator dim mismatch");
  if (renormalize) normalize_basis(basis);
  return basis;
}

}  // namespace

TrainedState fit(const TrainConfig& cfg, const Dataset& data) {
  const auto t0 = std::chrono::steady_clock::now();
  if (cfg.epochs <= 0 || cfg.batch_size <= 0)
    throw ContractError("fit: epochs and batch_size must be positive");
  cfg.weights.validate();

  TrainedState state;
  state.action = data.action;
  state.sampler = cfg.sampler;
  state.mlp.input_dim = data.input_dim;
  state.mlp.output_dim = data.output_dim;
  state.mlp.hidden = cfg.hidden;
  state.mlp.activation = cfg.activation;
  state.mlp.validate();

  Rng root(cfg.seed);
  Rng init_rng = root.split(1);
  mlp_init_params(state.psi, state.mlp, init_rng);

  const int d = data.action.dim;
  const double d_norm = cfg.d_norm > 0 ? cfg.d_norm : static_cast<double>(d);
  const bool two_body = data.task.rfind("two-body", 0) == 0;
  const bool trainable_gens = cfg.mode == TrainMode::kLieAugmenter;

  LossWeights weights = cfg.weights;
  if (cfg.mode == TrainMode::kTrivial) weights.k_augment = 0;
  const int K = weights.k_augment;

  // Raw (unnormalized) generator parameters. The forward pass rescales
  // them to ||L||_F = sqrt(d_norm) through the tape, so gradients include
  // the normalization and the raw scale stays free; state.basis always
  // holds the normalized view.
  std::vector<Tensor> raw;
  switch (cfg.mode) {
    case TrainMode::kLieAugmenter:
    case TrainMode::kTrivial: {
      const Tensor mask =
          two_body ? mask_two_body(cfg.mask_variant) : mask_full(d);
      state.basis = init_basis(cfg.generator_count, d, mask,
                               cfg.generator_init, d_norm);
      raw = state.basis.gens;
      normalize_basis(state.basis);
      break;
    }
    case TrainMode::kOracleAug:
      state.basis = frozen_basis(data.truth_generators, d, d_norm, true);
      break;
    case TrainMode::kFixedAug:
      // User-supplied generators are taken at face value; their scale is
      // part of the specification of the augmentation.
      state.basis = frozen_basis(cfg.fixed_generators, d, d_norm, false);
      break;
  }
  const int C = state.basis.count;
  const double norm_target = std::sqrt(state.basis.d_norm);

  const std::size_t ntr = data.xtr.rows();
  if (ntr == 0) throw ContractError("fit: empty training split");
  std::vector<std::size_t> idx(ntr);
  std::iota(idx.begin(), idx.end(), 0);

  AdamState psi_adam, gen_adam;
  const std::size_t gen_flat = static_cast<std::size_t>(C) *
                               static_cast<std::size_t>(d) *
                               static_cast<std::size_t>(d);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng = root.split(10000 + static_cast<std::uint64_t>(epoch));
    for (std::size_t i = ntr - 1; i > 0; --i) {
      const std::size_t j = static_cast<std::size_t>(
          shuffle_rng.uniform_int(0, static_cast<long long>(i)));
      std::swap(idx[i], idx[j]);
    }
    Rng aug_rng = root.split(20000 + static_cast<std::uint64_t>(epoch));

    LossBreakdown epoch_sum;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < ntr;
         begin += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end =
          std::min(ntr, begin + static_cast<std::size_t>(cfg.batch_size));
      Tensor xb_t = take_rows(data.xtr, idx, begin, end);
      Tensor yb_t = take_rows(data.ytr, idx, begin, end);

      Tape tape;
      auto leaves = state.psi.inject(tape);
      std::vector<NodeId> raw_leaves, gen_leaves;
      raw_leaves.reserve(static_cast<std::size_t>(C));
      gen_leaves.reserve(static_cast<std::size_t>(C));
      for (int c = 0; c < C; ++c) {
        if (trainable_gens) {
          const NodeId r = tape.leaf(raw[static_cast<std::size_t>(c)], true);
          raw_leaves.push_back(r);
          if (frobenius_norm(raw[static_cast<std::size_t>(c)]) == 0.0) {
            state.collapse_flag = true;  // keep going unnormalized
            gen_leaves.push_back(r);
          } else {
            gen_leaves.push_back(tape.frob_normalize(r, norm_target));
          }
        } else {
          gen_leaves.push_back(
              tape.leaf(state.basis.gens[static_cast<std::size_t>(c)]));
        }
      }
      const NodeId xb = tape.leaf(std::move(xb_t));
      const NodeId yb = tape.leaf(std::move(yb_t));

      LossNodes nodes;
      nodes.emp = loss_emp(tape, mlp_forward(tape, leaves, xb, state.mlp), yb);
      if (K > 0) {
        // K fresh group samples per item: each minibatch row gets its own
        // group element, applied blockwise via the stacked expm path.
        const std::size_t nb = end - begin;
        NodeId equiv_sum = -1, areg_sum = -1;
        std::vector<std::vector<double>> wcols(
            static_cast<std::size_t>(C), std::vector<double>(nb));
        for (int j = 0; j < K; ++j) {
          for (std::size_t i = 0; i < nb; ++i) {
            const std::vector<double> w =
                sample_coeffs(cfg.sampler, C, aug_rng);
            for (int c = 0; c < C; ++c)
              wcols[static_cast<std::size_t>(c)][i] =
                  w[static_cast<std::size_t>(c)];
          }
          NodeId astack = -1;
          for (int c = 0; c < C; ++c) {
            const NodeId s = tape.stack_scale(
                gen_leaves[static_cast<std::size_t>(c)],
                wcols[static_cast<std::size_t>(c)]);
            astack = astack < 0 ? s : tape.add(astack, s);
          }
          const NodeId gstack = tape.expm_blocks(astack);
          const NodeId xaug = tape.block_act_rows(gstack, xb);
          const NodeId ytgt =
              data.action.output_action == OutputAction::kInvariant
                  ? yb
                  : tape.block_act_rows(gstack, yb);
          const NodeId pred = mlp_forward(tape, leaves, xaug, state.mlp);
          const NodeId eterm = equiv_term(tape, pred, ytgt);
          const NodeId aterm = areg_term(tape, xb, xaug);
          equiv_sum = equiv_sum < 0 ? eterm : tape.add(equiv_sum, eterm);
          areg_sum = areg_sum < 0 ? aterm : tape.add(areg_sum, aterm);
        }
        nodes.equiv = tape.scale(equiv_sum, 1.0 / K);
        nodes.areg = tape.scale(areg_sum, 1.0 / K);
      }
      if (cfg.mode != TrainMode::kTrivial) {
        nodes.bsreg = reg_bsreg(tape, gen_leaves);
        nodes.bcreg = reg_bcreg(tape, gen_leaves);
      }
      const NodeId total = loss_total(tape, nodes, weights);
      const LossBreakdown b = read_breakdown(tape, nodes, weights);
      if (!std::isfinite(b.total))
        throw std::runtime_error(
            "fit: non-finite loss at epoch " + std::to_string(epoch) +
            " (emp=" + std::to_string(b.emp) +
            ", equiv=" + std::to_string(b.equiv) +
            ", areg=" + std::to_string(b.areg) +
            ", bsreg=" + std::to_string(b.bsreg) + ")");

      tape.backward(total);
      std::vector<double> psi_grads = state.psi.gather_grads(tape, leaves);
      std::vector<double> psi_flat = state.psi.flat();
      adam_step(psi_flat, psi_grads, psi_adam, cfg.learning_rate);
      state.psi.set_flat(psi_flat);

      if (trainable_gens) {
        std::vector<double> gflat(gen_flat), ggrad(gen_flat);
        std::size_t off = 0;
        for (int c = 0; c < C; ++c) {
          Tensor g = tape.grad(raw_leaves[static_cast<std::size_t>(c)]);
          if (g.numel() == 0) g = Tensor::zeros_like(state.basis.gens[c]);
          apply_mask(state.basis.mask, g);
          for (std::size_t i = 0; i < g.data.size(); ++i) {
            gflat[off + i] = raw[static_cast<std::size_t>(c)].data[i];
            ggrad[off + i] = g.data[i];
          }
          off += g.data.size();
        }
        adam_step(gflat, ggrad, gen_adam, cfg.learning_rate);
        off = 0;
        for (int c = 0; c < C; ++c) {
          Tensor& r = raw[static_cast<std::size_t>(c)];
          for (std::size_t i = 0; i < r.data.size(); ++i)
            r.data[i] = gflat[off + i];
          off += r.data.size();
          apply_mask(state.basis.mask, r);
          state.basis.gens[static_cast<std::size_t>(c)] = r;
        }
        const std::vector<bool> collapsed = normalize_basis(state.basis);
        for (bool f : collapsed)
          if (f) state.collapse_flag = true;
      }

      epoch_sum.emp += b.emp;
      epoch_sum.equiv += b.equiv;
      epoch_sum.areg += b.areg;
      epoch_sum.bsreg += b.bsreg;
      epoch_sum.bcreg += b.bcreg;
      epoch_sum.total += b.total;
      ++batches;
    }

    const double inv = 1.0 / static_cast<double>(batches);
    LossBreakdown epoch_mean{epoch_sum.emp * inv,   epoch_sum.equiv * inv,
                             epoch_sum.areg * inv,  epoch_sum.bsreg * inv,
                             epoch_sum.bcreg * inv, epoch_sum.total * inv};
    state.history.push_back(epoch_mean);
    state.val_mse.push_back(
        data.xva.rows() > 0
            ? mse(mlp_eval(state.psi, state.mlp, data.xva), data.yva)
            : 0.0);
  }

  state.wallclock_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return state;
}

Tensor predict_direct(const TrainedState& state, const Tensor& x) {
  return mlp_eval(state.psi, state.mlp, x);
}

Tensor predict_augmented(const TrainedState& state, const Tensor& x, int k,
                         Rng& rng) {
  if (k < 0) throw ContractError("predict_augmented: k must be nonnegative");
  Tensor acc = mlp_eval(state.psi, state.mlp, x);
  for (int j = 0; j < k; ++j) {
    const GroupSample gs = sample_group(state.basis, state.sampler, rng);
    const Tensor xa = act_input(gs, x, state.action);
    const Tensor pa = mlp_eval(state.psi, state.mlp, xa);
    const Tensor back = inverse_act_output(gs, pa, state.action);
    for (std::size_t i = 0; i < acc.data.size(); ++i)
      acc.data[i] += back.data[i];
  }
  const double inv = 1.0 / static_cast<double>(k + 1);
  for (double& v : acc.data) v *= inv;
  return acc;
}

namespace {

using nlohmann::json;

void write_tensor_raw(std::ofstream& os, const Tensor& t) {
  os.write(reinterpret_cast<const char*>(t.data.data()),
           static_cast<std::streamsize>(t.data.size() * sizeof(double)));
}

Tensor read_tensor_raw(std::ifstream& is, std::vector<std::size_t> shape) {
  Tensor t(std::move(shape));
  is.read(reinterpret_cast<char*>(t.data.data()),
          static_cast<std::streamsize>(t.data.size() * sizeof(double)));
  if (!is) throw std::runtime_error("checkpoint: truncated payload");
  return t;
}

}  // namespace

void save_checkpoint(const TrainedState& state, const std::string& path) {
  json m;
  m["mlp"] = {{"input_dim", state.mlp.input_dim},
              {"output_dim", state.mlp.output_dim},
              {"hidden", state.mlp.hidden},
              {"activation",
               state.mlp.activation == Activation::kRelu ? "relu" : "tanh"}};
  json params = json::array();
  for (const std::string& name : state.psi.names())
    params.push_back({{"name", name},
                      {"shape", state.psi.at(name).shape},
                      {"trainable", state.psi.trainable(name)}});
  m["params"] = params;
  m["basis"] = {{"count", state.basis.count},
                {"dim", state.basis.dim},
                {"d_norm", state.basis.d_norm}};
  m["action"] = {{"dim", state.action.dim},
                 {"timesteps_in", state.action.timesteps_in},
                 {"timesteps_out", state.action.timesteps_out},
                 {"output_action",
                  state.action.output_action == OutputAction::kInvariant
                      ? "invariant"
                      : "equivariant"}};
  m["sampler"] = {{"gamma", state.sampler.gamma},
                  {"kind",
                   state.sampler.kind == SamplerConfig::Kind::kIntegerGrid
                       ? "integer-grid"
                       : "continuous-uniform"}};
  m["collapse_flag"] = state.collapse_flag;
  m["epochs_trained"] = state.history.size();

  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_checkpoint: cannot open " + path);
  os << m.dump() << "\n";
  for (const std::string& name : state.psi.names())
    write_tensor_raw(os, state.psi.at(name));
  write_tensor_raw(os, state.basis.mask);
  for (const Tensor& g : state.basis.gens) write_tensor_raw(os, g);
}

TrainedState load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_checkpoint: cannot open " + path);
  std::string line;
  std::getline(is, line);
  json m = json::parse(line);

  TrainedState state;
  state.mlp.input_dim = m["mlp"]["input_dim"];
  state.mlp.output_dim = m["mlp"]["output_dim"];
  state.mlp.hidden = m["mlp"]["hidden"].get<std::vector<int>>();
  state.mlp.activation =
      m["mlp"]["activation"] == "relu" ? Activation::kRelu : Activation::kTanh;
  for (const json& p : m["params"]) {
    const auto shape = p["shape"].get<std::vector<std::size_t>>();
    state.psi.add(p["name"], read_tensor_raw(is, shape),
                  p["trainable"].get<bool>());
  }
  state.basis.count = m["basis"]["count"];
  state.basis.dim = m["basis"]["dim"];
  state.basis.d_norm = m["basis"]["d_norm"];
  const std::size_t d = static_cast<std::size_t>(state.basis.dim);
  state.basis.mask = read_tensor_raw(is, {d, d});
  for (int c = 0; c < state.basis.count; ++c)
    state.basis.gens.push_back(read_tensor_raw(is, {d, d}));
  state.action.dim = m["action"]["dim"];
  state.action.timesteps_in = m["action"]["timesteps_in"];
  state.action.timesteps_out = m["action"]["timesteps_out"];
  state.action.output_action = m["action"]["output_action"] == "invariant"
                                   ? OutputAction::kInvariant
                                   : OutputAction::kEquivariantSameRep;
  state.sampler.gamma = m["sampler"]["gamma"];
  state.sampler.kind = m["sampler"]["kind"] == "integer-grid"
                           ? SamplerConfig::Kind::kIntegerGrid
                           : SamplerConfig::Kind::kContinuousUniform;
  state.collapse_flag = m["collapse_flag"];
  return state;
}

}  // namespace lieaug
