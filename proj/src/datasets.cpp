#include "lieaug/datasets.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "lieaug/model.hpp"
#include "lieaug/param_store.hpp"
#include "lieaug/rng.hpp"
#include "json.hpp"

namespace lieaug {

namespace {

constexpr double kPi = 3.14159265358979323846;

void gravity_accel(const double* q1, const double* q2, double* a1,
                   double* a2) {
  const double dx = q1[0] - q2[0];
  const double dy = q1[1] - q2[1];
  const double r2 = dx * dx + dy * dy;
  const double inv_r3 = 1.0 / (r2 * std::sqrt(r2));
  a1[0] = -dx * inv_r3;
  a1[1] = -dy * inv_r3;
  a2[0] = dx * inv_r3;
  a2[1] = dy * inv_r3;
}

// One velocity-Verlet step of size h on (q1,p1,q2,p2), unit masses, G=1.
void leapfrog_step(double* s, double h) {
  double* q1 = s + 0;
  double* p1 = s + 2;
  double* q2 = s + 4;
  double* p2 = s + 6;
  double a1[2], a2[2];
  gravity_accel(q1, q2, a1, a2);
  p1[0] += 0.5 * h * a1[0];
  p1[1] += 0.5 * h * a1[1];
  p2[0] += 0.5 * h * a2[0];
  p2[1] += 0.5 * h * a2[1];
  q1[0] += h * p1[0];
  q1[1] += h * p1[1];
  q2[0] += h * p2[0];
  q2[1] += h * p2[1];
  gravity_accel(q1, q2, a1, a2);
  p1[0] += 0.5 * h * a1[0];
  p1[1] += 0.5 * h * a1[1];
  p2[0] += 0.5 * h * a2[0];
  p2[1] += 0.5 * h * a2[1];
}

// Yoshida 4th-order composition; keeps the trajectory-long energy drift
// well below the 1e-6 relative tolerance at dt = 0.01.
void yoshida4_step(double* s, double h) {
  static const double cbrt2 = std::cbrt(2.0);
  static const double w1 = 1.0 / (2.0 - cbrt2);
  static const double w0 = -cbrt2 / (2.0 - cbrt2);
  leapfrog_step(s, w1 * h);
  leapfrog_step(s, w0 * h);
  leapfrog_step(s, w1 * h);
}

// State layout per snapshot: q1x,q1y,p1x,p1y,q2x,q2y,p2x,p2y.
// The integrator works on (q1,p1,q2,p2) pairs directly; same layout.
constexpr int kStateDim = 8;

Tensor two_body_truth_generator() {
  Tensor g({8, 8});
  // block-diag(R,R,R,R) with R = [[0,-1],[1,0]]
  for (int b = 0; b < 4; ++b) {
    g.data[(b * 2 + 0) * 8 + b * 2 + 1] = -1.0;
    g.data[(b * 2 + 1) * 8 + b * 2 + 0] = 1.0;
  }
  return g;
}

struct SampleSink {
  Tensor* x;
  Tensor* y;
  std::size_t filled = 0;
  std::size_t capacity = 0;
  bool full() const { return filled >= capacity; }
  void push(const std::vector<double>& xs, const std::vector<double>& ys) {
    std::memcpy(x->data.data() + filled * xs.size(), xs.data(),
                xs.size() * sizeof(double));
    std::memcpy(y->data.data() + filled * ys.size(), ys.data(),
                ys.size() * sizeof(double));
    ++filled;
  }
};

bool in_train_quadrants(double qx, double qy) {
  return (qx < 0 && qy > 0) || (qx > 0 && qy < 0);
}
bool in_test_quadrants(double qx, double qy) {
  return (qx > 0 && qy > 0) || (qx < 0 && qy < 0);
}

}  // namespace

double two_body_energy(const double* s) {
  const double dx = s[0] - s[4];
  const double dy = s[1] - s[5];
  const double r = std::sqrt(dx * dx + dy * dy);
  const double ke = 0.5 * (s[2] * s[2] + s[3] * s[3] + s[6] * s[6] +
                           s[7] * s[7]);
  return ke - 1.0 / r;
}

void two_body_snapshot_step(const TwoBodyConfig& cfg, double* state) {
  for (int i = 0; i < cfg.steps_per_snapshot; ++i)
    yoshida4_step(state, cfg.dt);
}

Tensor two_body_predict(const TwoBodyConfig& cfg, const Tensor& x) {
  const std::size_t tin = static_cast<std::size_t>(cfg.timesteps_in);
  const std::size_t tout = static_cast<std::size_t>(cfg.timesteps_out);
  if (x.cols() != tin * kStateDim)
    throw ShapeError("two_body_predict: input width mismatch");
  Tensor y({x.rows(), tout * kStateDim});
  for (std::size_t row = 0; row < x.rows(); ++row) {
    double s[kStateDim];
    std::memcpy(s, x.data.data() + row * x.cols() + (tin - 1) * kStateDim,
                kStateDim * sizeof(double));
    for (std::size_t t = 0; t < tout; ++t) {
      two_body_snapshot_step(cfg, s);
      std::memcpy(y.data.data() + row * y.cols() + t * kStateDim, s,
                  kStateDim * sizeof(double));
    }
  }
  return y;
}

Dataset gen_two_body(const TwoBodyConfig& cfg, std::uint64_t seed) {
  const int tin = cfg.timesteps_in;
  const int tout = cfg.timesteps_out;
  const std::size_t n_in = static_cast<std::size_t>(tin) * kStateDim;
  const std::size_t n_out = static_cast<std::size_t>(tout) * kStateDim;

  Dataset ds;
  ds.task = cfg.ood ? "two-body-ood" : "two-body";
  if (tin == 3) ds.task += "-3step";
  ds.seed = seed;
  ds.input_dim = static_cast<int>(n_in);
  ds.output_dim = static_cast<int>(n_out);
  ds.action = ActionSpec{kStateDim, tin, tout,
                         OutputAction::kEquivariantSameRep};
  ds.truth_generators = {two_body_truth_generator()};
  ds.suggested_gamma = 2.0;
  ds.xtr = Tensor({cfg.n_train, n_in});
  ds.ytr = Tensor({cfg.n_train, n_out});
  ds.xva = Tensor({cfg.n_val, n_in});
  ds.yva = Tensor({cfg.n_val, n_out});
  ds.xte = Tensor({cfg.n_test, n_in});
  ds.yte = Tensor({cfg.n_test, n_out});

  SampleSink train{&ds.xtr, &ds.ytr, 0, cfg.n_train};
  SampleSink val{&ds.xva, &ds.yva, 0, cfg.n_val};
  SampleSink test{&ds.xte, &ds.yte, 0, cfg.n_test};

  Rng root(seed);
  const std::size_t snaps = static_cast<std::size_t>(cfg.snapshots_per_traj);
  const std::size_t window = static_cast<std::size_t>(tin + tout);
  if (snaps + 1 < window)
    throw ContractError("gen_two_body: trajectory shorter than one window");

  std::uint64_t traj_id = 0;
  const std::uint64_t traj_limit = 2000000;
  while (!(train.full() && val.full() && test.full())) {
    if (traj_id >= traj_limit)
      throw std::runtime_error("gen_two_body: could not fill splits");
    Rng rng = root.split(traj_id++);
    const double phi = rng.uniform(0.0, 2.0 * kPi);
    const double radius = rng.uniform(cfg.radius_min, cfg.radius_max);
    const double v_circ = 0.5 / std::sqrt(radius);
    const double vt = v_circ * (1.0 + cfg.vel_noise * rng.uniform(-1.0, 1.0));
    const double vr = v_circ * cfg.vel_noise * rng.uniform(-1.0, 1.0);
    const double cx = std::cos(phi), sx = std::sin(phi);
    double s[kStateDim];
    s[0] = radius * cx;
    s[1] = radius * sx;
    s[2] = -vt * sx + vr * cx;
    s[3] = vt * cx + vr * sx;
    s[4] = -s[0];
    s[5] = -s[1];
    s[6] = -s[2];
    s[7] = -s[3];

    std::vector<double> traj((snaps + 1) * kStateDim);
    std::memcpy(traj.data(), s, sizeof(s));
    for (std::size_t t = 1; t <= snaps; ++t) {
      two_body_snapshot_step(cfg, s);
      std::memcpy(traj.data() + t * kStateDim, s, sizeof(s));
    }

    // Trajectories are assigned whole to one split so splits stay disjoint.
    SampleSink* sink = nullptr;
    if (!train.full())
      sink = &train;
    else if (!val.full())
      sink = &val;
    else
      sink = &test;
    const bool is_test = sink == &test;

    std::vector<double> xs(n_in), ys(n_out);
    for (std::size_t t = 0; t + window <= snaps + 1 && !sink->full(); ++t) {
      const double* first = traj.data() + t * kStateDim;
      if (cfg.ood) {
        if (!is_test && !in_train_quadrants(first[0], first[1])) continue;
        if (is_test && !in_test_quadrants(first[0], first[1])) continue;
      }
      std::memcpy(xs.data(), first, n_in * sizeof(double));
      std::memcpy(ys.data(), first + n_in, n_out * sizeof(double));
      sink->push(xs, ys);
    }
  }
  return ds;
}

double discrete_rotation_target(int k, double x, double y, double z) {
  const double period = 2.0 * kPi / static_cast<double>(k);
  double ang = std::fmod(std::atan2(y, x), period);
  if (ang < 0) ang += period;
  return z / (1.0 + ang);
}

Dataset gen_discrete_rotation(int k, const SplitSizes& sizes,
                              std::uint64_t seed) {
  if (k < 2) throw ContractError("gen_discrete_rotation: k must be >= 2");
  Dataset ds;
  ds.task = "discrete-rotation";
  ds.seed = seed;
  ds.input_dim = 3;
  ds.output_dim = 1;
  ds.action = ActionSpec{3, 1, 1, OutputAction::kInvariant};
  Tensor g({3, 3});
  g.data[0 * 3 + 1] = -1.0;
  g.data[1 * 3 + 0] = 1.0;
  ds.truth_generators = {g};
  ds.suggested_gamma = 3.0;

  Rng root(seed);
  auto fill = [&](Tensor& x, Tensor& y, std::size_t n, std::uint64_t stream) {
    x = Tensor({n, 3});
    y = Tensor({n, 1});
    Rng rng = root.split(stream);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = rng.normal(), b = rng.normal(), c = rng.normal();
      x.data[i * 3 + 0] = a;
      x.data[i * 3 + 1] = b;
      x.data[i * 3 + 2] = c;
      y.data[i] = discrete_rotation_target(k, a, b, c);
    }
  };
  fill(ds.xtr, ds.ytr, sizes.train, 1);
  fill(ds.xva, ds.yva, sizes.val, 2);
  fill(ds.xte, ds.yte, sizes.test, 3);
  return ds;
}

double partial_permutation_target(const double* x) {
  return x[0] + x[1] + x[2] + x[3] * x[3] - x[4] * x[4];
}

Dataset gen_partial_permutation(const SplitSizes& sizes, std::uint64_t seed) {
  Dataset ds;
  ds.task = "partial-permutation";
  ds.seed = seed;
  ds.input_dim = 5;
  ds.output_dim = 1;
  ds.action = ActionSpec{5, 1, 1, OutputAction::kInvariant};
  // Rotation about the (1,1,1) axis of the first three coordinates: the
  // one-parameter group whose discrete elements permute x1,x2,x3.
  Tensor g({5, 5});
  g.data[0 * 5 + 1] = -1.0;
  g.data[0 * 5 + 2] = 1.0;
  g.data[1 * 5 + 0] = 1.0;
  g.data[1 * 5 + 2] = -1.0;
  g.data[2 * 5 + 0] = -1.0;
  g.data[2 * 5 + 1] = 1.0;
  ds.truth_generators = {g};
  ds.suggested_gamma = 3.0;

  Rng root(seed);
  auto fill = [&](Tensor& x, Tensor& y, std::size_t n, std::uint64_t stream) {
    x = Tensor({n, 5});
    y = Tensor({n, 1});
    Rng rng = root.split(stream);
    for (std::size_t i = 0; i < n; ++i) {
      for (int j = 0; j < 5; ++j)
        x.data[i * 5 + j] = rng.uniform(-100.0, 100.0);
      y.data[i] = partial_permutation_target(x.data.data() + i * 5);
    }
  };
  fill(ds.xtr, ds.ytr, sizes.train, 1);
  fill(ds.xva, ds.yva, sizes.val, 2);
  fill(ds.xte, ds.yte, sizes.test, 3);
  return ds;
}

Dataset gen_no_symmetry(const SplitSizes& sizes, std::uint64_t seed,
                        double noise_std) {
  Dataset ds;
  ds.task = "no-symmetry";
  ds.seed = seed;
  ds.input_dim = 5;
  ds.output_dim = 1;
  ds.action = ActionSpec{5, 1, 1, OutputAction::kInvariant};
  ds.suggested_gamma = 5.0;

  static const double mu[5] = {0.2, -0.1, 0.3, -0.2, 0.15};
  static const double var[5] = {1, 2, 4, 8, 16};

  Rng root(seed);

  // Frozen random target network: 5 -> 64 -> 64 -> 1, tanh, weights N(0,1e-2).
  ParamStore target;
  MlpSpec tspec{5, 1, {64, 64}, Activation::kTanh};
  Rng wrng = root.split(0xf0);
  {
    Rng dummy = wrng;  // layout via mlp_init_params, then overwrite draws
    mlp_init_params(target, tspec, dummy, "fstar");
    for (const auto& name : target.names())
      for (double& v : target.at(name).data) v = 0.01 * wrng.normal();
  }

  auto fill = [&](Tensor& x, Tensor& y, std::size_t n, std::uint64_t stream) {
    x = Tensor({n, 5});
    Rng rng = root.split(stream);
    Rng nrng = root.split(stream + 0x10);
    for (std::size_t i = 0; i < n; ++i)
      for (int j = 0; j < 5; ++j)
        x.data[i * 5 + j] = mu[j] + std::sqrt(var[j]) * rng.normal();
    y = mlp_eval(target, tspec, x, "fstar");
    if (noise_std > 0)
      for (double& v : y.data) v += noise_std * nrng.normal();
  };
  fill(ds.xtr, ds.ytr, sizes.train, 1);
  fill(ds.xva, ds.yva, sizes.val, 2);
  fill(ds.xte, ds.yte, sizes.test, 3);
  return ds;
}

Dataset gen_task(const std::string& task, std::uint64_t seed) {
  if (task == "two-body") {
    return gen_two_body(TwoBodyConfig{}, seed);
  } else if (task == "two-body-ood") {
    TwoBodyConfig cfg;
    cfg.ood = true;
    return gen_two_body(cfg, seed);
  } else if (task == "two-body-3step") {
    TwoBodyConfig cfg;
    cfg.timesteps_in = 3;
    cfg.timesteps_out = 3;
    return gen_two_body(cfg, seed);
  } else if (task == "discrete-rotation") {
    return gen_discrete_rotation(6, SplitSizes{54000, 6000, 10000}, seed);
  } else if (task == "partial-permutation") {
    return gen_partial_permutation(SplitSizes{54000, 6000, 10000}, seed);
  } else if (task == "no-symmetry") {
    return gen_no_symmetry(SplitSizes{50000, 10000, 10000}, seed);
  }
  throw ContractError(
      "unknown task '" + task +
      "'; valid: two-body, two-body-ood, two-body-3step, discrete-rotation, "
      "partial-permutation, no-symmetry");
}

namespace {

using nlohmann::json;

void write_tensor(std::ofstream& os, const Tensor& t) {
  os.write(reinterpret_cast<const char*>(t.data.data()),
           static_cast<std::streamsize>(t.data.size() * sizeof(double)));
}

void read_tensor(std::ifstream& is, Tensor& t,
                 const std::vector<std::size_t>& shape) {
  t = Tensor(shape);
  is.read(reinterpret_cast<char*>(t.data.data()),
          static_cast<std::streamsize>(t.data.size() * sizeof(double)));
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& path) {
  json manifest;
  manifest["task"] = ds.task;
  manifest["seed"] = ds.seed;
  manifest["input_dim"] = ds.input_dim;
  manifest["output_dim"] = ds.output_dim;
  manifest["action"] = {
      {"dim", ds.action.dim},
      {"timesteps_in", ds.action.timesteps_in},
      {"timesteps_out", ds.action.timesteps_out},
      {"output_action",
       ds.action.output_action == OutputAction::kInvariant ? "invariant"
                                                           : "equivariant"}};
  manifest["suggested_gamma"] = ds.suggested_gamma;
  manifest["splits"] = {{"train", ds.xtr.rows()},
                        {"val", ds.xva.rows()},
                        {"test", ds.xte.rows()}};
  manifest["truth_generators"] = ds.truth_generators.size();
  manifest["generator_dim"] =
      ds.truth_generators.empty() ? 0 : ds.truth_generators[0].rows();

  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_dataset: cannot open " + path);
  os << manifest.dump() << "\n";
  write_tensor(os, ds.xtr);
  write_tensor(os, ds.ytr);
  write_tensor(os, ds.xva);
  write_tensor(os, ds.yva);
  write_tensor(os, ds.xte);
  write_tensor(os, ds.yte);
  for (const Tensor& g : ds.truth_generators) write_tensor(os, g);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_dataset: cannot open " + path);
  std::string line;
  std::getline(is, line);
  json manifest = json::parse(line);

  Dataset ds;
  ds.task = manifest["task"];
  ds.seed = manifest["seed"];
  ds.input_dim = manifest["input_dim"];
  ds.output_dim = manifest["output_dim"];
  ds.action.dim = manifest["action"]["dim"];
  ds.action.timesteps_in = manifest["action"]["timesteps_in"];
  ds.action.timesteps_out = manifest["action"]["timesteps_out"];
  ds.action.output_action =
      manifest["action"]["output_action"] == "invariant"
          ? OutputAction::kInvariant
          : OutputAction::kEquivariantSameRep;
  ds.suggested_gamma = manifest["suggested_gamma"];

  const std::size_t ntr = manifest["splits"]["train"];
  const std::size_t nva = manifest["splits"]["val"];
  const std::size_t nte = manifest["splits"]["test"];
  const std::size_t ni = static_cast<std::size_t>(ds.input_dim);
  const std::size_t no = static_cast<std::size_t>(ds.output_dim);
  read_tensor(is, ds.xtr, {ntr, ni});
  read_tensor(is, ds.ytr, {ntr, no});
  read_tensor(is, ds.xva, {nva, ni});
  read_tensor(is, ds.yva, {nva, no});
  read_tensor(is, ds.xte, {nte, ni});
  read_tensor(is, ds.yte, {nte, no});
  const std::size_t ngen = manifest["truth_generators"];
  const std::size_t gd = manifest["generator_dim"];
  for (std::size_t i = 0; i < ngen; ++i) {
    Tensor g;
    read_tensor(is, g, {gd, gd});
    ds.truth_generators.push_back(std::move(g));
  }
  if (!is) throw std::runtime_error("load_dataset: truncated file " + path);
  return ds;
}

}  // namespace lieaug
