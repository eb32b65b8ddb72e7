#include "lieaug/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "lieaug/matexp.hpp"

namespace lieaug {

double cosine_sim_flat(const Tensor& a, const Tensor& b) {
  if (a.numel() != b.numel())
    throw ShapeError("cosine_sim_flat: size mismatch");
  const double na = frobenius_norm(a), nb = frobenius_norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot_flat(a, b) / (na * nb);
}

double frobenius_projection(const Tensor& learned, const Tensor& truth) {
  if (!learned.same_shape(truth))
    throw ShapeError("frobenius_projection: shape mismatch");
  const double nt2 = dot_flat(truth, truth);
  if (nt2 == 0.0) throw ContractError("frobenius_projection: zero truth");
  return dot_flat(learned, truth) / nt2;
}

BasisReport basis_cosine_similarity(const std::vector<Tensor>& learned,
                                    const std::vector<Tensor>& truth) {
  BasisReport report;
  std::vector<bool> taken(truth.size(), false);
  double cos_sum = 0, proj_sum = 0;
  std::size_t matched = 0;
  for (std::size_t i = 0; i < learned.size(); ++i) {
    BasisMatch m;
    m.learned_index = static_cast<int>(i);
    double best = -1.0;
    for (std::size_t t = 0; t < truth.size(); ++t) {
      if (taken[t]) continue;
      const double c = std::abs(cosine_sim_flat(learned[i], truth[t]));
      if (c > best + 1e-15) {
        best = c;
        m.truth_index = static_cast<int>(t);
        m.abs_cos = c;
      }
    }
    if (m.truth_index >= 0) {
      taken[static_cast<std::size_t>(m.truth_index)] = true;
      const double raw = frobenius_projection(
          learned[i], truth[static_cast<std::size_t>(m.truth_index)]);
      m.sign = raw < 0 ? -1.0 : 1.0;
      m.frob_projection = m.sign * raw;
      cos_sum += m.abs_cos;
      proj_sum += m.frob_projection;
      ++matched;
    }
    report.matches.push_back(m);
  }
  if (matched > 0) {
    report.mean_abs_cos = cos_sum / static_cast<double>(matched);
    report.mean_frob_projection = proj_sum / static_cast<double>(matched);
  }
  return report;
}

namespace {

GeneratorBasis wrap_basis(const std::vector<Tensor>& generators) {
  if (generators.empty())
    throw ContractError("metrics: empty generator list");
  GeneratorBasis b;
  b.count = static_cast<int>(generators.size());
  b.dim = static_cast<int>(generators[0].rows());
  b.d_norm = static_cast<double>(b.dim);
  b.mask = mask_full(b.dim);
  b.gens = generators;
  return b;
}

double row_l1(const Tensor& t, std::size_t row) {
  const std::size_t c = t.cols();
  double s = 0;
  for (std::size_t j = 0; j < c; ++j) s += std::abs(t.data[row * c + j]);
  return s;
}

double row_l2(const Tensor& a, const Tensor& b, std::size_t row) {
  const std::size_t c = a.cols();
  double s = 0;
  for (std::size_t j = 0; j < c; ++j) {
    const double d = a.data[row * c + j] - b.data[row * c + j];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

double equivariance_error(const Predictor& psi,
                          const std::vector<Tensor>& generators,
                          const Tensor& x, const ActionSpec& action,
                          const SamplerConfig& sampler, int k, Rng& rng) {
  if (k <= 0) throw ContractError("equivariance_error: k must be positive");
  const GeneratorBasis basis = wrap_basis(generators);
  const Tensor base = psi(x);
  Tensor acc_a = Tensor::zeros_like(base);
  Tensor acc_b = Tensor::zeros_like(base);
  for (int j = 0; j < k; ++j) {
    const GroupSample gs = sample_group(basis, sampler, rng);
    const Tensor ta = act_output(gs, base, action);
    const Tensor tb = psi(act_input(gs, x, action));
    for (std::size_t i = 0; i < acc_a.data.size(); ++i) {
      acc_a.data[i] += ta.data[i];
      acc_b.data[i] += tb.data[i];
    }
  }
  const std::size_t n = x.rows();
  Tensor diff = acc_a;
  for (std::size_t i = 0; i < diff.data.size(); ++i)
    diff.data[i] = (acc_a.data[i] - acc_b.data[i]) / static_cast<double>(k);
  double total = 0;
  for (std::size_t r = 0; r < n; ++r) total += row_l1(diff, r);
  return total / static_cast<double>(n);
}

double equivariance_error_alt(const Predictor& psi,
                              const std::vector<Tensor>& generators,
                              const Tensor& x, const ActionSpec& action,
                              const SamplerConfig& sampler, int k, Rng& rng) {
  if (k <= 0)
    throw ContractError("equivariance_error_alt: k must be positive");
  const GeneratorBasis basis = wrap_basis(generators);
  const Tensor base = psi(x);
  const std::size_t n = x.rows();
  double total = 0;
  for (int j = 0; j < k; ++j) {
    const GroupSample gs = sample_group(basis, sampler, rng);
    const Tensor ta = act_output(gs, base, action);
    const Tensor tb = psi(act_input(gs, x, action));
    Tensor diff = ta;
    for (std::size_t i = 0; i < diff.data.size(); ++i)
      diff.data[i] = tb.data[i] - ta.data[i];
    for (std::size_t r = 0; r < n; ++r) total += row_l1(diff, r);
  }
  return total / static_cast<double>(n * static_cast<std::size_t>(k));
}

NoSymmetrySignature no_symmetry_signature(
    const std::vector<GeneratorBasis>& runs) {
  NoSymmetrySignature sig;
  std::vector<EntryCoord> seen;
  for (const GeneratorBasis& basis : runs) {
    double mass = 0, top = -1;
    EntryCoord coord;
    for (int c = 0; c < basis.count; ++c) {
      const Tensor& g = basis.gens[static_cast<std::size_t>(c)];
      const std::size_t d = g.cols();
      for (std::size_t i = 0; i < g.data.size(); ++i) {
        const double a = std::abs(g.data[i]);
        mass += a;
        if (a > top) {
          top = a;
          coord = {c, static_cast<int>(i / d), static_cast<int>(i % d)};
        }
      }
    }
    if (mass <= 0)
      throw ContractError("no_symmetry_signature: all-zero basis");
    sig.mass_fraction.push_back(top / mass);
    sig.top_entry.push_back(coord);
    if (std::find(seen.begin(), seen.end(), coord) == seen.end())
      seen.push_back(coord);
  }
  sig.distinct_locations = static_cast<int>(seen.size());
  return sig;
}

VarianceProbe mc_variance_probe(const Predictor& psi,
                                const GeneratorBasis& basis, const Tensor& x,
                                const ActionSpec& action,
                                const SamplerConfig& sampler,
                                const std::vector<int>& k_list, int trials,
                                Rng& rng) {
  if (trials < 2) throw ContractError("mc_variance_probe: trials < 2");
  VarianceProbe probe;
  probe.k_values = k_list;
  const Tensor base = psi(x);
  const std::size_t n = x.rows();
  for (int k : k_list) {
    if (k <= 0) throw ContractError("mc_variance_probe: k must be positive");
    std::vector<double> estimates;
    estimates.reserve(static_cast<std::size_t>(trials));
    for (int t = 0; t < trials; ++t) {
      double total = 0;
      for (int j = 0; j < k; ++j) {
        const GroupSample gs = sample_group(basis, sampler, rng);
        const Tensor ta = act_output(gs, base, action);
        const Tensor tb = psi(act_input(gs, x, action));
        Tensor diff = ta;
        for (std::size_t i = 0; i < diff.data.size(); ++i)
          diff.data[i] = tb.data[i] - ta.data[i];
        for (std::size_t r = 0; r < n; ++r) total += row_l1(diff, r);
      }
      estimates.push_back(total /
                          static_cast<double>(n * static_cast<std::size_t>(k)));
    }
    double mean = 0;
    for (double e : estimates) mean += e;
    mean /= static_cast<double>(trials);
    double var = 0;
    for (double e : estimates) var += (e - mean) * (e - mean);
    var /= static_cast<double>(trials - 1);
    probe.variances.push_back(var);
  }
  double vmax = 0;
  for (double v : probe.variances) vmax = std::max(vmax, v);
  if (vmax <= 1e-20) {
    probe.degenerate = true;
    probe.slope = std::numeric_limits<double>::quiet_NaN();
    return probe;
  }
  // least squares slope of log(var) on log(K)
  const std::size_t m = k_list.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double lx = std::log(static_cast<double>(k_list[i]));
    const double ly = std::log(std::max(probe.variances[i], 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = static_cast<double>(m) * sxx - sx * sx;
  if (denom == 0) throw ContractError("mc_variance_probe: need >1 distinct K");
  probe.slope = (static_cast<double>(m) * sxy - sx * sy) / denom;
  return probe;
}

namespace {

void block_rotate(double theta, const double* in, double* out) {
  const double c = std::cos(theta), s = std::sin(theta);
  for (int b = 0; b < 4; ++b) {
    const double u = in[2 * b], v = in[2 * b + 1];
    out[2 * b] = c * u - s * v;
    out[2 * b + 1] = s * u + c * v;
  }
}

}  // namespace

bool alternative_rep_check(const Tensor& l_learned,
                           const std::vector<double>& w_grid, double tol) {
  if (l_learned.rank() != 2 || l_learned.rows() != 8 || l_learned.cols() != 8)
    throw ShapeError("alternative_rep_check: expects an 8x8 generator");
  // Probe states on the symmetric subspace q1 = -q2, p1 = -p2.
  Rng rng(12345);
  std::vector<std::array<double, 8>> states;
  for (int s = 0; s < 5; ++s) {
    std::array<double, 8> x{};
    for (int i = 0; i < 4; ++i) x[static_cast<std::size_t>(i)] =
        rng.uniform(-1.0, 1.0);
    for (int i = 0; i < 4; ++i)
      x[static_cast<std::size_t>(4 + i)] = -x[static_cast<std::size_t>(i)];
    states.push_back(x);
  }
  for (double map : {1.0, 2.0}) {
    bool ok = true;
    for (double w : w_grid) {
      Tensor a = l_learned;
      for (double& v : a.data) v *= w;
      const Tensor g = expm(a);
      for (const auto& x : states) {
        double gx[8] = {0}, rx[8];
        for (int i = 0; i < 8; ++i)
          for (int j = 0; j < 8; ++j)
            gx[i] += g.at(static_cast<std::size_t>(i),
                          static_cast<std::size_t>(j)) *
                     x[static_cast<std::size_t>(j)];
        block_rotate(map * w, x.data(), rx);
        for (int i = 0; i < 8; ++i)
          if (std::abs(gx[i] - rx[i]) > tol) ok = false;
      }
      if (!ok) break;
    }
    if (ok) return true;
  }
  return false;
}

OodBoundCheck ood_bound_check(const Predictor& psi, const Tensor& x,
                              const Tensor& y,
                              const std::vector<Tensor>& generators,
                              const ActionSpec& action,
                              const SamplerConfig& sampler, int n_group,
                              Rng& rng) {
  const GeneratorBasis basis = wrap_basis(generators);
  const Tensor base = psi(x);
  const std::size_t n = x.rows();
  double risk = 0;
  for (std::size_t r = 0; r < n; ++r) risk += row_l2(base, y, r);
  risk /= static_cast<double>(n);

  OodBoundCheck check;
  check.min_slack = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n_group; ++j) {
    const GroupSample gs = sample_group(basis, sampler, rng);
    const Tensor gx_pred = psi(act_input(gs, x, action));
    const Tensor gy = act_output(gs, y, action);
    const Tensor g_base = act_output(gs, base, action);
    double shifted = 0, dev = 0;
    for (std::size_t r = 0; r < n; ++r) {
      shifted += row_l2(gx_pred, gy, r);
      double l1 = 0;
      const std::size_t c = gx_pred.cols();
      for (std::size_t col = 0; col < c; ++col)
        l1 += std::abs(gx_pred.data[r * c + col] - g_base.data[r * c + col]);
      dev += l1;
    }
    shifted /= static_cast<double>(n);
    dev /= static_cast<double>(n);
    const double slack = risk + dev - shifted;
    check.slack.push_back(slack);
    check.min_slack = std::min(check.min_slack, slack);
    if (slack < 0) ++check.violations;
  }
  return check;
}

}  // namespace lieaug
