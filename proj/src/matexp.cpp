#include "lieaug/matexp.hpp"

#include <cmath>
#include <vector>

#include "lieaug/kernels.hpp"

namespace lieaug {

namespace {

constexpr std::size_t kMaxDim = 64;

// Pade-13 numerator coefficients (Higham 2005).
constexpr double kB[14] = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0,  129060195264000.0,   10559470521600.0,
    670442572800.0,      33522128640.0,       1323241920.0,
    40840800.0,          960960.0,            16380.0,
    182.0,               1.0};

constexpr double kTheta13 = 5.371920351148152;

double one_norm(const Tensor& a) {
  const std::size_t d = a.rows();
  double m = 0;
  for (std::size_t j = 0; j < d; ++j) {
    double s = 0;
    for (std::size_t i = 0; i < d; ++i) s += std::fabs(a.data[i * d + j]);
    m = std::max(m, s);
  }
  return m;
}

Tensor lin(const Tensor& x, double cx, const Tensor& y, double cy) {
  Tensor r = Tensor::zeros_like(x);
  for (std::size_t i = 0; i < r.data.size(); ++i)
    r.data[i] = cx * x.data[i] + cy * y.data[i];
  return r;
}

void axpy(Tensor& y, double c, const Tensor& x) {
  for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] += c * x.data[i];
}

// Solve P X = Q in place of Q via LU with partial pivoting.
Tensor lu_solve(Tensor p, Tensor q) {
  const std::size_t d = p.rows();
  std::vector<std::size_t> piv(d);
  for (std::size_t i = 0; i < d; ++i) piv[i] = i;
  for (std::size_t k = 0; k < d; ++k) {
    std::size_t imax = k;
    double vmax = std::fabs(p.data[k * d + k]);
    for (std::size_t i = k + 1; i < d; ++i) {
      const double v = std::fabs(p.data[i * d + k]);
      if (v > vmax) {
        vmax = v;
        imax = i;
      }
    }
    if (imax != k) {
      for (std::size_t j = 0; j < d; ++j) {
        std::swap(p.data[k * d + j], p.data[imax * d + j]);
        std::swap(q.data[k * d + j], q.data[imax * d + j]);
      }
    }
    const double pivot = p.data[k * d + k];
    for (std::size_t i = k + 1; i < d; ++i) {
      const double f = p.data[i * d + k] / pivot;
      p.data[i * d + k] = 0.0;
      if (f == 0.0) continue;
      for (std::size_t j = k + 1; j < d; ++j)
        p.data[i * d + j] -= f * p.data[k * d + j];
      for (std::size_t j = 0; j < d; ++j)
        q.data[i * d + j] -= f * q.data[k * d + j];
    }
  }
  // back substitution
  for (std::size_t kk = d; kk-- > 0;) {
    const double pivot = p.data[kk * d + kk];
    for (std::size_t j = 0; j < d; ++j) q.data[kk * d + j] /= pivot;
    for (std::size_t i = 0; i < kk; ++i) {
      const double f = p.data[i * d + kk];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < d; ++j)
        q.data[i * d + j] -= f * q.data[kk * d + j];
    }
  }
  return q;
}

void check_square(const Tensor& a, const char* who) {
  if (a.rank() != 2 || a.rows() != a.cols())
    throw ShapeError(std::string(who) + ": expected square matrix, got " +
                     shape_str(a));
  if (a.rows() > kMaxDim)
    throw ShapeError(std::string(who) + ": dim exceeds supported maximum");
}

}  // namespace

Tensor expm(const Tensor& a) {
  check_square(a, "expm");
  if (!a.all_finite()) throw std::domain_error("expm: non-finite entries");
  const std::size_t d = a.rows();

  const double nrm = one_norm(a);
  int s = 0;
  if (nrm > kTheta13)
    s = static_cast<int>(std::ceil(std::log2(nrm / kTheta13)));
  Tensor as = a;
  if (s > 0) {
    const double f = std::ldexp(1.0, -s);
    for (double& v : as.data) v *= f;
  }

  const Tensor id = Tensor::identity(d);
  const Tensor a2 = matmul(as, as);
  const Tensor a4 = matmul(a2, a2);
  const Tensor a6 = matmul(a2, a4);

  Tensor w = lin(a6, kB[13], a4, kB[11]);
  axpy(w, kB[9], a2);
  Tensor u_inner = matmul(a6, w);
  axpy(u_inner, kB[7], a6);
  axpy(u_inner, kB[5], a4);
  axpy(u_inner, kB[3], a2);
  axpy(u_inner, kB[1], id);
  const Tensor u = matmul(as, u_inner);

  Tensor z = lin(a6, kB[12], a4, kB[10]);
  axpy(z, kB[8], a2);
  Tensor v = matmul(a6, z);
  axpy(v, kB[6], a6);
  axpy(v, kB[4], a4);
  axpy(v, kB[2], a2);
  axpy(v, kB[0], id);

  Tensor r = lu_solve(lin(v, 1.0, u, -1.0), lin(v, 1.0, u, 1.0));
  for (int i = 0; i < s; ++i) r = matmul(r, r);
  return r;
}

FrechetResult expm_frechet(const Tensor& a, const Tensor& e) {
  check_square(a, "expm_frechet");
  if (!a.same_shape(e))
    throw ShapeError("expm_frechet: direction shape " + shape_str(e) +
                     " does not match " + shape_str(a));
  const std::size_t d = a.rows();
  Tensor blk({2 * d, 2 * d});
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      blk.data[i * 2 * d + j] = a.data[i * d + j];
      blk.data[i * 2 * d + d + j] = e.data[i * d + j];
      blk.data[(d + i) * 2 * d + d + j] = a.data[i * d + j];
    }
  const Tensor eb = expm(blk);
  FrechetResult res{Tensor({d, d}), Tensor({d, d})};
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      res.exp_a.data[i * d + j] = eb.data[i * 2 * d + j];
      res.deriv.data[i * d + j] = eb.data[i * 2 * d + d + j];
    }
  return res;
}

Tensor expm_adjoint(const Tensor& a, const Tensor& g) {
  check_square(a, "expm_adjoint");
  if (!a.same_shape(g))
    throw ShapeError("expm_adjoint: gradient shape mismatch");
  const std::size_t d = a.rows();
  Tensor at({d, d});
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) at.data[i * d + j] = a.data[j * d + i];
  return expm_frechet(at, g).deriv;
}

}  // namespace lieaug
