#include "balab/gmres.hpp"

#include <cmath>
#include <stdexcept>

namespace balab {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double nrm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, const std::vector<double>& x, std::vector<double>& y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace

GmresResult gmres(const LinearApply& apply, const LinearApply& precond,
                  const std::vector<double>& b, std::vector<double>& x, const GmresOptions& opt) {
  const std::size_t n = b.size();
  if (x.size() != n) throw std::invalid_argument("gmres: guess and rhs sizes differ");
  if (opt.restart < 1 || opt.max_iters < 1) throw std::invalid_argument("gmres: bad options");

  const double bnorm = nrm2(b);
  GmresResult res;
  if (bnorm == 0.0) {
    x.assign(n, 0.0);
    res.converged = true;
    return res;
  }

  const int m = opt.restart;
  std::vector<std::vector<double>> v(static_cast<std::size_t>(m + 1));
  std::vector<std::vector<double>> zs(static_cast<std::size_t>(m));  // preconditioned directions
  std::vector<double> h(static_cast<std::size_t>((m + 1) * m), 0.0);
  std::vector<double> cs(static_cast<std::size_t>(m)), sn(static_cast<std::size_t>(m)),
      g(static_cast<std::size_t>(m + 1));
  std::vector<double> w(n), z(n);

  auto happly = [&](int col, int row) -> double& {
    return h[static_cast<std::size_t>(row) * m + col];
  };

  int total = 0;
  while (total < opt.max_iters) {
    // outer restart: r = b - A x
    apply(x, w);
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - w[i];
    double beta = nrm2(r);
    res.residual = beta / bnorm;
    if (res.residual <= opt.tol) {
      res.converged = true;
      return res;
    }
    v[0] = r;
    for (double& t : v[0]) t /= beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;

    int k = 0;
    for (; k < m && total < opt.max_iters; ++k, ++total) {
      if (precond)
        precond(v[static_cast<std::size_t>(k)], z);
      else
        z = v[static_cast<std::size_t>(k)];
      zs[static_cast<std::size_t>(k)] = z;
      apply(z, w);
      // modified Gram-Schmidt
      for (int row = 0; row <= k; ++row) {
        const double hij = dot(w, v[static_cast<std::size_t>(row)]);
        happly(k, row) = hij;
        axpy(-hij, v[static_cast<std::size_t>(row)], w);
      }
      const double hk1 = nrm2(w);
      happly(k, k + 1) = hk1;
      if (hk1 > 0.0) {
        v[static_cast<std::size_t>(k + 1)] = w;
        for (double& t : v[static_cast<std::size_t>(k + 1)]) t /= hk1;
      }
      // apply accumulated Givens rotations to the new column
      for (int row = 0; row < k; ++row) {
        const double t1 = happly(k, row);
        const double t2 = happly(k, row + 1);
        happly(k, row) = cs[static_cast<std::size_t>(row)] * t1 + sn[static_cast<std::size_t>(row)] * t2;
        happly(k, row + 1) = -sn[static_cast<std::size_t>(row)] * t1 + cs[static_cast<std::size_t>(row)] * t2;
      }
      const double t1 = happly(k, k);
      const double t2 = happly(k, k + 1);
      const double rho = std::hypot(t1, t2);
      if (rho == 0.0) {
        cs[static_cast<std::size_t>(k)] = 1.0;
        sn[static_cast<std::size_t>(k)] = 0.0;
      } else {
        cs[static_cast<std::size_t>(k)] = t1 / rho;
        sn[static_cast<std::size_t>(k)] = t2 / rho;
      }
      happly(k, k) = rho;
      happly(k, k + 1) = 0.0;
      const double gk = g[static_cast<std::size_t>(k)];
      g[static_cast<std::size_t>(k)] = cs[static_cast<std::size_t>(k)] * gk;
      g[static_cast<std::size_t>(k + 1)] = -sn[static_cast<std::size_t>(k)] * gk;

      res.residual = std::abs(g[static_cast<std::size_t>(k + 1)]) / bnorm;
      res.iterations = total + 1;
      if (res.residual <= opt.tol || hk1 == 0.0) {
        ++k;
        break;
      }
    }

    // back substitution on the k×k triangular system
    std::vector<double> y(static_cast<std::size_t>(k), 0.0);
    for (int row = k - 1; row >= 0; --row) {
      double s = g[static_cast<std::size_t>(row)];
      for (int col = row + 1; col < k; ++col) s -= happly(col, row) * y[static_cast<std::size_t>(col)];
      y[static_cast<std::size_t>(row)] = (happly(row, row) != 0.0) ? s / happly(row, row) : 0.0;
    }
    for (int col = 0; col < k; ++col) axpy(y[static_cast<std::size_t>(col)], zs[static_cast<std::size_t>(col)], x);

    if (res.residual <= opt.tol) {
      res.converged = true;
      return res;
    }
  }
  return res;
}

}  // namespace balab
