#include "balab/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace balab {

namespace {

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace

ComplexForm flat_metric_form(const GridDomain& grid) {
  return HermitianMatrixField::flat(grid).form();
}

double balanced_residual(const DerivativeEngine& eng, const HermitianMatrixField& metric) {
  const int n = metric.n();
  ComplexForm q = wedge_power_over_factorial(metric.form(), n - 1);
  ComplexForm d = del(eng, q);
  d += dbar(eng, q);
  return d.sup_norm();
}

HermitianMatrixField root_pairing_matrix(const ComplexForm& q) {
  const GridDomain& g = q.domain();
  const int n = g.n;
  const ComplexForm vol = wedge_power_over_factorial(flat_metric_form(g), n);
  const CplxField vol_top = top_coefficient(vol);
  HermitianMatrixField out(g);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      ComplexForm ejk(g);
      ejk.at(FormKey{Mask{1} << j, Mask{1} << k}).assign(g.num_points(), Complex(0.0, 1.0));
      const CplxField t = top_coefficient(wedge(ejk, q));
      CplxField& dst = out.entry(j, k);
      for (std::size_t i = 0; i < t.size(); ++i) dst[i] = t[i] / vol_top[i];
    }
  return out;
}

HermitianMatrixField michelsohn_root(const ComplexForm& q, double hermiticity_tol) {
  const GridDomain& g = q.domain();
  const int n = g.n;
  HermitianMatrixField p = root_pairing_matrix(q);

  double scale = 0.0;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      scale = std::max(scale, sup_norm(p.entry(j, k)));
  if (p.hermiticity_residual() > hermiticity_tol * std::max(1.0, scale))
    throw std::invalid_argument(
        "michelsohn_root: pairing matrix is not Hermitian; the input is not a real form");
  p.require_positive(0.0, "michelsohn_root");

  HermitianMatrixField out(g);
  for (std::size_t i = 0; i < g.num_points(); ++i) {
    Eigen::MatrixXcd pm = p.at(i);
    pm = (pm + pm.adjoint()) / 2.0;
    const double det = pm.determinant().real();
    const Eigen::MatrixXcd h =
        std::pow(det, 1.0 / (n - 1)) * pm.inverse().transpose();
    out.set(i, (h + h.adjoint()) / 2.0);
  }
  return out;
}

RealField TorsionReport::quadratic_combination() const {
  RealField out(q_distinct.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = 0.5 * q_distinct[i] + q_trace[i] - tau_sq[i];
  return out;
}

TorsionReport chern_torsion(const DerivativeEngine& eng, const HermitianMatrixField& metric) {
  const GridDomain& g = eng.grid();
  if (!(g == metric.domain()))
    throw std::invalid_argument("chern_torsion: engine and metric grids differ");
  const int n = g.n;
  const std::size_t npts = g.num_points();

  // dg[(l*n + j)*n + k] = ∂_l g_{j k̄}
  std::vector<CplxField> dg(static_cast<std::size_t>(n) * n * n);
  for (int l = 0; l < n; ++l)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        dg[(static_cast<std::size_t>(l) * n + j) * n + k] = eng.d_holo(metric.entry(j, k), l);

  TorsionReport rep;
  rep.q_distinct.assign(npts, 0.0);
  rep.q_trace.assign(npts, 0.0);
  rep.tau_sq.assign(npts, 0.0);

  std::vector<Complex> t(static_cast<std::size_t>(n) * n * n);
  std::vector<Complex> tw(static_cast<std::size_t>(n) * n * n);
  auto d_at = [&](int a, int b, int c, std::size_t i) {
    return dg[(static_cast<std::size_t>(a) * n + b) * n + c][i];
  };

  for (std::size_t i = 0; i < npts; ++i) {
    const Eigen::MatrixXcd g0 = metric.at(i);
    Eigen::LLT<Eigen::MatrixXcd> llt(g0.conjugate());
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("chern_torsion: metric not positive definite on the grid");
    const Eigen::MatrixXcd cg = Eigen::MatrixXcd(llt.matrixL()).adjoint();
    const Eigen::MatrixXcd ci =
        cg.triangularView<Eigen::Upper>().solve(Eigen::MatrixXcd::Identity(n, n));
    const Eigen::MatrixXcd ginv = g0.inverse();

    // T^l_{jk} = Σ_m g^{l m̄} (∂_j g_{k m̄} - ∂_k g_{j m̄}),  g^{l m̄} = ginv(m, l)
    for (int l = 0; l < n; ++l)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          Complex s(0.0, 0.0);
          for (int m = 0; m < n; ++m) s += ginv(m, l) * (d_at(j, k, m, i) - d_at(k, j, m, i));
          t[(static_cast<std::size_t>(l) * n + j) * n + k] = s;
        }

    // orthonormal frame: lower indices with ci, upper index with cg
    for (int c = 0; c < n; ++c)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          Complex s(0.0, 0.0);
          for (int l = 0; l < n; ++l)
            for (int j = 0; j < n; ++j)
              for (int k = 0; k < n; ++k)
                s += t[(static_cast<std::size_t>(l) * n + j) * n + k] * ci(j, a) * ci(k, b) *
                     cg(c, l);
          tw[(static_cast<std::size_t>(c) * n + a) * n + b] = s;
        }

    for (int c = 0; c < n; ++c)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          const double m2 =
              std::norm(tw[(static_cast<std::size_t>(c) * n + a) * n + b]);
          if (a != b && b != c && a != c) rep.q_distinct[i] += m2;
          if (c == a && a != b) rep.q_trace[i] += m2;
        }
    for (int b = 0; b < n; ++b) {
      Complex tau(0.0, 0.0);
      for (int a = 0; a < n; ++a) tau += tw[(static_cast<std::size_t>(a) * n + a) * n + b];
      rep.tau_sq[i] += std::norm(tau);
    }
  }
  return rep;
}

RealField torsion_square_form_route(const DerivativeEngine& eng,
                                    const HermitianMatrixField& metric) {
  const int n = metric.n();
  if (n < 3)
    throw std::invalid_argument("torsion_square_form_route: needs complex dimension at least 3");
  const ComplexForm w = metric.form();
  ComplexForm num = wedge(wedge(dbar(eng, w), del(eng, w)), wedge_power_over_factorial(w, n - 3));
  num *= Complex(0.0, 1.0);
  // n(n-1)(n-2) · (n-3)!/n! = 1, so the factorial-normalized ratio is already it
  const CplxField r = top_ratio(num, wedge_power_over_factorial(w, n));
  return real_part(r);
}

XReport compute_X(const DerivativeEngine& eng, const HermitianMatrixField& metric, int p) {
  const GridDomain& g = eng.grid();
  if (!(g == metric.domain()))
    throw std::invalid_argument("compute_X: engine and metric grids differ");
  const int n = g.n;
  if (p < 1 || p > n) throw std::invalid_argument("compute_X: p must lie in [1, n]");

  XReport rep;
  rep.balanced_residual = balanced_residual(eng, metric);

  const ComplexForm w = metric.form();
  ComplexForm num = wedge(i_ddbar(eng, wedge_power_over_factorial(w, p - 1)),
                          wedge_power_over_factorial(w, n - p));
  const CplxField r = top_ratio(num, wedge_power_over_factorial(w, n));
  const double scale = factorial(p - 1) * factorial(n - p) / factorial(n);
  rep.direct.resize(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) rep.direct[i] = scale * r[i].real();

  const int numerator = (n - p) * (p - 1);
  if (numerator == 0 || n < 3) {
    rep.torsion_route.assign(g.num_points(), 0.0);
  } else {
    const TorsionReport tor = chern_torsion(eng, metric);
    const double fac = static_cast<double>(numerator) / (n * (n - 1) * (n - 2));
    rep.torsion_route.resize(g.num_points());
    for (std::size_t i = 0; i < rep.torsion_route.size(); ++i)
      rep.torsion_route[i] = fac * (0.5 * tor.q_distinct[i] + tor.q_trace[i]);
  }
  return rep;
}

std::vector<CplxField> complex_hessian(const DerivativeEngine& eng, const CplxField& u) {
  const int n = eng.grid().n;
  std::vector<CplxField> h(static_cast<std::size_t>(n) * n);
  for (int k = 0; k < n; ++k) {
    const CplxField dk = eng.d_anti(u, k);
    for (int j = 0; j < n; ++j) h[static_cast<std::size_t>(j) * n + k] = eng.d_holo(dk, j);
  }
  return h;
}

std::vector<CplxField> holo_gradient(const DerivativeEngine& eng, const CplxField& u) {
  const int n = eng.grid().n;
  std::vector<CplxField> d(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) d[static_cast<std::size_t>(j)] = eng.d_holo(u, j);
  return d;
}

CplxField hermitian_pairing(const HermitianMatrixField& ginv, const std::vector<CplxField>& a,
                            const std::vector<CplxField>& b) {
  const int n = ginv.n();
  if (static_cast<int>(a.size()) != n || static_cast<int>(b.size()) != n)
    throw std::invalid_argument("hermitian_pairing: gradient arity mismatch");
  CplxField out(ginv.num_points(), Complex(0.0, 0.0));
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      const CplxField& gkj = ginv.entry(k, j);
      const CplxField& aj = a[static_cast<std::size_t>(j)];
      const CplxField& bk = b[static_cast<std::size_t>(k)];
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += gkj[i] * aj[i] * std::conj(bk[i]);
    }
  return out;
}

CplxField chern_laplacian_with_inverse(const DerivativeEngine& eng,
                                       const HermitianMatrixField& ginv, const CplxField& u) {
  const int n = eng.grid().n;
  const std::vector<CplxField> h = complex_hessian(eng, u);
  CplxField out(u.size(), Complex(0.0, 0.0));
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      const CplxField& gkj = ginv.entry(k, j);
      const CplxField& hjk = h[static_cast<std::size_t>(j) * n + k];
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += gkj[i] * hjk[i];
    }
  return out;
}

CplxField chern_laplacian(const DerivativeEngine& eng, const HermitianMatrixField& metric,
                          const CplxField& u) {
  return chern_laplacian_with_inverse(eng, metric.pointwise_inverse(), u);
}

RealField chern_laplacian(const DerivativeEngine& eng, const HermitianMatrixField& metric,
                          const RealField& u) {
  return real_part(chern_laplacian(eng, metric, promote(u)));
}

RealField grad_norm_sq(const DerivativeEngine& eng, const HermitianMatrixField& metric,
                       const RealField& u) {
  const std::vector<CplxField> d = holo_gradient(eng, promote(u));
  return real_part(hermitian_pairing(metric.pointwise_inverse(), d, d));
}

MixedVolumeReport mixed_volume(const DerivativeEngine& eng, const HermitianMatrixField& metric,
                               int p, const RealField& phi) {
  const GridDomain& g = eng.grid();
  const int n = g.n;
  if (p < 1 || p > n) throw std::invalid_argument("mixed_volume: p must lie in [1, n]");
  if (phi.size() != g.num_points())
    throw std::invalid_argument("mixed_volume: field size does not match the grid");

  MixedVolumeReport rep;
  const XReport x = compute_X(eng, metric, p);
  const RealField lap = chern_laplacian(eng, metric, phi);
  rep.direct.resize(g.num_points());
  for (std::size_t i = 0; i < rep.direct.size(); ++i)
    rep.direct[i] = 1.0 + lap[i] / n + x.direct[i] * phi[i];

  const ComplexForm w = metric.form();
  ComplexForm omega_phi = wedge_power_over_factorial(w, p);
  omega_phi *= Complex(factorial(p), 0.0);
  ComplexForm pert = i_ddbar(eng, field_times(phi, wedge_power_over_factorial(w, p - 1)));
  pert *= Complex(factorial(p - 1), 0.0);
  omega_phi += pert;

  ComplexForm num = wedge(omega_phi, wedge_power_over_factorial(w, n - p));
  const CplxField r = top_ratio(num, wedge_power_over_factorial(w, n));
  const double scale = factorial(n - p) / factorial(n);
  rep.form_route.resize(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) rep.form_route[i] = scale * r[i].real();

  rep.min_direct = rep.direct.empty() ? 0.0 : rep.direct[0];
  rep.max_difference = 0.0;
  for (std::size_t i = 0; i < rep.direct.size(); ++i) {
    rep.min_direct = std::min(rep.min_direct, rep.direct[i]);
    rep.max_difference = std::max(rep.max_difference, std::abs(rep.direct[i] - rep.form_route[i]));
  }
  return rep;
}

HermitianMatrixField balanced_metric_from_potential(const DerivativeEngine& eng,
                                                    const RealField& f) {
  const GridDomain& g = eng.grid();
  const int n = g.n;
  if (n < 2) throw std::invalid_argument("balanced_metric_from_potential: needs n >= 2");
  const ComplexForm wf = flat_metric_form(g);
  ComplexForm q = wedge_power_over_factorial(wf, n - 1);
  ComplexForm pert = i_ddbar(eng, field_times(f, wedge_power_over_factorial(wf, n - 2)));
  pert *= Complex(1.0 / (n - 1), 0.0);
  q += pert;
  return michelsohn_root(q);
}

}  // namespace balab
