#include "balab/geodesic.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace balab {

std::string ConeScan::describe(const GridDomain& g, int nt) const {
  std::vector<double> x(static_cast<std::size_t>(2 * g.n));
  g.coordinates(argmin_point, x.data());
  std::ostringstream os;
  os << "t=" << (argmin_row < 0 ? 0.0 : static_cast<double>(argmin_row) / nt) << ", x=(";
  for (int c = 0; c < 2 * g.n; ++c) os << (c ? ", " : "") << x[static_cast<std::size_t>(c)];
  os << "); G=" << min_g << ", A=" << min_a << ", phi_tt=" << min_ptt << ", L=" << min_l;
  return os.str();
}

GeodesicProblem::GeodesicProblem(const DerivativeEngine& eng, HermitianMatrixField metric,
                                 RealField x_field, double eps, int nt, RealField phi0,
                                 RealField phi1, double x_tol)
    : eng_(&eng),
      metric_(std::move(metric)),
      ginv_(metric_.pointwise_inverse()),
      det_(metric_.det_field()),
      x_(std::move(x_field)),
      eps_(eps),
      nt_(nt),
      phi0_(std::move(phi0)),
      phi1_(std::move(phi1)) {
  const std::size_t npts = grid().num_points();
  if (!(eng.grid() == metric_.domain()))
    throw std::invalid_argument("GeodesicProblem: engine and metric grids differ");
  if (x_.size() != npts || phi0_.size() != npts || phi1_.size() != npts)
    throw std::invalid_argument("GeodesicProblem: field sizes do not match the grid");
  if (nt_ < 4) throw std::invalid_argument("GeodesicProblem: needs at least 4 time intervals");
  if (!(eps_ > 0.0)) throw std::invalid_argument("GeodesicProblem: eps must be positive");
  double supx = 0.0;
  for (double v : x_) supx = std::max(supx, v);
  if (supx > x_tol) {
    std::ostringstream os;
    os << "GeodesicProblem: the zeroth-order coefficient must be nonpositive (sup X = " << supx
       << " > x_tol = " << x_tol
       << "); rescale the coefficient field (configuration key x_scale) or raise x_tol";
    throw std::invalid_argument(os.str());
  }
  forcing_.assign(static_cast<std::size_t>(nt_ + 1), RealField(npts, 0.0));
}

void GeodesicProblem::set_forcing(std::vector<RealField> rows) {
  if (rows.size() != static_cast<std::size_t>(nt_ + 1))
    throw std::invalid_argument("GeodesicProblem::set_forcing: expected nt+1 rows");
  for (const RealField& r : rows)
    if (r.size() != grid().num_points())
      throw std::invalid_argument("GeodesicProblem::set_forcing: row size mismatch");
  forcing_ = std::move(rows);
}

const RealField& GeodesicProblem::forcing_row(int i) const {
  if (i < 0 || i > nt_) throw std::invalid_argument("GeodesicProblem::forcing_row: out of range");
  return forcing_[static_cast<std::size_t>(i)];
}

SpaceTimeField GeodesicProblem::initial_path() const {
  return SpaceTimeField::linear_path(grid(), nt_, phi0_, phi1_);
}

RealField GeodesicProblem::coefficient_a(const RealField& phi_row) const {
  const RealField lap = real_part(chern_laplacian_with_inverse(*eng_, ginv_, promote(phi_row)));
  RealField out(phi_row.size());
  const int nn = n();
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = nn + nn * x_[i] * phi_row[i] + lap[i];
  return out;
}

std::vector<double> GeodesicProblem::residual(const SpaceTimeField& phi, double s) const {
  if (phi.nt() != nt_ || !(phi.domain() == grid()))
    throw std::invalid_argument("GeodesicProblem::residual: path shape mismatch");
  const std::size_t npts = grid().num_points();
  const int nn = n();
  std::vector<double> out(static_cast<std::size_t>(nt_ - 1) * npts);
  for (int i = 1; i < nt_; ++i) {
    const RealField ptt = phi.time_d2(i);
    const RealField pt = phi.time_d1(i);
    const RealField a = coefficient_a(phi.row(i));
    const RealField gradsq = [&] {
      const std::vector<CplxField> d = holo_gradient(*eng_, promote(pt));
      return real_part(hermitian_pairing(ginv_, d, d));
    }();
    const RealField& r = forcing_[static_cast<std::size_t>(i)];
    double* dst = out.data() + static_cast<std::size_t>(i - 1) * npts;
    for (std::size_t p = 0; p < npts; ++p) {
      const double g = ptt[p] * a[p] - gradsq[p];
      dst[p] = s * g + (1.0 - s) * (ptt[p] + a[p]) - eps_ +
               0.5 * nn * s * x_[p] * pt[p] * pt[p] - r[p];
    }
  }
  return out;
}

double GeodesicProblem::residual_sup(const SpaceTimeField& phi, double s) const {
  const std::vector<double> r = residual(phi, s);
  double m = 0.0;
  for (double v : r) m = std::max(m, std::abs(v));
  return m;
}

ConeScan GeodesicProblem::cone_scan(const SpaceTimeField& phi) const {
  const std::size_t npts = grid().num_points();
  const int nn = n();
  ConeScan scan;
  bool first = true;
  double worst = 0.0;
  for (int i = 1; i < nt_; ++i) {
    const RealField ptt = phi.time_d2(i);
    const RealField pt = phi.time_d1(i);
    const RealField a = coefficient_a(phi.row(i));
    const std::vector<CplxField> d = holo_gradient(*eng_, promote(pt));
    const RealField gradsq = real_part(hermitian_pairing(ginv_, d, d));
    for (std::size_t p = 0; p < npts; ++p) {
      const double g = ptt[p] * a[p] - gradsq[p];
      const double l = eps_ - 0.5 * nn * x_[p] * pt[p] * pt[p];
      const double local = std::min(std::min(g, a[p]), ptt[p]);
      if (first || g < scan.min_g) scan.min_g = g;
      if (first || a[p] < scan.min_a) scan.min_a = a[p];
      if (first || ptt[p] < scan.min_ptt) scan.min_ptt = ptt[p];
      if (first || l < scan.min_l) scan.min_l = l;
      if (first || local < worst) {
        worst = local;
        scan.argmin_row = i;
        scan.argmin_point = p;
      }
      first = false;
    }
  }
  return scan;
}

double GeodesicProblem::cone_gauge(const SpaceTimeField& phi, double s) const {
  // Ellipticity margin of the s-weighted principal symbol: the linearized
  // operator at (φ, s) has time coefficient sA + (1-s), spatial coefficient
  // sφ_tt + (1-s) and mixed part s∇φ_t, so the relevant arrow matrix is
  // built from those combinations (at s = 1 this is the cone margin itself,
  // at s = 0 it is identically 1).
  const std::size_t npts = grid().num_points();
  double gauge = 1.0;
  bool first = true;
  for (int i = 1; i < nt_; ++i) {
    const RealField ptt = phi.time_d2(i);
    const RealField pt = phi.time_d1(i);
    const RealField a = coefficient_a(phi.row(i));
    const std::vector<CplxField> d = holo_gradient(*eng_, promote(pt));
    const RealField gradsq = real_part(hermitian_pairing(ginv_, d, d));
    for (std::size_t p = 0; p < npts; ++p) {
      const double lam = arrow_min_eigenvalue(s * a[p] + (1.0 - s), s * ptt[p] + (1.0 - s),
                                              s * s * gradsq[p]);
      if (first || lam < gauge) gauge = lam;
      first = false;
    }
  }
  return gauge;
}

GeodesicLinearization::GeodesicLinearization(const GeodesicProblem& prob,
                                             const SpaceTimeField& phi, double s)
    : prob_(&prob), s_(s), nt_(prob.nt()) {
  const DerivativeEngine& eng = prob.engine();
  a_rows_.reserve(static_cast<std::size_t>(nt_ - 1));
  ptt_rows_.reserve(static_cast<std::size_t>(nt_ - 1));
  pt_rows_.reserve(static_cast<std::size_t>(nt_ - 1));
  grad_pt_rows_.reserve(static_cast<std::size_t>(nt_ - 1));
  double sum_a = 0.0, sum_ptt = 0.0;
  std::size_t count = 0;
  for (int i = 1; i < nt_; ++i) {
    a_rows_.push_back(prob.coefficient_a(phi.row(i)));
    ptt_rows_.push_back(phi.time_d2(i));
    pt_rows_.push_back(phi.time_d1(i));
    grad_pt_rows_.push_back(holo_gradient(eng, promote(pt_rows_.back())));
    for (std::size_t p = 0; p < a_rows_.back().size(); ++p) {
      sum_a += a_rows_.back()[p];
      sum_ptt += ptt_rows_.back()[p];
      ++count;
    }
  }
  mean_a_ = sum_a / count;
  mean_ptt_ = sum_ptt / count;
}

void GeodesicLinearization::apply(const std::vector<double>& u, std::vector<double>& out) const {
  const GeodesicProblem& prob = *prob_;
  const std::size_t npts = prob.grid().num_points();
  const int nn = prob.n();
  const double dt = 1.0 / nt_;
  const double dt2 = dt * dt;
  if (u.size() != static_cast<std::size_t>(nt_ - 1) * npts)
    throw std::invalid_argument("GeodesicLinearization::apply: size mismatch");
  out.assign(u.size(), 0.0);
  const RealField& x = prob.x_field();

  // interior layout; boundary perturbations vanish (null row = zero)
  auto urow = [&](int i) -> const double* {
    return (i >= 1 && i <= nt_ - 1) ? u.data() + static_cast<std::size_t>(i - 1) * npts : nullptr;
  };

  RealField u_i(npts), ut(npts), utt(npts);
  for (int i = 1; i < nt_; ++i) {
    const double* um = urow(i - 1);
    const double* uc = urow(i);
    const double* up = urow(i + 1);
    for (std::size_t p = 0; p < npts; ++p) {
      const double vm = um ? um[p] : 0.0;
      const double vc = uc[p];
      const double vp = up ? up[p] : 0.0;
      u_i[p] = vc;
      ut[p] = (vp - vm) / (2.0 * dt);
      utt[p] = (vp - 2.0 * vc + vm) / dt2;
    }
    const CplxField lap =
        chern_laplacian_with_inverse(prob.engine(), prob.metric_inverse(), promote(u_i));
    const std::vector<CplxField> grad_ut = holo_gradient(prob.engine(), promote(ut));
    const CplxField cross =
        hermitian_pairing(prob.metric_inverse(), grad_pt_rows_[static_cast<std::size_t>(i - 1)],
                          grad_ut);

    const RealField& a = a_rows_[static_cast<std::size_t>(i - 1)];
    const RealField& ptt = ptt_rows_[static_cast<std::size_t>(i - 1)];
    const RealField& pt = pt_rows_[static_cast<std::size_t>(i - 1)];
    double* dst = out.data() + static_cast<std::size_t>(i - 1) * npts;
    for (std::size_t p = 0; p < npts; ++p) {
      const double da = nn * x[p] * u_i[p] + lap[p].real();  // nXu + Δu
      dst[p] = s_ * (utt[p] * a[p] + ptt[p] * da - 2.0 * cross[p].real()) +
               (1.0 - s_) * (utt[p] + da) + nn * s_ * x[p] * pt[p] * ut[p];
    }
  }
}

void GeodesicLinearization::precondition(const std::vector<double>& r,
                                         std::vector<double>& out) const {
  const GeodesicProblem& prob = *prob_;
  const DerivativeEngine& eng = prob.engine();
  const std::size_t npts = prob.grid().num_points();
  const int rows = nt_ - 1;
  const double dt = 1.0 / nt_;
  const double dt2 = dt * dt;
  const double a = s_ * mean_a_ + (1.0 - s_);
  const double bbar = s_ * std::max(mean_ptt_, 0.0) + (1.0 - s_);
  const RealField& mu = eng.flat_laplace_symbol();

  // forward FFT of every interior row
  std::vector<CplxField> hat(static_cast<std::size_t>(rows));
  for (int i = 0; i < rows; ++i) {
    CplxField row(npts);
    for (std::size_t p = 0; p < npts; ++p)
      row[p] = Complex(r[static_cast<std::size_t>(i) * npts + p], 0.0);
    eng.fft_forward(row);
    hat[static_cast<std::size_t>(i)] = std::move(row);
  }

  // Thomas solve of (a u_tt - c_k u) per spatial mode; u_tt is the centered
  // stencil with zero boundary rows
  std::vector<Complex> d(static_cast<std::size_t>(rows)), rhs(static_cast<std::size_t>(rows));
  std::vector<Complex> cprime(static_cast<std::size_t>(rows));
  for (std::size_t p = 0; p < npts; ++p) {
    const double ck = bbar * mu[p];
    const double diag = -2.0 * a / dt2 - ck;
    const double off = a / dt2;
    for (int i = 0; i < rows; ++i) rhs[static_cast<std::size_t>(i)] = hat[static_cast<std::size_t>(i)][p];
    // forward sweep
    Complex denom(diag, 0.0);
    cprime[0] = off / denom;
    d[0] = rhs[0] / denom;
    for (int i = 1; i < rows; ++i) {
      denom = Complex(diag, 0.0) - off * cprime[static_cast<std::size_t>(i - 1)];
      cprime[static_cast<std::size_t>(i)] = off / denom;
      d[static_cast<std::size_t>(i)] =
          (rhs[static_cast<std::size_t>(i)] - off * d[static_cast<std::size_t>(i - 1)]) / denom;
    }
    // back substitution
    for (int i = rows - 2; i >= 0; --i)
      d[static_cast<std::size_t>(i)] -=
          cprime[static_cast<std::size_t>(i)] * d[static_cast<std::size_t>(i + 1)];
    for (int i = 0; i < rows; ++i) hat[static_cast<std::size_t>(i)][p] = d[static_cast<std::size_t>(i)];
  }

  out.resize(r.size());
  for (int i = 0; i < rows; ++i) {
    CplxField row = hat[static_cast<std::size_t>(i)];
    eng.fft_inverse(row);
    for (std::size_t p = 0; p < npts; ++p)
      out[static_cast<std::size_t>(i) * npts + p] = row[p].real();
  }
}

double arrow_min_eigenvalue(double a, double ptt, double grad_sq) {
  const double disc = std::sqrt((a - ptt) * (a - ptt) + 4.0 * grad_sq);
  const double lo = 0.5 * ((a + ptt) - disc);
  return std::min(ptt, lo);
}

double symbol_min_eigenvalue(const GeodesicProblem& prob, const SpaceTimeField& phi) {
  double lo = std::numeric_limits<double>::infinity();
  for (int i = 1; i < prob.nt(); ++i) {
    const RealField ptt = phi.time_d2(i);
    const RealField pt = phi.time_d1(i);
    const RealField a = prob.coefficient_a(phi.row(i));
    const std::vector<CplxField> d = holo_gradient(prob.engine(), promote(pt));
    const RealField gradsq = real_part(hermitian_pairing(prob.metric_inverse(), d, d));
    for (std::size_t p = 0; p < a.size(); ++p)
      lo = std::min(lo, arrow_min_eigenvalue(a[p], ptt[p], gradsq[p]));
  }
  return lo;
}

}  // namespace balab
