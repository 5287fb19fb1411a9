#include "balab/cy.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "balab/forms.hpp"
#include "balab/star.hpp"

namespace balab {

namespace {

double fact(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

void project_mean(RealField& u, double target) {
  const double shift = target - field_mean(u);
  for (double& x : u) x += shift;
}

/** tr(α^{-1} M) = Σ_{j,k} α^{-1}[j,k] M[k,j] at every point (real part). */
RealField trace_against(const HermitianMatrixField& ainv, const HermitianMatrixField& m) {
  const int n = ainv.n();
  RealField out(ainv.num_points(), 0.0);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      const CplxField& a = ainv.entry(j, k);
      const CplxField& b = m.entry(k, j);
      for (std::size_t p = 0; p < out.size(); ++p) out[p] += (a[p] * b[p]).real();
    }
  return out;
}

}  // namespace

std::string to_string(AsthenoClass c) {
  switch (c) {
    case AsthenoClass::astheno: return "astheno";
    case AsthenoClass::sub: return "sub";
    case AsthenoClass::super: return "super";
    case AsthenoClass::indefinite: return "indefinite";
  }
  return "unknown";
}

AsthenoClass classify_astheno(double min_eigenvalue, double max_eigenvalue, double tol) {
  const bool nonpositive = max_eigenvalue <= tol;
  const bool nonnegative = min_eigenvalue >= -tol;
  if (nonpositive && nonnegative) return AsthenoClass::astheno;
  if (nonpositive) return AsthenoClass::sub;
  if (nonnegative) return AsthenoClass::super;
  return AsthenoClass::indefinite;
}

AsthenoReport compute_E(const DerivativeEngine& eng, const HermitianMatrixField& alpha,
                        double tol) {
  const GridDomain& g = eng.grid();
  if (!(g == alpha.domain()))
    throw std::invalid_argument("compute_E: engine and metric grids differ");
  const int n = g.n;
  if (n < 3)
    throw std::invalid_argument("compute_E: needs n >= 3, the power alpha^{n-2} degenerates");

  // E = star_alpha( i ddbar alpha^{n-2} ) with the plain (unnormalized) power
  ComplexForm pw = wedge_power_over_factorial(alpha.form(), n - 2);
  pw *= Complex(fact(n - 2), 0.0);
  const ComplexForm e_form = hodge_star(i_ddbar(eng, pw), alpha);

  AsthenoReport rep{matrix_of_one_one_form(e_form), RealField(), 0.0, 0.0,
                    AsthenoClass::astheno};
  rep.x_e = trace_against(alpha.pointwise_inverse(), rep.e);

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXcd> ges;
  bool first = true;
  for (std::size_t p = 0; p < g.num_points(); ++p) {
    ges.compute(rep.e.at(p), alpha.at(p), Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
    const double lo = ges.eigenvalues().minCoeff();
    const double hi = ges.eigenvalues().maxCoeff();
    if (first || lo < rep.min_eigenvalue) rep.min_eigenvalue = lo;
    if (first || hi > rep.max_eigenvalue) rep.max_eigenvalue = hi;
    first = false;
  }
  rep.classification = classify_astheno(rep.min_eigenvalue, rep.max_eigenvalue, tol);
  return rep;
}

CYProblem::CYProblem(const DerivativeEngine& eng, HermitianMatrixField alpha,
                     HermitianMatrixField omega, RealField psi, ChiTerm chi)
    : eng_(&eng),
      alpha_(std::move(alpha)),
      alpha_inv_(alpha_.domain()),
      omega_(std::move(omega)),
      psi_(std::move(psi)),
      chi_(std::move(chi)),
      astheno_(compute_E(eng, alpha_)),
      omega_h_(alpha_.domain()) {
  const GridDomain& g = eng.grid();
  if (!(g == omega_.domain()))
    throw std::invalid_argument("CYProblem: engine and omega grids differ");
  if (psi_.size() != g.num_points())
    throw std::invalid_argument("CYProblem: psi field does not match the grid");
  alpha_.require_positive(1e-12, "CYProblem background alpha");
  omega_.require_positive(1e-12, "CYProblem background omega");

  alpha_inv_ = alpha_.pointwise_inverse();
  omega_h_ = matrix_of_one_one_form(
      hodge_star(wedge_power_over_factorial(omega_.form(), g.n - 1), alpha_));

  const RealField det_a = alpha_.det_field();
  log_det_alpha_.resize(det_a.size());
  for (std::size_t p = 0; p < det_a.size(); ++p) log_det_alpha_[p] = std::log(det_a[p]);
  balanced_residual_ = ::balab::balanced_residual(eng, omega_);
}

HermitianMatrixField CYProblem::assemble(const RealField& u) const {
  const GridDomain& g = eng_->grid();
  if (u.size() != g.num_points())
    throw std::invalid_argument("CYProblem::assemble: u does not match the grid");
  const int n = g.n;
  const CplxField uc = promote(u);
  const CplxField lap = chern_laplacian_with_inverse(*eng_, alpha_inv_, uc);
  const std::vector<CplxField> hess = complex_hessian(*eng_, uc);
  const double c = 1.0 / (n - 1);

  HermitianMatrixField out = omega_h_;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      CplxField& o = out.entry(j, k);
      const CplxField& a = alpha_.entry(j, k);
      const CplxField& h = hess[static_cast<std::size_t>(j) * n + k];
      const CplxField& e = astheno_.e.entry(j, k);
      for (std::size_t p = 0; p < o.size(); ++p)
        o[p] += c * (lap[p] * a[p] - h[p]) + e[p] * u[p];
    }
  if (chi_.value) {
    const HermitianMatrixField cv = chi_.value(*eng_, u);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        CplxField& o = out.entry(j, k);
        const CplxField& x = cv.entry(j, k);
        for (std::size_t p = 0; p < o.size(); ++p) o[p] += x[p];
      }
  }
  return out;
}

HermitianMatrixField CYProblem::assemble_derivative(const RealField& u, const RealField& v) const {
  const GridDomain& g = eng_->grid();
  if (u.size() != g.num_points() || v.size() != g.num_points())
    throw std::invalid_argument("CYProblem::assemble_derivative: field does not match the grid");
  const int n = g.n;
  const CplxField vc = promote(v);
  const CplxField lap = chern_laplacian_with_inverse(*eng_, alpha_inv_, vc);
  const std::vector<CplxField> hess = complex_hessian(*eng_, vc);
  const double c = 1.0 / (n - 1);

  HermitianMatrixField out(g);  // constructed as identity; every entry is assigned below
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      CplxField& o = out.entry(j, k);
      const CplxField& a = alpha_.entry(j, k);
      const CplxField& h = hess[static_cast<std::size_t>(j) * n + k];
      const CplxField& e = astheno_.e.entry(j, k);
      for (std::size_t p = 0; p < o.size(); ++p) o[p] = c * (lap[p] * a[p] - h[p]) + e[p] * v[p];
    }
  if (chi_.derivative) {
    const HermitianMatrixField cd = chi_.derivative(*eng_, u, v);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        CplxField& o = out.entry(j, k);
        const CplxField& x = cd.entry(j, k);
        for (std::size_t p = 0; p < o.size(); ++p) o[p] += x[p];
      }
  }
  return out;
}

RealField CYProblem::residual(const HermitianMatrixField& tilde, double b) const {
  const RealField det = tilde.det_field();
  RealField r(det.size());
  for (std::size_t p = 0; p < det.size(); ++p)
    r[p] = det[p] > 0.0 ? std::log(det[p]) - psi_[p] - b - log_det_alpha_[p]
                        : std::numeric_limits<double>::quiet_NaN();
  return r;
}

double CYProblem::positivity_margin(const HermitianMatrixField& tilde) const {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXcd> ges;
  double margin = 0.0;
  bool first = true;
  for (std::size_t p = 0; p < tilde.num_points(); ++p) {
    ges.compute(tilde.at(p), alpha_.at(p), Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
    const double lo = ges.eigenvalues().minCoeff();
    if (first || lo < margin) margin = lo;
    first = false;
  }
  return margin;
}

CYSolution solve_cy(const CYProblem& prob, const CYOptions& opt) {
  return solve_cy(prob, RealField(prob.domain().num_points(), opt.mean_target), opt);
}

CYSolution solve_cy(const CYProblem& prob, const RealField& initial, const CYOptions& opt) {
  const DerivativeEngine& eng = prob.engine();
  const GridDomain& g = prob.domain();
  const std::size_t np = g.num_points();
  if (initial.size() != np)
    throw std::invalid_argument("solve_cy: initial guess does not match the grid");

  CYSolution sol{initial, 0.0, prob.omega_h(), 0.0, 0.0, SolveStatus::max_iterations,
                 0,       0,   {},             ""};

  // The discrete first derivatives annihilate Nyquist rows on even grids, so
  // the purely spatial linearization is singular there. The update is kept in
  // the faithfully represented subspace; the residual stays measured on the
  // full grid, so accepting still certifies the whole pointwise system.
  const RealField& mask = eng.dealias_mask();
  const auto dejunk = [&](RealField& v) {
    CplxField w = promote(v);
    eng.fft_forward(w);
    for (std::size_t k = 0; k < w.size(); ++k) w[k] *= mask[k];
    eng.fft_inverse(w);
    for (std::size_t p = 0; p < np; ++p) v[p] = w[p].real();
  };

  dejunk(sol.u);
  project_mean(sol.u, opt.mean_target);
  const AsthenoClass cls = prob.astheno().classification;
  if (cls == AsthenoClass::super || cls == AsthenoClass::indefinite)
    sol.message = "warning: E classification is " + to_string(cls) + "; proceeding anyway. ";

  HermitianMatrixField tilde = prob.assemble(sol.u);
  double margin = prob.positivity_margin(tilde);
  if (margin <= 0.0) {
    sol.status = SolveStatus::cone_exit;
    std::ostringstream msg;
    msg << "initial state is outside the positivity cone (margin=" << margin << ")";
    sol.message += msg.str();
    sol.tilde_omega = std::move(tilde);
    sol.margin = margin;
    return sol;
  }

  const RealField& symbol = eng.flat_laplace_symbol();
  bool done = false;
  for (int iter = 0; iter < opt.max_iters && !done; ++iter) {
    const RealField r0 = prob.residual(tilde, 0.0);
    sol.b = field_mean(r0);
    RealField r(np);
    for (std::size_t p = 0; p < np; ++p) r[p] = r0[p] - sol.b;
    const double res = sup_norm(r);
    sol.residual_history.push_back(res);
    if (res <= opt.tol) {
      sol.status = SolveStatus::accepted;
      done = true;
      break;
    }

    // exact linearization: v -> tr(tilde^{-1} d_tilde[v]) on the de-aliased
    // subspace, extended as the identity on the grid mean and Nyquist rows so
    // the system stays square and nonsingular
    const HermitianMatrixField tinv = tilde.pointwise_inverse();
    const int n = g.n;
    const auto apply = [&](const std::vector<double>& v, std::vector<double>& out) {
      RealField vp = v;
      dejunk(vp);
      const HermitianMatrixField dt = prob.assemble_derivative(sol.u, vp);
      out.assign(np, 0.0);
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          const CplxField& a = tinv.entry(j, k);
          const CplxField& b = dt.entry(k, j);
          for (std::size_t p = 0; p < np; ++p) out[p] += (a[p] * b[p]).real();
        }
      dejunk(out);
      for (std::size_t p = 0; p < np; ++p) out[p] += v[p] - vp[p];
      const double mo = field_mean(out);
      const double mv = field_mean(v);
      for (std::size_t p = 0; p < np; ++p) out[p] += mv - mo;
    };
    // spectral inverse of the flat Laplacian (symbol -mu_k); identity on the
    // mean mode where the operator above already acts as the identity
    const auto precond = [&](const std::vector<double>& v, std::vector<double>& out) {
      CplxField w = promote(v);
      eng.fft_forward(w);
      for (std::size_t k = 0; k < w.size(); ++k)
        if (symbol[k] > 1e-12) w[k] /= -symbol[k];
      eng.fft_inverse(w);
      out.resize(np);
      for (std::size_t p = 0; p < np; ++p) out[p] = w[p].real();
    };

    std::vector<double> rhs(np);
    for (std::size_t p = 0; p < np; ++p) rhs[p] = -r[p];
    dejunk(rhs);  // do not drive the rows the update cannot reach
    std::vector<double> du(np, 0.0);
    const GmresResult gr = gmres(apply, precond, rhs, du, opt.gmres);
    sol.gmres_iterations += gr.iterations;
    dejunk(du);

    double tau = 1.0;
    bool stepped = false;
    bool cone_blocked = false;
    const double armijo = 1e-4;
    while (tau >= opt.min_step) {
      RealField ut(np);
      for (std::size_t p = 0; p < np; ++p) ut[p] = sol.u[p] + tau * du[p];
      project_mean(ut, opt.mean_target);
      HermitianMatrixField tt = prob.assemble(ut);
      const double mt = prob.positivity_margin(tt);
      if (mt <= opt.margin_fraction * margin) {
        cone_blocked = true;
        tau *= 0.5;
        continue;
      }
      cone_blocked = false;
      const RealField rt0 = prob.residual(tt, 0.0);
      const double bt = field_mean(rt0);
      double rest = 0.0;
      for (std::size_t p = 0; p < np; ++p) rest = std::max(rest, std::abs(rt0[p] - bt));
      if (rest <= (1.0 - armijo * tau) * res) {
        sol.u = std::move(ut);
        tilde = std::move(tt);
        margin = mt;
        stepped = true;
        break;
      }
      tau *= 0.5;
    }
    sol.iterations = iter + 1;
    if (!stepped) {
      sol.status = cone_blocked ? SolveStatus::cone_exit : SolveStatus::line_search_fail;
      std::ostringstream msg;
      msg << (cone_blocked ? "damping stalled against the positivity cone"
                           : "line search found no residual decrease")
          << " at iteration " << iter << " (residual=" << res << ")";
      sol.message += msg.str();
      done = true;
    }
  }
  if (!done && sol.status == SolveStatus::max_iterations)
    sol.message += "iteration budget exhausted before the residual tolerance";

  const RealField r0 = prob.residual(tilde, 0.0);
  sol.b = field_mean(r0);
  double res = 0.0;
  for (std::size_t p = 0; p < np; ++p) res = std::max(res, std::abs(r0[p] - sol.b));
  sol.residual_sup = res;
  sol.margin = margin;
  sol.tilde_omega = std::move(tilde);
  return sol;
}

RecoverReport recover_balanced_metric(const CYProblem& prob, const RealField& u) {
  const DerivativeEngine& eng = prob.engine();
  const GridDomain& g = prob.domain();
  if (u.size() != g.num_points())
    throw std::invalid_argument("recover_balanced_metric: u does not match the grid");
  const int n = g.n;

  // Q_u = omega^{n-1}/(n-1)! + i ddbar( u alpha^{n-2} )/(n-1)!; the second
  // block uses the factorial-normalized power, so its scale is 1/(n-1)
  ComplexForm q = wedge_power_over_factorial(prob.omega().form(), n - 1);
  ComplexForm pert =
      i_ddbar(eng, field_times(u, wedge_power_over_factorial(prob.alpha().form(), n - 2)));
  pert *= Complex(1.0 / (n - 1), 0.0);
  q += pert;

  const double pos = root_pairing_matrix(q).min_eigenvalue();
  RecoverReport rep{michelsohn_root(q), 0.0, pos};
  rep.balanced_residual = balanced_residual(eng, rep.metric);
  return rep;
}

HermitianMatrixField chern_ricci(const DerivativeEngine& eng, const HermitianMatrixField& gmat) {
  if (!(eng.grid() == gmat.domain()))
    throw std::invalid_argument("chern_ricci: engine and metric grids differ");
  const RealField det = gmat.det_field();
  RealField ld(det.size());
  for (std::size_t p = 0; p < det.size(); ++p) {
    if (det[p] <= 0.0) {
      std::ostringstream msg;
      msg << "chern_ricci: determinant is not positive (det=" << det[p] << ") at point index "
          << p;
      throw std::invalid_argument(msg.str());
    }
    ld[p] = std::log(det[p]);
  }
  HermitianMatrixField ric = matrix_of_one_one_form(i_ddbar(eng, ld));
  const int n = gmat.n();
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (Complex& v : ric.entry(j, k)) v = -v;
  return ric;
}

RealField ingest_psi(const DerivativeEngine& eng, const HermitianMatrixField& alpha,
                     const HermitianMatrixField& omega, const RealField& rho) {
  const GridDomain& g = eng.grid();
  if (!(g == alpha.domain()) || !(g == omega.domain()))
    throw std::invalid_argument("ingest_psi: engine and metric grids differ");
  if (rho.size() != g.num_points())
    throw std::invalid_argument("ingest_psi: rho does not match the grid");
  const RealField det_a = alpha.det_field();
  const RealField det_w = omega.det_field();
  RealField psi(rho.size());
  for (std::size_t p = 0; p < psi.size(); ++p) {
    if (det_a[p] <= 0.0 || det_w[p] <= 0.0)
      throw std::invalid_argument("ingest_psi: metric determinant is not positive");
    psi[p] = (g.n - 1) * (std::log(det_w[p]) - rho[p]) - std::log(det_a[p]);
  }
  return psi;
}

C0Report c0_report(const CYProblem& prob, const CYSolution& sol) {
  C0Report rep{sup_norm(sol.u), sol.b, sol.residual_sup, 0.0};
  const RealField tr = trace_against(prob.alpha_inverse(), sol.tilde_omega);
  bool first = true;
  for (double v : tr) {
    if (first || v < rep.trace_margin) rep.trace_margin = v;
    first = false;
  }
  return rep;
}

}  // namespace balab
