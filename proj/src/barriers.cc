#include "balab/barriers.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "balab/gmres.hpp"

namespace balab {

namespace {

double ipow(double t, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= t;
  return r;
}

// analytic time derivatives of the bulge a·t(t-1) + t^b(1-t)
double bulge(double t, double a, int b) { return a * t * (t - 1.0) + ipow(t, b) * (1.0 - t); }
double bulge_t(double t, double a, int b) {
  return a * (2.0 * t - 1.0) + b * ipow(t, b - 1) - (b + 1) * ipow(t, b);
}
double bulge_tt(double t, double a, int b) {
  return 2.0 * a + b * (b - 1) * ipow(t, b - 2) - b * (b + 1) * ipow(t, b - 1);
}

}  // namespace

SpaceTimeField subsolution_path(const GeodesicProblem& prob, double a, int b) {
  if (b < 2) throw std::invalid_argument("subsolution_path: exponent b must be at least 2");
  const int nt = prob.nt();
  SpaceTimeField phi = SpaceTimeField::linear_path(prob.grid(), nt, prob.phi0(), prob.phi1());
  for (int i = 0; i <= nt; ++i) {
    const double t = static_cast<double>(i) / nt;
    const double c = bulge(t, a, b);
    RealField& row = phi.row(i);
    for (double& v : row) v += c;
  }
  return phi;
}

SubsolutionMargin subsolution_margin(const GeodesicProblem& prob, double a, int b) {
  const int nt = prob.nt();
  const double eps = prob.eps();
  const double n = prob.n();
  const RealField& x = prob.x_field();
  const DerivativeEngine& eng = prob.engine();
  const std::size_t np = prob.grid().num_points();

  SubsolutionMargin out;
  out.margin = std::numeric_limits<double>::infinity();
  out.min_a_coeff = std::numeric_limits<double>::infinity();

  const SpaceTimeField phi = subsolution_path(prob, a, b);
  for (int i = 0; i <= nt; ++i) {
    const double t = static_cast<double>(i) / nt;
    const RealField a_row = prob.coefficient_a(phi.row(i));

    // Φ_t = (φ₁ - φ₀) + bulge_t(t); spatial derivatives of the constant part
    // of the bulge vanish, so ∇Φ_t = ∇(φ₁ - φ₀) for every row.
    RealField pt(np);
    const double bt = bulge_t(t, a, b);
    for (std::size_t q = 0; q < np; ++q) pt[q] = prob.phi1()[q] - prob.phi0()[q] + bt;
    std::vector<CplxField> grad_pt = holo_gradient(eng, promote(pt));
    const CplxField gsq = hermitian_pairing(prob.metric_inverse(), grad_pt, grad_pt);

    const double ptt = bulge_tt(t, a, b);
    for (std::size_t q = 0; q < np; ++q) {
      const double m = ptt * a_row[q] - gsq[q].real() - eps + 0.5 * n * x[q] * pt[q] * pt[q];
      if (m < out.margin) {
        out.margin = m;
        out.argmin_row = i;
        out.argmin_point = q;
      }
      out.min_a_coeff = std::min(out.min_a_coeff, a_row[q]);
    }
  }
  return out;
}

BarrierPair construct_subsolution(const GeodesicProblem& prob, const SubsolutionOptions& opt) {
  if (opt.a_step <= 0.0) throw std::invalid_argument("construct_subsolution: a_step must be positive");
  if (opt.b_max < 2) throw std::invalid_argument("construct_subsolution: b_max must be at least 2");

  // standing positivity of the straight-line path
  {
    const int nt = prob.nt();
    const SpaceTimeField lin =
        SpaceTimeField::linear_path(prob.grid(), nt, prob.phi0(), prob.phi1());
    for (int i = 0; i <= nt; ++i) {
      const RealField a_row = prob.coefficient_a(lin.row(i));
      for (std::size_t q = 0; q < a_row.size(); ++q) {
        if (a_row[q] <= 0.0) {
          std::ostringstream os;
          os << "construct_subsolution: A of the straight-line path is not positive at t="
             << static_cast<double>(i) / nt << " (value " << a_row[q] << ")";
          throw std::invalid_argument(os.str());
        }
      }
    }
  }

  double best_a = 0.0;
  int best_b = 2;
  double best_margin = -std::numeric_limits<double>::infinity();

  for (double a = 0.0; a <= opt.a_max + 1e-12; a += opt.a_step) {
    for (int b = 2; b <= opt.b_max; ++b) {
      const SubsolutionMargin m = subsolution_margin(prob, a, b);
      if (m.min_a_coeff <= 0.0) continue;  // outside the cone, not a candidate
      if (m.margin > best_margin) {
        best_margin = m.margin;
        best_a = a;
        best_b = b;
      }
      if (m.margin > 0.0) {
        double upper_res = 0.0;
        BarrierPair pair{subsolution_path(prob, a, b),
                         solve_supersolution(prob, &upper_res),
                         SolveStatus::accepted,
                         a,
                         b,
                         m.margin,
                         upper_res,
                         {}};
        return pair;
      }
    }
  }

  double upper_res = 0.0;
  BarrierPair pair{subsolution_path(prob, best_a, best_b),
                   solve_supersolution(prob, &upper_res),
                   SolveStatus::search_exhausted,
                   best_a,
                   best_b,
                   best_margin,
                   upper_res,
                   {}};
  std::ostringstream os;
  os << "no family member certifies over a in [0," << opt.a_max << "] step " << opt.a_step
     << ", b in [2," << opt.b_max << "]; best margin " << best_margin << " at (a,b)=(" << best_a
     << "," << best_b << ")";
  pair.message = os.str();
  return pair;
}

SpaceTimeField solve_supersolution(const GeodesicProblem& prob, double* residual_out) {
  const int nt = prob.nt();
  const double dt = 1.0 / nt;
  const std::size_t np = prob.grid().num_points();

  SpaceTimeField u = prob.initial_path();
  // The operator u_tt + Δu + nXu on zero-boundary interior perturbations is
  // exactly the s = 0 linearization, whose frozen-mode preconditioner we reuse.
  const GeodesicLinearization lin(prob, u, 0.0);

  auto defect = [&](const SpaceTimeField& w, std::vector<double>& e) {
    e.assign(static_cast<std::size_t>(nt - 1) * np, 0.0);
    for (int i = 1; i < nt; ++i) {
      const RealField a_row = prob.coefficient_a(w.row(i));  // n + nXw + Δw
      const RealField& wm = w.row(i - 1);
      const RealField& w0 = w.row(i);
      const RealField& wp = w.row(i + 1);
      double* dst = e.data() + static_cast<std::size_t>(i - 1) * np;
      for (std::size_t q = 0; q < np; ++q) {
        const double wtt = (wp[q] - 2.0 * w0[q] + wm[q]) / (dt * dt);
        dst[q] = wtt + a_row[q];  // u_tt + Δu + nXu + n
      }
    }
  };

  GmresOptions gopt;
  gopt.tol = 1e-13;
  gopt.max_iters = 2000;

  std::vector<double> e;
  for (int pass = 0; pass < 4; ++pass) {
    defect(u, e);
    double sup = 0.0;
    for (double v : e) sup = std::max(sup, std::abs(v));
    if (residual_out) *residual_out = sup;
    if (sup <= 1e-10) return u;

    std::vector<double> rhs(e.size());
    for (std::size_t q = 0; q < e.size(); ++q) rhs[q] = -e[q];
    std::vector<double> v(e.size(), 0.0);
    const GmresResult g = gmres(
        [&](const std::vector<double>& in, std::vector<double>& out) { lin.apply(in, out); },
        [&](const std::vector<double>& in, std::vector<double>& out) { lin.precondition(in, out); },
        rhs, v, gopt);
    if (!g.converged && g.residual > 1e-8) {
      std::ostringstream os;
      os << "solve_supersolution: linear solver breakdown (relative residual " << g.residual
         << " after " << g.iterations << " iterations)";
      throw std::runtime_error(os.str());
    }
    u.axpy_interior(1.0, v);
  }

  defect(u, e);
  double sup = 0.0;
  for (double v : e) sup = std::max(sup, std::abs(v));
  if (residual_out) *residual_out = sup;
  if (sup > 1e-10) {
    std::ostringstream os;
    os << "solve_supersolution: residual " << sup << " above the 1e-10 contract";
    throw std::runtime_error(os.str());
  }
  return u;
}

double path_energy(const GeodesicProblem& prob, const SpaceTimeField& phi) {
  const int nt = phi.nt();
  const double n = prob.n();
  const RealField& x = prob.x_field();
  const RealField& det = prob.metric_det();
  const DerivativeEngine& eng = prob.engine();
  const GridDomain& grid = prob.grid();
  const std::size_t np = grid.num_points();

  const double det_total = kahan_sum(det);

  double energy = 0.0;
  for (int i = 0; i <= nt; ++i) {
    const RealField pt = phi.time_d1(i);
    const CplxField lap = chern_laplacian_with_inverse(eng, prob.metric_inverse(),
                                                       promote(phi.row(i)));
    RealField cell(np);
    for (std::size_t q = 0; q < np; ++q) {
      const double density = 1.0 + lap[q].real() / n + x[q] * phi.row(i)[q];
      if (density <= 0.0) {
        std::ostringstream os;
        os << "path_energy: positivity factor " << density << " at t="
           << static_cast<double>(i) / nt << ", x=(";
        std::vector<double> c(2 * grid.n, 0.0);
        grid.coordinates(q, c.data());
        for (std::size_t k = 0; k < c.size(); ++k) os << (k ? "," : "") << c[k];
        os << ")";
        throw std::runtime_error(os.str());
      }
      cell[q] = pt[q] * pt[q] * density * det[q];
    }
    const double w = (i == 0 || i == nt) ? 0.5 / nt : 1.0 / nt;
    energy += w * kahan_sum(cell);
  }
  return energy / det_total;
}

}  // namespace balab
