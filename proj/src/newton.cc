#include "balab/newton.hpp"

#include <cmath>
#include <sstream>

namespace balab {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::accepted: return "accepted";
    case SolveStatus::cone_exit: return "cone_exit";
    case SolveStatus::line_search_fail: return "line_search_fail";
    case SolveStatus::max_iterations: return "max_iterations";
    case SolveStatus::path_stuck: return "path_stuck";
    case SolveStatus::search_exhausted: return "search_exhausted";
  }
  return "unknown";
}

NewtonReport newton_solve(const GeodesicProblem& prob, SpaceTimeField& phi, double s,
                          const NewtonOptions& opt) {
  NewtonReport rep;
  if (prob.cone_gauge(phi, s) <= 0.0) {
    rep.status = SolveStatus::cone_exit;
    std::ostringstream os;
    os << "initial path is outside the ellipticity cone at s=" << s << " ("
       << prob.cone_scan(phi).describe(prob.grid(), prob.nt()) << ")";
    rep.message = os.str();
    return rep;
  }
  std::vector<double> r = prob.residual(phi, s);
  double res = 0.0;
  for (double v : r) res = std::max(res, std::abs(v));
  rep.residual = res;

  for (int it = 0; it < opt.max_iters; ++it) {
    if (res <= opt.tol) {
      rep.status = SolveStatus::accepted;
      return rep;
    }
    rep.iterations = it + 1;

    GeodesicLinearization lin(prob, phi, s);
    std::vector<double> rhs(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) rhs[i] = -r[i];
    std::vector<double> u(r.size(), 0.0);
    const GmresResult g =
        gmres([&](const std::vector<double>& in, std::vector<double>& out) { lin.apply(in, out); },
              [&](const std::vector<double>& in, std::vector<double>& out) {
                lin.precondition(in, out);
              },
              rhs, u, opt.gmres);
    rep.gmres_iterations += g.iterations;

    const double gauge = prob.cone_gauge(phi, s);
    double tau = 1.0;
    bool stepped = false;
    bool cone_blocked = false;
    while (tau >= opt.tau_min) {
      SpaceTimeField trial = phi;
      trial.axpy_interior(tau, u);
      // fraction-to-boundary: keep the cone gauge above a fixed fraction
      if (prob.cone_gauge(trial, s) < opt.cone_fraction * gauge) {
        cone_blocked = true;
        tau *= 0.5;
        continue;
      }
      cone_blocked = false;
      const std::vector<double> rt = prob.residual(trial, s);
      double res_t = 0.0;
      for (double v : rt) res_t = std::max(res_t, std::abs(v));
      if (res_t <= (1.0 - opt.armijo_c * tau) * res) {
        phi = std::move(trial);
        r = rt;
        res = res_t;
        rep.residual = res;
        stepped = true;
        break;
      }
      tau *= 0.5;
    }
    if (!stepped) {
      rep.status = cone_blocked ? SolveStatus::cone_exit : SolveStatus::line_search_fail;
      std::ostringstream os;
      if (cone_blocked) {
        os << "damping stalled against the cone boundary at s=" << s << " ("
           << prob.cone_scan(phi).describe(prob.grid(), prob.nt()) << ")";
      } else {
        os << "line search stalled at s=" << s << " with residual " << res;
      }
      rep.message = os.str();
      return rep;
    }
  }
  rep.status = (res <= opt.tol) ? SolveStatus::accepted : SolveStatus::max_iterations;
  rep.residual = res;
  return rep;
}

ContinuationReport continuity_solve(const GeodesicProblem& prob, SpaceTimeField& phi,
                                    const ContinuationOptions& opt) {
  ContinuationReport rep;

  // linear problem first
  NewtonReport first = newton_solve(prob, phi, 0.0, opt.newton);
  rep.newton_iterations += first.iterations;
  rep.gmres_iterations += first.gmres_iterations;
  rep.final_residual = first.residual;
  if (first.status != SolveStatus::accepted) {
    rep.status = first.status;
    rep.message = "linear stage: " + first.message;
    return rep;
  }
  rep.s_values.push_back(0.0);
  ++rep.steps_accepted;

  double s = 0.0;
  double step = opt.s_initial_step;
  while (s < 1.0) {
    const double s_next = std::min(1.0, s + step);
    // the warm start must sit strictly inside the cone at the new s
    if (prob.cone_gauge(phi, s_next) <= 0.0) {
      step *= 0.5;
      if (step < opt.s_min_step) {
        rep.status = SolveStatus::cone_exit;
        rep.final_s = s;
        rep.cone = prob.cone_scan(phi);
        rep.message = "warm start leaves the cone at s=" + std::to_string(s_next) + " (" +
                      rep.cone.describe(prob.grid(), prob.nt()) + ")";
        return rep;
      }
      continue;
    }
    SpaceTimeField trial = phi;
    NewtonReport nr = newton_solve(prob, trial, s_next, opt.newton);
    rep.newton_iterations += nr.iterations;
    rep.gmres_iterations += nr.gmres_iterations;
    if (nr.status == SolveStatus::accepted) {
      phi = std::move(trial);
      s = s_next;
      rep.s_values.push_back(s);
      ++rep.steps_accepted;
      rep.final_residual = nr.residual;
    } else {
      step *= 0.5;
      if (step < opt.s_min_step) {
        rep.status = SolveStatus::path_stuck;
        rep.final_s = s;
        rep.cone = prob.cone_scan(phi);
        std::ostringstream os;
        os << "continuation stalled at s=" << s << " (next step " << step << " below floor "
           << opt.s_min_step << "; Newton: " << to_string(nr.status) << ")";
        rep.message = os.str();
        return rep;
      }
    }
  }

  rep.final_s = 1.0;
  rep.cone = prob.cone_scan(phi);
  // strict interior acceptance: min G ≥ min L (1 - slack) and min L > 0
  if (rep.cone.min_l > 0.0 && rep.cone.min_g >= rep.cone.min_l * (1.0 - opt.cone_slack)) {
    rep.status = SolveStatus::accepted;
  } else {
    rep.status = SolveStatus::cone_exit;
    rep.message = "solution reached the cone boundary (" +
                  rep.cone.describe(prob.grid(), prob.nt()) + ")";
  }
  return rep;
}

}  // namespace balab
