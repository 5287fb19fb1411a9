#pragma once

#include <string>
#include <vector>

#include "balab/geodesic.hpp"
#include "balab/gmres.hpp"
#include "balab/status.hpp"

namespace balab {

struct NewtonOptions {
  double tol = 1e-9;          ///< sup-norm residual target
  int max_iters = 50;
  double armijo_c = 1e-4;     ///< sufficient-decrease constant on the sup norm
  double tau_min = 1e-8;      ///< smallest damping before giving up
  double cone_fraction = 0.1; ///< fraction-to-boundary floor on the cone gauge
  GmresOptions gmres;
};

struct NewtonReport {
  SolveStatus status = SolveStatus::max_iterations;
  int iterations = 0;
  double residual = 0.0;
  int gmres_iterations = 0;
  std::string message;
};

/** Damped Newton at fixed s. Each step solves the linearization by
    preconditioned GMRES, then backtracks to keep the cone gauge above
    cone_fraction times its current value (fraction-to-boundary) and to
    achieve Armijo decrease of the sup-norm residual. */
NewtonReport newton_solve(const GeodesicProblem& prob, SpaceTimeField& phi, double s,
                          const NewtonOptions& opt = {});

struct ContinuationOptions {
  NewtonOptions newton;
  double s_initial_step = 0.1;
  double s_min_step = 1e-6;
  double cone_slack = 1e-6;  ///< accept when min G ≥ min L (1 - slack) > 0
};

struct ContinuationReport {
  SolveStatus status = SolveStatus::path_stuck;
  double final_s = 0.0;
  int steps_accepted = 0;
  int newton_iterations = 0;
  int gmres_iterations = 0;
  double final_residual = 0.0;
  ConeScan cone;
  std::vector<double> s_values;  ///< accepted continuation points
  std::string message;
};

/** Continuation in s from the linear problem to the geodesic equation:
    s starts at 0, advances by s_initial_step (halved on Newton failure,
    floor s_min_step) and is clamped to exactly 1. The path warm-starts from
    the previous solution; φ enters as the initial guess (use
    prob.initial_path()) and leaves holding the last accepted solution. */
ContinuationReport continuity_solve(const GeodesicProblem& prob, SpaceTimeField& phi,
                                    const ContinuationOptions& opt = {});

}  // namespace balab
