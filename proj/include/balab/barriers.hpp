#pragma once

#include <string>

#include "balab/geodesic.hpp"
#include "balab/status.hpp"

namespace balab {

struct SubsolutionOptions {
  double a_max = 20.0;  ///< largest bulge coefficient tried
  double a_step = 0.5;  ///< arithmetic step of the a-grid, starting at 0
  int b_max = 8;        ///< largest boundary-layer exponent (b = 2..b_max)
};

/**
 * Lower and upper comparison paths for the geodesic boundary value problem.
 * Both match the boundary rows (φ₀, φ₁) exactly. The lower barrier comes
 * from the two-parameter family
 *
 *   Φ(x,t) = t φ₁ + (1-t) φ₀ + a t(t-1) + t^b (1-t)
 *
 * and is certified only by direct pointwise evaluation of the strict
 * inequality  Φ_tt A(Φ) - |∇Φ_t|² - ε + (n/2) X Φ_t² > 0  on every node
 * (time derivatives taken analytically in t). `margin` is the worst value
 * of that expression; `status` is accepted only when it is strictly
 * positive and A(Φ) > 0 everywhere.
 */
struct BarrierPair {
  SpaceTimeField lower;
  SpaceTimeField upper;
  SolveStatus status = SolveStatus::search_exhausted;
  double a = 0.0;
  int b = 0;
  double margin = 0.0;
  double upper_residual = 0.0;  ///< sup-norm residual of the linear solve
  std::string message;
};

/** Evaluate the subsolution family member at (a, b) for the problem's
    boundary rows. Rows are exact in t; Φ(·,0) = φ₀ and Φ(·,1) = φ₁. */
SpaceTimeField subsolution_path(const GeodesicProblem& prob, double a, int b);

/** Worst pointwise margin of the subsolution inequality for the family
    member (a, b), over all rows 0..nt with analytic time derivatives.
    Also reports the smallest value of A(Φ) (the candidate is only valid
    when that is positive). */
struct SubsolutionMargin {
  double margin = 0.0;
  double min_a_coeff = 0.0;
  int argmin_row = 0;
  std::size_t argmin_point = 0;
};
SubsolutionMargin subsolution_margin(const GeodesicProblem& prob, double a, int b);

/**
 * Grid search for the feasible family member with minimal a (ties broken by
 * smallest b), plus the linear upper barrier. Requires A of the straight-line
 * path to be positive on the grid. When no candidate in the box certifies,
 * returns search_exhausted carrying the best candidate and its margin —
 * never a false certificate.
 */
BarrierPair construct_subsolution(const GeodesicProblem& prob, const SubsolutionOptions& opt = {});

/** Solve the linear barrier problem  u_tt + Δu + nXu = -n  with the
    problem's Dirichlet rows, to sup-norm residual ≤ 1e-10 (throws
    std::runtime_error on linear solver breakdown). */
SpaceTimeField solve_supersolution(const GeodesicProblem& prob, double* residual_out = nullptr);

/**
 * Path energy  ℰ = ∫₀¹ ⟨φ_t² (1 + Δφ/n + Xφ)⟩ dt  where ⟨·⟩ is the average
 * against the metric volume density and the time integral is the trapezoid
 * rule on the path's rows (φ_t by the second-order stencils). Throws
 * std::runtime_error naming the first failing node if the positivity factor
 * 1 + Δφ/n + Xφ is not strictly positive everywhere.
 */
double path_energy(const GeodesicProblem& prob, const SpaceTimeField& phi);

}  // namespace balab
