#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "balab/barriers.hpp"
#include "balab/geodesic.hpp"

namespace balab {

/** f = log(xy - Σ z_k²) with real z, on the region x > 0, y > 0,
    xy - Σz² > 0 (throws std::invalid_argument outside). Midpoint concavity
    of f on this convex region is sampled by concavity_tests. */
double hyperbolic_log(double x, double y, const std::vector<double>& z);

/** Closed-form complex Hessian of g = -log(d - Σ|z_k|²):
    H[j][k] = δ_jk/D + conj(z_j) z_k / D² with D = d - Σ|z_k|² > 0.
    Positive definite with smallest eigenvalue exactly 1/D. */
Eigen::MatrixXcd ball_log_hessian(double d, const std::vector<Complex>& z);

struct ConcavityReport {
  int samples = 0;
  int failures = 0;
  double worst_midpoint_slack = 0.0;     ///< min of f(mid) - (f(P)+f(Q))/2
  double worst_hessian_eigenvalue = 0.0; ///< min eigenvalue over the samples
  double worst_hessian_fd_error = 0.0;   ///< closed form vs central differences
  std::string counterexample;            ///< first failing sample, if any
};

/** Seeded midpoint-concavity samples of the hyperbolic logarithm plus
    positive-semidefiniteness samples of the ball-logarithm Hessian
    (with a finite-difference crosscheck on a subsample). */
ConcavityReport concavity_tests(int samples = 10000, std::uint64_t seed = 42);

/** One instance of the cone-gap inequality for
    F(M) = M⁰⁰ ΣᵢMⁱⁱ - Σᵢ|Mⁱ⁰|²: derivative DF(A)[B-A], the bisected
    largest ε* with F(B - ε*I) still above F(A), the diagonal derivative sum
    ΣF^{αᾱ}(A) = ΣᵢAⁱⁱ + n·A⁰⁰, and the slack DF - ε*·ΣF^{αᾱ} (≥ 0). */
struct GapSample {
  double derivative = 0.0;
  double eps_star = 0.0;
  double trace_sum = 0.0;
  double slack = 0.0;
};
GapSample gap_check(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

struct GapReport {
  int samples = 0;
  int failures = 0;
  double worst_slack = 0.0;
  std::string counterexample;
};
GapReport gap_lemma_test(int samples = 1000, std::uint64_t seed = 42);

/** min_Y(φ - lower) and min_Y(upper - φ) with the worst locations. */
struct SandwichReport {
  double lower_margin = 0.0;
  double upper_margin = 0.0;
  int lower_argmin_row = 0;
  std::size_t lower_argmin_point = 0;
  int upper_argmin_row = 0;
  std::size_t upper_argmin_point = 0;
};
SandwichReport check_sandwich(const SpaceTimeField& phi, const BarrierPair& barriers);

/** min over nodes of min(φ_t - φ_t(·,0), φ_t(·,1) - φ_t): nonnegative up to
    discretization exactly when φ_t is monotone between its boundary rows. */
struct MonotoneReport {
  double margin = 0.0;
  int argmin_row = 0;
  std::size_t argmin_point = 0;
};
MonotoneReport check_time_monotone(const SpaceTimeField& phi);

/** Measured a priori quantities of one solution path. */
struct EstimateReport {
  double sup_ptt = 0.0;        ///< sup |φ_tt| over all rows (one-sided ends)
  double lambda1 = 0.0;        ///< sup of the largest |eigenvalue| of ∂∂̄φ
  double big_k = 1.0;          ///< K = sup(1 + |∇φ|²)
  double hessian_ratio = 0.0;  ///< lambda1 / K
  double monotone_margin = 0.0;
  double sandwich_lower = 0.0;
  double sandwich_upper = 0.0;
  bool has_sandwich = false;
};
EstimateReport estimate_ratios(const GeodesicProblem& prob, const SpaceTimeField& phi,
                               const BarrierPair* barriers = nullptr);

/** Constants making the pointwise inequality
      ℒ(lower - φ) ≥ ε₁ ΣF^{αᾱ} - C₁ K,   K = sup(1 + φ_t²),
    hold on the interior rows, where ℒu = A u_tt + φ_tt Δu - 2Re⟨∇φ_t,∇u_t⟩
    is the principal linearization at φ and ΣF^{αᾱ} = n(φ_tt + A). C₁ and ε₁
    are measured (smallest feasible), so worst_slack ≥ 0 up to roundoff. */
struct MeasuredConstants {
  double c1 = 0.0;
  double eps1 = 0.0;
  double k = 1.0;
  double worst_slack = 0.0;
};
MeasuredConstants measured_constants(const GeodesicProblem& prob, const SpaceTimeField& phi,
                                     const SpaceTimeField& lower);

/** One row of the energy-minimality table: the path energy at φ ± δψ for a
    seeded perturbation ψ vanishing on the boundary rows, with the centered
    first and second variations. Perturbations that leave the positivity
    region are skipped and reported, not silently dropped. */
struct MinimalityProbe {
  int index = 0;
  double delta = 0.0;
  double psi_norm = 0.0;
  double energy_base = 0.0;
  double energy_plus = 0.0;
  double energy_minus = 0.0;
  double first_variation = 0.0;
  double second_variation = 0.0;
  bool skipped = false;
};
std::vector<MinimalityProbe> energy_minimality_probe(const GeodesicProblem& prob,
                                                     const SpaceTimeField& phi, int count = 20,
                                                     std::uint64_t seed = 42);

}  // namespace balab
