#pragma once

#include <string>
#include <vector>

#include "balab/deriv.hpp"
#include "balab/geometry.hpp"
#include "balab/metric.hpp"
#include "balab/spacetime.hpp"

namespace balab {

/** Location and values of the worst cone margins along a path. */
struct ConeScan {
  double min_g = 0.0;    ///< min over interior nodes of G = φ_tt A - |∇φ_t|²
  double min_a = 0.0;    ///< min of A = n + nXφ + Δφ
  double min_ptt = 0.0;  ///< min of φ_tt
  double min_l = 0.0;    ///< min of L = ε - (n/2) X φ_t²
  int argmin_row = -1;   ///< time row of the smallest of min_g/min_a/min_ptt
  std::size_t argmin_point = 0;
  std::string describe(const GridDomain& g, int nt) const;
};

/**
 * Two-point boundary value problem for the perturbed geodesic equation on the
 * cylinder [0,1] × X, embedded in the family (s follows the path from the
 * linear problem at s=0 to the full equation at s=1)
 *
 *   R_s(φ) = s (φ_tt A - |∇φ_t|²) + (1-s)(φ_tt + A) - ε + (n s/2) X φ_t² - r
 *
 * with A = n + nXφ + Δφ, Dirichlet rows φ(0,·) = φ₀ and φ(1,·) = φ₁, X the
 * zeroth-order coefficient field of the underlying metric, and optional
 * forcing r(x,t) (for manufactured solutions and sweeps).
 *
 * The problem requires sup X ≤ x_tol: the continuity path is monotone only
 * for a nonpositive coefficient. Metrics whose coefficient comes out positive
 * must be rescaled by the caller (the x_scale configuration knob).
 */
class GeodesicProblem {
 public:
  GeodesicProblem(const DerivativeEngine& eng, HermitianMatrixField metric, RealField x_field,
                  double eps, int nt, RealField phi0, RealField phi1, double x_tol = 1e-12);

  /** Forcing rows r(·, t_i), one per node (nt+1 rows). */
  void set_forcing(std::vector<RealField> rows);

  const DerivativeEngine& engine() const { return *eng_; }
  const GridDomain& grid() const { return eng_->grid(); }
  int n() const { return grid().n; }
  int nt() const { return nt_; }
  double eps() const { return eps_; }
  const RealField& x_field() const { return x_; }
  const HermitianMatrixField& metric() const { return metric_; }
  const HermitianMatrixField& metric_inverse() const { return ginv_; }
  const RealField& metric_det() const { return det_; }
  const RealField& phi0() const { return phi0_; }
  const RealField& phi1() const { return phi1_; }
  const RealField& forcing_row(int i) const;

  /** Straight-line interpolation of the boundary rows. */
  SpaceTimeField initial_path() const;

  /** A(φ) = n + nXφ + Δφ for one spatial row. */
  RealField coefficient_a(const RealField& phi_row) const;

  /** Residual R_s(φ) on the interior rows, flattened row-major. */
  std::vector<double> residual(const SpaceTimeField& phi, double s) const;
  double residual_sup(const SpaceTimeField& phi, double s) const;

  /** Worst-case cone quantities over the interior rows. */
  ConeScan cone_scan(const SpaceTimeField& phi) const;

  /** Ellipticity margin of the s-weighted symbol: min over interior points
      of the smallest arrow eigenvalue with entries sA+(1-s), sφ_tt+(1-s)
      and s∇φ_t. Positive exactly where the linearized operator at (φ, s) is
      elliptic; the fraction-to-boundary damping keeps it away from zero. */
  double cone_gauge(const SpaceTimeField& phi, double s) const;

 private:
  const DerivativeEngine* eng_;
  HermitianMatrixField metric_;
  HermitianMatrixField ginv_;
  RealField det_;
  RealField x_;
  double eps_;
  int nt_;
  RealField phi0_, phi1_;
  std::vector<RealField> forcing_;
};

/**
 * Linearization of R_s at a path φ:
 *
 *   DR[u] = s [ u_tt A + φ_tt (nXu + Δu) - 2 Re⟨∇φ_t, ∇u_t⟩ ]
 *         + (1-s) [ u_tt + nXu + Δu ] + n s X φ_t u_t
 *
 * acting on interior-row vectors (boundary perturbations vanish), plus the
 * frozen-coefficient preconditioner: per spatial Fourier mode k, the
 * tridiagonal-in-t operator a u_tt - c_k u with a = s·mean(A) + (1-s) and
 * c_k = (s·max(mean φ_tt, 0) + (1-s)) μ_k, solved by the Thomas algorithm.
 */
class GeodesicLinearization {
 public:
  GeodesicLinearization(const GeodesicProblem& prob, const SpaceTimeField& phi, double s);

  void apply(const std::vector<double>& u, std::vector<double>& out) const;
  void precondition(const std::vector<double>& r, std::vector<double>& out) const;

 private:
  const GeodesicProblem* prob_;
  double s_;
  int nt_;
  std::vector<RealField> a_rows_, ptt_rows_, pt_rows_;
  std::vector<std::vector<CplxField>> grad_pt_rows_;
  double mean_a_ = 0.0, mean_ptt_ = 0.0;
};

/** Smallest eigenvalue of the arrow-shaped principal symbol
      [ A        -w̄ᵀ ]
      [ -w   φ_tt I  ]
    which is min(φ_tt, ((A+φ_tt) - sqrt((A-φ_tt)² + 4|w|²))/2). */
double arrow_min_eigenvalue(double a, double ptt, double grad_sq);

/** Pointwise minimum of the symbol eigenvalue over the interior rows. */
double symbol_min_eigenvalue(const GeodesicProblem& prob, const SpaceTimeField& phi);

}  // namespace balab
