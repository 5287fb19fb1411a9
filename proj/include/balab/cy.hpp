#pragma once

#include <functional>
#include <string>
#include <vector>

#include "balab/deriv.hpp"
#include "balab/field.hpp"
#include "balab/geometry.hpp"
#include "balab/gmres.hpp"
#include "balab/metric.hpp"
#include "balab/status.hpp"

namespace balab {

/** Sign class of the curvature-type coefficient E against the background α:
    `sub` when E ≤ 0 everywhere, `super` when E ≥ 0, `astheno` on the common
    boundary E ≡ 0, `indefinite` otherwise. */
enum class AsthenoClass { astheno, sub, super, indefinite };

std::string to_string(AsthenoClass c);

/** Classification from the grid-global extreme generalized eigenvalues. */
AsthenoClass classify_astheno(double min_eigenvalue, double max_eigenvalue, double tol);

/** The zeroth-order coefficient block E = ⋆_α( i∂∂̄ α^{n-2} ) of the
    log-determinant equation, together with its sign classification. */
struct AsthenoReport {
  HermitianMatrixField e;       ///< matrix field of the (1,1)-form E
  RealField x_e;                ///< tr_α E = n! · compute_X(α, n-1).direct
  double min_eigenvalue = 0.0;  ///< min over points of the E-vs-α eigenvalues
  double max_eigenvalue = 0.0;
  AsthenoClass classification = AsthenoClass::astheno;
};

/** Computes E and classifies it. Requires n ≥ 3 (the power α^{n-2} must be a
    form of positive degree); throws std::invalid_argument otherwise. */
AsthenoReport compute_E(const DerivativeEngine& eng, const HermitianMatrixField& alpha,
                        double tol = 1e-10);

/** Optional gradient-dependent correction block χ(∂u, ∂̄u). `value` returns
    the (1,1) matrix block at u; `derivative` its directional derivative at u
    in direction v. The default (empty name, null functions) is χ ≡ 0. */
struct ChiTerm {
  std::string name = "none";
  std::function<HermitianMatrixField(const DerivativeEngine&, const RealField& u)> value;
  std::function<HermitianMatrixField(const DerivativeEngine&, const RealField& u,
                                     const RealField& v)>
      derivative;
};

/**
 * Data of the balanced log-determinant problem
 *
 *   log det( ω_h + [(Δ_α u) α − i∂∂̄u]/(n−1) + χ(∂u,∂̄u) + E·u )
 *       = ψ + b + log det α,
 *
 * with ω_h = ⋆_α(ω^{n-1}/(n-1)!), on a fixed grid with a fixed background
 * pair (α, ω). All derived coefficient fields are precomputed once here so
 * that assembly inside the solver is pure pointwise algebra plus derivatives
 * of u.
 */
class CYProblem {
 public:
  /** Throws std::invalid_argument on grid mismatch or n < 3, and
      std::runtime_error if α or ω fails positivity. */
  CYProblem(const DerivativeEngine& eng, HermitianMatrixField alpha, HermitianMatrixField omega,
            RealField psi, ChiTerm chi = {});

  const DerivativeEngine& engine() const { return *eng_; }
  const GridDomain& domain() const { return eng_->grid(); }
  int n() const { return eng_->grid().n; }
  const HermitianMatrixField& alpha() const { return alpha_; }
  const HermitianMatrixField& alpha_inverse() const { return alpha_inv_; }
  const HermitianMatrixField& omega() const { return omega_; }
  const RealField& psi() const { return psi_; }
  const ChiTerm& chi() const { return chi_; }
  const AsthenoReport& astheno() const { return astheno_; }
  /** ⋆_α(ω^{n-1}/(n-1)!) as a matrix field (the u = 0 state). */
  const HermitianMatrixField& omega_h() const { return omega_h_; }
  const RealField& log_det_alpha() const { return log_det_alpha_; }
  /** sup-norm of d(ω^{n-1}/(n-1)!) of the background ω. */
  double balanced_residual() const { return balanced_residual_; }

  /** ω̃_u = ω_h + [(Δ_α u) α − i∂∂̄u]/(n−1) + χ + E·u. */
  HermitianMatrixField assemble(const RealField& u) const;

  /** Directional derivative of assemble at u in direction v (the χ block
      contributes through its declared derivative; all other blocks are
      linear in u). */
  HermitianMatrixField assemble_derivative(const RealField& u, const RealField& v) const;

  /** Pointwise log det ω̃ − ψ − b − log det α. Entries where det ω̃ ≤ 0 are
      NaN; consult positivity_margin before trusting the sup-norm. */
  RealField residual(const HermitianMatrixField& tilde, double b) const;

  /** Smallest generalized eigenvalue of ω̃ against α over all grid points. */
  double positivity_margin(const HermitianMatrixField& tilde) const;

 private:
  const DerivativeEngine* eng_;
  HermitianMatrixField alpha_;
  HermitianMatrixField alpha_inv_;
  HermitianMatrixField omega_;
  RealField psi_;
  ChiTerm chi_;
  AsthenoReport astheno_;
  HermitianMatrixField omega_h_;
  RealField log_det_alpha_;
  double balanced_residual_ = 0.0;
};

struct CYOptions {
  int max_iters = 60;
  double tol = 1e-9;           ///< sup-norm acceptance threshold on the residual
  double mean_target = 0.0;    ///< grid mean enforced on u by projection
  double margin_fraction = 0.05;  ///< trial states must keep this fraction of the margin
  double min_step = 1e-8;      ///< line-search floor before declaring failure
  GmresOptions gmres{80, 400, 1e-12};
};

struct CYSolution {
  RealField u;
  double b = 0.0;
  HermitianMatrixField tilde_omega;  ///< ω̃ at the returned u
  double residual_sup = 0.0;
  double margin = 0.0;  ///< min generalized eigenvalue of ω̃_u against α
  SolveStatus status = SolveStatus::max_iterations;
  int iterations = 0;
  int gmres_iterations = 0;
  std::vector<double> residual_history;  ///< sup-residual per outer iteration
  std::string message;
};

/** Damped Newton on (u, b): b is eliminated each outer step as the grid mean
    of log det ω̃_u − ψ − log det α, and the mean-zero remainder drives a GMRES
    solve of the exact linearization tr(ω̃_u^{-1}·δω̃). The update is restricted
    to the Fourier modes the discrete first derivatives represent faithfully
    (see DerivativeEngine::dealias_mask); the residual is always measured on
    the full grid. Accepted when the sup-residual is ≤ opt.tol with positive
    margin. Starts from u ≡ mean target when no initial guess is given. */
CYSolution solve_cy(const CYProblem& prob, const CYOptions& opt = {});
CYSolution solve_cy(const CYProblem& prob, const RealField& initial, const CYOptions& opt = {});

/** Root metric of Q_u = [ω^{n-1} + i∂∂̄(u·α^{n-2})]/(n-1)! with diagnostics.
    Positivity failure of the pairing matrix surfaces as std::runtime_error
    naming the offending grid point. */
struct RecoverReport {
  HermitianMatrixField metric;      ///< ω_u
  double balanced_residual = 0.0;   ///< sup |d(ω_u^{n-1}/(n-1)!)|
  double positivity_margin = 0.0;   ///< min eigenvalue of the pairing matrix of Q_u
};
RecoverReport recover_balanced_metric(const CYProblem& prob, const RealField& u);

/** Ric = −i∂∂̄ log det g as a matrix field; throws std::invalid_argument if
    det g is not positive everywhere. */
HermitianMatrixField chern_ricci(const DerivativeEngine& eng, const HermitianMatrixField& g);

/** Builds the data ψ so that (for constant α) the solved metric satisfies
    Ric(ω_u) = Ric(ω) + i∂∂̄ρ:  ψ = (n−1)(log det g_ω − ρ) − log det g_α. */
RealField ingest_psi(const DerivativeEngine& eng, const HermitianMatrixField& alpha,
                     const HermitianMatrixField& omega, const RealField& rho);

/** Size statistics of an accepted solution, including the trace form
    tr_α ω̃_u = tr_α ω_h + Δ_α u + tr_α χ + (tr_α E)·u whose positivity is
    implied by cone membership. */
struct C0Report {
  double sup_u = 0.0;
  double b = 0.0;
  double residual_sup = 0.0;
  double trace_margin = 0.0;  ///< min over points of tr_α ω̃_u
};
C0Report c0_report(const CYProblem& prob, const CYSolution& sol);

}  // namespace balab
