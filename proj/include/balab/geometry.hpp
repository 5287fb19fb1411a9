#pragma once

#include <vector>

#include "balab/deriv.hpp"
#include "balab/field.hpp"
#include "balab/forms.hpp"
#include "balab/metric.hpp"
#include "balab/star.hpp"

namespace balab {

/** The form ω_flat = i Σ dz^j ∧ dz̄^j of the flat metric. */
ComplexForm flat_metric_form(const GridDomain& grid);

/** sup-norm of the coefficients of d(ω^{n-1}/(n-1)!); zero iff the metric is
    balanced. */
double balanced_residual(const DerivativeEngine& eng, const HermitianMatrixField& metric);

/** Pairing matrix of an (n-1,n-1) form Q against the (1,1) frame:
      P_{jk} = [ (i dz^j ∧ dz̄^k) ∧ Q ] / [ ω_flat^n / n! ]
    (ratio of top coefficients, pointwise). For Q = ω_G^{n-1}/(n-1)! this is
    the cofactor matrix det(G) G^{-T}. */
HermitianMatrixField root_pairing_matrix(const ComplexForm& q);

/** Inverts Q = ω_H^{n-1}/(n-1)! for the metric H:
      H = det(P)^{1/(n-1)} (P^{-1})^T     with P the pairing matrix above.
    Throws std::invalid_argument if P is not Hermitian (the input was not a
    real form) and std::runtime_error naming the offending grid point if P is
    not positive definite there (no positive root exists). */
HermitianMatrixField michelsohn_root(const ComplexForm& q, double hermiticity_tol = 1e-8);

/** Chern-torsion magnitudes of a Hermitian metric, reduced in a pointwise
    orthonormal frame: with T^l_{jk} = Σ_m g^{l m̄} (∂_j g_{k m̄} - ∂_k g_{j m̄})
    pushed to the orthonormal frame as T^c_{ab}, */
struct TorsionReport {
  RealField q_distinct;  ///< Σ_{a,b,c pairwise distinct} |T^c_{ab}|²
  RealField q_trace;     ///< Σ_{c=a, a≠b} |T^c_{ab}|²
  RealField tau_sq;      ///< Σ_b |Σ_a T^a_{ab}|²

  /** q_distinct/2 + q_trace - tau_sq; equals
      n(n-1)(n-2) · [i ∂̄ω ∧ ∂ω ∧ ω^{n-3}] / ω^n  pointwise. */
  RealField quadratic_combination() const;
};
TorsionReport chern_torsion(const DerivativeEngine& eng, const HermitianMatrixField& metric);

/** n(n-1)(n-2) · [i ∂̄ω ∧ ∂ω ∧ ω^{n-3}] / ω^n as a ratio of top coefficients;
    the form-side of TorsionReport::quadratic_combination (needs n ≥ 3). */
RealField torsion_square_form_route(const DerivativeEngine& eng,
                                    const HermitianMatrixField& metric);

/** The zeroth-order coefficient X of the mixed-volume linearization,
      X = [ i∂∂̄(ω^{p-1}) ∧ ω^{n-p} ] / ω^n,
    by two routes: `direct` evaluates that ratio for any metric;
    `torsion_route` evaluates (n-p)(p-1)/(n(n-1)(n-2)) · (q_distinct/2 +
    q_trace), which equals X only when the metric is balanced (consult
    `balanced_residual` before trusting it). X vanishes identically for
    closed ω and is nonnegative for balanced ω. */
struct XReport {
  RealField direct;
  RealField torsion_route;
  double balanced_residual = 0.0;
};
XReport compute_X(const DerivativeEngine& eng, const HermitianMatrixField& metric, int p);

/** All second derivatives ∂_j ∂̄_k u as n² fields, row-major [j*n + k]. */
std::vector<CplxField> complex_hessian(const DerivativeEngine& eng, const CplxField& u);

/** Holomorphic gradient (∂_0 u, ..., ∂_{n-1} u). */
std::vector<CplxField> holo_gradient(const DerivativeEngine& eng, const CplxField& u);

/** Σ_{j,k} g^{j k̄} a_j conj(b_k) with g^{j k̄} = ginv.entry(k, j), pointwise. */
CplxField hermitian_pairing(const HermitianMatrixField& ginv, const std::vector<CplxField>& a,
                            const std::vector<CplxField>& b);

/** Chern Laplacian Δu = Σ g^{j k̄} ∂_j ∂̄_k u. Equals
    n · [i∂∂̄u ∧ ω^{n-1}] / ω^n. The `_with_inverse` variant takes the
    already-inverted metric for hot loops. */
CplxField chern_laplacian(const DerivativeEngine& eng, const HermitianMatrixField& metric,
                          const CplxField& u);
RealField chern_laplacian(const DerivativeEngine& eng, const HermitianMatrixField& metric,
                          const RealField& u);
CplxField chern_laplacian_with_inverse(const DerivativeEngine& eng,
                                       const HermitianMatrixField& ginv, const CplxField& u);

/** |∇u|² = Σ g^{j k̄} ∂_j u conj(∂_k u) for real u. */
RealField grad_norm_sq(const DerivativeEngine& eng, const HermitianMatrixField& metric,
                       const RealField& u);

/** The density of the perturbed power Ω_φ = ω^p + i∂∂̄(φ ω^{p-1}) against the
    reference volume, by two routes that agree exactly for balanced ω:
      direct     = 1 + Δφ/n + X φ,
      form_route = [ Ω_φ ∧ ω^{n-p} ] / ω^n. */
struct MixedVolumeReport {
  RealField direct;
  RealField form_route;
  double min_direct = 0.0;
  double max_difference = 0.0;
};
MixedVolumeReport mixed_volume(const DerivativeEngine& eng, const HermitianMatrixField& metric,
                               int p, const RealField& phi);

/** Balanced non-Kähler test metric: the root of
      Q = [ ω_flat^{n-1} + i∂∂̄( f · ω_flat^{n-2} ) ] / (n-1)!,
    which is balanced by construction (dQ = 0). The potential f must be small
    enough that Q stays positive. */
HermitianMatrixField balanced_metric_from_potential(const DerivativeEngine& eng,
                                                    const RealField& f);

}  // namespace balab
