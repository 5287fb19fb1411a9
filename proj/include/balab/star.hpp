#pragma once

#include <map>

#include "balab/forms.hpp"
#include "balab/metric.hpp"

namespace balab {

/** Value of a form at one grid point: frame label -> coefficient. */
using PointForm = std::map<FormKey, Complex>;

/** Flat Hodge star of a single frame element dz^J ∧ dz̄^K in dimension n,
    for the metric whose form is ω_flat = i Σ dz^j ∧ dz̄^j. A (p,q) element
    maps to a combination of (n-q, n-p) elements. Results are memoized. */
const std::map<FormKey, Complex>& flat_star_of_key(int n, FormKey key);

/** Flat Hodge star applied label-by-label to every coefficient field. */
ComplexForm hodge_star_flat(const ComplexForm& f);

/** Frame change of a pointwise form by the matrix M acting through its
    minors: out_{A,B} += c_{J,K} · det(M[J,A]) · conj(det(M[K,B])). */
PointForm apply_minors(const PointForm& f, const Eigen::MatrixXcd& M, int n);

/** Hodge star with respect to the Hermitian metric alpha, computed pointwise:
    write conj(A) = L L^† (Cholesky) and C = L^†, so that C^T conj(C) = A;
    push the form to the orthonormal frame with apply_minors(·, C^{-1}), take
    the flat star there, and pull back with apply_minors(·, C). Falls back to
    the label-table fast path when alpha is the identity. */
ComplexForm hodge_star(const ComplexForm& f, const HermitianMatrixField& alpha);

}  // namespace balab
