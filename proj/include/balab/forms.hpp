#pragma once

#include <map>

#include "balab/deriv.hpp"
#include "balab/field.hpp"
#include "balab/grid.hpp"

namespace balab {

/** Bitmask over holomorphic coordinate indices 0..n-1; bit j set means the
    index j appears in the (strictly increasing) index tuple. */
using Mask = unsigned;

/** Frame label dz^J ∧ dz̄^K of a complex differential form on the torus,
    with J and K increasing multi-indices stored as bitmasks. */
struct FormKey {
  Mask J = 0;
  Mask K = 0;
  auto operator<=>(const FormKey&) const = default;
};

/** Sign of sorting the concatenation (a, b) of two increasing tuples into a
    single increasing tuple, or 0 if they share an index. */
int merge_sign(Mask a, Mask b);

/** Sign (-1)^{#{i in m : i < j}} picked up when inserting index j in front of
    the increasing tuple m, or 0 if j already appears in m. */
int insert_sign(int j, Mask m);

/** A complex differential form with translation-invariant frame
      sum_{J,K} c_{J,K}(x) dz^J ∧ dz̄^K,
    where each coefficient c_{J,K} is a grid field. Keys of any bidegree may
    coexist, so d = ∂ + ∂̄ of a pure-degree form is representable directly. */
class ComplexForm {
 public:
  explicit ComplexForm(GridDomain grid);

  const GridDomain& domain() const { return grid_; }
  std::size_t num_points() const { return grid_.num_points(); }

  /** Coefficient field of the given frame label, created as zero if absent. */
  CplxField& at(FormKey key);
  /** Coefficient field of the given frame label, or nullptr if absent. */
  const CplxField* find(FormKey key) const;
  const std::map<FormKey, CplxField>& terms() const { return terms_; }

  /** Adds scale * c into the coefficient of the given frame label. */
  void add_scaled(FormKey key, const CplxField& c, Complex scale);

  ComplexForm& operator+=(const ComplexForm& other);
  ComplexForm& operator-=(const ComplexForm& other);
  ComplexForm& operator*=(Complex scale);

  /** Largest coefficient magnitude over all frame labels and grid points. */
  double sup_norm() const;

  /** Deviation from realness: sup over labels and points of
      | c_{K,J} - (-1)^{pq} conj(c_{J,K}) |  with p = |J|, q = |K|. */
  double realness_residual() const;

 private:
  GridDomain grid_;
  std::map<FormKey, CplxField> terms_;
};

/** Exterior product; per-label sign is
    (-1)^{q1 p2} * merge_sign(J1, J2) * merge_sign(K1, K2). */
ComplexForm wedge(const ComplexForm& a, const ComplexForm& b);

/** f^k / k!, computed as ((f ∧ f)/2 ∧ f)/3 ... ; k = 0 gives the constant
    scalar 1. */
ComplexForm wedge_power_over_factorial(const ComplexForm& f, int k);

/** Complex conjugate: c_{J,K} dz^J dz̄^K  ->  (-1)^{pq} conj(c_{J,K}) dz^K dz̄^J. */
ComplexForm conjugate(const ComplexForm& f);

/** Pointwise product of a scalar field with every coefficient. */
ComplexForm field_times(const CplxField& s, const ComplexForm& f);
ComplexForm field_times(const RealField& s, const ComplexForm& f);

/** ∂f = sum_j ∂_j c_{J,K} dz^j ∧ dz^J ∧ dz̄^K. */
ComplexForm del(const DerivativeEngine& eng, const ComplexForm& f);

/** ∂̄f = sum_j ∂̄_j c_{J,K} dz̄^j ∧ dz^J ∧ dz̄^K
        = sum_j (-1)^{|J|} ∂̄_j c_{J,K} dz^J ∧ (dz̄^j ∧ dz̄^K). */
ComplexForm dbar(const DerivativeEngine& eng, const ComplexForm& f);

/** i ∂ ∂̄ f for a scalar field f: the (1,1) form with coefficients
    i ∂_j ∂̄_k f at label ({j},{k}). */
ComplexForm i_ddbar(const DerivativeEngine& eng, const CplxField& f);
ComplexForm i_ddbar(const DerivativeEngine& eng, const RealField& f);

/** i ∂ ∂̄ applied to a form (i times del of dbar). */
ComplexForm i_ddbar(const DerivativeEngine& eng, const ComplexForm& f);

/** Coefficient field of the top label dz^{0..n-1} ∧ dz̄^{0..n-1}; zero field
    if the form has no top component. */
CplxField top_coefficient(const ComplexForm& f);

/** Pointwise ratio top(a) / top(b); throws if |top(b)| is ever below floor. */
CplxField top_ratio(const ComplexForm& a, const ComplexForm& b, double floor = 1e-14);

}  // namespace balab
