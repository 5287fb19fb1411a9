#pragma once

#include <Eigen/Dense>
#include <vector>

#include "balab/deriv.hpp"
#include "balab/field.hpp"
#include "balab/forms.hpp"
#include "balab/grid.hpp"

namespace balab {

/** An n×n Hermitian matrix at every grid point, stored as n² coefficient
    fields h_{j k̄}(x) with h_{k j̄} = conj(h_{j k̄}). Used both for Hermitian
    metrics g_{j k̄} (associated form ω = i Σ g_{jk̄} dz^j ∧ dz̄^k) and for
    Hermitian coefficient blocks of linear operators. */
class HermitianMatrixField {
 public:
  /** Identity matrix at every point. */
  explicit HermitianMatrixField(GridDomain grid);

  /** Flat metric g_{jk̄} = δ_jk. */
  static HermitianMatrixField flat(GridDomain grid);

  /** Conformally flat metric g_{jk̄} = e^{f(x)} δ_jk. */
  static HermitianMatrixField conformal(const GridDomain& grid, const RealField& f);

  /** Potential-perturbed metric g_{jk̄} = δ_jk + ∂_j ∂̄_k φ; the associated
      form ω = ω_flat + i∂∂̄φ is closed. Caller should check positivity. */
  static HermitianMatrixField kahler_potential(const DerivativeEngine& eng, const RealField& phi);

  const GridDomain& domain() const { return grid_; }
  int n() const { return grid_.n; }
  std::size_t num_points() const { return grid_.num_points(); }

  const CplxField& entry(int j, int k) const;
  CplxField& entry(int j, int k);

  /** The full matrix at one grid point. */
  Eigen::MatrixXcd at(std::size_t idx) const;
  void set(std::size_t idx, const Eigen::MatrixXcd& m);

  /** sup_{x,j,k} | h_{kj} - conj(h_{jk}) |. */
  double hermiticity_residual() const;

  /** Smallest eigenvalue over all grid points (matrices symmetrized first). */
  double min_eigenvalue() const;

  /** Throws std::runtime_error naming the first offending point if the
      smallest eigenvalue anywhere falls below floor. */
  void require_positive(double floor, const char* what) const;

  /** True when every entry equals δ_jk to within tol. */
  bool is_identity(double tol = 0.0) const;

  /** Associated (1,1) form i Σ h_{jk̄} dz^j ∧ dz̄^k. */
  ComplexForm form() const;

  /** Pointwise matrix inverse (input must be invertible everywhere). */
  HermitianMatrixField pointwise_inverse() const;

  /** Pointwise determinant; real part (imaginary part is roundoff for
      Hermitian input). */
  RealField det_field() const;

 private:
  GridDomain grid_;
  std::vector<CplxField> e_;  // n*n fields, row-major: e_[j*n + k] = h_{j k̄}
};

/** Reads an n² matrix field M[j][k] = c_{jk}/i off a (1,1) form
    Σ c_{jk} dz^j ∧ dz̄^k; missing labels read as zero. */
HermitianMatrixField matrix_of_one_one_form(const ComplexForm& f);

}  // namespace balab
