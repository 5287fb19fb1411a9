#pragma once

#include <vector>

#include "balab/field.hpp"
#include "balab/grid.hpp"

namespace balab {

/** A real field on the time-space cylinder [0,1] × X: nt uniform time
    intervals, so nt+1 node rows t_i = i/nt, each row a spatial grid field.
    Rows 0 and nt carry Dirichlet data; rows 1..nt-1 are the unknowns. */
class SpaceTimeField {
 public:
  SpaceTimeField(GridDomain grid, int nt);

  static SpaceTimeField linear_path(const GridDomain& grid, int nt, const RealField& f0,
                                    const RealField& f1);

  const GridDomain& domain() const { return grid_; }
  int nt() const { return nt_; }
  int rows() const { return nt_ + 1; }
  double dt() const { return 1.0 / nt_; }
  std::size_t row_size() const { return grid_.num_points(); }

  RealField& row(int i);
  const RealField& row(int i) const;

  /** ∂_t at node i, second order: centered inside, one-sided at the ends
      ( (-3f₀+4f₁-f₂)/(2Δt) and its mirror ). */
  RealField time_d1(int i) const;

  /** ∂_tt at node i, second order: centered inside, one-sided at the ends
      ( (2f₀-5f₁+4f₂-f₃)/Δt² and its mirror; needs nt ≥ 3 at the ends ). */
  RealField time_d2(int i) const;

  double sup_norm() const;
  double sup_diff(const SpaceTimeField& other) const;

  /** Flattened interior rows 1..nt-1, row-major. */
  std::vector<double> interior() const;
  void set_interior(const std::vector<double>& v);
  /** rows 1..nt-1 += tau * u (u in interior layout). */
  void axpy_interior(double tau, const std::vector<double>& u);

 private:
  GridDomain grid_;
  int nt_;
  std::vector<RealField> rows_;
};

}  // namespace balab
