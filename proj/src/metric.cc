#include "balab/metric.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace balab {

HermitianMatrixField::HermitianMatrixField(GridDomain grid) : grid_(std::move(grid)) {
  grid_.validate();
  const int n = grid_.n;
  const std::size_t npts = grid_.num_points();
  e_.assign(static_cast<std::size_t>(n) * n, CplxField(npts, Complex(0.0, 0.0)));
  for (int j = 0; j < n; ++j) e_[static_cast<std::size_t>(j) * n + j].assign(npts, Complex(1.0, 0.0));
}

HermitianMatrixField HermitianMatrixField::flat(GridDomain grid) {
  return HermitianMatrixField(std::move(grid));
}

HermitianMatrixField HermitianMatrixField::conformal(const GridDomain& grid, const RealField& f) {
  HermitianMatrixField out(grid);
  if (f.size() != grid.num_points())
    throw std::invalid_argument("HermitianMatrixField::conformal: field size does not match the grid");
  for (int j = 0; j < out.n(); ++j) {
    CplxField& d = out.entry(j, j);
    for (std::size_t i = 0; i < f.size(); ++i) d[i] = Complex(std::exp(f[i]), 0.0);
  }
  return out;
}

HermitianMatrixField HermitianMatrixField::kahler_potential(const DerivativeEngine& eng,
                                                            const RealField& phi) {
  const GridDomain& g = eng.grid();
  HermitianMatrixField out(g);
  const CplxField phic = promote(phi);
  for (int k = 0; k < g.n; ++k) {
    const CplxField dk = eng.d_anti(phic, k);
    for (int j = 0; j < g.n; ++j) {
      const CplxField hjk = eng.d_holo(dk, j);
      CplxField& d = out.entry(j, k);
      for (std::size_t i = 0; i < hjk.size(); ++i) d[i] += hjk[i];
    }
  }
  return out;
}

const CplxField& HermitianMatrixField::entry(int j, int k) const {
  if (j < 0 || j >= n() || k < 0 || k >= n())
    throw std::invalid_argument("HermitianMatrixField::entry: index out of range");
  return e_[static_cast<std::size_t>(j) * n() + k];
}

CplxField& HermitianMatrixField::entry(int j, int k) {
  if (j < 0 || j >= n() || k < 0 || k >= n())
    throw std::invalid_argument("HermitianMatrixField::entry: index out of range");
  return e_[static_cast<std::size_t>(j) * n() + k];
}

Eigen::MatrixXcd HermitianMatrixField::at(std::size_t idx) const {
  Eigen::MatrixXcd m(n(), n());
  for (int j = 0; j < n(); ++j)
    for (int k = 0; k < n(); ++k) m(j, k) = e_[static_cast<std::size_t>(j) * n() + k][idx];
  return m;
}

void HermitianMatrixField::set(std::size_t idx, const Eigen::MatrixXcd& m) {
  if (m.rows() != n() || m.cols() != n())
    throw std::invalid_argument("HermitianMatrixField::set: matrix dimension mismatch");
  for (int j = 0; j < n(); ++j)
    for (int k = 0; k < n(); ++k) e_[static_cast<std::size_t>(j) * n() + k][idx] = m(j, k);
}

double HermitianMatrixField::hermiticity_residual() const {
  double worst = 0.0;
  for (int j = 0; j < n(); ++j)
    for (int k = j; k < n(); ++k) {
      const CplxField& a = entry(j, k);
      const CplxField& b = entry(k, j);
      for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(b[i] - std::conj(a[i])));
    }
  return worst;
}

double HermitianMatrixField::min_eigenvalue() const {
  double lo = std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es;
  for (std::size_t i = 0; i < num_points(); ++i) {
    Eigen::MatrixXcd m = at(i);
    es.compute((m + m.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
    lo = std::min(lo, es.eigenvalues().minCoeff());
  }
  return lo;
}

void HermitianMatrixField::require_positive(double floor, const char* what) const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es;
  std::vector<double> x(static_cast<std::size_t>(2 * n()));
  for (std::size_t i = 0; i < num_points(); ++i) {
    Eigen::MatrixXcd m = at(i);
    es.compute((m + m.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    if (!(lo > floor)) {
      grid_.coordinates(i, x.data());
      std::ostringstream os;
      os << what << ": matrix not positive definite at grid point (";
      for (int c = 0; c < 2 * n(); ++c) os << (c ? ", " : "") << x[static_cast<std::size_t>(c)];
      os << "), smallest eigenvalue " << lo;
      throw std::runtime_error(os.str());
    }
  }
}

bool HermitianMatrixField::is_identity(double tol) const {
  for (int j = 0; j < n(); ++j)
    for (int k = 0; k < n(); ++k) {
      const Complex want(j == k ? 1.0 : 0.0, 0.0);
      for (const Complex& v : entry(j, k))
        if (std::abs(v - want) > tol) return false;
    }
  return true;
}

ComplexForm HermitianMatrixField::form() const {
  ComplexForm out(grid_);
  for (int j = 0; j < n(); ++j)
    for (int k = 0; k < n(); ++k)
      out.add_scaled(FormKey{Mask{1} << j, Mask{1} << k}, entry(j, k), Complex(0.0, 1.0));
  return out;
}

HermitianMatrixField HermitianMatrixField::pointwise_inverse() const {
  HermitianMatrixField out(grid_);
  for (std::size_t i = 0; i < num_points(); ++i) {
    Eigen::MatrixXcd m = at(i);
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(m);
    if (!lu.isInvertible())
      throw std::runtime_error("HermitianMatrixField::pointwise_inverse: singular matrix on the grid");
    out.set(i, lu.inverse());
  }
  return out;
}

RealField HermitianMatrixField::det_field() const {
  RealField out(num_points());
  for (std::size_t i = 0; i < num_points(); ++i) out[i] = at(i).determinant().real();
  return out;
}

HermitianMatrixField matrix_of_one_one_form(const ComplexForm& f) {
  const GridDomain& g = f.domain();
  HermitianMatrixField out(g);
  const Complex inv_i(0.0, -1.0);  // 1/i
  for (int j = 0; j < g.n; ++j)
    for (int k = 0; k < g.n; ++k) {
      const CplxField* c = f.find(FormKey{Mask{1} << j, Mask{1} << k});
      CplxField& d = out.entry(j, k);
      if (c) {
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = inv_i * (*c)[i];
      } else {
        d.assign(g.num_points(), Complex(0.0, 0.0));
      }
    }
  return out;
}

}  // namespace balab
