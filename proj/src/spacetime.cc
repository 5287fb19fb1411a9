#include "balab/spacetime.hpp"

#include <cmath>
#include <stdexcept>

namespace balab {

SpaceTimeField::SpaceTimeField(GridDomain grid, int nt) : grid_(std::move(grid)), nt_(nt) {
  grid_.validate();
  if (nt_ < 2) throw std::invalid_argument("SpaceTimeField: needs at least 2 time intervals");
  rows_.assign(static_cast<std::size_t>(nt_ + 1), RealField(grid_.num_points(), 0.0));
}

SpaceTimeField SpaceTimeField::linear_path(const GridDomain& grid, int nt, const RealField& f0,
                                           const RealField& f1) {
  SpaceTimeField out(grid, nt);
  if (f0.size() != out.row_size() || f1.size() != out.row_size())
    throw std::invalid_argument("SpaceTimeField::linear_path: boundary field size mismatch");
  for (int i = 0; i <= nt; ++i) {
    const double t = static_cast<double>(i) / nt;
    RealField& r = out.row(i);
    for (std::size_t p = 0; p < r.size(); ++p) r[p] = (1.0 - t) * f0[p] + t * f1[p];
  }
  return out;
}

RealField& SpaceTimeField::row(int i) {
  if (i < 0 || i > nt_) throw std::invalid_argument("SpaceTimeField::row: index out of range");
  return rows_[static_cast<std::size_t>(i)];
}

const RealField& SpaceTimeField::row(int i) const {
  if (i < 0 || i > nt_) throw std::invalid_argument("SpaceTimeField::row: index out of range");
  return rows_[static_cast<std::size_t>(i)];
}

RealField SpaceTimeField::time_d1(int i) const {
  const double dt = this->dt();
  RealField out(row_size());
  if (i > 0 && i < nt_) {
    const RealField& a = row(i - 1);
    const RealField& b = row(i + 1);
    for (std::size_t p = 0; p < out.size(); ++p) out[p] = (b[p] - a[p]) / (2.0 * dt);
  } else if (i == 0) {
    const RealField& f0 = row(0);
    const RealField& f1 = row(1);
    const RealField& f2 = row(2);
    for (std::size_t p = 0; p < out.size(); ++p)
      out[p] = (-3.0 * f0[p] + 4.0 * f1[p] - f2[p]) / (2.0 * dt);
  } else {
    const RealField& f0 = row(nt_);
    const RealField& f1 = row(nt_ - 1);
    const RealField& f2 = row(nt_ - 2);
    for (std::size_t p = 0; p < out.size(); ++p)
      out[p] = (3.0 * f0[p] - 4.0 * f1[p] + f2[p]) / (2.0 * dt);
  }
  return out;
}

RealField SpaceTimeField::time_d2(int i) const {
  const double dt = this->dt();
  const double dt2 = dt * dt;
  RealField out(row_size());
  if (i > 0 && i < nt_) {
    const RealField& a = row(i - 1);
    const RealField& m = row(i);
    const RealField& b = row(i + 1);
    for (std::size_t p = 0; p < out.size(); ++p) out[p] = (b[p] - 2.0 * m[p] + a[p]) / dt2;
  } else {
    if (nt_ < 3)
      throw std::invalid_argument("SpaceTimeField::time_d2: one-sided stencil needs nt >= 3");
    const int i0 = (i == 0) ? 0 : nt_;
    const int step = (i == 0) ? 1 : -1;
    const RealField& f0 = row(i0);
    const RealField& f1 = row(i0 + step);
    const RealField& f2 = row(i0 + 2 * step);
    const RealField& f3 = row(i0 + 3 * step);
    for (std::size_t p = 0; p < out.size(); ++p)
      out[p] = (2.0 * f0[p] - 5.0 * f1[p] + 4.0 * f2[p] - f3[p]) / dt2;
  }
  return out;
}

double SpaceTimeField::sup_norm() const {
  double m = 0.0;
  for (const RealField& r : rows_)
    for (double v : r) m = std::max(m, std::abs(v));
  return m;
}

double SpaceTimeField::sup_diff(const SpaceTimeField& other) const {
  if (other.nt_ != nt_ || !(other.grid_ == grid_))
    throw std::invalid_argument("SpaceTimeField::sup_diff: shape mismatch");
  double m = 0.0;
  for (int i = 0; i <= nt_; ++i) {
    const RealField& a = rows_[static_cast<std::size_t>(i)];
    const RealField& b = other.rows_[static_cast<std::size_t>(i)];
    for (std::size_t p = 0; p < a.size(); ++p) m = std::max(m, std::abs(a[p] - b[p]));
  }
  return m;
}

std::vector<double> SpaceTimeField::interior() const {
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(nt_ - 1) * row_size());
  for (int i = 1; i < nt_; ++i) {
    const RealField& r = rows_[static_cast<std::size_t>(i)];
    v.insert(v.end(), r.begin(), r.end());
  }
  return v;
}

void SpaceTimeField::set_interior(const std::vector<double>& v) {
  if (v.size() != static_cast<std::size_t>(nt_ - 1) * row_size())
    throw std::invalid_argument("SpaceTimeField::set_interior: size mismatch");
  std::size_t off = 0;
  for (int i = 1; i < nt_; ++i) {
    RealField& r = rows_[static_cast<std::size_t>(i)];
    std::copy(v.begin() + off, v.begin() + off + r.size(), r.begin());
    off += r.size();
  }
}

void SpaceTimeField::axpy_interior(double tau, const std::vector<double>& u) {
  if (u.size() != static_cast<std::size_t>(nt_ - 1) * row_size())
    throw std::invalid_argument("SpaceTimeField::axpy_interior: size mismatch");
  std::size_t off = 0;
  for (int i = 1; i < nt_; ++i) {
    RealField& r = rows_[static_cast<std::size_t>(i)];
    for (std::size_t p = 0; p < r.size(); ++p) r[p] += tau * u[off + p];
    off += r.size();
  }
}

}  // namespace balab
