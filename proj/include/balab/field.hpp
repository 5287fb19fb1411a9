#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

#include "balab/grid.hpp"

namespace balab {

using Complex = std::complex<double>;
using RealField = std::vector<double>;
using CplxField = std::vector<Complex>;

/** Compensated (Kahan) serial sum; fixed order makes reductions deterministic. */
inline double kahan_sum(const std::vector<double>& v) {
  double s = 0.0, c = 0.0;
  for (double x : v) {
    double y = x - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

inline double field_mean(const RealField& v) {
  if (v.empty()) throw std::invalid_argument("field_mean: empty field");
  return kahan_sum(v) / static_cast<double>(v.size());
}

inline double sup_norm(const RealField& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double sup_norm(const CplxField& v) {
  double m = 0.0;
  for (const Complex& x : v) m = std::max(m, std::abs(x));
  return m;
}

inline CplxField promote(const RealField& v) {
  CplxField out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i];
  return out;
}

inline RealField real_part(const CplxField& v) {
  RealField out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i].real();
  return out;
}

inline double max_imag(const CplxField& v) {
  double m = 0.0;
  for (const Complex& x : v) m = std::max(m, std::abs(x.imag()));
  return m;
}

/** Sample a pointwise function of the 2n real coordinates over the grid. */
inline RealField sample(const GridDomain& g, const std::function<double(const double*)>& f) {
  RealField out(g.num_points());
  std::vector<double> x(static_cast<std::size_t>(2 * g.n));
  for (std::size_t i = 0; i < out.size(); ++i) {
    g.coordinates(i, x.data());
    out[i] = f(x.data());
  }
  return out;
}

}  // namespace balab
