#include "balab/forms.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace balab {

int merge_sign(Mask a, Mask b) {
  if (a & b) return 0;
  int swaps = 0;
  for (Mask m = b; m; m &= m - 1) {
    const int j = std::countr_zero(m);
    swaps += std::popcount(a >> (j + 1));
  }
  return (swaps & 1) ? -1 : 1;
}

int insert_sign(int j, Mask m) {
  if (m & (Mask{1} << j)) return 0;
  const int below = std::popcount(m & ((Mask{1} << j) - 1));
  return (below & 1) ? -1 : 1;
}

ComplexForm::ComplexForm(GridDomain grid) : grid_(std::move(grid)) { grid_.validate(); }

CplxField& ComplexForm::at(FormKey key) {
  auto it = terms_.find(key);
  if (it == terms_.end())
    it = terms_.emplace(key, CplxField(grid_.num_points(), Complex(0.0, 0.0))).first;
  return it->second;
}

const CplxField* ComplexForm::find(FormKey key) const {
  auto it = terms_.find(key);
  return it == terms_.end() ? nullptr : &it->second;
}

void ComplexForm::add_scaled(FormKey key, const CplxField& c, Complex scale) {
  if (c.size() != grid_.num_points())
    throw std::invalid_argument("ComplexForm::add_scaled: field size does not match the grid");
  CplxField& dst = at(key);
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += scale * c[i];
}

ComplexForm& ComplexForm::operator+=(const ComplexForm& other) {
  if (!(grid_ == other.grid_))
    throw std::invalid_argument("ComplexForm::operator+=: mismatched grids");
  for (const auto& [key, c] : other.terms_) add_scaled(key, c, Complex(1.0, 0.0));
  return *this;
}

ComplexForm& ComplexForm::operator-=(const ComplexForm& other) {
  if (!(grid_ == other.grid_))
    throw std::invalid_argument("ComplexForm::operator-=: mismatched grids");
  for (const auto& [key, c] : other.terms_) add_scaled(key, c, Complex(-1.0, 0.0));
  return *this;
}

ComplexForm& ComplexForm::operator*=(Complex scale) {
  for (auto& [key, c] : terms_)
    for (Complex& v : c) v *= scale;
  return *this;
}

double ComplexForm::sup_norm() const {
  double m = 0.0;
  for (const auto& [key, c] : terms_)
    for (const Complex& v : c) m = std::max(m, std::abs(v));
  return m;
}

double ComplexForm::realness_residual() const {
  double worst = 0.0;
  const CplxField zero(grid_.num_points(), Complex(0.0, 0.0));
  for (const auto& [key, c] : terms_) {
    const int p = std::popcount(key.J);
    const int q = std::popcount(key.K);
    const double sign = ((p * q) & 1) ? -1.0 : 1.0;
    const CplxField* mirror = find(FormKey{key.K, key.J});
    const CplxField& m = mirror ? *mirror : zero;
    for (std::size_t i = 0; i < c.size(); ++i)
      worst = std::max(worst, std::abs(m[i] - sign * std::conj(c[i])));
  }
  return worst;
}

ComplexForm wedge(const ComplexForm& a, const ComplexForm& b) {
  if (!(a.domain() == b.domain())) throw std::invalid_argument("wedge: mismatched grids");
  ComplexForm out(a.domain());
  const std::size_t npts = a.num_points();
  for (const auto& [ka, ca] : a.terms()) {
    const int q1 = std::popcount(ka.K);
    for (const auto& [kb, cb] : b.terms()) {
      const int sj = merge_sign(ka.J, kb.J);
      if (sj == 0) continue;
      const int sk = merge_sign(ka.K, kb.K);
      if (sk == 0) continue;
      const int p2 = std::popcount(kb.J);
      const double sign = sj * sk * (((q1 * p2) & 1) ? -1.0 : 1.0);
      CplxField& dst = out.at(FormKey{ka.J | kb.J, ka.K | kb.K});
      for (std::size_t i = 0; i < npts; ++i) dst[i] += sign * ca[i] * cb[i];
    }
  }
  return out;
}

ComplexForm wedge_power_over_factorial(const ComplexForm& f, int k) {
  if (k < 0) throw std::invalid_argument("wedge_power_over_factorial: negative exponent");
  ComplexForm acc(f.domain());
  acc.at(FormKey{0, 0}).assign(f.num_points(), Complex(1.0, 0.0));
  for (int i = 1; i <= k; ++i) {
    acc = wedge(acc, f);
    acc *= Complex(1.0 / i, 0.0);
  }
  return acc;
}

ComplexForm conjugate(const ComplexForm& f) {
  ComplexForm out(f.domain());
  for (const auto& [key, c] : f.terms()) {
    const int p = std::popcount(key.J);
    const int q = std::popcount(key.K);
    const Complex sign(((p * q) & 1) ? -1.0 : 1.0, 0.0);
    CplxField& dst = out.at(FormKey{key.K, key.J});
    for (std::size_t i = 0; i < c.size(); ++i) dst[i] += sign * std::conj(c[i]);
  }
  return out;
}

ComplexForm field_times(const CplxField& s, const ComplexForm& f) {
  if (s.size() != f.num_points())
    throw std::invalid_argument("field_times: field size does not match the grid");
  ComplexForm out(f.domain());
  for (const auto& [key, c] : f.terms()) {
    CplxField& dst = out.at(key);
    for (std::size_t i = 0; i < c.size(); ++i) dst[i] = s[i] * c[i];
  }
  return out;
}

ComplexForm field_times(const RealField& s, const ComplexForm& f) {
  return field_times(promote(s), f);
}

ComplexForm del(const DerivativeEngine& eng, const ComplexForm& f) {
  if (!(eng.grid() == f.domain())) throw std::invalid_argument("del: engine grid mismatch");
  const int n = f.domain().n;
  ComplexForm out(f.domain());
  for (const auto& [key, c] : f.terms()) {
    for (int j = 0; j < n; ++j) {
      const int s = insert_sign(j, key.J);
      if (s == 0) continue;
      out.add_scaled(FormKey{key.J | (Mask{1} << j), key.K}, eng.d_holo(c, j),
                     Complex(static_cast<double>(s), 0.0));
    }
  }
  return out;
}

ComplexForm dbar(const DerivativeEngine& eng, const ComplexForm& f) {
  if (!(eng.grid() == f.domain())) throw std::invalid_argument("dbar: engine grid mismatch");
  const int n = f.domain().n;
  ComplexForm out(f.domain());
  for (const auto& [key, c] : f.terms()) {
    const int p = std::popcount(key.J);
    const double pass_J = (p & 1) ? -1.0 : 1.0;
    for (int j = 0; j < n; ++j) {
      const int s = insert_sign(j, key.K);
      if (s == 0) continue;
      out.add_scaled(FormKey{key.J, key.K | (Mask{1} << j)}, eng.d_anti(c, j),
                     Complex(pass_J * s, 0.0));
    }
  }
  return out;
}

ComplexForm i_ddbar(const DerivativeEngine& eng, const CplxField& f) {
  const GridDomain& g = eng.grid();
  if (f.size() != g.num_points())
    throw std::invalid_argument("i_ddbar: field size does not match the grid");
  ComplexForm out(g);
  for (int k = 0; k < g.n; ++k) {
    const CplxField dk = eng.d_anti(f, k);
    for (int j = 0; j < g.n; ++j)
      out.add_scaled(FormKey{Mask{1} << j, Mask{1} << k}, eng.d_holo(dk, j), Complex(0.0, 1.0));
  }
  return out;
}

ComplexForm i_ddbar(const DerivativeEngine& eng, const RealField& f) {
  return i_ddbar(eng, promote(f));
}

ComplexForm i_ddbar(const DerivativeEngine& eng, const ComplexForm& f) {
  ComplexForm out = del(eng, dbar(eng, f));
  out *= Complex(0.0, 1.0);
  return out;
}

CplxField top_coefficient(const ComplexForm& f) {
  const Mask full = (Mask{1} << f.domain().n) - 1;
  const CplxField* c = f.find(FormKey{full, full});
  if (c) return *c;
  return CplxField(f.num_points(), Complex(0.0, 0.0));
}

CplxField top_ratio(const ComplexForm& a, const ComplexForm& b, double floor) {
  if (!(a.domain() == b.domain())) throw std::invalid_argument("top_ratio: mismatched grids");
  CplxField num = top_coefficient(a);
  CplxField den = top_coefficient(b);
  for (std::size_t i = 0; i < num.size(); ++i) {
    if (std::abs(den[i]) < floor)
      throw std::runtime_error("top_ratio: denominator top coefficient vanishes on the grid");
    num[i] /= den[i];
  }
  return num;
}

}  // namespace balab
