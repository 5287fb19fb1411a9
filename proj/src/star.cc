#include "balab/star.hpp"

#include <bit>
#include <cmath>
#include <mutex>
#include <stdexcept>

namespace balab {

namespace {

/** A form over the real frame dx_0, dx_1, ..., dx_{2n-1} (with x_{2j}, x_{2j+1}
    the real and imaginary parts of z_j): real-index mask -> coefficient. */
using RealExpansion = std::map<Mask, Complex>;

/** Sign picked up when a one-form appended at the right end of a sorted
    monomial moves left to its sorted slot: (-1)^{#larger indices present}. */
int append_sign(int idx, Mask present) {
  if (present & (Mask{1} << idx)) return 0;
  return (std::popcount(present >> (idx + 1)) & 1) ? -1 : 1;
}

/** Expands dz^J ∧ dz̄^K over the real frame via dz_j = dx_{2j} + i dx_{2j+1},
    dz̄_j = dx_{2j} - i dx_{2j+1}. */
RealExpansion complex_key_to_real(FormKey key) {
  RealExpansion acc;
  acc[0] = Complex(1.0, 0.0);
  auto append_pair = [&](int j, Complex odd_coeff) {
    RealExpansion next;
    for (const auto& [mask, c] : acc) {
      const int se = append_sign(2 * j, mask);
      if (se) next[mask | (Mask{1} << (2 * j))] += c * static_cast<double>(se);
      const int so = append_sign(2 * j + 1, mask);
      if (so) next[mask | (Mask{1} << (2 * j + 1))] += c * odd_coeff * static_cast<double>(so);
    }
    acc = std::move(next);
  };
  for (Mask m = key.J; m; m &= m - 1) append_pair(std::countr_zero(m), Complex(0.0, 1.0));
  for (Mask m = key.K; m; m &= m - 1) append_pair(std::countr_zero(m), Complex(0.0, -1.0));
  return acc;
}

/** Collapses a real-frame monomial dx^B back onto the complex frame via
    dx_{2j} = (dz_j + dz̄_j)/2, dx_{2j+1} = (dz_j - dz̄_j)/(2i); output keys
    are normal ordered (holomorphic block first). */
std::map<FormKey, Complex> real_monomial_to_complex(Mask b) {
  struct Term {
    FormKey key;
    Complex c;
  };
  std::vector<Term> acc{{FormKey{0, 0}, Complex(1.0, 0.0)}};
  auto append = [&](int j, Complex holo_c, Complex anti_c) {
    std::vector<Term> next;
    next.reserve(2 * acc.size());
    for (const Term& t : acc) {
      // dz_j appended at the end crosses the whole dz̄ block, then sorts into J.
      if (!(t.key.J & (Mask{1} << j))) {
        const int cross = (std::popcount(t.key.K) & 1) ? -1 : 1;
        const int s = append_sign(j, t.key.J) * cross;
        next.push_back({FormKey{t.key.J | (Mask{1} << j), t.key.K},
                        t.c * holo_c * static_cast<double>(s)});
      }
      if (!(t.key.K & (Mask{1} << j))) {
        const int s = append_sign(j, t.key.K);
        next.push_back({FormKey{t.key.J, t.key.K | (Mask{1} << j)},
                        t.c * anti_c * static_cast<double>(s)});
      }
    }
    acc = std::move(next);
  };
  for (Mask m = b; m; m &= m - 1) {
    const int r = std::countr_zero(m);
    if (r % 2 == 0)
      append(r / 2, Complex(0.5, 0.0), Complex(0.5, 0.0));
    else
      append(r / 2, Complex(0.0, -0.5), Complex(0.0, 0.5));
  }
  std::map<FormKey, Complex> out;
  for (const Term& t : acc) out[t.key] += t.c;
  return out;
}

std::map<FormKey, Complex> build_flat_star(int n, FormKey key) {
  const Mask full = (Mask{1} << (2 * n)) - 1;
  const int k = std::popcount(key.J) + std::popcount(key.K);
  const double scale = std::pow(2.0, n - k);  // the real flat metric here is 2δ
  std::map<FormKey, Complex> out;
  for (const auto& [a, c] : complex_key_to_real(key)) {
    const Mask comp = full & ~a;
    const int sgn = merge_sign(a, comp);
    const Complex factor = c * (scale * sgn);
    for (const auto& [ck, cc] : real_monomial_to_complex(comp)) out[ck] += factor * cc;
  }
  // drop exact-zero entries produced by cancellation
  for (auto it = out.begin(); it != out.end();)
    it = (std::abs(it->second) < 1e-15) ? out.erase(it) : std::next(it);
  return out;
}

}  // namespace

const std::map<FormKey, Complex>& flat_star_of_key(int n, FormKey key) {
  struct CacheKey {
    int n;
    FormKey key;
    auto operator<=>(const CacheKey&) const = default;
  };
  static std::map<CacheKey, std::map<FormKey, Complex>> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(CacheKey{n, key});
  if (it == cache.end()) it = cache.emplace(CacheKey{n, key}, build_flat_star(n, key)).first;
  return it->second;
}

ComplexForm hodge_star_flat(const ComplexForm& f) {
  const int n = f.domain().n;
  ComplexForm out(f.domain());
  for (const auto& [key, c] : f.terms())
    for (const auto& [ok, oc] : flat_star_of_key(n, key)) out.add_scaled(ok, c, oc);
  return out;
}

namespace {

Complex submatrix_det(const Eigen::MatrixXcd& m, Mask rows, Mask cols) {
  const int k = std::popcount(rows);
  if (k == 0) return Complex(1.0, 0.0);
  Eigen::MatrixXcd s(k, k);
  int r = 0;
  for (Mask rm = rows; rm; rm &= rm - 1, ++r) {
    int cidx = 0;
    for (Mask cm = cols; cm; cm &= cm - 1, ++cidx)
      s(r, cidx) = m(std::countr_zero(rm), std::countr_zero(cm));
  }
  return s.determinant();
}

}  // namespace

PointForm apply_minors(const PointForm& f, const Eigen::MatrixXcd& M, int n) {
  PointForm out;
  for (const auto& [key, c] : f) {
    const int p = std::popcount(key.J);
    const int q = std::popcount(key.K);
    for (Mask a = 0; a < (Mask{1} << n); ++a) {
      if (std::popcount(a) != p) continue;
      const Complex dj = submatrix_det(M, key.J, a);
      if (dj == Complex(0.0, 0.0)) continue;
      for (Mask b = 0; b < (Mask{1} << n); ++b) {
        if (std::popcount(b) != q) continue;
        const Complex dk = submatrix_det(M, key.K, b);
        if (dk == Complex(0.0, 0.0)) continue;
        out[FormKey{a, b}] += c * dj * std::conj(dk);
      }
    }
  }
  return out;
}

ComplexForm hodge_star(const ComplexForm& f, const HermitianMatrixField& alpha) {
  if (!(f.domain() == alpha.domain()))
    throw std::invalid_argument("hodge_star: form and metric live on different grids");
  if (alpha.is_identity(0.0)) return hodge_star_flat(f);

  const int n = f.domain().n;
  const std::size_t npts = f.num_points();
  ComplexForm out(f.domain());
  for (std::size_t i = 0; i < npts; ++i) {
    PointForm pt;
    for (const auto& [key, c] : f.terms()) {
      if (c[i] != Complex(0.0, 0.0)) pt[key] = c[i];
    }
    if (pt.empty()) continue;

    Eigen::MatrixXcd a = alpha.at(i);
    Eigen::LLT<Eigen::MatrixXcd> llt(a.conjugate());
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("hodge_star: metric not positive definite on the grid");
    const Eigen::MatrixXcd c_mat = Eigen::MatrixXcd(llt.matrixL()).adjoint();
    const Eigen::MatrixXcd c_inv =
        c_mat.triangularView<Eigen::Upper>().solve(Eigen::MatrixXcd::Identity(n, n));

    PointForm on_frame = apply_minors(pt, c_inv, n);
    PointForm starred;
    for (const auto& [key, c] : on_frame)
      for (const auto& [ok, oc] : flat_star_of_key(n, key)) starred[ok] += c * oc;
    PointForm back = apply_minors(starred, c_mat, n);
    for (const auto& [key, c] : back) out.at(key)[i] = c;
  }
  return out;
}

}  // namespace balab
