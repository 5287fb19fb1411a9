#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numbers>

#include "balab/expr.hpp"
#include "balab/geometry.hpp"
#include "balab/rng.hpp"
#include "doctest.h"

using namespace balab;

namespace {

constexpr double kPi = std::numbers::pi;

GridDomain grid1(int res = 16) { return make_grid(3, 1.0, {0}, res); }
GridDomain grid2(int res = 12) { return make_grid(3, 1.0, {0, 2}, res); }

/** sup |a - b| over two same-shaped fields. */
double sup_diff(const RealField& a, const RealField& b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double sup_diff(const CplxField& a, const CplxField& b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/** sup over labels and points of the coefficient difference of two forms. */
double form_diff(const ComplexForm& a, const ComplexForm& b) {
  ComplexForm d = a;
  d -= b;
  return d.sup_norm();
}

/** A smooth low-mode test field on the active coordinates. */
RealField smooth_field(const GridDomain& g, double amp) {
  return sample(g, [&](const double* x) {
    double v = std::cos(2.0 * kPi * x[g.active[0]]);
    if (g.naxes() > 1) {
      v += std::sin(2.0 * kPi * x[g.active[1]]);
      v += 0.5 * std::cos(2.0 * kPi * x[g.active[0]]) * std::sin(2.0 * kPi * x[g.active[1]]);
    }
    return amp * v;
  });
}

/** A Hermitian matrix field with smooth, seeded entries around the identity. */
HermitianMatrixField perturbed_identity(const DerivativeEngine& eng, double amp,
                                        std::uint64_t seed) {
  const GridDomain& g = eng.grid();
  DeterministicRng rng(seed);
  HermitianMatrixField m(g);
  for (int j = 0; j < g.n; ++j)
    for (int k = j; k < g.n; ++k) {
      const double a = amp * rng.uniform(-1.0, 1.0);
      const double b = amp * rng.uniform(-1.0, 1.0);
      const double c = (j == k) ? 0.0 : amp * rng.uniform(-1.0, 1.0);
      RealField re = sample(g, [&](const double* x) {
        return a * std::cos(2.0 * kPi * x[g.active[0]]) + b * std::sin(2.0 * kPi * x[g.active[0]]);
      });
      RealField im = sample(g, [&](const double* x) {
        return c * std::sin(2.0 * kPi * x[g.active[0]]);
      });
      for (std::size_t i = 0; i < re.size(); ++i) {
        Complex v(re[i], j == k ? 0.0 : im[i]);
        m.entry(j, k)[i] += v;
        if (j != k) m.entry(k, j)[i] += std::conj(v);
      }
    }
  return m;
}

}  // namespace

TEST_CASE("grid domain validates and indexes") {
  GridDomain g = make_grid(3, 1.0, {0, 2}, 8);
  CHECK(g.num_points() == 64);
  CHECK(g.naxes() == 2);
  CHECK(g.stride(0) == 8);  // axis order is row-major: the last active axis is fastest
  CHECK(g.stride(1) == 1);
  double x[6];
  g.coordinates(9, x);  // index 9 = (1, 1)
  CHECK(x[0] == doctest::Approx(1.0 / 8));
  CHECK(x[2] == doctest::Approx(1.0 / 8));
  CHECK(x[1] == 0.0);

  CHECK_THROWS_AS(make_grid(1, 1.0, {0}, 8).validate(), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(3, -1.0, {0}, 8).validate(), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(3, 1.0, {2, 0}, 8).validate(), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(3, 1.0, {0}, 2).validate(), std::invalid_argument);
}

TEST_CASE("expressions parse, evaluate, and report errors with positions") {
  Expression e = Expression::parse("0.3*cos(2*pi*x0) + t^2");
  double x[6] = {0.25, 0, 0, 0, 0, 0};
  CHECK(e.eval(x, 2.0) == doctest::Approx(0.3 * std::cos(kPi / 2) + 4.0));
  CHECK(e.depends_on_time());
  CHECK_FALSE(Expression::parse("sin(x1)*exp(-x0)").depends_on_time());
  CHECK_THROWS_AS(Expression::parse("2*"), std::invalid_argument);
  CHECK_THROWS_AS(Expression::parse("foo(x0)"), std::invalid_argument);
  CHECK_THROWS_AS(Expression::parse("x7"), std::invalid_argument);
  // right-associative power
  CHECK(Expression::parse("2^3^2").eval(x, 0.0) == doctest::Approx(512.0));
}

TEST_CASE("spectral derivative is exact on low modes and zero on inactive axes") {
  for (Scheme s : {Scheme::spectral, Scheme::fd4}) {
    DerivativeEngine eng(grid1(32), s);
    const GridDomain& g = eng.grid();
    RealField f = sample(g, [](const double* x) { return std::sin(2.0 * kPi * x[0]); });
    RealField want = sample(g, [](const double* x) { return 2.0 * kPi * std::cos(2.0 * kPi * x[0]); });
    RealField got = eng.d_real(f, 0);
    const double err = sup_diff(got, want);
    if (s == Scheme::spectral)
      CHECK(err < 1e-11);
    else
      CHECK(err < 2e-3);
    CHECK(sup_norm(eng.d_real(f, 1)) == 0.0);
    CHECK(sup_norm(eng.d_real(f, 4)) == 0.0);
  }
}

TEST_CASE("fd4 derivative converges at fourth order") {
  double errs[2];
  int k = 0;
  for (int res : {16, 32}) {
    DerivativeEngine eng(grid1(res), Scheme::fd4);
    const GridDomain& g = eng.grid();
    RealField f = sample(g, [](const double* x) { return std::sin(2.0 * kPi * x[0]); });
    RealField want =
        sample(g, [](const double* x) { return 2.0 * kPi * std::cos(2.0 * kPi * x[0]); });
    errs[k++] = sup_diff(eng.d_real(f, 0), want);
  }
  if (errs[0] > 1e-12) {
    const double order = std::log2(errs[0] / errs[1]);
    CHECK(order > 3.7);
  }
}

TEST_CASE("fft roundtrip is the identity and the flat symbol inverts the Laplacian") {
  DerivativeEngine eng(grid2(8), Scheme::spectral);
  const GridDomain& g = eng.grid();
  CplxField f = promote(smooth_field(g, 1.0));
  CplxField round = f;
  eng.fft_forward(round);
  eng.fft_inverse(round);
  CHECK(sup_diff(round, f) < 1e-13);

  // -Δ_flat f  via the symbol table against the metric Laplacian
  HermitianMatrixField flat = HermitianMatrixField::flat(g);
  CplxField lap = chern_laplacian(eng, flat, f);
  CplxField via_symbol = f;
  eng.fft_forward(via_symbol);
  const RealField& mu = eng.flat_laplace_symbol();
  for (std::size_t i = 0; i < via_symbol.size(); ++i) via_symbol[i] *= -mu[i];
  eng.fft_inverse(via_symbol);
  CHECK(sup_diff(via_symbol, lap) < 1e-10);
}

TEST_CASE("chern laplacian of a flat one-mode field has the closed-form eigenvalue") {
  DerivativeEngine eng(grid1(32), Scheme::spectral);
  const GridDomain& g = eng.grid();
  HermitianMatrixField flat = HermitianMatrixField::flat(g);
  RealField f = sample(g, [](const double* x) { return std::cos(2.0 * kPi * x[0]); });
  RealField lap = chern_laplacian(eng, flat, f);
  // Δ cos(2π x0 / L) = -(1/4)(2π/L)² cos(2π x0 / L); here L = 1
  const double lambda = 0.25 * (2.0 * kPi) * (2.0 * kPi);
  double worst = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    worst = std::max(worst, std::abs(lap[i] + lambda * f[i]));
  CHECK(worst < 1e-10);

  RealField gsq = grad_norm_sq(eng, flat, f);
  RealField want = sample(g, [&](const double* x) {
    const double c = kPi * std::sin(2.0 * kPi * x[0]);
    return c * c;  // |∂_0 f|² = (1/4)(2π)² sin²
  });
  CHECK(sup_diff(gsq, want) < 1e-10);
}

TEST_CASE("chern laplacian equals its volume-form quotient for a curved metric") {
  DerivativeEngine eng(grid1(16), Scheme::spectral);
  const GridDomain& g = eng.grid();
  HermitianMatrixField m =
      HermitianMatrixField::kahler_potential(eng, smooth_field(g, 0.01));
  m.require_positive(0.1, "test metric");
  const RealField u = smooth_field(g, 0.7);
  const RealField lap = chern_laplacian(eng, m, u);

  const ComplexForm w = m.form();
  const int n = g.n;
  ComplexForm num = wedge(i_ddbar(eng, u), wedge_power_over_factorial(w, n - 1));
  const RealField quotient = real_part(top_ratio(num, wedge_power_over_factorial(w, n)));
  CHECK(sup_diff(lap, quotient) < 1e-9);
}

TEST_CASE("wedge carries graded anticommutation signs") {
  GridDomain g = grid1(8);
  ComplexForm a(g), b(g);
  a.at(FormKey{Mask{1} << 0, 0}).assign(g.num_points(), Complex(1.0, 0.0));  // dz^0
  b.at(FormKey{Mask{1} << 1, 0}).assign(g.num_points(), Complex(1.0, 0.0));  // dz^1
  ComplexForm ab = wedge(a, b);
  ComplexForm ba = wedge(b, a);
  const CplxField* cab = ab.find(FormKey{(Mask{1} << 0) | (Mask{1} << 1), 0});
  const CplxField* cba = ba.find(FormKey{(Mask{1} << 0) | (Mask{1} << 1), 0});
  REQUIRE(cab != nullptr);
  REQUIRE(cba != nullptr);
  CHECK((*cab)[0] == Complex(1.0, 0.0));
  CHECK((*cba)[0] == Complex(-1.0, 0.0));

  // dz̄^0 ∧ dz^1 = -(dz^1 ∧ dz̄^0)
  ComplexForm c(g);
  c.at(FormKey{0, Mask{1} << 0}).assign(g.num_points(), Complex(1.0, 0.0));
  ComplexForm cb = wedge(c, b);
  const CplxField* ccb = cb.find(FormKey{Mask{1} << 1, Mask{1} << 0});
  REQUIRE(ccb != nullptr);
  CHECK((*ccb)[0] == Complex(-1.0, 0.0));
}

TEST_CASE("the flat metric form is real and closed, and d² vanishes") {
  DerivativeEngine eng(grid2(8), Scheme::spectral);
  const GridDomain& g = eng.grid();
  ComplexForm w = flat_metric_form(g);
  CHECK(w.realness_residual() == 0.0);
  CHECK(del(eng, w).sup_norm() == 0.0);
  CHECK(dbar(eng, w).sup_norm() == 0.0);

  ComplexForm f(g);
  f.at(FormKey{0, 0}) = promote(smooth_field(g, 1.0));
  CHECK(del(eng, del(eng, f)).sup_norm() < 1e-11);
  CHECK(dbar(eng, dbar(eng, f)).sup_norm() < 1e-11);
  // i∂∂̄ of a real field is a real (1,1) form
  ComplexForm dd = i_ddbar(eng, smooth_field(g, 1.0));
  CHECK(dd.realness_residual() < 1e-11);
}

TEST_CASE("flat hodge star squares to the identity and maps unit to volume") {
  GridDomain g = grid1(8);
  DerivativeEngine eng(g, Scheme::spectral);
  const int n = g.n;
  ComplexForm w = flat_metric_form(g);

  // ⋆1 = ω^n/n!
  ComplexForm one(g);
  one.at(FormKey{0, 0}).assign(g.num_points(), Complex(1.0, 0.0));
  CHECK(form_diff(hodge_star_flat(one), wedge_power_over_factorial(w, n)) < 1e-13);

  // ⋆(ω^k/k!) = ω^{n-k}/(n-k)!
  for (int k = 0; k <= n; ++k) {
    ComplexForm lhs = hodge_star_flat(wedge_power_over_factorial(w, k));
    CHECK(form_diff(lhs, wedge_power_over_factorial(w, n - k)) < 1e-12);
  }

  // ⋆⋆ = id on a generic (1,1) form with field coefficients
  DerivativeEngine e2(g, Scheme::spectral);
  HermitianMatrixField beta = perturbed_identity(e2, 0.3, 71);
  ComplexForm bf = beta.form();
  CHECK(form_diff(hodge_star_flat(hodge_star_flat(bf)), bf) < 1e-12);
}

TEST_CASE("metric hodge star satisfies the power and contraction identities") {
  GridDomain g = grid1(8);
  DerivativeEngine eng(g, Scheme::spectral);
  const int n = g.n;

  HermitianMatrixField alpha = perturbed_identity(eng, 0.15, 5);
  alpha.require_positive(0.1, "test metric");
  ComplexForm wa = alpha.form();

  for (int k = 0; k <= n; ++k) {
    ComplexForm lhs = hodge_star(wedge_power_over_factorial(wa, k), alpha);
    CHECK(form_diff(lhs, wedge_power_over_factorial(wa, n - k)) < 1e-10);
  }

  // ⋆β = (tr_α β) ω^{n-1}/(n-1)! - β ∧ ω^{n-2}/(n-2)!  for (1,1) forms
  HermitianMatrixField bmat = perturbed_identity(eng, 0.2, 9);
  ComplexForm beta = bmat.form();
  ComplexForm starred = hodge_star(beta, alpha);

  HermitianMatrixField ainv = alpha.pointwise_inverse();
  CplxField tr(g.num_points(), Complex(0.0, 0.0));
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      const CplxField& gkj = ainv.entry(k, j);
      const CplxField& bjk = bmat.entry(j, k);
      for (std::size_t i = 0; i < tr.size(); ++i) tr[i] += gkj[i] * bjk[i];
    }
  ComplexForm rhs = field_times(tr, wedge_power_over_factorial(wa, n - 1));
  ComplexForm sub = wedge(beta, wedge_power_over_factorial(wa, n - 2));
  rhs -= sub;
  CHECK(form_diff(starred, rhs) < 1e-10);

  // the dual contraction: ⋆(β ∧ ω^{n-2}/(n-2)!) = (tr_α β) ω - β
  ComplexForm starred2 = hodge_star(wedge(beta, wedge_power_over_factorial(wa, n - 2)), alpha);
  ComplexForm rhs2 = field_times(tr, wa);
  rhs2 -= beta;
  CHECK(form_diff(starred2, rhs2) < 1e-10);
}

TEST_CASE("michelsohn root inverts the normalized power and scales correctly") {
  GridDomain g = grid1(8);
  DerivativeEngine eng(g, Scheme::spectral);
  HermitianMatrixField m = perturbed_identity(eng, 0.2, 13);
  m.require_positive(0.1, "test metric");

  ComplexForm q = wedge_power_over_factorial(m.form(), g.n - 1);
  HermitianMatrixField root = michelsohn_root(q);
  double worst = 0.0;
  for (int j = 0; j < g.n; ++j)
    for (int k = 0; k < g.n; ++k) worst = std::max(worst, sup_diff(root.entry(j, k), m.entry(j, k)));
  CHECK(worst < 1e-11);

  // root(c Q) = c^{1/(n-1)} root(Q)
  ComplexForm q2 = q;
  q2 *= Complex(2.0, 0.0);
  HermitianMatrixField root2 = michelsohn_root(q2);
  const double want = std::pow(2.0, 1.0 / (g.n - 1));
  worst = 0.0;
  for (int j = 0; j < g.n; ++j)
    for (int k = 0; k < g.n; ++k) {
      const CplxField& a = root2.entry(j, k);
      const CplxField& b = root.entry(j, k);
      for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a[i] - want * b[i]));
    }
  CHECK(worst < 1e-11);

  // a negative power has no positive root
  ComplexForm qneg = q;
  qneg *= Complex(-1.0, 0.0);
  CHECK_THROWS_AS(michelsohn_root(qneg), std::runtime_error);
}

TEST_CASE("conformal torsion matches its closed form and the quadratic identity") {
  DerivativeEngine eng(grid2(12), Scheme::spectral);
  const GridDomain& g = eng.grid();
  const int n = g.n;
  RealField f = smooth_field(g, 0.1);
  HermitianMatrixField m = HermitianMatrixField::conformal(g, f);

  TorsionReport tor = chern_torsion(eng, m);
  CHECK(sup_norm(tor.q_distinct) < 1e-12);

  // for g = e^f δ: q_trace = (n-1) e^{-f} Σ_j |∂_j f|²,  tau_sq = (n-1)² e^{-f} Σ_j |∂_j f|²
  const std::vector<CplxField> df = holo_gradient(eng, promote(f));
  RealField s(g.num_points(), 0.0);
  for (int j = 0; j < n; ++j)
    for (std::size_t i = 0; i < s.size(); ++i) s[i] += std::norm(df[static_cast<std::size_t>(j)][i]);
  RealField want_tr(s.size()), want_tau(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    want_tr[i] = (n - 1) * std::exp(-f[i]) * s[i];
    want_tau[i] = (n - 1) * (n - 1) * std::exp(-f[i]) * s[i];
  }
  CHECK(sup_diff(tor.q_trace, want_tr) < 2e-9);
  CHECK(sup_diff(tor.tau_sq, want_tau) < 2e-9);

  // q_distinct/2 + q_trace - tau_sq  =  n(n-1)(n-2) [i ∂̄ω ∧ ∂ω ∧ ω^{n-3}]/ω^n
  CHECK(sup_diff(tor.quadratic_combination(), torsion_square_form_route(eng, m)) < 1e-9);
}

TEST_CASE("balanced potential metric is balanced, with nonnegative X agreeing across routes") {
  // resolution 24 fully resolves the harmonics of the root metric; the
  // route disagreement decays spectrally (2.9e-5 at res 12, 2.4e-10 at 24)
  DerivativeEngine eng(grid2(24), Scheme::spectral);
  const GridDomain& g = eng.grid();
  RealField f = smooth_field(g, 0.02);
  HermitianMatrixField m = balanced_metric_from_potential(eng, f);

  CHECK(balanced_residual(eng, m) < 1e-10);

  XReport x = compute_X(eng, m, 2);
  CHECK(x.balanced_residual < 1e-10);
  double min_x = x.direct[0];
  for (double v : x.direct) min_x = std::min(min_x, v);
  CHECK(min_x > -1e-12);
  CHECK(sup_diff(x.direct, x.torsion_route) < 1e-8);
  CHECK(sup_norm(x.direct) > 1e-4);  // genuinely non-Kähler

  // the quadratic torsion identity also holds on balanced metrics
  TorsionReport tor = chern_torsion(eng, m);
  CHECK(sup_diff(tor.quadratic_combination(), torsion_square_form_route(eng, m)) < 1e-9);

  // X vanishes at the degenerate exponents
  CHECK(sup_norm(compute_X(eng, m, 1).direct) < 1e-10);
  CHECK(sup_norm(compute_X(eng, m, g.n).direct) < 1e-10);
}

TEST_CASE("a potential-perturbed closed metric has identically vanishing X") {
  DerivativeEngine eng(grid1(16), Scheme::spectral);
  const GridDomain& g = eng.grid();
  HermitianMatrixField m =
      HermitianMatrixField::kahler_potential(eng, smooth_field(g, 0.02));
  m.require_positive(0.1, "test metric");
  XReport x = compute_X(eng, m, 2);
  CHECK(x.balanced_residual < 1e-10);
  CHECK(sup_norm(x.direct) < 1e-12);
}

TEST_CASE("mixed volume routes agree and stay positive for small potentials") {
  // flat metric
  DerivativeEngine eng(grid1(16), Scheme::spectral);
  const GridDomain& g = eng.grid();
  HermitianMatrixField flat = HermitianMatrixField::flat(g);
  RealField phi = smooth_field(g, 0.1);
  MixedVolumeReport rep = mixed_volume(eng, flat, 2, phi);
  CHECK(rep.max_difference < 1e-10);
  CHECK(rep.min_direct > 0.0);

  // balanced non-Kähler metric: agreement is exact up to discretization
  DerivativeEngine eng2(grid2(24), Scheme::spectral);
  HermitianMatrixField bal = balanced_metric_from_potential(eng2, smooth_field(eng2.grid(), 0.02));
  MixedVolumeReport rep2 = mixed_volume(eng2, bal, 2, smooth_field(eng2.grid(), 0.05));
  CHECK(rep2.max_difference < 1e-9);
  CHECK(rep2.min_direct > 0.0);
}

TEST_CASE("spectral and fd4 schemes agree on smooth data to truncation accuracy") {
  for (auto mk : {&grid1, &grid2}) {
    GridDomain g = mk(32);
    DerivativeEngine spec(g, Scheme::spectral);
    DerivativeEngine fd(g, Scheme::fd4);
    RealField f = smooth_field(g, 1.0);
    CHECK(sup_diff(spec.d_real(f, g.active[0]), fd.d_real(f, g.active[0])) < 1e-3);
  }
}
