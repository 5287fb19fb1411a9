#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "balab/barriers.hpp"
#include "balab/geodesic.hpp"
#include "balab/newton.hpp"
#include "balab/rng.hpp"
#include "doctest.h"

using namespace balab;

namespace {

constexpr double kPi = std::numbers::pi;

GridDomain grid1(int res = 16) { return make_grid(3, 1.0, {0}, res); }

double sup_diff(const RealField& a, const RealField& b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/** Zero-data problem on the flat metric (X = 0). */
GeodesicProblem zero_problem(const DerivativeEngine& eng, double eps, int nt) {
  const GridDomain& g = eng.grid();
  RealField zero(g.num_points(), 0.0);
  return GeodesicProblem(eng, HermitianMatrixField::flat(g), zero, eps, nt, zero, zero);
}

/** The manufactured path t²/2 + 0.05 sin(2πx₀) sin(πt) sampled on the nodes. */
SpaceTimeField manufactured_path(const GridDomain& g, int nt) {
  SpaceTimeField phi(g, nt);
  for (int i = 0; i <= nt; ++i) {
    const double t = static_cast<double>(i) / nt;
    phi.row(i) = sample(g, [&](const double* x) {
      return 0.5 * t * t + 0.05 * std::sin(2.0 * kPi * x[0]) * std::sin(kPi * t);
    });
  }
  return phi;
}

/** Forcing rows that make `path` an exact discrete solution at s = 1. */
std::vector<RealField> forcing_for(const GeodesicProblem& prob, const SpaceTimeField& path) {
  const std::size_t np = prob.grid().num_points();
  std::vector<double> res = prob.residual(path, 1.0);
  std::vector<RealField> rows(prob.nt() + 1, RealField(np, 0.0));
  for (int i = 1; i < prob.nt(); ++i)
    for (std::size_t q = 0; q < np; ++q)
      rows[i][q] = res[static_cast<std::size_t>(i - 1) * np + q];
  return rows;
}

}  // namespace

TEST_CASE("time stencils are second order and exact on polynomials") {
  const GridDomain g = make_grid(2, 1.0, {0}, 4);
  const int nt = 8;
  SpaceTimeField quad(g, nt), cubic(g, nt);
  for (int i = 0; i <= nt; ++i) {
    const double t = static_cast<double>(i) / nt;
    quad.row(i) = RealField(g.num_points(), 3.0 * t * t - 2.0 * t + 0.5);
    cubic.row(i) = RealField(g.num_points(), t * t * t - t * t);
  }
  for (int i = 0; i <= nt; ++i) {
    const double t = static_cast<double>(i) / nt;
    // quadratic: both stencils exact at every node, ends included
    CHECK(std::abs(quad.time_d1(i)[0] - (6.0 * t - 2.0)) < 1e-12);
    CHECK(std::abs(quad.time_d2(i)[0] - 6.0) < 1e-10);
    // cubic: the four-point one-sided second derivative is exact too
    CHECK(std::abs(cubic.time_d2(i)[0] - (6.0 * t - 2.0)) < 1e-10);
    // centered first derivative of t³ carries exactly the f'''h²/6 = h² term
    if (i > 0 && i < nt)
      CHECK(std::abs(cubic.time_d1(i)[0] - (3.0 * t * t - 2.0 * t)) ==
            doctest::Approx(1.0 / (nt * nt)).epsilon(1e-10));
  }
}

TEST_CASE("gmres solves a diagonal system with and without preconditioning") {
  const std::size_t m = 40;
  std::vector<double> diag(m), b(m), x(m, 0.0);
  DeterministicRng rng(7);
  for (std::size_t i = 0; i < m; ++i) {
    diag[i] = 1.0 + 10.0 * rng.uniform();
    b[i] = rng.normal();
  }
  auto apply = [&](const std::vector<double>& in, std::vector<double>& out) {
    out.resize(m);
    for (std::size_t i = 0; i < m; ++i) out[i] = diag[i] * in[i];
  };

  GmresOptions opt;
  opt.tol = 1e-12;
  GmresResult r = gmres(apply, nullptr, b, x, opt);
  CHECK(r.converged);
  double err = 0.0;
  for (std::size_t i = 0; i < m; ++i) err = std::max(err, std::abs(x[i] - b[i] / diag[i]));
  CHECK(err < 1e-10);

  // exact preconditioner: converges in a single iteration
  auto precond = [&](const std::vector<double>& in, std::vector<double>& out) {
    out.resize(m);
    for (std::size_t i = 0; i < m; ++i) out[i] = in[i] / diag[i];
  };
  std::fill(x.begin(), x.end(), 0.0);
  r = gmres(apply, precond, b, x, opt);
  CHECK(r.converged);
  CHECK(r.iterations <= 2);

  // zero right-hand side: immediate exit with the zero solution
  std::vector<double> zero(m, 0.0);
  std::fill(x.begin(), x.end(), 1.0);
  r = gmres(apply, nullptr, zero, x, opt);
  CHECK(r.converged);
  for (double v : x) CHECK(v == 0.0);
}

TEST_CASE("arrow symbol eigenvalue matches the dense eigensolver") {
  // frozen 2x2 case: A=2, phi_tt=1, |grad phi_t|=1 -> eigenvalues (3±√5)/2
  CHECK(arrow_min_eigenvalue(2.0, 1.0, 1.0) ==
        doctest::Approx((3.0 - std::sqrt(5.0)) / 2.0).epsilon(1e-14));
  CHECK(arrow_min_eigenvalue(2.0, 1.0, 1.0) == doctest::Approx(0.381966011250105).epsilon(1e-12));
  // diagonal case diag(3,1,...,1): margin 1
  CHECK(arrow_min_eigenvalue(3.0, 1.0, 0.0) == doctest::Approx(1.0).epsilon(1e-14));

  DeterministicRng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const double a = rng.uniform(0.2, 4.0);
    const double ptt = rng.uniform(0.2, 4.0);
    const Complex w1 = rng.cnormal(), w2 = rng.cnormal();
    const double gsq = std::norm(w1) + std::norm(w2);

    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(3, 3);
    m(0, 0) = a;
    m(1, 1) = m(2, 2) = ptt;
    m(0, 1) = -std::conj(w1);
    m(0, 2) = -std::conj(w2);
    m(1, 0) = -w1;
    m(2, 0) = -w2;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
    const double lam = es.eigenvalues().minCoeff();
    CHECK(arrow_min_eigenvalue(a, ptt, gsq) == doctest::Approx(lam).epsilon(1e-11));
    // positive definite exactly when the cone quantities are positive
    const bool cone = (a > 0.0 && ptt > 0.0 && a * ptt - gsq > 0.0);
    CHECK((lam > 0.0) == cone);
  }
}

TEST_CASE("linear problem: newton reproduces the exact parabola") {
  const GridDomain g = grid1();
  DerivativeEngine eng(g, Scheme::spectral);
  const double eps = 0.1;
  const int nt = 16;
  GeodesicProblem prob = zero_problem(eng, eps, nt);

  SpaceTimeField phi = prob.initial_path();
  NewtonReport rep = newton_solve(prob, phi, 0.0);
  CHECK(rep.status == SolveStatus::accepted);
  CHECK(rep.iterations <= 2);  // the s=0 equation is linear
  CHECK(rep.residual <= 1e-9);

  // phi = ((eps - n)/2) t(t-1); midpoint value 0.3625 for eps=0.1, n=3
  for (int i = 0; i <= nt; ++i) {
    const double t = static_cast<double>(i) / nt;
    const double exact = 0.5 * (eps - 3.0) * t * (t - 1.0);
    CHECK(sup_diff(phi.row(i), RealField(g.num_points(), exact)) < 1e-9);
  }
  CHECK(phi.row(nt / 2)[0] == doctest::Approx(0.3625).epsilon(1e-9));
}

TEST_CASE("linearization matches central differences (residual is quadratic)") {
  const GridDomain g = grid1(8);
  DerivativeEngine eng(g, Scheme::spectral);
  const int nt = 8;
  GeodesicProblem prob = zero_problem(eng, 0.1, nt);
  const std::size_t dim = static_cast<std::size_t>(nt - 1) * g.num_points();

  DeterministicRng rng(23);
  for (double s : {0.3, 1.0}) {
    SpaceTimeField phi = manufactured_path(g, nt);
    std::vector<double> u(dim);
    for (double& v : u) v = 0.5 * rng.normal();

    GeodesicLinearization lin(prob, phi, s);
    std::vector<double> du;
    lin.apply(u, du);

    for (double h : {1e-3, 1e-4}) {
      SpaceTimeField plus = phi, minus = phi;
      plus.axpy_interior(h, u);
      minus.axpy_interior(-h, u);
      const std::vector<double> rp = prob.residual(plus, s);
      const std::vector<double> rm = prob.residual(minus, s);
      double err = 0.0;
      for (std::size_t q = 0; q < dim; ++q)
        err = std::max(err, std::abs((rp[q] - rm[q]) / (2.0 * h) - du[q]));
      // the residual is a quadratic polynomial of the path, so the central
      // difference is exact up to roundoff
      CHECK(err < 1e-7);
    }
  }
}

TEST_CASE("manufactured solution: continuation recovers the exact discrete path") {
  const GridDomain g = grid1();
  DerivativeEngine eng(g, Scheme::spectral);
  const int nt = 32;
  const SpaceTimeField star = manufactured_path(g, nt);
  RealField zero(g.num_points(), 0.0);
  GeodesicProblem prob(eng, HermitianMatrixField::flat(g), zero, 0.1, nt, star.row(0),
                       star.row(nt));
  prob.set_forcing(forcing_for(prob, star));
  CHECK(prob.residual_sup(star, 1.0) < 1e-14);

  SpaceTimeField phi = prob.initial_path();
  ContinuationReport rep = continuity_solve(prob, phi);
  CHECK(rep.status == SolveStatus::accepted);
  CHECK(rep.final_s == 1.0);
  CHECK(rep.final_residual <= 1e-9);
  CHECK(rep.s_values.front() == 0.0);
  CHECK(rep.s_values.back() == 1.0);
  CHECK(phi.sup_diff(star) < 5e-8);

  // cone margins of the manufactured path against plain-loop evaluation
  const ConeScan scan = prob.cone_scan(star);
  const int res = g.resolution;
  const double dt = 1.0 / nt;
  double min_g = 1e300, min_a = 1e300, min_ptt = 1e300;
  for (int i = 1; i < nt; ++i) {
    const double t = static_cast<double>(i) / nt;
    const double st = std::sin(kPi * t);
    const double d1 = (std::sin(kPi * (t + dt)) - std::sin(kPi * (t - dt))) / (2.0 * dt);
    const double d2 =
        (std::sin(kPi * (t + dt)) - 2.0 * st + std::sin(kPi * (t - dt))) / (dt * dt);
    for (int k = 0; k < res; ++k) {
      const double sx = std::sin(2.0 * kPi * k / res);
      const double cx = std::cos(2.0 * kPi * k / res);
      const double ptt = 1.0 + 0.05 * sx * d2;
      const double a = 3.0 - 0.05 * kPi * kPi * sx * st;
      const double gsq = 0.05 * kPi * cx * d1 * 0.05 * kPi * cx * d1;
      min_ptt = std::min(min_ptt, ptt);
      min_a = std::min(min_a, a);
      min_g = std::min(min_g, ptt * a - gsq);
    }
  }
  CHECK(scan.min_ptt == doctest::Approx(min_ptt).epsilon(1e-10));
  CHECK(scan.min_a == doctest::Approx(min_a).epsilon(1e-10));
  CHECK(scan.min_g == doctest::Approx(min_g).epsilon(1e-10));
  // and against the analytic values (time discretization error only)
  CHECK(scan.min_ptt == doctest::Approx(1.0 - 0.05 * kPi * kPi).epsilon(2e-3));
  CHECK(scan.min_a == doctest::Approx(3.0 - 0.05 * kPi * kPi).epsilon(1e-12));
  CHECK(symbol_min_eigenvalue(prob, star) > 0.0);
  CHECK(symbol_min_eigenvalue(prob, star) <= scan.min_ptt + 1e-12);
}

TEST_CASE("symmetric data give a time-symmetric geodesic") {
  const GridDomain g = grid1();
  DerivativeEngine eng(g, Scheme::spectral);
  const int nt = 16;
  const RealField f = sample(g, [](const double* x) { return 0.1 * std::cos(2.0 * kPi * x[0]); });
  RealField zero(g.num_points(), 0.0);
  GeodesicProblem prob(eng, HermitianMatrixField::flat(g), zero, 0.1, nt, f, f);

  SpaceTimeField phi = prob.initial_path();
  ContinuationReport rep = continuity_solve(prob, phi);
  CHECK(rep.status == SolveStatus::accepted);
  double asym = 0.0;
  for (int i = 0; i <= nt; ++i) asym = std::max(asym, sup_diff(phi.row(i), phi.row(nt - i)));
  CHECK(asym < 1e-7);
}

TEST_CASE("newton refuses a start outside the ellipticity cone") {
  const GridDomain g = grid1(8);
  DerivativeEngine eng(g, Scheme::spectral);
  GeodesicProblem prob = zero_problem(eng, 0.1, 8);

  // the straight-line path of zero data has phi_tt = 0: on the cone boundary
  SpaceTimeField phi = prob.initial_path();
  NewtonReport rep = newton_solve(prob, phi, 1.0);
  CHECK(rep.status == SolveStatus::cone_exit);
  CHECK(rep.message.find("cone") != std::string::npos);
}

TEST_CASE("supersolution solves the linear barrier problem") {
  const GridDomain g = grid1();
  DerivativeEngine eng(g, Scheme::spectral);
  const int nt = 16;

  // zero data: u = (n/2) t(1-t), so u(0.5) = 0.375 at n = 3
  GeodesicProblem prob = zero_problem(eng, 0.1, nt);
  double res = 0.0;
  SpaceTimeField u = solve_supersolution(prob, &res);
  CHECK(res <= 1e-10);
  CHECK(u.row(nt / 2)[0] == doctest::Approx(0.375).epsilon(1e-9));
  for (int i = 0; i <= nt; ++i) {
    const double t = static_cast<double>(i) / nt;
    CHECK(sup_diff(u.row(i), RealField(g.num_points(), 1.5 * t * (1.0 - t))) < 1e-9);
  }

  // smooth data: residual contract and the maximum principle u >= min data
  const RealField f0 = sample(g, [](const double* x) { return 0.3 * std::cos(2.0 * kPi * x[0]); });
  const RealField f1 =
      sample(g, [](const double* x) { return -0.1 + 0.2 * std::sin(2.0 * kPi * x[0]); });
  RealField zero(g.num_points(), 0.0);
  GeodesicProblem prob2(eng, HermitianMatrixField::flat(g), zero, 0.1, nt, f0, f1);
  SpaceTimeField v = solve_supersolution(prob2, &res);
  CHECK(res <= 1e-10);
  double floor = 1e300;
  for (std::size_t q = 0; q < g.num_points(); ++q) floor = std::min({floor, f0[q], f1[q]});
  for (int i = 0; i <= nt; ++i)
    for (double val : v.row(i)) CHECK(val >= floor - 1e-9);
}

TEST_CASE("subsolution family margins are evaluated exactly") {
  const GridDomain g = grid1(8);
  DerivativeEngine eng(g, Scheme::spectral);
  const int nt = 8;
  GeodesicProblem prob = zero_problem(eng, 0.1, nt);

  // (a,b) = (1,2): Phi_tt = 4 - 6t is negative at t = 1; margin 3·(-2) - 0.1
  SubsolutionMargin bad = subsolution_margin(prob, 1.0, 2);
  CHECK(bad.margin == doctest::Approx(-6.1).epsilon(1e-12));
  CHECK(bad.argmin_row == nt);

  // (a,b) = (2.5,2): Phi_tt = 7 - 6t, margin 3·Phi_tt - 0.1, minimal at t = 1
  SubsolutionMargin good = subsolution_margin(prob, 2.5, 2);
  CHECK(good.margin == doctest::Approx(2.9).epsilon(1e-12));
  CHECK(good.min_a_coeff == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("subsolution search returns the minimal-a certificate") {
  const GridDomain g = grid1(8);
  DerivativeEngine eng(g, Scheme::spectral);
  const int nt = 8;
  GeodesicProblem prob = zero_problem(eng, 0.1, nt);

  BarrierPair pair = construct_subsolution(prob);
  CHECK(pair.status == SolveStatus::accepted);
  CHECK(pair.a == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(pair.b == 2);
  CHECK(pair.margin == doctest::Approx(2.9).epsilon(1e-12));
  CHECK(pair.margin > 0.0);
  CHECK(pair.upper_residual <= 1e-10);

  // both barriers match the boundary rows exactly
  CHECK(sup_diff(pair.lower.row(0), prob.phi0()) == 0.0);
  CHECK(sup_diff(pair.lower.row(nt), prob.phi1()) == 0.0);
  CHECK(sup_diff(pair.upper.row(0), prob.phi0()) == 0.0);
  CHECK(sup_diff(pair.upper.row(nt), prob.phi1()) == 0.0);

  // a search box too small to certify reports the best margin, not a pass
  SubsolutionOptions tight;
  tight.a_max = 1.0;
  BarrierPair fail = construct_subsolution(prob, tight);
  CHECK(fail.status == SolveStatus::search_exhausted);
  CHECK(fail.margin < 0.0);
  CHECK(fail.message.find("best margin") != std::string::npos);
}

TEST_CASE("path energy: exact values, refinement order, positivity guard") {
  const GridDomain g = grid1();
  DerivativeEngine eng(g, Scheme::spectral);
  const std::size_t np = g.num_points();
  const RealField zero(np, 0.0);
  const RealField two(np, 2.0);

  // linear path between the constants 0 and 2: energy 4 exactly
  {
    GeodesicProblem prob(eng, HermitianMatrixField::flat(g), zero, 0.1, 16, zero, two);
    CHECK(path_energy(prob, prob.initial_path()) == doctest::Approx(4.0).epsilon(1e-13));
  }
  // constant-in-time path: zero energy
  {
    GeodesicProblem prob(eng, HermitianMatrixField::flat(g), zero, 0.1, 16, two, two);
    CHECK(path_energy(prob, prob.initial_path()) == doctest::Approx(0.0).epsilon(1e-13));
  }
  // sin(πt) path: energy π²/2, trapezoid + stencil error of second order
  {
    auto energy_at = [&](int nt) {
      GeodesicProblem prob(eng, HermitianMatrixField::flat(g), zero, 0.1, nt, zero, zero);
      SpaceTimeField phi(g, nt);
      for (int i = 0; i <= nt; ++i)
        phi.row(i) = RealField(np, std::sin(kPi * i / nt));
      return path_energy(prob, phi);
    };
    const double exact = kPi * kPi / 2.0;
    const double e64 = std::abs(energy_at(64) - exact);
    const double e128 = std::abs(energy_at(128) - exact);
    REQUIRE(e128 > 1e-9);  // far from roundoff, the order estimate is meaningful
    const double order = std::log2(e64 / e128);
    CHECK(order > 1.8);
    CHECK(order < 2.2);
  }
  // a path leaving the positivity region is refused with a located error
  {
    GeodesicProblem prob(eng, HermitianMatrixField::flat(g), zero, 0.1, 8, zero, zero);
    SpaceTimeField phi = prob.initial_path();
    phi.row(4) = sample(g, [](const double* x) { return 10.0 * std::cos(2.0 * kPi * x[0]); });
    bool thrown = false;
    try {
      path_energy(prob, phi);
    } catch (const std::runtime_error& e) {
      thrown = true;
      CHECK(std::string(e.what()).find("positivity factor") != std::string::npos);
      CHECK(std::string(e.what()).find("t=0.5") != std::string::npos);
    }
    CHECK(thrown);
  }
}

TEST_CASE("problem construction rejects a positive zeroth-order coefficient") {
  const GridDomain g = grid1(8);
  DerivativeEngine eng(g, Scheme::spectral);
  RealField zero(g.num_points(), 0.0);
  RealField pos(g.num_points(), 1e-6);
  CHECK_THROWS_AS(
      GeodesicProblem(eng, HermitianMatrixField::flat(g), pos, 0.1, 8, zero, zero),
      std::invalid_argument);
}
