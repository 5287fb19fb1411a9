#include "balab/verify.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "balab/rng.hpp"

namespace balab {

double hyperbolic_log(double x, double y, const std::vector<double>& z) {
  double zz = 0.0;
  for (double v : z) zz += v * v;
  const double d = x * y - zz;
  if (x <= 0.0 || y <= 0.0 || d <= 0.0) {
    std::ostringstream os;
    os << "hyperbolic_log: point (x=" << x << ", y=" << y << ", |z|²=" << zz
       << ") is outside the region x>0, y>0, xy-Σz²>0";
    throw std::invalid_argument(os.str());
  }
  return std::log(d);
}

Eigen::MatrixXcd ball_log_hessian(double d, const std::vector<Complex>& z) {
  const int m = static_cast<int>(z.size());
  double zz = 0.0;
  for (const Complex& v : z) zz += std::norm(v);
  const double den = d - zz;
  if (den <= 0.0) throw std::invalid_argument("ball_log_hessian: d - Σ|z|² must be positive");
  Eigen::MatrixXcd h(m, m);
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < m; ++k)
      h(j, k) = (j == k ? 1.0 / den : 0.0) + std::conj(z[j]) * z[k] / (den * den);
  return h;
}

namespace {

/** g = -log(d - Σ|z|²) as a function of the 2m real parts of z. */
double ball_log(double d, std::vector<Complex> z) {
  double zz = 0.0;
  for (const Complex& v : z) zz += std::norm(v);
  return -std::log(d - zz);
}

/** ∂_j ∂̄_k of ball_log by nested central differences, for the crosscheck. */
Complex ball_log_hessian_fd(double d, const std::vector<Complex>& z, int j, int k, double h) {
  auto at = [&](int re_j, double sj, int re_k, double sk) {
    std::vector<Complex> w = z;
    // shift real part (axis 0) or imaginary part (axis 1) of the two slots
    auto shift = [&](int slot, int axis, double s) {
      w[slot] += (axis == 0) ? Complex(s, 0.0) : Complex(0.0, s);
    };
    shift(j, re_j, sj);
    shift(k, re_k, sk);
    return ball_log(d, w);
  };
  // ∂_j = ½(∂_xj - i ∂_yj), ∂̄_k = ½(∂_xk + i ∂_yk); expand the four
  // second-difference quotients of the composition
  auto d2 = [&](int aj, int ak) {
    return (at(aj, h, ak, h) - at(aj, h, ak, -h) - at(aj, -h, ak, h) + at(aj, -h, ak, -h)) /
           (4.0 * h * h);
  };
  const double dxx = d2(0, 0), dyy = d2(1, 1), dxy = d2(0, 1), dyx = d2(1, 0);
  return 0.25 * Complex(dxx + dyy, dxy - dyx);
}

}  // namespace

ConcavityReport concavity_tests(int samples, std::uint64_t seed) {
  ConcavityReport rep;
  rep.samples = samples;
  rep.worst_midpoint_slack = std::numeric_limits<double>::infinity();
  rep.worst_hessian_eigenvalue = std::numeric_limits<double>::infinity();
  DeterministicRng rng(seed);

  const int zdim = 2;  // real z-slots of the hyperbolic logarithm
  auto sample_point = [&](double& x, double& y, std::vector<double>& z) {
    for (;;) {
      x = rng.uniform(0.2, 3.0);
      y = rng.uniform(0.2, 3.0);
      double zz = 0.0;
      for (double& v : z) {
        v = 0.5 * rng.normal();
        zz += v * v;
      }
      if (x * y - zz > 0.05) return;
    }
  };

  std::vector<double> zp(zdim), zq(zdim), zm(zdim);
  for (int i = 0; i < samples; ++i) {
    double xp, yp, xq, yq;
    sample_point(xp, yp, zp);
    sample_point(xq, yq, zq);
    for (int k = 0; k < zdim; ++k) zm[k] = 0.5 * (zp[k] + zq[k]);
    const double slack = hyperbolic_log(0.5 * (xp + xq), 0.5 * (yp + yq), zm) -
                         0.5 * (hyperbolic_log(xp, yp, zp) + hyperbolic_log(xq, yq, zq));
    rep.worst_midpoint_slack = std::min(rep.worst_midpoint_slack, slack);
    if (slack < -1e-12 && rep.counterexample.empty()) {
      ++rep.failures;
      std::ostringstream os;
      os << "midpoint concavity fails at sample " << i << ": slack " << slack;
      rep.counterexample = os.str();
    }
  }

  const int cdim = 3;  // complex slots of the ball logarithm
  std::vector<Complex> z(cdim);
  for (int i = 0; i < samples; ++i) {
    double d;
    for (;;) {
      d = rng.uniform(0.4, 5.0);
      double zz = 0.0;
      for (Complex& v : z) {
        v = 0.4 * rng.cnormal();
        zz += std::norm(v);
      }
      if (d - zz > 0.3) break;
    }
    const Eigen::MatrixXcd h = ball_log_hessian(d, z);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    const double lam = es.eigenvalues().minCoeff();
    rep.worst_hessian_eigenvalue = std::min(rep.worst_hessian_eigenvalue, lam);
    if (lam < -1e-10 && rep.counterexample.empty()) {
      ++rep.failures;
      std::ostringstream os;
      os << "ball-log Hessian eigenvalue " << lam << " at sample " << i;
      rep.counterexample = os.str();
    }
    if (i % 200 == 0) {
      double diff = 0.0;
      for (int j = 0; j < cdim; ++j)
        for (int k = 0; k < cdim; ++k)
          diff = std::max(diff, std::abs(ball_log_hessian_fd(d, z, j, k, 1e-4) - h(j, k)));
      rep.worst_hessian_fd_error = std::max(rep.worst_hessian_fd_error, diff);
      if (diff > 1e-5 && rep.counterexample.empty()) {
        ++rep.failures;
        std::ostringstream os;
        os << "closed-form Hessian differs from finite differences by " << diff << " at sample "
           << i;
        rep.counterexample = os.str();
      }
    }
  }
  return rep;
}

namespace {

/** F(M) = M⁰⁰ ΣᵢMⁱⁱ - Σᵢ|Mⁱ⁰|² on (m+1)×(m+1) Hermitian matrices. */
double gap_f(const Eigen::MatrixXcd& mat) {
  const int m = static_cast<int>(mat.rows()) - 1;
  double tr = 0.0, off = 0.0;
  for (int i = 1; i <= m; ++i) {
    tr += mat(i, i).real();
    off += std::norm(mat(i, 0));
  }
  return mat(0, 0).real() * tr - off;
}

}  // namespace

GapSample gap_check(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
    throw std::invalid_argument("gap_check: matrices must be square and same size");
  const int m = static_cast<int>(a.rows()) - 1;
  if (m < 1) throw std::invalid_argument("gap_check: need at least a 2x2 matrix");
  const double fa = gap_f(a), fb = gap_f(b);
  if (!(fa > 0.0) || !(fb > fa))
    throw std::invalid_argument("gap_check: need F(A) > 0 and F(B) > F(A)");

  GapSample out;
  double tr_a = 0.0;
  for (int i = 1; i <= m; ++i) tr_a += a(i, i).real();
  out.trace_sum = tr_a + m * a(0, 0).real();

  // DF(A)[B-A] = Δ⁰⁰ ΣAⁱⁱ + A⁰⁰ ΣΔⁱⁱ - 2 Σ Re(conj(Aⁱ⁰) Δⁱ⁰)
  const Eigen::MatrixXcd diff = b - a;
  double tr_d = 0.0, cross = 0.0;
  for (int i = 1; i <= m; ++i) {
    tr_d += diff(i, i).real();
    cross += (std::conj(a(i, 0)) * diff(i, 0)).real();
  }
  out.derivative = diff(0, 0).real() * tr_a + a(0, 0).real() * tr_d - 2.0 * cross;

  // largest ε with F(B - εI) still above F(A), found by bisection
  auto above = [&](double e) {
    Eigen::MatrixXcd c = b;
    for (int i = 0; i <= m; ++i) c(i, i) -= e;
    return c(0, 0).real() > 0.0 && gap_f(c) > fa;
  };
  double lo = 0.0, hi = b(0, 0).real();
  for (int i = 1; i <= m; ++i) hi = std::max(hi, b(i, i).real());
  for (int it = 0; it < 200 && above(hi); ++it) hi *= 2.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (above(mid) ? lo : hi) = mid;
  }
  out.eps_star = lo;
  out.slack = out.derivative - out.eps_star * out.trace_sum;
  return out;
}

GapReport gap_lemma_test(int samples, std::uint64_t seed) {
  GapReport rep;
  rep.samples = samples;
  rep.worst_slack = std::numeric_limits<double>::infinity();
  DeterministicRng rng(seed);
  const int m = 3;

  auto sample_matrix = [&](Eigen::MatrixXcd& mat) {
    for (;;) {
      mat = Eigen::MatrixXcd::Zero(m + 1, m + 1);
      mat(0, 0) = rng.uniform(0.5, 2.5);
      for (int i = 1; i <= m; ++i) {
        mat(i, i) = rng.uniform(0.5, 2.5);
        const Complex w = 0.3 * rng.cnormal();
        mat(i, 0) = w;
        mat(0, i) = std::conj(w);
      }
      if (gap_f(mat) > 0.05) return;
    }
  };

  Eigen::MatrixXcd a, b;
  for (int i = 0; i < samples; ++i) {
    sample_matrix(a);
    do {
      sample_matrix(b);
    } while (gap_f(b) <= gap_f(a) + 0.05);
    const GapSample s = gap_check(a, b);
    rep.worst_slack = std::min(rep.worst_slack, s.slack);
    if (s.slack < -1e-9 && rep.counterexample.empty()) {
      ++rep.failures;
      std::ostringstream os;
      os << "gap inequality fails at sample " << i << ": DF=" << s.derivative
         << " eps*=" << s.eps_star << " trace=" << s.trace_sum << " slack=" << s.slack;
      rep.counterexample = os.str();
    }
  }
  return rep;
}

SandwichReport check_sandwich(const SpaceTimeField& phi, const BarrierPair& barriers) {
  if (phi.nt() != barriers.lower.nt() || phi.nt() != barriers.upper.nt())
    throw std::invalid_argument("check_sandwich: path and barriers disagree on time rows");
  SandwichReport rep;
  rep.lower_margin = std::numeric_limits<double>::infinity();
  rep.upper_margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= phi.nt(); ++i) {
    const RealField& p = phi.row(i);
    const RealField& lo = barriers.lower.row(i);
    const RealField& up = barriers.upper.row(i);
    for (std::size_t q = 0; q < p.size(); ++q) {
      if (p[q] - lo[q] < rep.lower_margin) {
        rep.lower_margin = p[q] - lo[q];
        rep.lower_argmin_row = i;
        rep.lower_argmin_point = q;
      }
      if (up[q] - p[q] < rep.upper_margin) {
        rep.upper_margin = up[q] - p[q];
        rep.upper_argmin_row = i;
        rep.upper_argmin_point = q;
      }
    }
  }
  return rep;
}

MonotoneReport check_time_monotone(const SpaceTimeField& phi) {
  MonotoneReport rep;
  rep.margin = std::numeric_limits<double>::infinity();
  const RealField pt0 = phi.time_d1(0);
  const RealField pt1 = phi.time_d1(phi.nt());
  for (int i = 0; i <= phi.nt(); ++i) {
    const RealField pt = phi.time_d1(i);
    for (std::size_t q = 0; q < pt.size(); ++q) {
      const double m = std::min(pt[q] - pt0[q], pt1[q] - pt[q]);
      if (m < rep.margin) {
        rep.margin = m;
        rep.argmin_row = i;
        rep.argmin_point = q;
      }
    }
  }
  return rep;
}

EstimateReport estimate_ratios(const GeodesicProblem& prob, const SpaceTimeField& phi,
                               const BarrierPair* barriers) {
  const DerivativeEngine& eng = prob.engine();
  const int n = prob.n();
  EstimateReport rep;
  for (int i = 0; i <= phi.nt(); ++i) {
    const RealField ptt = phi.time_d2(i);
    for (double v : ptt) rep.sup_ptt = std::max(rep.sup_ptt, std::abs(v));

    const std::vector<CplxField> hess = complex_hessian(eng, promote(phi.row(i)));
    Eigen::MatrixXcd h(n, n);
    for (std::size_t q = 0; q < phi.row_size(); ++q) {
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) h(j, k) = hess[static_cast<std::size_t>(j) * n + k][q];
      h = 0.5 * (h + h.adjoint()).eval();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
      rep.lambda1 = std::max(
          rep.lambda1, std::max(std::abs(es.eigenvalues().minCoeff()),
                                std::abs(es.eigenvalues().maxCoeff())));
    }

    const std::vector<CplxField> grad = holo_gradient(eng, promote(phi.row(i)));
    const RealField gsq = real_part(hermitian_pairing(prob.metric_inverse(), grad, grad));
    for (double v : gsq) rep.big_k = std::max(rep.big_k, 1.0 + v);
  }
  rep.hessian_ratio = rep.lambda1 / rep.big_k;
  rep.monotone_margin = check_time_monotone(phi).margin;
  if (barriers) {
    const SandwichReport s = check_sandwich(phi, *barriers);
    rep.sandwich_lower = s.lower_margin;
    rep.sandwich_upper = s.upper_margin;
    rep.has_sandwich = true;
  }
  return rep;
}

MeasuredConstants measured_constants(const GeodesicProblem& prob, const SpaceTimeField& phi,
                                     const SpaceTimeField& lower) {
  if (phi.nt() != lower.nt())
    throw std::invalid_argument("measured_constants: paths disagree on time rows");
  const DerivativeEngine& eng = prob.engine();
  const int nt = phi.nt();
  const int n = prob.n();
  const std::size_t np = prob.grid().num_points();

  MeasuredConstants out;
  for (int i = 0; i <= nt; ++i) {
    const RealField pt = phi.time_d1(i);
    for (double v : pt) out.k = std::max(out.k, 1.0 + v * v);
  }

  // difference path u = lower - phi, with the principal linearization at phi
  SpaceTimeField u(prob.grid(), nt);
  for (int i = 0; i <= nt; ++i) {
    RealField& row = u.row(i);
    for (std::size_t q = 0; q < np; ++q) row[q] = lower.row(i)[q] - phi.row(i)[q];
  }

  std::vector<RealField> lfield(static_cast<std::size_t>(nt - 1));
  std::vector<RealField> trace(static_cast<std::size_t>(nt - 1));
  double min_l = std::numeric_limits<double>::infinity();
  for (int i = 1; i < nt; ++i) {
    const RealField a = prob.coefficient_a(phi.row(i));
    const RealField ptt = phi.time_d2(i);
    const RealField phi_t = phi.time_d1(i);
    const std::vector<CplxField> grad_pt = holo_gradient(eng, promote(phi_t));
    const RealField utt = u.time_d2(i);
    const RealField ut = u.time_d1(i);
    const CplxField lap_u =
        chern_laplacian_with_inverse(eng, prob.metric_inverse(), promote(u.row(i)));
    const std::vector<CplxField> grad_ut = holo_gradient(eng, promote(ut));
    const CplxField cross = hermitian_pairing(prob.metric_inverse(), grad_pt, grad_ut);

    RealField lrow(np), trow(np);
    for (std::size_t q = 0; q < np; ++q) {
      lrow[q] = a[q] * utt[q] + ptt[q] * lap_u[q].real() - 2.0 * cross[q].real();
      trow[q] = n * (ptt[q] + a[q]);
      if (trow[q] <= 0.0) {
        std::ostringstream os;
        os << "measured_constants: ΣF^{αᾱ} is not positive at t=" << static_cast<double>(i) / nt;
        throw std::runtime_error(os.str());
      }
      min_l = std::min(min_l, lrow[q]);
    }
    lfield[static_cast<std::size_t>(i - 1)] = std::move(lrow);
    trace[static_cast<std::size_t>(i - 1)] = std::move(trow);
  }

  out.c1 = std::max(0.0, -min_l) / out.k + 1e-6;
  out.eps1 = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < lfield.size(); ++r)
    for (std::size_t q = 0; q < np; ++q)
      out.eps1 = std::min(out.eps1, (lfield[r][q] + out.c1 * out.k) / trace[r][q]);
  out.worst_slack = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < lfield.size(); ++r)
    for (std::size_t q = 0; q < np; ++q)
      out.worst_slack =
          std::min(out.worst_slack, lfield[r][q] - out.eps1 * trace[r][q] + out.c1 * out.k);
  return out;
}

std::vector<MinimalityProbe> energy_minimality_probe(const GeodesicProblem& prob,
                                                     const SpaceTimeField& phi, int count,
                                                     std::uint64_t seed) {
  const GridDomain& g = prob.grid();
  const int nt = phi.nt();
  DeterministicRng rng(seed);
  const double base = path_energy(prob, phi);

  std::vector<MinimalityProbe> table;
  for (int j = 0; j < count; ++j) {
    // a low-mode spatial pattern scaled by sin(πt): vanishes on the boundary rows
    const double ca = 0.2 * rng.normal(), cb = 0.2 * rng.normal(), cc = 0.1 * rng.normal();
    const int axis = g.active[0];
    const RealField pattern = sample(g, [&](const double* x) {
      const double arg = 2.0 * std::numbers::pi * x[axis] / g.periods[axis];
      return ca * std::cos(arg) + cb * std::sin(arg) + cc;
    });
    SpaceTimeField psi(g, nt);
    double norm = 0.0;
    for (int i = 0; i <= nt; ++i) {
      const double w = std::sin(std::numbers::pi * i / nt);
      RealField& row = psi.row(i);
      for (std::size_t q = 0; q < row.size(); ++q) {
        row[q] = w * pattern[q];
        norm = std::max(norm, std::abs(row[q]));
      }
    }

    for (double delta : {1e-2, 1e-3}) {
      MinimalityProbe probe;
      probe.index = j;
      probe.delta = delta;
      probe.psi_norm = norm;
      probe.energy_base = base;
      SpaceTimeField plus = phi, minus = phi;
      for (int i = 0; i <= nt; ++i) {
        RealField& rp = plus.row(i);
        RealField& rm = minus.row(i);
        const RealField& rw = psi.row(i);
        for (std::size_t q = 0; q < rp.size(); ++q) {
          rp[q] += delta * rw[q];
          rm[q] -= delta * rw[q];
        }
      }
      try {
        probe.energy_plus = path_energy(prob, plus);
        probe.energy_minus = path_energy(prob, minus);
        probe.first_variation = (probe.energy_plus - probe.energy_minus) / (2.0 * delta);
        probe.second_variation =
            (probe.energy_plus - 2.0 * base + probe.energy_minus) / (delta * delta);
      } catch (const std::runtime_error&) {
        probe.skipped = true;  // perturbed path left the positivity region
      }
      table.push_back(probe);
    }
  }
  return table;
}

}  // namespace balab
