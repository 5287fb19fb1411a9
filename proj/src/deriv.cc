#include "balab/deriv.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace balab {

namespace {
// FFTW plan creation/destruction is not thread-safe; plan execution on
// distinct plans/buffers is. Concurrent solves construct engines under this lock.
std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

Scheme scheme_from_string(const std::string& s) {
  if (s == "spectral") return Scheme::spectral;
  if (s == "fd4") return Scheme::fd4;
  throw std::invalid_argument("unknown scheme \"" + s + "\" (expected spectral | fd4)");
}

std::string to_string(Scheme s) { return s == Scheme::spectral ? "spectral" : "fd4"; }

struct DerivativeEngine::Impl {
  GridDomain grid;
  Scheme scheme;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  fftw_complex* buf = nullptr;
  RealField laplace_symbol;
  RealField dealias;

  Impl(GridDomain g, Scheme s) : grid(std::move(g)), scheme(s) {
    grid.validate();
    const int r = grid.resolution;
    std::lock_guard<std::mutex> lock(fftw_mutex());
    buf = fftw_alloc_complex(static_cast<std::size_t>(r));
    if (!buf) throw std::runtime_error("DerivativeEngine: fftw allocation failed");
    fwd = fftw_plan_dft_1d(r, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_1d(r, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!fwd || !bwd) throw std::runtime_error("DerivativeEngine: fftw plan creation failed");
  }

  ~Impl() {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
    if (buf) fftw_free(buf);
  }

  /** Signed integer wavenumber of 1-D mode index m (Nyquist on even grids -> 0). */
  int signed_mode(int m) const {
    const int r = grid.resolution;
    if (2 * m == r) return 0;  // Nyquist: odd derivative has no consistent sign
    return (m <= r / 2) ? m : m - r;
  }

  /** Visit every 1-D line along the given active axis. */
  template <typename Fn>
  void for_each_line(int axis, Fn&& fn) const {
    const int r = grid.resolution;
    const std::size_t stride = grid.stride(axis);
    const std::size_t npts = grid.num_points();
    const std::size_t block = stride * static_cast<std::size_t>(r);
    for (std::size_t base = 0; base < npts; base += block)
      for (std::size_t off = 0; off < stride; ++off) fn(base + off, stride);
  }

  CplxField d_spectral(const CplxField& f, int axis) const {
    const int r = grid.resolution;
    const double L = grid.periods[grid.active[axis]];
    CplxField out(f.size());
    for_each_line(axis, [&](std::size_t start, std::size_t stride) {
      for (int m = 0; m < r; ++m) {
        const Complex v = f[start + stride * static_cast<std::size_t>(m)];
        buf[m][0] = v.real();
        buf[m][1] = v.imag();
      }
      fftw_execute(fwd);
      for (int m = 0; m < r; ++m) {
        const double k = 2.0 * std::numbers::pi * signed_mode(m) / L;
        // multiply by i*k
        const double re = buf[m][0], im = buf[m][1];
        buf[m][0] = -k * im;
        buf[m][1] = k * re;
      }
      fftw_execute(bwd);
      const double inv = 1.0 / r;
      for (int m = 0; m < r; ++m)
        out[start + stride * static_cast<std::size_t>(m)] = Complex(buf[m][0] * inv, buf[m][1] * inv);
    });
    return out;
  }

  CplxField d_fd4(const CplxField& f, int axis) const {
    const int r = grid.resolution;
    const double h = grid.spacing(axis);
    CplxField out(f.size());
    for_each_line(axis, [&](std::size_t start, std::size_t stride) {
      auto at = [&](int m) -> const Complex& {
        int w = ((m % r) + r) % r;
        return f[start + stride * static_cast<std::size_t>(w)];
      };
      for (int m = 0; m < r; ++m) {
        out[start + stride * static_cast<std::size_t>(m)] =
            (-at(m + 2) + 8.0 * at(m + 1) - 8.0 * at(m - 1) + at(m - 2)) / (12.0 * h);
      }
    });
    return out;
  }
};

DerivativeEngine::DerivativeEngine(GridDomain grid, Scheme scheme)
    : impl_(std::make_unique<Impl>(std::move(grid), scheme)) {}
DerivativeEngine::~DerivativeEngine() = default;
DerivativeEngine::DerivativeEngine(DerivativeEngine&&) noexcept = default;
DerivativeEngine& DerivativeEngine::operator=(DerivativeEngine&&) noexcept = default;

const GridDomain& DerivativeEngine::grid() const { return impl_->grid; }
Scheme DerivativeEngine::scheme() const { return impl_->scheme; }

CplxField DerivativeEngine::d_real(const CplxField& f, int c) const {
  const GridDomain& g = impl_->grid;
  if (f.size() != g.num_points())
    throw std::invalid_argument("d_real: field size does not match the grid");
  if (c < 0 || c >= 2 * g.n)
    throw std::invalid_argument("d_real: real coordinate index out of range");
  int axis = -1;
  for (int a = 0; a < g.naxes(); ++a)
    if (g.active[a] == c) axis = a;
  if (axis < 0) return CplxField(f.size(), Complex(0.0, 0.0));  // constant direction
  return impl_->scheme == Scheme::spectral ? impl_->d_spectral(f, axis) : impl_->d_fd4(f, axis);
}

RealField DerivativeEngine::d_real(const RealField& f, int c) const {
  return real_part(d_real(promote(f), c));
}

CplxField DerivativeEngine::d_holo(const CplxField& f, int j) const {
  if (j < 0 || j >= impl_->grid.n) throw std::invalid_argument("d_holo: index out of range");
  CplxField dx = d_real(f, 2 * j);
  CplxField dy = d_real(f, 2 * j + 1);
  CplxField out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i)
    out[i] = 0.5 * (dx[i] - Complex(0.0, 1.0) * dy[i]);
  return out;
}

CplxField DerivativeEngine::d_anti(const CplxField& f, int j) const {
  if (j < 0 || j >= impl_->grid.n) throw std::invalid_argument("d_anti: index out of range");
  CplxField dx = d_real(f, 2 * j);
  CplxField dy = d_real(f, 2 * j + 1);
  CplxField out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i)
    out[i] = 0.5 * (dx[i] + Complex(0.0, 1.0) * dy[i]);
  return out;
}

CplxField DerivativeEngine::d_holo(const RealField& f, int j) const { return d_holo(promote(f), j); }
CplxField DerivativeEngine::d_anti(const RealField& f, int j) const { return d_anti(promote(f), j); }

void DerivativeEngine::fft_forward(CplxField& f) const {
  const GridDomain& g = impl_->grid;
  if (f.size() != g.num_points())
    throw std::invalid_argument("fft_forward: field size does not match the grid");
  const int r = g.resolution;
  for (int axis = 0; axis < g.naxes(); ++axis) {
    impl_->for_each_line(axis, [&](std::size_t start, std::size_t stride) {
      for (int m = 0; m < r; ++m) {
        const Complex v = f[start + stride * static_cast<std::size_t>(m)];
        impl_->buf[m][0] = v.real();
        impl_->buf[m][1] = v.imag();
      }
      fftw_execute(impl_->fwd);
      for (int m = 0; m < r; ++m)
        f[start + stride * static_cast<std::size_t>(m)] =
            Complex(impl_->buf[m][0], impl_->buf[m][1]);
    });
  }
}

void DerivativeEngine::fft_inverse(CplxField& f) const {
  const GridDomain& g = impl_->grid;
  if (f.size() != g.num_points())
    throw std::invalid_argument("fft_inverse: field size does not match the grid");
  const int r = g.resolution;
  const double inv = 1.0 / r;
  for (int axis = 0; axis < g.naxes(); ++axis) {
    impl_->for_each_line(axis, [&](std::size_t start, std::size_t stride) {
      for (int m = 0; m < r; ++m) {
        const Complex v = f[start + stride * static_cast<std::size_t>(m)];
        impl_->buf[m][0] = v.real();
        impl_->buf[m][1] = v.imag();
      }
      fftw_execute(impl_->bwd);
      for (int m = 0; m < r; ++m)
        f[start + stride * static_cast<std::size_t>(m)] =
            Complex(impl_->buf[m][0] * inv, impl_->buf[m][1] * inv);
    });
  }
}

const RealField& DerivativeEngine::flat_laplace_symbol() const {
  if (impl_->laplace_symbol.empty()) {
    const GridDomain& g = impl_->grid;
    RealField sym(g.num_points(), 0.0);
    std::vector<int> mi(static_cast<std::size_t>(g.naxes()));
    for (std::size_t i = 0; i < sym.size(); ++i) {
      g.unravel(i, mi.data());
      double mu = 0.0;
      for (int a = 0; a < g.naxes(); ++a) {
        const double L = g.periods[g.active[a]];
        const int r = g.resolution;
        int m = mi[a];
        int k = (m <= r / 2) ? m : m - r;  // second-derivative symbol keeps Nyquist
        const double kk = 2.0 * std::numbers::pi * k / L;
        mu += 0.25 * kk * kk;  // d_j d_jbar = (1/4)(d²/dx² + d²/dy²)
      }
      sym[i] = mu;
    }
    impl_->laplace_symbol = std::move(sym);
  }
  return impl_->laplace_symbol;
}

const RealField& DerivativeEngine::dealias_mask() const {
  if (impl_->dealias.empty()) {
    const GridDomain& g = impl_->grid;
    RealField mask(g.num_points(), 1.0);
    std::vector<int> mi(static_cast<std::size_t>(g.naxes()));
    for (std::size_t i = 0; i < mask.size(); ++i) {
      g.unravel(i, mi.data());
      for (int a = 0; a < g.naxes(); ++a)
        if (2 * mi[a] == g.resolution) mask[i] = 0.0;
    }
    impl_->dealias = std::move(mask);
  }
  return impl_->dealias;
}

}  // namespace balab
