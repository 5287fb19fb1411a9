#pragma once

#include <memory>
#include <string>

#include "balab/field.hpp"
#include "balab/grid.hpp"

namespace balab {

/**
 * Differentiation scheme on the periodic grid.
 *  - spectral: trigonometric interpolation (exact for band-limited data);
 *    first derivatives zero the Nyquist mode on even grids.
 *  - fd4: fourth-order centered differences with circular indexing.
 * Both differentiate axis-by-axis, so mixed partials commute exactly.
 */
enum class Scheme { spectral, fd4 };

Scheme scheme_from_string(const std::string& s);
std::string to_string(Scheme s);

class DerivativeEngine {
 public:
  DerivativeEngine(GridDomain grid, Scheme scheme);
  ~DerivativeEngine();
  DerivativeEngine(DerivativeEngine&&) noexcept;
  DerivativeEngine& operator=(DerivativeEngine&&) noexcept;
  DerivativeEngine(const DerivativeEngine&) = delete;
  DerivativeEngine& operator=(const DerivativeEngine&) = delete;

  const GridDomain& grid() const;
  Scheme scheme() const;

  /** d/dx_c along the real coordinate c in 0..2n-1 (zero field if inactive). */
  CplxField d_real(const CplxField& f, int c) const;
  RealField d_real(const RealField& f, int c) const;

  /** Holomorphic derivative d_j = (d/dx_{2j} - i d/dx_{2j+1}) / 2. */
  CplxField d_holo(const CplxField& f, int j) const;
  CplxField d_holo(const RealField& f, int j) const;

  /** Antiholomorphic derivative d_jbar = (d/dx_{2j} + i d/dx_{2j+1}) / 2. */
  CplxField d_anti(const CplxField& f, int j) const;
  CplxField d_anti(const RealField& f, int j) const;

  /**
   * Full-grid forward/inverse discrete Fourier transform over all active
   * axes (inverse is normalized so inverse(forward(f)) = f). Available in
   * both schemes; used by the preconditioners.
   */
  void fft_forward(CplxField& f) const;
  void fft_inverse(CplxField& f) const;

  /**
   * Symbol of the flat-metric Laplacian sum_j d_j d_jbar = (1/4) sum_c d²/dx_c²
   * per Fourier mode, indexed like a transformed field: entry k holds
   * mu_k >= 0 with  Delta_flat e_k = -mu_k e_k.
   */
  const RealField& flat_laplace_symbol() const;

  /**
   * Per-mode de-aliasing mask, indexed like a transformed field: 1 on modes
   * whose index along every active axis avoids the Nyquist frequency, 0 on
   * Nyquist rows (present on even grids only). First derivatives of both
   * schemes annihilate the zero rows, so purely spatial operators composed
   * from them are injective only on the masked subspace.
   */
  const RealField& dealias_mask() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace balab
