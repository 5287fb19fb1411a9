#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace balab {

/**
 * Periodic grid on the flat torus C^n = R^{2n} / (period lattice).
 *
 * Real coordinates are x_0..x_{2n-1} with z_j = x_{2j} + i x_{2j+1}.
 * Fields are sampled only along the `active` real coordinates and are
 * constant along the rest; the grid is the tensor product of `resolution`
 * equispaced nodes per active coordinate, row-major with the first active
 * coordinate slowest.
 */
struct GridDomain {
  int n = 3;                    // complex dimension
  std::vector<double> periods;  // size 2n, period of each real coordinate
  std::vector<int> active;      // strictly increasing subset of {0..2n-1}
  int resolution = 16;          // nodes per active coordinate

  void validate() const {
    if (n < 2) throw std::invalid_argument("GridDomain: complex dimension must be >= 2");
    if (static_cast<int>(periods.size()) != 2 * n)
      throw std::invalid_argument("GridDomain: periods must list all 2n real coordinates");
    for (double L : periods)
      if (!(L > 0.0)) throw std::invalid_argument("GridDomain: periods must be positive");
    if (resolution < 4)
      throw std::invalid_argument("GridDomain: resolution must be >= 4 per active coordinate");
    if (active.empty())
      throw std::invalid_argument("GridDomain: at least one active coordinate required");
    int prev = -1;
    for (int c : active) {
      if (c <= prev || c < 0 || c >= 2 * n)
        throw std::invalid_argument("GridDomain: active coordinates must be strictly increasing "
                                    "indices into the 2n real coordinates");
      prev = c;
    }
  }

  int naxes() const { return static_cast<int>(active.size()); }

  std::size_t num_points() const {
    std::size_t m = 1;
    for (int a = 0; a < naxes(); ++a) m *= static_cast<std::size_t>(resolution);
    return m;
  }

  /** Grid spacing along the axis-th active coordinate. */
  double spacing(int axis) const { return periods[active[axis]] / resolution; }

  /** Row-major stride of the axis-th active coordinate. */
  std::size_t stride(int axis) const {
    std::size_t s = 1;
    for (int a = axis + 1; a < naxes(); ++a) s *= static_cast<std::size_t>(resolution);
    return s;
  }

  /** Multi-index of a flat point index (out must hold naxes() ints). */
  void unravel(std::size_t idx, int* out) const {
    for (int a = naxes() - 1; a >= 0; --a) {
      out[a] = static_cast<int>(idx % resolution);
      idx /= resolution;
    }
  }

  /** Fill all 2n real coordinates of a grid point (inactive ones are 0). */
  void coordinates(std::size_t idx, double* x) const {
    for (int c = 0; c < 2 * n; ++c) x[c] = 0.0;
    for (int a = naxes() - 1; a >= 0; --a) {
      int m = static_cast<int>(idx % resolution);
      idx /= resolution;
      x[active[a]] = m * spacing(a);
    }
  }

  bool operator==(const GridDomain&) const = default;
};

/** Uniform-period grid helper. */
inline GridDomain make_grid(int n, double period, std::vector<int> active, int resolution) {
  GridDomain g;
  g.n = n;
  g.periods.assign(static_cast<std::size_t>(2 * n), period);
  g.active = std::move(active);
  g.resolution = resolution;
  g.validate();
  return g;
}

}  // namespace balab
