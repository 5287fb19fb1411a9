#pragma once

#include <functional>
#include <vector>

namespace balab {

struct GmresOptions {
  int restart = 60;
  int max_iters = 400;
  double tol = 1e-10;  ///< relative residual target ‖b - Ax‖₂ / ‖b‖₂
};

struct GmresResult {
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;  ///< final relative residual
};

using LinearApply = std::function<void(const std::vector<double>&, std::vector<double>&)>;

/** Restarted GMRES with right preconditioning: solves A M⁻¹ y = b and returns
    x = M⁻¹ y. Arnoldi with modified Gram-Schmidt and Givens rotations; all
    reductions are serial, so results are bit-reproducible. `precond` may be
    null for the identity. `x` carries the initial guess in and the solution
    out. */
GmresResult gmres(const LinearApply& apply, const LinearApply& precond,
                  const std::vector<double>& b, std::vector<double>& x,
                  const GmresOptions& opt = {});

}  // namespace balab
