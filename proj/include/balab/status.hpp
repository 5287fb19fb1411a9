#pragma once

#include <string>

namespace balab {

/** Terminal state of an iterative solve or certificate search. */
enum class SolveStatus {
  accepted,          ///< converged with all required margins strictly positive
  cone_exit,         ///< the path reached the boundary of the ellipticity cone
  line_search_fail,  ///< damping could not produce an acceptable step
  max_iterations,    ///< iteration budget exhausted before the tolerance
  path_stuck,        ///< continuation step fell below its minimum
  search_exhausted,  ///< certificate search ended with no positive margin
};

std::string to_string(SolveStatus s);

}  // namespace balab
