#pragma once

#include "balab/config.hpp"

namespace balab {

/**
 * Execute one resolved configuration: build the problem it describes, run the
 * requested command, and write report.json plus any field and CSV artifacts
 * into cfg.out (created atomically; a failed run leaves nothing at that
 * path). Returns the process exit code contract: 0 on success, 2 when a
 * solver ends without acceptance, 3 when a verification check finds a
 * counterexample. Configuration and I/O problems throw instead.
 */
int run(const RunConfig& cfg);

}  // namespace balab
