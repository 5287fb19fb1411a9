#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace balab {

/** Structured configuration failure. `kind` is one of UnknownKey,
    TypeMismatch, MissingRequired, DuplicateKey; `line` is the 1-based line of
    the offending entry (0 when the problem is the absence of a key). The
    inherited what() carries the formatted "line N: ..." report. */
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string kind, int line, const std::string& detail);
  const std::string& kind() const { return kind_; }
  int line() const { return line_; }

 private:
  std::string kind_;
  int line_;
};

/**
 * One resolved run: a command plus every problem and solver knob it reads.
 * Produced by parse_config from `key = value` text (one pair per line, '#'
 * comments, blank lines ignored). Keys outside the command's schema are
 * rejected with their line number; the first error wins.
 *
 * `out` and `threads` are execution knobs: they are accepted as keys and as
 * command-line overrides but excluded from the canonical emission, so reports
 * embedding the canonical text stay byte-identical across output locations
 * and worker counts.
 */
struct RunConfig {
  std::string command;  ///< inspect-metric | solve-geodesic | sweep-eps | verify | solve-cy

  // grid
  int n = 3;
  int resolution = 8;
  std::vector<int> axes = {0};
  double period = 1.0;
  std::string scheme = "spectral";  ///< spectral | fd4

  // metric and backgrounds ("flat", "kahler_perturbed(EXPR)", "balanced_root(EXPR)",
  // and for alpha also "conformal(EXPR)")
  std::string metric = "flat";
  std::string alpha = "flat";

  // geodesic problem
  double eps = 0.01;
  int p = 2;
  int nt = 16;
  std::string phi0 = "0";
  std::string phi1 = "0";
  double x_scale = 1.0;
  double s_step = 0.1;
  std::vector<double> sweep_eps = {1e-1, 1e-2, 1e-3, 1e-4};

  // balanced Calabi-Yau problem
  std::string psi = "0";
  std::string rho;  ///< nonempty: derive psi from prescribed Ricci data instead
  std::vector<double> psi_amplitudes;  ///< optional response-curve sweep
  double mean_target = 0.0;

  // verification
  int samples = 10000;
  std::string field;  ///< stored solution to re-check; empty runs the sampled suites

  // solver knobs
  double tol = 1e-9;
  int max_iters = 60;
  std::uint64_t seed = 42;

  // execution knobs (not part of the canonical identity)
  std::string out = "out";
  int threads = 1;
};

/** Parse and validate; throws ConfigError with the first failure. */
RunConfig parse_config(const std::string& text);

/** Canonical text form: fixed key order, only keys the command reads,
    shortest-roundtrip numbers. parse_config(emit_config(c)) reproduces c
    (up to the execution knobs), and emit ∘ parse is idempotent on text. */
std::string emit_config(const RunConfig& cfg);

}  // namespace balab
