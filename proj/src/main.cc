#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "balab/config.hpp"
#include "balab/runner.hpp"

/**
 * Laboratory driver: reads a key=value problem definition, dispatches on its
 * `command`, and writes a report plus field/CSV artifacts to the output
 * directory. Exit codes: 0 success, 1 configuration or I/O error, 2 solver
 * ended without acceptance, 3 verification found a counterexample.
 *
 * Every flag can also be set through the environment with the BALAB_ prefix
 * (BALAB_CONFIG, BALAB_OUT, BALAB_SEED, BALAB_TOL, BALAB_THREADS); explicit
 * flags win over the environment, and both win over the config file.
 */
int main(int argc, char** argv) {
  CLI::App app{"balanced-metric laboratory"};
  std::string config_path;
  std::string out_dir;
  std::string seed_text, tol_text, threads_text;
  app.add_option("--config", config_path, "problem definition file (key = value)")
      ->required()
      ->envname("BALAB_CONFIG");
  app.add_option("--out", out_dir, "output directory (must not exist yet)")->envname("BALAB_OUT");
  app.add_option("--seed", seed_text, "override the config's seed")->envname("BALAB_SEED");
  app.add_option("--tol", tol_text, "override the config's solver tolerance")->envname("BALAB_TOL");
  app.add_option("--threads", threads_text, "worker threads for sweep commands")
      ->envname("BALAB_THREADS");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "error: cannot open config '" << config_path << "'\n";
    return 1;
  }
  std::stringstream buffer;
  buffer << in.rdbuf();

  try {
    balab::RunConfig cfg = balab::parse_config(buffer.str());
    if (!out_dir.empty()) cfg.out = out_dir;
    if (!seed_text.empty()) cfg.seed = std::stoull(seed_text);
    if (!tol_text.empty()) cfg.tol = std::stod(tol_text);
    if (!threads_text.empty()) cfg.threads = std::stoi(threads_text);
    return balab::run(cfg);
  } catch (const balab::ConfigError& e) {
    std::cerr << "config error (" << e.kind() << "): " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
