#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "balab/config.hpp"
#include "balab/serialize.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace balab;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kWork = "cli_work";

struct RunResult {
  int code = -1;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::trunc);
  out << text;
  REQUIRE(out.good());
}

/** Spawn the driver binary named by BALAB_BIN with the given arguments. */
RunResult run_cli(const std::string& args, const std::string& env_prefix = "") {
  const char* bin = std::getenv("BALAB_BIN");
  REQUIRE_MESSAGE(bin != nullptr, "BALAB_BIN must point at the driver binary");
  const fs::path err_file = kWork / "stderr.txt";
  const std::string cmd =
      env_prefix + (env_prefix.empty() ? "" : " ") + std::string(bin) + " " + args + " >" +
      (kWork / "stdout.txt").string() + " 2>" + err_file.string();
  const int rc = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  r.err = slurp(err_file);
  return r;
}

json report_of(const fs::path& out_dir) {
  const std::string text = slurp(out_dir / "report.json");
  REQUIRE_FALSE(text.empty());
  return json::parse(text);
}

std::string geodesic_config() {
  return "command = solve-geodesic\n"
         "n = 3\n"
         "resolution = 8\n"
         "axes = 0\n"
         "nt = 8\n"
         "eps = 0.1\n"
         "metric = flat\n"
         "phi0 = 0.05*cos(2*pi*x0)\n"
         "phi1 = 0\n";
}

}  // namespace

TEST_CASE("config parsing: first error wins, with its kind and line") {
  const auto kind_of = [](const std::string& text) {
    try {
      parse_config(text);
      return std::string("none");
    } catch (const ConfigError& e) {
      return e.kind() + "@" + std::to_string(e.line());
    }
  };
  CHECK(kind_of("command = solve-geodesic\nepsilonn = 0.1\n") == "UnknownKey@2");
  CHECK(kind_of("# comment\n\ncommand = solve-cy\neps = 0.1\n") == "UnknownKey@4");  // wrong command
  CHECK(kind_of("command = solve-geodesic\nresolution = fast\n") == "TypeMismatch@2");
  CHECK(kind_of("command = solve-geodesic\nphi0 = cos(\n") == "TypeMismatch@2");
  CHECK(kind_of("command = walk\n") == "TypeMismatch@1");
  CHECK(kind_of("resolution = 8\n") == "MissingRequired@0");
  CHECK(kind_of("command = verify\nseed = 1\nseed = 2\n") == "DuplicateKey@3");
  CHECK(kind_of("command = solve-geodesic\nnt = 2\n") == "TypeMismatch@2");
  CHECK(kind_of(geodesic_config()) == "none");
}

TEST_CASE("canonical emission is a fixed point of parse") {
  const RunConfig cfg = parse_config(geodesic_config());
  const std::string canon = emit_config(cfg);
  const RunConfig cfg2 = parse_config(canon);
  CHECK(emit_config(cfg2) == canon);
  CHECK(cfg2.command == cfg.command);
  CHECK(cfg2.eps == cfg.eps);
  CHECK(cfg2.phi0 == cfg.phi0);
  CHECK(cfg2.resolution == cfg.resolution);

  // the execution knobs are accepted but stay out of the canonical identity
  const RunConfig cfg3 = parse_config(geodesic_config() + "out = elsewhere\nthreads = 4\n");
  CHECK(emit_config(cfg3) == canon);
}

TEST_CASE("field containers round-trip through disk") {
  fs::create_directories(kWork);
  const GridDomain g = make_grid(3, 1.0, {0, 2}, 8);
  SpaceTimeField f(g, 5);
  for (int i = 0; i <= 5; ++i)
    for (std::size_t p = 0; p < g.num_points(); ++p) f.row(i)[p] = std::sin(0.3 * i + 0.7 * p);
  const fs::path path = kWork / "roundtrip.blbf";
  write_spacetime(path, f);
  const SpaceTimeField f2 = read_spacetime(path);
  CHECK(f2.domain() == g);
  CHECK(f2.nt() == 5);
  CHECK(f.sup_diff(f2) == 0.0);

  spit(kWork / "junk.blbf", "not a container at all");
  CHECK_THROWS_WITH_AS(read_spacetime(kWork / "junk.blbf"),
                       doctest::Contains("bad magic"), std::runtime_error);
}

TEST_CASE("driver: geodesic solve writes a committed report and is deterministic") {
  fs::remove_all(kWork);
  fs::create_directories(kWork);
  spit(kWork / "geo.cfg", geodesic_config());

  const RunResult r1 = run_cli("--config " + (kWork / "geo.cfg").string() + " --out " +
                               (kWork / "run1").string());
  CHECK(r1.code == 0);
  REQUIRE(fs::exists(kWork / "run1" / "report.json"));
  REQUIRE(fs::exists(kWork / "run1" / "phi.blbf"));
  CHECK_FALSE(fs::exists(kWork / "run1.partial"));

  const json rep = report_of(kWork / "run1");
  CHECK(rep["schema_version"] == "1");
  CHECK(rep["command"] == "solve-geodesic");
  CHECK(rep["seed"] == 42);
  CHECK(rep["exit_code"] == 0);
  CHECK(rep["result"]["status"] == "accepted");
  CHECK(rep["result"]["final_s"] == 1.0);
  CHECK(rep["result"]["final_residual"].get<double>() <= 1e-9);
  CHECK(rep["result"]["barrier"]["status"] == "accepted");
  CHECK(rep["result"]["estimates"]["sup_ptt"].get<double>() > 0.0);
  // the full resolved configuration is embedded
  CHECK(rep["config"].get<std::string>().find("phi0 = 0.05*cos(2*pi*x0)") != std::string::npos);

  // identical config and seed: byte-identical artifacts
  const RunResult r2 = run_cli("--config " + (kWork / "geo.cfg").string() + " --out " +
                               (kWork / "run2").string());
  CHECK(r2.code == 0);
  CHECK(slurp(kWork / "run1" / "report.json") == slurp(kWork / "run2" / "report.json"));
  CHECK(slurp(kWork / "run1" / "phi.blbf") == slurp(kWork / "run2" / "phi.blbf"));

  // an existing output directory is refused instead of being overwritten
  const RunResult r3 = run_cli("--config " + (kWork / "geo.cfg").string() + " --out " +
                               (kWork / "run1").string());
  CHECK(r3.code == 1);
  CHECK(r3.err.find("already exists") != std::string::npos);
}

TEST_CASE("driver: configuration errors exit 1 with the offending line") {
  fs::create_directories(kWork);
  spit(kWork / "bad.cfg", "command = solve-geodesic\nepsilonn = 0.1\n");
  const RunResult r = run_cli("--config " + (kWork / "bad.cfg").string() + " --out " +
                              (kWork / "never").string());
  CHECK(r.code == 1);
  CHECK(r.err.find("UnknownKey") != std::string::npos);
  CHECK(r.err.find("line 2") != std::string::npos);
  CHECK(r.err.find("epsilonn") != std::string::npos);
  CHECK_FALSE(fs::exists(kWork / "never"));

  const RunResult r2 = run_cli("--config " + (kWork / "missing.cfg").string());
  CHECK(r2.code == 1);
  CHECK(r2.err.find("cannot open") != std::string::npos);
}

TEST_CASE("driver: a solve that reaches the cone boundary exits 2 with a diagnostic") {
  fs::create_directories(kWork);
  spit(kWork / "hard.cfg",
       "command = solve-geodesic\n"
       "n = 3\n"
       "resolution = 8\n"
       "axes = 0\n"
       "nt = 8\n"
       "eps = 0.0001\n"
       "metric = flat\n"
       "phi0 = 0.5*cos(2*pi*x0)\n"
       "phi1 = -0.5*cos(2*pi*x0)\n"
       "max_iters = 25\n");
  const RunResult r = run_cli("--config " + (kWork / "hard.cfg").string() + " --out " +
                              (kWork / "hard_out").string());
  CHECK(r.code == 2);
  const json rep = report_of(kWork / "hard_out");
  CHECK(rep["exit_code"] == 2);
  CHECK(rep["result"]["status"] == "cone_exit");
  CHECK(rep["result"]["message"].get<std::string>().find("cone boundary") != std::string::npos);
}

TEST_CASE("driver: verification re-checks a stored solution and locates corruption") {
  fs::create_directories(kWork);
  REQUIRE(fs::exists(kWork / "run1" / "phi.blbf"));  // from the geodesic case above
  const std::string problem =
      "n = 3\n"
      "resolution = 8\n"
      "axes = 0\n"
      "nt = 8\n"
      "eps = 0.1\n"
      "metric = flat\n"
      "phi0 = 0.05*cos(2*pi*x0)\n"
      "phi1 = 0\n";
  spit(kWork / "verify_clean.cfg",
       "command = verify\n" + problem + "field = " + (kWork / "run1" / "phi.blbf").string() + "\n");
  const RunResult clean = run_cli("--config " + (kWork / "verify_clean.cfg").string() + " --out " +
                                  (kWork / "ver_clean").string());
  CHECK(clean.code == 0);
  CHECK(report_of(kWork / "ver_clean")["result"]["verdict"] == "pass");

  // corrupt one interior value and re-check: exit 3 with a located violation
  SpaceTimeField phi = read_spacetime(kWork / "run1" / "phi.blbf");
  phi.row(4)[3] = -50.0;
  write_spacetime(kWork / "phi_bad.blbf", phi);
  spit(kWork / "verify_bad.cfg",
       "command = verify\n" + problem + "field = " + (kWork / "phi_bad.blbf").string() + "\n");
  const RunResult bad = run_cli("--config " + (kWork / "verify_bad.cfg").string() + " --out " +
                                (kWork / "ver_bad").string());
  CHECK(bad.code == 3);
  const json rep = report_of(kWork / "ver_bad");
  CHECK(rep["result"]["verdict"] == "fail");
  REQUIRE(rep["result"]["violations"].size() >= 1);
  bool located = false;
  for (const auto& v : rep["result"]["violations"])
    if (v["row"].get<int>() == 4) located = true;
  CHECK(located);
}

TEST_CASE("driver: sampled lemma suites pass and fan-out sweeps merge deterministically") {
  fs::create_directories(kWork);
  spit(kWork / "suites.cfg", "command = verify\nsamples = 2000\nseed = 7\n");
  const RunResult r = run_cli("--config " + (kWork / "suites.cfg").string() + " --out " +
                              (kWork / "suites_out").string());
  CHECK(r.code == 0);
  const json rep = report_of(kWork / "suites_out");
  CHECK(rep["result"]["concavity"]["failures"] == 0);
  CHECK(rep["result"]["gap"]["failures"] == 0);

  spit(kWork / "sweep.cfg",
       "command = sweep-eps\n"
       "n = 3\n"
       "resolution = 8\n"
       "axes = 0\n"
       "nt = 8\n"
       "metric = flat\n"
       "phi0 = 0.05*cos(2*pi*x0)\n"
       "phi1 = 0\n"
       "sweep_eps = 0.1,0.01,0.001\n");
  const RunResult serial = run_cli("--config " + (kWork / "sweep.cfg").string() + " --out " +
                                   (kWork / "sweep1").string());
  CHECK(serial.code == 0);
  const RunResult threaded = run_cli("--config " + (kWork / "sweep.cfg").string() + " --out " +
                                     (kWork / "sweep3").string() + " --threads 3");
  CHECK(threaded.code == 0);
  // worker count changes neither the CSV tables nor the report
  CHECK(slurp(kWork / "sweep1" / "eps_vs_sup_ptt.csv") ==
        slurp(kWork / "sweep3" / "eps_vs_sup_ptt.csv"));
  CHECK(slurp(kWork / "sweep1" / "eps_vs_hessian_ratio.csv") ==
        slurp(kWork / "sweep3" / "eps_vs_hessian_ratio.csv"));
  CHECK(slurp(kWork / "sweep1" / "report.json") == slurp(kWork / "sweep3" / "report.json"));
  const json swrep = report_of(kWork / "sweep1");
  REQUIRE(swrep["result"]["solves"].size() == 3);
  for (const auto& s : swrep["result"]["solves"]) CHECK(s["status"] == "accepted");
}

TEST_CASE("driver: balanced Calabi-Yau solve, artifacts, and response curve") {
  fs::create_directories(kWork);
  spit(kWork / "cy.cfg",
       "command = solve-cy\n"
       "n = 3\n"
       "resolution = 8\n"
       "axes = 0,1,2\n"
       "metric = balanced_root(0.02*(cos(2*pi*x0)+sin(2*pi*x2)))\n"
       "alpha = flat\n"
       "psi = 0.3*cos(2*pi*x2)\n"
       "tol = 0.00001\n");
  const RunResult r = run_cli("--config " + (kWork / "cy.cfg").string() + " --out " +
                              (kWork / "cy_out").string());
  CHECK(r.code == 0);
  const json rep = report_of(kWork / "cy_out");
  CHECK(rep["result"]["status"] == "accepted");
  CHECK(rep["result"]["astheno"]["classification"] == "astheno");
  CHECK(rep["result"]["recovered"]["balanced_residual"].get<double>() < 1e-12);
  CHECK(rep["result"]["recovered"]["positivity_margin"].get<double>() > 0.0);
  REQUIRE(fs::exists(kWork / "cy_out" / "u.blbf"));
  REQUIRE(fs::exists(kWork / "cy_out" / "metric_u.blbf"));

  // the stored potential is the one the report measured
  GridDomain g;
  const RealField u = read_real_field(kWork / "cy_out" / "u.blbf", &g);
  CHECK(sup_norm(u) == doctest::Approx(rep["result"]["c0"]["sup_u"].get<double>()).epsilon(1e-12));

  spit(kWork / "cysweep.cfg",
       "command = solve-cy\n"
       "n = 3\n"
       "resolution = 8\n"
       "axes = 0,1,2\n"
       "metric = flat\n"
       "alpha = flat\n"
       "psi = cos(2*pi*x1)\n"
       "psi_amplitudes = 0.2,0.5\n"
       "tol = 0.0001\n");
  const RunResult sweep = run_cli("--config " + (kWork / "cysweep.cfg").string() + " --out " +
                                  (kWork / "cysweep_out").string());
  CHECK(sweep.code == 0);
  const std::string csv = slurp(kWork / "cysweep_out" / "psi_amplitude_vs_sup_u.csv");
  CHECK(csv.find("psi_amplitude,sup_u") == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  const json swrep = report_of(kWork / "cysweep_out");
  REQUIRE(swrep["result"]["solves"].size() == 2);
  const double u1 = swrep["result"]["solves"][0]["c0"]["sup_u"].get<double>();
  const double u2 = swrep["result"]["solves"][1]["c0"]["sup_u"].get<double>();
  CHECK(u1 > 0.0);
  CHECK(u2 > u1);
}

TEST_CASE("driver: environment variables mirror the flags") {
  fs::create_directories(kWork);
  spit(kWork / "env.cfg", "command = verify\nsamples = 500\nseed = 1\n");
  const RunResult r = run_cli("--config " + (kWork / "env.cfg").string() + " --out " +
                                  (kWork / "env_out").string(),
                              "BALAB_SEED=777");
  CHECK(r.code == 0);
  CHECK(report_of(kWork / "env_out")["seed"] == 777);
}
