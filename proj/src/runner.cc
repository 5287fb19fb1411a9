#include "balab/runner.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <memory>
#include <optional>

#include "balab/barriers.hpp"
#include "balab/cy.hpp"
#include "balab/expr.hpp"
#include "balab/newton.hpp"
#include "balab/serialize.hpp"
#include "balab/verify.hpp"
#include "json.hpp"

namespace balab {

namespace {

using json = nlohmann::ordered_json;

GridDomain config_grid(const RunConfig& cfg) {
  return make_grid(cfg.n, cfg.period, cfg.axes, cfg.resolution);
}

Scheme config_scheme(const RunConfig& cfg) {
  return cfg.scheme == "fd4" ? Scheme::fd4 : Scheme::spectral;
}

/** Split "name(payload)" into its parts; bare names have an empty payload. */
std::pair<std::string, std::string> split_background(const std::string& spec) {
  const auto open = spec.find('(');
  if (open == std::string::npos) return {spec, ""};
  return {spec.substr(0, open), spec.substr(open + 1, spec.size() - open - 2)};
}

HermitianMatrixField build_metric(const DerivativeEngine& eng, const std::string& spec) {
  const auto [name, payload] = split_background(spec);
  const GridDomain& g = eng.grid();
  if (name == "flat") return HermitianMatrixField::flat(g);
  const RealField f = Expression::parse(payload).sample(g);
  if (name == "kahler_perturbed") return HermitianMatrixField::kahler_potential(eng, f);
  if (name == "balanced_root") return balanced_metric_from_potential(eng, f);
  if (name == "conformal") return HermitianMatrixField::conformal(g, f);
  throw std::invalid_argument("unknown background '" + spec + "'");
}

json json_field_stats(const RealField& f) {
  double lo = f.empty() ? 0.0 : f[0], hi = lo;
  for (double v : f) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return json{{"min", lo}, {"max", hi}, {"sup", std::max(std::abs(lo), std::abs(hi))}};
}

json report_skeleton(const RunConfig& cfg) {
  json j;
  j["schema_version"] = "1";
  j["command"] = cfg.command;
  j["seed"] = cfg.seed;
  j["config"] = emit_config(cfg);
  return j;
}

void write_report(const std::filesystem::path& dir, const json& j) {
  std::ofstream out(dir / "report.json", std::ios::trunc);
  if (!out) throw std::runtime_error("cannot create report.json under '" + dir.string() + "'");
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed for report.json");
}

/** The geodesic problem a config describes; X is scaled by x_scale (the knob
    that makes a balanced metric's nonnegative coefficient admissible). */
GeodesicProblem build_geodesic(const DerivativeEngine& eng, const RunConfig& cfg,
                               HermitianMatrixField metric) {
  XReport x = compute_X(eng, metric, cfg.p);
  for (double& v : x.direct) v *= cfg.x_scale;
  const RealField phi0 = Expression::parse(cfg.phi0).sample(eng.grid(), 0.0);
  const RealField phi1 = Expression::parse(cfg.phi1).sample(eng.grid(), 1.0);
  return GeodesicProblem(eng, std::move(metric), std::move(x.direct), cfg.eps, cfg.nt, phi0, phi1);
}

ContinuationOptions continuation_options(const RunConfig& cfg) {
  ContinuationOptions opt;
  opt.newton.tol = cfg.tol;
  opt.newton.max_iters = cfg.max_iters;
  opt.s_initial_step = cfg.s_step;
  return opt;
}

json json_cone(const ConeScan& c) {
  return json{{"min_g", c.min_g},
              {"min_a", c.min_a},
              {"min_ptt", c.min_ptt},
              {"min_l", c.min_l},
              {"argmin_row", c.argmin_row},
              {"argmin_point", c.argmin_point}};
}

/** Everything measured about one completed geodesic solve. */
json json_geodesic_result(const GeodesicProblem& prob, const SpaceTimeField& phi,
                          const ContinuationReport& rep) {
  json r;
  r["status"] = to_string(rep.status);
  r["message"] = rep.message;
  r["final_s"] = rep.final_s;
  r["steps_accepted"] = rep.steps_accepted;
  r["newton_iterations"] = rep.newton_iterations;
  r["gmres_iterations"] = rep.gmres_iterations;
  r["final_residual"] = rep.final_residual;
  r["s_values"] = rep.s_values;
  r["cone"] = json_cone(rep.cone);
  r["symbol_margin"] = symbol_min_eigenvalue(prob, phi);
  if (rep.status != SolveStatus::accepted) return r;

  std::optional<BarrierPair> barriers;
  try {
    barriers.emplace(construct_subsolution(prob));
    r["barrier"] = json{{"status", to_string(barriers->status)},
                        {"a", barriers->a},
                        {"b", barriers->b},
                        {"margin", barriers->margin},
                        {"upper_residual", barriers->upper_residual}};
  } catch (const std::exception& e) {
    r["barrier"] = json{{"status", "failed"}, {"message", e.what()}};
  }
  const bool certified = barriers && barriers->status == SolveStatus::accepted;
  const EstimateReport est = estimate_ratios(prob, phi, certified ? &*barriers : nullptr);
  r["estimates"] = json{{"sup_ptt", est.sup_ptt},
                        {"lambda1", est.lambda1},
                        {"big_k", est.big_k},
                        {"hessian_ratio", est.hessian_ratio},
                        {"monotone_margin", est.monotone_margin},
                        {"sandwich_lower", est.sandwich_lower},
                        {"sandwich_upper", est.sandwich_upper},
                        {"has_sandwich", est.has_sandwich}};
  try {
    r["energy"] = path_energy(prob, phi);
  } catch (const std::exception& e) {
    r["energy_error"] = e.what();
  }
  return r;
}

int run_inspect_metric(const RunConfig& cfg, const std::filesystem::path& dir, json& report) {
  const GridDomain g = config_grid(cfg);
  DerivativeEngine eng(g, config_scheme(cfg));
  const HermitianMatrixField metric = build_metric(eng, cfg.metric);
  json r;
  r["balanced_residual"] = balanced_residual(eng, metric);
  r["hermiticity_residual"] = metric.hermiticity_residual();
  r["det"] = json_field_stats(metric.det_field());
  const XReport x = compute_X(eng, metric, cfg.p);
  double min_x = x.direct.empty() ? 0.0 : x.direct[0];
  double discrepancy = 0.0;
  for (std::size_t i = 0; i < x.direct.size(); ++i) {
    min_x = std::min(min_x, x.direct[i]);
    discrepancy = std::max(discrepancy, std::abs(x.direct[i] - x.torsion_route[i]));
  }
  r["x"] = json{{"p", cfg.p},
                {"min", min_x},
                {"sup", sup_norm(x.direct)},
                {"route_discrepancy", discrepancy}};
  report["result"] = std::move(r);
  write_form(dir / "metric.blbf", metric.form());
  return 0;
}

int run_solve_geodesic(const RunConfig& cfg, const std::filesystem::path& dir, json& report) {
  const GridDomain g = config_grid(cfg);
  DerivativeEngine eng(g, config_scheme(cfg));
  GeodesicProblem prob = build_geodesic(eng, cfg, build_metric(eng, cfg.metric));
  SpaceTimeField phi = prob.initial_path();
  const ContinuationReport rep = continuity_solve(prob, phi, continuation_options(cfg));
  report["result"] = json_geodesic_result(prob, phi, rep);
  write_spacetime(dir / "phi.blbf", phi);
  return rep.status == SolveStatus::accepted ? 0 : 2;
}

int run_sweep_eps(const RunConfig& cfg, const std::filesystem::path& dir, json& report) {
  struct Job {
    std::unique_ptr<DerivativeEngine> eng;
    std::unique_ptr<GeodesicProblem> prob;
    std::unique_ptr<SpaceTimeField> phi;
    ContinuationReport rep;
  };
  // engines and problems are built serially (FFT planning and metric
  // construction), only the solves fan out
  std::vector<Job> jobs(cfg.sweep_eps.size());
  const GridDomain g = config_grid(cfg);
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    RunConfig one = cfg;
    one.eps = cfg.sweep_eps[i];
    jobs[i].eng = std::make_unique<DerivativeEngine>(g, config_scheme(cfg));
    jobs[i].prob = std::make_unique<GeodesicProblem>(
        build_geodesic(*jobs[i].eng, one, build_metric(*jobs[i].eng, cfg.metric)));
    jobs[i].phi = std::make_unique<SpaceTimeField>(jobs[i].prob->initial_path());
  }
  const ContinuationOptions opt = continuation_options(cfg);
  const auto solve_one = [&](std::size_t i) {
    jobs[i].rep = continuity_solve(*jobs[i].prob, *jobs[i].phi, opt);
  };
  for (std::size_t begin = 0; begin < jobs.size();) {
    const std::size_t end = std::min(begin + std::size_t(std::max(cfg.threads, 1)), jobs.size());
    std::vector<std::future<void>> batch;
    for (std::size_t i = begin + 1; i < end; ++i)
      batch.push_back(std::async(std::launch::async, solve_one, i));
    solve_one(begin);
    for (auto& f : batch) f.get();
    begin = end;
  }

  // merge in input order: reports, plot tables, exit code
  json rows = json::array();
  std::vector<std::vector<double>> ptt_rows, ratio_rows;
  int exit_code = 0;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    json r = json_geodesic_result(*jobs[i].prob, *jobs[i].phi, jobs[i].rep);
    r["eps"] = cfg.sweep_eps[i];
    if (jobs[i].rep.status == SolveStatus::accepted) {
      ptt_rows.push_back({cfg.sweep_eps[i], r["estimates"]["sup_ptt"].get<double>()});
      ratio_rows.push_back({cfg.sweep_eps[i], r["estimates"]["hessian_ratio"].get<double>()});
    } else {
      exit_code = 2;
    }
    rows.push_back(std::move(r));
  }
  report["result"] = json{{"solves", std::move(rows)}};
  write_csv(dir / "eps_vs_sup_ptt.csv", {"eps", "sup_ptt"}, ptt_rows);
  write_csv(dir / "eps_vs_hessian_ratio.csv", {"eps", "hessian_ratio"}, ratio_rows);
  return exit_code;
}

int run_verify_suites(const RunConfig& cfg, json& report) {
  const ConcavityReport conc = concavity_tests(cfg.samples, cfg.seed);
  const GapReport gap = gap_lemma_test(std::max(cfg.samples / 10, 10), cfg.seed);
  json r;
  r["concavity"] = json{{"samples", conc.samples},
                        {"failures", conc.failures},
                        {"worst_midpoint_slack", conc.worst_midpoint_slack},
                        {"worst_hessian_eigenvalue", conc.worst_hessian_eigenvalue},
                        {"worst_hessian_fd_error", conc.worst_hessian_fd_error},
                        {"counterexample", conc.counterexample}};
  r["gap"] = json{{"samples", gap.samples},
                  {"failures", gap.failures},
                  {"worst_slack", gap.worst_slack},
                  {"counterexample", gap.counterexample}};
  const bool ok = conc.failures == 0 && gap.failures == 0;
  r["verdict"] = ok ? "pass" : "fail";
  report["result"] = std::move(r);
  return ok ? 0 : 3;
}

int run_verify_field(const RunConfig& cfg, json& report) {
  const SpaceTimeField phi = read_spacetime(cfg.field);
  // the stored grid is authoritative; the config describes the problem
  RunConfig resolved = cfg;
  resolved.resolution = phi.domain().resolution;
  resolved.n = phi.domain().n;
  resolved.axes = phi.domain().active;
  resolved.nt = phi.nt();
  DerivativeEngine eng(phi.domain(), config_scheme(cfg));
  GeodesicProblem prob = build_geodesic(eng, resolved, build_metric(eng, cfg.metric));

  json violations = json::array();
  const auto locate = [&](int row, std::size_t point, const std::string& what, double value) {
    violations.push_back(
        json{{"what", what}, {"row", row}, {"point", point}, {"value", value}});
  };

  double worst_boundary = 0.0;
  for (std::size_t i = 0; i < prob.phi0().size(); ++i) {
    worst_boundary = std::max(worst_boundary, std::abs(phi.row(0)[i] - prob.phi0()[i]));
    worst_boundary = std::max(worst_boundary, std::abs(phi.row(phi.nt())[i] - prob.phi1()[i]));
  }
  if (worst_boundary > 1e-10) locate(0, 0, "boundary rows differ from the configured data", worst_boundary);

  const double residual = prob.residual_sup(phi, 1.0);
  if (!(residual <= 10.0 * cfg.tol)) locate(-1, 0, "geodesic residual above tolerance", residual);

  const ConeScan cone = prob.cone_scan(phi);
  const double cone_min = std::min({cone.min_g, cone.min_a, cone.min_ptt});
  if (!(cone_min > 0.0))
    locate(cone.argmin_row, cone.argmin_point, "cone quantity not positive", cone_min);

  const MonotoneReport mono = check_time_monotone(phi);
  if (mono.margin < -1e-7)
    locate(mono.argmin_row, mono.argmin_point, "time monotonicity violated", mono.margin);

  json barrier_json;
  try {
    const BarrierPair barriers = construct_subsolution(prob);
    barrier_json = json{{"status", to_string(barriers.status)}, {"margin", barriers.margin}};
    if (barriers.status == SolveStatus::accepted) {
      const SandwichReport s = check_sandwich(phi, barriers);
      barrier_json["sandwich_lower"] = s.lower_margin;
      barrier_json["sandwich_upper"] = s.upper_margin;
      if (s.lower_margin < -1e-7)
        locate(s.lower_argmin_row, s.lower_argmin_point, "below the lower barrier", s.lower_margin);
      if (s.upper_margin < -1e-7)
        locate(s.upper_argmin_row, s.upper_argmin_point, "above the upper barrier", s.upper_margin);
    }
  } catch (const std::exception& e) {
    barrier_json = json{{"status", "failed"}, {"message", e.what()}};
  }

  json r;
  r["field"] = cfg.field;
  r["rows"] = phi.rows();
  r["residual"] = residual;
  r["cone"] = json_cone(cone);
  r["monotone_margin"] = mono.margin;
  r["barrier"] = std::move(barrier_json);
  r["violations"] = violations;
  r["verdict"] = violations.empty() ? "pass" : "fail";
  report["result"] = std::move(r);
  return violations.empty() ? 0 : 3;
}

/** One balanced Calabi-Yau solve, reported; artifacts only when `dir` set. */
json json_cy_result(const DerivativeEngine& eng, CYProblem& prob, const CYSolution& sol,
                    const std::filesystem::path* dir) {
  json r;
  r["status"] = to_string(sol.status);
  r["message"] = sol.message;
  r["iterations"] = sol.iterations;
  r["gmres_iterations"] = sol.gmres_iterations;
  r["residual_sup"] = sol.residual_sup;
  r["b"] = sol.b;
  r["margin"] = sol.margin;
  r["residual_history"] = sol.residual_history;
  r["astheno"] = json{{"classification", to_string(prob.astheno().classification)},
                      {"min_eigenvalue", prob.astheno().min_eigenvalue},
                      {"max_eigenvalue", prob.astheno().max_eigenvalue}};
  r["omega_balanced_residual"] = prob.balanced_residual();
  if (sol.status == SolveStatus::accepted) {
    const C0Report c0 = c0_report(prob, sol);
    r["c0"] = json{{"sup_u", c0.sup_u},
                   {"b", c0.b},
                   {"residual_sup", c0.residual_sup},
                   {"trace_margin", c0.trace_margin}};
    const RecoverReport rec = recover_balanced_metric(prob, sol.u);
    r["recovered"] = json{{"balanced_residual", rec.balanced_residual},
                          {"positivity_margin", rec.positivity_margin}};
    if (dir) {
      write_real_field(*dir / "u.blbf", eng.grid(), sol.u);
      write_form(*dir / "metric_u.blbf", rec.metric.form());
    }
  } else if (dir) {
    write_real_field(*dir / "u.blbf", eng.grid(), sol.u);
  }
  return r;
}

int run_solve_cy(const RunConfig& cfg, const std::filesystem::path& dir, json& report) {
  const GridDomain g = config_grid(cfg);
  DerivativeEngine eng(g, config_scheme(cfg));
  const HermitianMatrixField alpha = build_metric(eng, cfg.alpha);
  const HermitianMatrixField omega = build_metric(eng, cfg.metric);
  RealField psi;
  if (!cfg.rho.empty()) {
    const RealField rho = Expression::parse(cfg.rho).sample(g);
    psi = ingest_psi(eng, alpha, omega, rho);
  } else {
    psi = Expression::parse(cfg.psi).sample(g);
  }
  CYOptions opt;
  opt.tol = cfg.tol;
  opt.max_iters = cfg.max_iters;
  opt.mean_target = cfg.mean_target;

  if (cfg.psi_amplitudes.empty()) {
    CYProblem prob(eng, alpha, omega, psi);
    const CYSolution sol = solve_cy(prob, opt);
    report["result"] = json_cy_result(eng, prob, sol, &dir);
    return sol.status == SolveStatus::accepted ? 0 : 2;
  }

  // response curve: scale the data, record sup|u| per amplitude
  json rows = json::array();
  std::vector<std::vector<double>> csv_rows;
  int exit_code = 0;
  for (const double amp : cfg.psi_amplitudes) {
    RealField scaled = psi;
    for (double& v : scaled) v *= amp;
    CYProblem prob(eng, alpha, omega, scaled);
    const CYSolution sol = solve_cy(prob, opt);
    json r = json_cy_result(eng, prob, sol, nullptr);
    r["psi_amplitude"] = amp;
    if (sol.status == SolveStatus::accepted)
      csv_rows.push_back({amp, r["c0"]["sup_u"].get<double>()});
    else
      exit_code = 2;
    rows.push_back(std::move(r));
  }
  report["result"] = json{{"solves", std::move(rows)}};
  write_csv(dir / "psi_amplitude_vs_sup_u.csv", {"psi_amplitude", "sup_u"}, csv_rows);
  return exit_code;
}

}  // namespace

int run(const RunConfig& cfg) {
  OutputDir out(cfg.out);
  json report = report_skeleton(cfg);
  int code = 0;
  if (cfg.command == "inspect-metric") code = run_inspect_metric(cfg, out.stage(), report);
  else if (cfg.command == "solve-geodesic") code = run_solve_geodesic(cfg, out.stage(), report);
  else if (cfg.command == "sweep-eps") code = run_sweep_eps(cfg, out.stage(), report);
  else if (cfg.command == "verify")
    code = cfg.field.empty() ? run_verify_suites(cfg, report) : run_verify_field(cfg, report);
  else if (cfg.command == "solve-cy") code = run_solve_cy(cfg, out.stage(), report);
  else throw std::invalid_argument("unknown command '" + cfg.command + "'");
  report["exit_code"] = code;
  write_report(out.stage(), report);
  out.commit();
  return code;
}

}  // namespace balab
