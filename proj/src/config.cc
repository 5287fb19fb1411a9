#include "balab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "balab/expr.hpp"

namespace balab {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

/** Key table: which commands read which keys. Grid, scheme, and solver knobs
    are shared; everything else is per-command. */
const std::map<std::string, std::set<std::string>>& key_table() {
  static const std::set<std::string> all = {"inspect-metric", "solve-geodesic", "sweep-eps",
                                            "verify", "solve-cy"};
  static const std::set<std::string> geo = {"solve-geodesic", "sweep-eps", "verify"};
  static const std::map<std::string, std::set<std::string>> table = {
      {"command", all},
      {"n", all},
      {"resolution", all},
      {"axes", all},
      {"period", all},
      {"scheme", all},
      {"seed", all},
      {"tol", all},
      {"out", all},
      {"threads", all},
      {"metric", all},
      {"eps", {"solve-geodesic", "verify"}},
      {"p", {"inspect-metric", "solve-geodesic", "sweep-eps", "verify"}},
      {"nt", geo},
      {"phi0", geo},
      {"phi1", geo},
      {"x_scale", geo},
      {"s_step", {"solve-geodesic", "sweep-eps"}},
      {"max_iters", {"solve-geodesic", "sweep-eps", "solve-cy"}},
      {"sweep_eps", {"sweep-eps"}},
      {"alpha", {"solve-cy"}},
      {"psi", {"solve-cy"}},
      {"rho", {"solve-cy"}},
      {"psi_amplitudes", {"solve-cy"}},
      {"mean_target", {"solve-cy"}},
      {"samples", {"verify"}},
      {"field", {"verify"}},
  };
  return table;
}

int parse_int(const std::string& v, int line, const std::string& key) {
  int out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("TypeMismatch", line, "key '" + key + "' expects an integer, got '" + v + "'");
  return out;
}

std::uint64_t parse_u64(const std::string& v, int line, const std::string& key) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("TypeMismatch", line,
                      "key '" + key + "' expects a nonnegative integer, got '" + v + "'");
  return out;
}

double parse_double(const std::string& v, int line, const std::string& key) {
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("TypeMismatch", line, "key '" + key + "' expects a number, got '" + v + "'");
  }
}

std::vector<std::string> split_commas(const std::string& v) {
  std::vector<std::string> parts;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(trim(item));
  return parts;
}

std::vector<int> parse_int_list(const std::string& v, int line, const std::string& key) {
  std::vector<int> out;
  for (const std::string& s : split_commas(v)) out.push_back(parse_int(s, line, key));
  return out;
}

std::vector<double> parse_double_list(const std::string& v, int line, const std::string& key) {
  std::vector<double> out;
  for (const std::string& s : split_commas(v)) out.push_back(parse_double(s, line, key));
  return out;
}

/** Background specs are a name or name(EXPR); the payload must compile. */
void check_background(const std::string& v, int line, const std::string& key,
                      const std::set<std::string>& bare, const std::set<std::string>& with_expr) {
  const auto open = v.find('(');
  if (open == std::string::npos) {
    if (!bare.count(v))
      throw ConfigError("TypeMismatch", line, "key '" + key + "' does not accept '" + v + "'");
    return;
  }
  const std::string name = trim(v.substr(0, open));
  if (!with_expr.count(name) || v.back() != ')')
    throw ConfigError("TypeMismatch", line, "key '" + key + "' does not accept '" + v + "'");
  const std::string payload = v.substr(open + 1, v.size() - open - 2);
  try {
    Expression::parse(payload);
  } catch (const std::exception& e) {
    throw ConfigError("TypeMismatch", line,
                      "key '" + key + "': bad expression '" + payload + "': " + e.what());
  }
}

void check_expression(const std::string& v, int line, const std::string& key) {
  try {
    Expression::parse(v);
  } catch (const std::exception& e) {
    throw ConfigError("TypeMismatch", line, "key '" + key + "': bad expression '" + v + "': " + e.what());
  }
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // trim to the shortest representation that round-trips
  for (int prec = 1; prec < 17; ++prec) {
    char shorter[32];
    std::snprintf(shorter, sizeof shorter, "%.*g", prec, v);
    if (std::stod(shorter) == v) return shorter;
  }
  return buf;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    if constexpr (std::is_same_v<T, double>)
      s += format_double(v[i]);
    else
      s += std::to_string(v[i]);
  }
  return s;
}

}  // namespace

ConfigError::ConfigError(std::string kind, int line, const std::string& detail)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + detail : detail),
      kind_(std::move(kind)),
      line_(line) {}

RunConfig parse_config(const std::string& text) {
  // first pass: split into (line, key, value), catching duplicates and
  // malformed lines
  std::vector<std::tuple<int, std::string, std::string>> entries;
  std::map<std::string, int> first_seen;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string stripped = trim(raw);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("TypeMismatch", lineno, "expected 'key = value', got '" + stripped + "'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty())
      throw ConfigError("TypeMismatch", lineno, "expected 'key = value', got '" + stripped + "'");
    if (!key_table().count(key)) throw ConfigError("UnknownKey", lineno, "unknown key '" + key + "'");
    const auto [it, fresh] = first_seen.emplace(key, lineno);
    if (!fresh)
      throw ConfigError("DuplicateKey", lineno,
                        "duplicate key '" + key + "' (first set at line " + std::to_string(it->second) + ")");
    entries.emplace_back(lineno, key, value);
  }

  // the command decides which keys are legal, so resolve it first
  RunConfig cfg;
  if (!first_seen.count("command"))
    throw ConfigError("MissingRequired", 0, "missing required key 'command'");
  for (const auto& [line, key, value] : entries) {
    if (key != "command") continue;
    if (!key_table().at("command").count(value))
      throw ConfigError("TypeMismatch", line, "unknown command '" + value + "'");
    cfg.command = value;
  }

  for (const auto& [line, key, value] : entries) {
    if (!key_table().at(key).count(cfg.command))
      throw ConfigError("UnknownKey", line,
                        "key '" + key + "' is not accepted by command '" + cfg.command + "'");
    if (key == "command") continue;
    if (key == "n") cfg.n = parse_int(value, line, key);
    else if (key == "resolution") cfg.resolution = parse_int(value, line, key);
    else if (key == "axes") cfg.axes = parse_int_list(value, line, key);
    else if (key == "period") cfg.period = parse_double(value, line, key);
    else if (key == "scheme") {
      if (value != "spectral" && value != "fd4")
        throw ConfigError("TypeMismatch", line, "key 'scheme' expects spectral or fd4, got '" + value + "'");
      cfg.scheme = value;
    } else if (key == "metric") {
      check_background(value, line, key, {"flat"}, {"kahler_perturbed", "balanced_root"});
      cfg.metric = value;
    } else if (key == "alpha") {
      check_background(value, line, key, {"flat"}, {"conformal"});
      cfg.alpha = value;
    } else if (key == "eps") cfg.eps = parse_double(value, line, key);
    else if (key == "p") cfg.p = parse_int(value, line, key);
    else if (key == "nt") cfg.nt = parse_int(value, line, key);
    else if (key == "phi0") { check_expression(value, line, key); cfg.phi0 = value; }
    else if (key == "phi1") { check_expression(value, line, key); cfg.phi1 = value; }
    else if (key == "x_scale") cfg.x_scale = parse_double(value, line, key);
    else if (key == "s_step") cfg.s_step = parse_double(value, line, key);
    else if (key == "sweep_eps") cfg.sweep_eps = parse_double_list(value, line, key);
    else if (key == "psi") { check_expression(value, line, key); cfg.psi = value; }
    else if (key == "rho") { check_expression(value, line, key); cfg.rho = value; }
    else if (key == "psi_amplitudes") cfg.psi_amplitudes = parse_double_list(value, line, key);
    else if (key == "mean_target") cfg.mean_target = parse_double(value, line, key);
    else if (key == "samples") cfg.samples = parse_int(value, line, key);
    else if (key == "field") cfg.field = value;
    else if (key == "tol") cfg.tol = parse_double(value, line, key);
    else if (key == "max_iters") cfg.max_iters = parse_int(value, line, key);
    else if (key == "seed") cfg.seed = parse_u64(value, line, key);
    else if (key == "out") cfg.out = value;
    else if (key == "threads") cfg.threads = parse_int(value, line, key);
  }

  // basic range validation, reported against the key's line
  const auto line_of = [&](const std::string& key) {
    const auto it = first_seen.find(key);
    return it == first_seen.end() ? 0 : it->second;
  };
  if (cfg.n < 2 || cfg.n > 3)
    throw ConfigError("TypeMismatch", line_of("n"), "key 'n' must be 2 or 3");
  if (cfg.resolution < 4)
    throw ConfigError("TypeMismatch", line_of("resolution"), "key 'resolution' must be at least 4");
  if (cfg.axes.empty() || cfg.axes.size() > std::size_t(2 * cfg.n))
    throw ConfigError("TypeMismatch", line_of("axes"), "key 'axes' must list 1..2n coordinates");
  for (int a : cfg.axes)
    if (a < 0 || a >= 2 * cfg.n)
      throw ConfigError("TypeMismatch", line_of("axes"), "key 'axes' entries must lie in 0..2n-1");
  if (!std::is_sorted(cfg.axes.begin(), cfg.axes.end()) ||
      std::adjacent_find(cfg.axes.begin(), cfg.axes.end()) != cfg.axes.end())
    throw ConfigError("TypeMismatch", line_of("axes"), "key 'axes' must be strictly increasing");
  if (!(cfg.period > 0))
    throw ConfigError("TypeMismatch", line_of("period"), "key 'period' must be positive");
  if (cfg.p < 2 || cfg.p > cfg.n)
    throw ConfigError("TypeMismatch", line_of("p"), "key 'p' must lie in 2..n");
  if (cfg.nt < 4)
    throw ConfigError("TypeMismatch", line_of("nt"), "key 'nt' must be at least 4");
  if (!(cfg.eps > 0))
    throw ConfigError("TypeMismatch", line_of("eps"), "key 'eps' must be positive");
  if (!(cfg.tol > 0))
    throw ConfigError("TypeMismatch", line_of("tol"), "key 'tol' must be positive");
  if (cfg.max_iters < 1)
    throw ConfigError("TypeMismatch", line_of("max_iters"), "key 'max_iters' must be positive");
  if (!(cfg.s_step > 0) || cfg.s_step > 1)
    throw ConfigError("TypeMismatch", line_of("s_step"), "key 's_step' must lie in (0, 1]");
  if (cfg.samples < 1)
    throw ConfigError("TypeMismatch", line_of("samples"), "key 'samples' must be positive");
  if (cfg.threads < 1)
    throw ConfigError("TypeMismatch", line_of("threads"), "key 'threads' must be positive");
  if (cfg.sweep_eps.empty() && cfg.command == "sweep-eps")
    throw ConfigError("TypeMismatch", line_of("sweep_eps"), "key 'sweep_eps' must be nonempty");
  for (double e : cfg.sweep_eps)
    if (!(e > 0))
      throw ConfigError("TypeMismatch", line_of("sweep_eps"), "key 'sweep_eps' entries must be positive");
  if (cfg.command == "verify" && cfg.field.empty() && cfg.samples < 10)
    throw ConfigError("TypeMismatch", line_of("samples"), "key 'samples' must be at least 10");
  return cfg;
}

std::string emit_config(const RunConfig& cfg) {
  const std::set<std::string>& allowed = [&] {
    std::set<std::string> keys;
    for (const auto& [key, commands] : key_table())
      if (commands.count(cfg.command)) keys.insert(key);
    return keys;
  }();
  std::string s;
  const auto put = [&](const std::string& key, const std::string& value) {
    if (allowed.count(key)) s += key + " = " + value + "\n";
  };
  put("command", cfg.command);
  put("n", std::to_string(cfg.n));
  put("resolution", std::to_string(cfg.resolution));
  put("axes", join(cfg.axes));
  put("period", format_double(cfg.period));
  put("scheme", cfg.scheme);
  put("metric", cfg.metric);
  put("alpha", cfg.alpha);
  put("eps", format_double(cfg.eps));
  put("p", std::to_string(cfg.p));
  put("nt", std::to_string(cfg.nt));
  put("phi0", cfg.phi0);
  put("phi1", cfg.phi1);
  put("x_scale", format_double(cfg.x_scale));
  put("s_step", format_double(cfg.s_step));
  put("sweep_eps", join(cfg.sweep_eps));
  put("psi", cfg.psi);
  if (!cfg.rho.empty()) put("rho", cfg.rho);
  if (!cfg.psi_amplitudes.empty()) put("psi_amplitudes", join(cfg.psi_amplitudes));
  put("mean_target", format_double(cfg.mean_target));
  put("samples", std::to_string(cfg.samples));
  if (!cfg.field.empty()) put("field", cfg.field);
  put("tol", format_double(cfg.tol));
  put("max_iters", std::to_string(cfg.max_iters));
  put("seed", std::to_string(cfg.seed));
  return s;
}

}  // namespace balab
