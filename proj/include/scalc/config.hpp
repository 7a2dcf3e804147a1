#pragma once

// RunConfig: everything a campaign needs, serialisable to JSON and back.

#include "scalc/core.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <set>

namespace scalc {

using json = nlohmann::json;

struct RunConfig {
  std::string command = "verify-all";  // operator-check | calculus-check | solve | probe | verify-all
  std::string problem;                 // solve: dirichlet|regularity|neumann|holder; probe: offdiag|critical|riesz|kato|identify
  int n = 1;
  int m = 1;
  int N = 32;
  double length = 2.0 * pi;
  std::vector<std::string> families{"T1", "T2", "T3"};
  std::string coefficient_file;  // overrides families when set
  std::string data_file;         // boundary data; random band-limited data otherwise
  int band = 8;
  double p = 2.0;
  double alpha = 0.5;
  double s = 0.0;
  std::vector<double> p_grid;  // empty: the default probe grid
  double tol = 1e-10;
  int samples = 20;
  std::uint64_t seed = 1;
  std::string output = "scalc-out";
  int workers = 0;  // 0: SCALC_WORKERS or one worker
  bool svg = true;

  bool operator==(const RunConfig&) const = default;
};

inline const std::set<std::string>& known_commands() {
  static const std::set<std::string> s{"operator-check", "calculus-check", "solve", "probe", "verify-all"};
  return s;
}

inline const std::set<std::string>& problems_for(const std::string& command) {
  static const std::set<std::string> solve{"dirichlet", "regularity", "neumann", "holder"};
  static const std::set<std::string> probe{"offdiag", "critical", "riesz", "kato", "identify"};
  static const std::set<std::string> none{};
  if (command == "solve") return solve;
  if (command == "probe") return probe;
  return none;
}

/// Exponents at or below 1/2 are outside every range the solvers and probes
/// support: the lower Sobolev exponent 1_* = n/(n+1) of p = 1 is the floor.
inline void check_exponent(double p, const std::string& what) {
  if (!(p > 0.5))
    throw UsageError(what + "=" + json(p).dump() +
                     " rejected: exponents must exceed 1/2, the 1_* floor (1_* = n/(n+1) for p = 1)");
}

inline void validate(const RunConfig& c) {
  if (!known_commands().count(c.command)) throw UsageError("unknown command '" + c.command + "'");
  const auto& probs = problems_for(c.command);
  if (probs.empty() && !c.problem.empty()) throw UsageError("command '" + c.command + "' takes no problem");
  if (!probs.empty() && !probs.count(c.problem))
    throw UsageError("command '" + c.command + "' needs a problem, got '" + c.problem + "'");
  if (c.n != 1 && c.n != 2) throw UsageError("n must be 1 or 2");
  if (c.m < 1) throw UsageError("m must be >= 1");
  if (c.N < 8 || c.N % 2 != 0) throw UsageError("N must be even and at least 8");
  if (!(c.length > 0.0)) throw UsageError("length must be positive");
  if (c.families.empty() && c.coefficient_file.empty()) throw UsageError("no coefficient family selected");
  for (const auto& f : c.families) {
    static const std::set<std::string> ok{"T1", "T2", "T3", "constant", "smooth-real", "complex-rotation", "checkerboard"};
    if (!ok.count(f)) throw UsageError("unknown coefficient family '" + f + "'");
  }
  if (c.band < 1) throw UsageError("band must be >= 1");
  check_exponent(c.p, "p");
  for (double q : c.p_grid) check_exponent(q, "p_grid entry");
  for (std::size_t i = 1; i < c.p_grid.size(); ++i)
    if (!(c.p_grid[i] > c.p_grid[i - 1])) throw UsageError("p_grid must be strictly increasing");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw UsageError("alpha must lie in (0, 1)");
  if (!(c.s == 0.0 || c.s == 1.0)) throw UsageError("s must be 0 or 1");
  if (!(c.tol > 0.0 && c.tol <= 1e-2)) throw UsageError("tol must lie in (0, 1e-2]");
  if (c.samples < 1) throw UsageError("samples must be >= 1");
  if (c.workers < 0) throw UsageError("workers must be >= 0");
  if (c.output.empty()) throw UsageError("output directory must be set");
}

inline json to_json(const RunConfig& c) {
  return json{{"command", c.command},
              {"problem", c.problem},
              {"grid", {{"n", c.n}, {"m", c.m}, {"N", c.N}, {"length", c.length}}},
              {"families", c.families},
              {"coefficient_file", c.coefficient_file},
              {"data_file", c.data_file},
              {"band", c.band},
              {"p", c.p},
              {"alpha", c.alpha},
              {"s", c.s},
              {"p_grid", c.p_grid},
              {"tol", c.tol},
              {"samples", c.samples},
              {"seed", c.seed},
              {"output", c.output},
              {"workers", c.workers},
              {"svg", c.svg}};
}

namespace detail {

template <class T>
void take(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw UsageError(std::string("config key '") + key + "' has the wrong type");
  }
}

inline void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw UsageError(where + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw UsageError("unknown config key '" + where + it.key() + "'");
}

}  // namespace detail

/// Reads a config object; unknown keys and ill-typed values are rejected and
/// missing keys take their defaults.
inline RunConfig config_from_json(const json& j) {
  detail::reject_unknown(j,
                         {"command", "problem", "grid", "families", "coefficient_file", "data_file", "band", "p", "alpha", "s",
                          "p_grid", "tol", "samples", "seed", "output", "workers", "svg"},
                         "");
  RunConfig c;
  detail::take(j, "command", c.command);
  detail::take(j, "problem", c.problem);
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    detail::reject_unknown(g, {"n", "m", "N", "length"}, "grid.");
    detail::take(g, "n", c.n);
    detail::take(g, "m", c.m);
    detail::take(g, "N", c.N);
    detail::take(g, "length", c.length);
  }
  detail::take(j, "families", c.families);
  detail::take(j, "coefficient_file", c.coefficient_file);
  detail::take(j, "data_file", c.data_file);
  detail::take(j, "band", c.band);
  detail::take(j, "p", c.p);
  detail::take(j, "alpha", c.alpha);
  detail::take(j, "s", c.s);
  detail::take(j, "p_grid", c.p_grid);
  detail::take(j, "tol", c.tol);
  detail::take(j, "samples", c.samples);
  detail::take(j, "seed", c.seed);
  detail::take(j, "output", c.output);
  detail::take(j, "workers", c.workers);
  detail::take(j, "svg", c.svg);
  validate(c);
  return c;
}

inline RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("malformed config: ") + e.what());
  }
  return config_from_json(j);
}

inline RunConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw UsageError("config file '" + path.string() + "' not found");
  std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return parse_config_text(text);
}

inline std::string emit_config(const RunConfig& c) { return to_json(c).dump(2); }

}  // namespace scalc
