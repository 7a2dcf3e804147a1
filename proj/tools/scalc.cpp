// scalc command-line entry point.
//
//   scalc operator-check | calculus-check | verify-all [options]
//   scalc solve dirichlet|regularity|neumann|holder [options]
//   scalc probe offdiag|critical|riesz|kato|identify [options]
//
// Exit codes: 0 pass, 1 check failure, 2 usage/config error, 3 numerical failure.

#include "scalc/scalc.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <optional>

namespace {

struct Overrides {
  std::string config;
  std::optional<int> n, m, N, band, samples, workers;
  std::optional<double> length, p, alpha, s, tol;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> families;
  std::vector<double> p_grid;
  std::string coefficients, data, out;
  bool no_svg = false;
  bool print_config = false;
};

void add_options(CLI::App* app, Overrides& o) {
  app->add_option("-c,--config", o.config, "JSON config file (flags override it)");
  app->add_option("--n", o.n, "spatial dimension (1 or 2)");
  app->add_option("--m", o.m, "system size");
  app->add_option("--N", o.N, "grid points per axis");
  app->add_option("--length", o.length, "torus side length");
  app->add_option("--family", o.families, "coefficient families (T1 T2 T3 or names)");
  app->add_option("--coefficients", o.coefficients, "SCALC1 coefficient file");
  app->add_option("--data", o.data, "SCALC1 boundary data file");
  app->add_option("--band", o.band, "band limit of random data");
  app->add_option("--p", o.p, "exponent");
  app->add_option("--alpha", o.alpha, "Hoelder exponent");
  app->add_option("--s", o.s, "smoothness (0 or 1) for identify");
  app->add_option("--p-grid", o.p_grid, "probe exponents");
  app->add_option("--tol", o.tol, "quadrature tolerance");
  app->add_option("--samples", o.samples, "random inputs per check");
  app->add_option("--seed", o.seed, "random seed");
  app->add_option("-o,--out", o.out, "output directory");
  app->add_option("--workers", o.workers, "worker threads (SCALC_WORKERS takes precedence)");
  app->add_flag("--no-svg", o.no_svg, "skip SVG plots");
  app->add_flag("--print-config", o.print_config, "print the resolved config and exit");
}

scalc::RunConfig resolve(const Overrides& o, const std::string& command, const std::string& problem) {
  scalc::RunConfig c = o.config.empty() ? scalc::RunConfig{} : scalc::parse_config_file(o.config);
  c.command = command;
  if (!problem.empty()) c.problem = problem;
  if (scalc::problems_for(command).empty()) c.problem.clear();
  if (o.n) c.n = *o.n;
  if (o.m) c.m = *o.m;
  if (o.N) c.N = *o.N;
  if (o.length) c.length = *o.length;
  if (!o.families.empty()) c.families = o.families;
  if (!o.coefficients.empty()) c.coefficient_file = o.coefficients;
  if (!o.data.empty()) c.data_file = o.data;
  if (o.band) c.band = *o.band;
  if (o.p) c.p = *o.p;
  if (o.alpha) c.alpha = *o.alpha;
  if (o.s) c.s = *o.s;
  if (!o.p_grid.empty()) c.p_grid = o.p_grid;
  if (o.tol) c.tol = *o.tol;
  if (o.samples) c.samples = *o.samples;
  if (o.seed) c.seed = *o.seed;
  if (!o.out.empty()) c.output = o.out;
  if (o.workers) c.workers = *o.workers;
  if (o.no_svg) c.svg = false;
  scalc::validate(c);
  return c;
}

void summarize(const scalc::Report& r) {
  for (const auto& c : r.checks) {
    std::cout << (c.pass ? "PASS" : "FAIL") << "  " << c.name << " [" << c.family << "]";
    for (const auto& [k, v] : c.measured) std::cout << " " << k << "=" << v;
    std::cout << "\n";
  }
  if (r.failure == scalc::FailureKind::usage || r.failure == scalc::FailureKind::numerical)
    std::cerr << "error (" << scalc::to_string(r.failure) << "): " << r.failure_message << "\n";
  std::cout << "report: " << (std::filesystem::path(r.config.output) / "report.json").string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scalc: functional calculus and boundary value laboratory for block elliptic systems"};
  app.set_version_flag("--version", SCALC_VERSION);
  app.require_subcommand(1);
  Overrides o;
  std::string problem;

  auto* op = app.add_subcommand("operator-check", "operator assembly and sectoriality checks");
  auto* calc = app.add_subcommand("calculus-check", "functional calculus against the dense oracle and identities");
  auto* solve = app.add_subcommand("solve", "boundary value problem solvers");
  auto* probe = app.add_subcommand("probe", "measurement campaigns");
  auto* verify = app.add_subcommand("verify-all", "every self-check on the configured grid");
  for (auto* sc : {op, calc, solve, probe, verify}) add_options(sc, o);
  solve->add_option("problem", problem, "dirichlet | regularity | neumann | holder")
      ->required()
      ->check(CLI::IsMember({"dirichlet", "regularity", "neumann", "holder"}));
  probe->add_option("problem", problem, "offdiag | critical | riesz | kato | identify")
      ->required()
      ->check(CLI::IsMember({"offdiag", "critical", "riesz", "kato", "identify"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  std::string command;
  for (auto* sc : {op, calc, solve, probe, verify})
    if (sc->parsed()) command = sc->get_name();

  scalc::RunConfig cfg;
  try {
    cfg = resolve(o, command, problem);
  } catch (const scalc::UsageError& e) {
    std::cerr << "error (usage): " << e.what() << "\n";
    return 2;
  }
  if (o.print_config) {
    std::cout << scalc::emit_config(cfg) << "\n";
    return 0;
  }
  scalc::Report r = scalc::run_campaign(cfg);
  summarize(r);
  return r.exit_code();
}
