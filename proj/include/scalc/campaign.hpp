#pragma once

// Campaign driver: turns a RunConfig into a Report by running the selected
// pipeline (operator-check, calculus-check, solve, probe, verify-all).

#include "scalc/checks.hpp"
#include "scalc/io.hpp"

namespace scalc {

struct LabelledOperator {
  std::string label;
  CoefficientField coeffs;
  bool builtin = true;
  Family family = Family::constant;
};

inline std::vector<LabelledOperator> campaign_operators(const RunConfig& c) {
  std::vector<LabelledOperator> out;
  if (!c.coefficient_file.empty()) {
    out.push_back({"file", read_coefficients(c.coefficient_file), false, Family::constant});
    return out;
  }
  const GridSpec g = build_grid(c.n, c.m, c.N, {c.length, c.n == 2 ? c.length : 0.0});
  for (const auto& f : c.families) {
    const Family fam = family_from_string(f);
    out.push_back({to_string(fam), make_coefficients(g, fam), true, fam});
  }
  return out;
}

inline ProbeConfig probe_config(const RunConfig& c) {
  ProbeConfig pc = default_probe_config();
  if (!c.p_grid.empty()) pc.p_grid = c.p_grid;
  pc.seed = c.seed;
  pc.band = c.band;
  return pc;
}

inline checks::Params check_params(const RunConfig& c) {
  checks::Params prm;
  prm.samples = c.samples;
  prm.seed = c.seed;
  prm.calc.tol = c.tol;
  return prm;
}

inline NamedCurve named(std::string name, std::string family, std::string xl, std::string yl, const Curve& pts, bool logx = true,
                        bool logy = true) {
  NamedCurve nc;
  nc.name = std::move(name);
  nc.family = std::move(family);
  nc.xlabel = std::move(xl);
  nc.ylabel = std::move(yl);
  nc.points = pts;
  nc.logx = logx;
  nc.logy = logy;
  return nc;
}

inline void add_probe_curve(Report& r, const BoundednessCurve& c, const std::string& fam) {
  Curve pts;
  for (std::size_t i = 0; i < c.p.size(); ++i) pts.emplace_back(c.p[i], c.B[i]);
  r.curves.push_back(named("B_" + to_string(c.kind), fam, "p", "B(p)", pts));
}

namespace detail {

inline void operator_checks(Report& r, const LabelledOperator& op, const checks::Params& prm) {
  const DivFormOperator L(op.coeffs);
  r.add(checks::block_identity(L, op.label, prm));
  const auto& cf = L.coeffs();
  auto sect = estimate_sector(L, {0.5 * (L.omega_bound() + pi)}, 8);
  r.add({"sectoriality",
         op.label,
         sect.omega_est <= L.omega_bound() + 1e-9,
         {{"omega_est", sect.omega_est},
          {"omega_bound", L.omega_bound()},
          {"lambda_a", cf.lambda_a},
          {"lambda_d", cf.lambda_d},
          {"resolvent_bound", sect.resolvent_bounds.front().second}},
         L.omega_bound(),
         "spectral angle within the a-weighted numerical range bound"});
}

inline void calculus_checks(Report& r, const LabelledOperator& op, const checks::Params& prm) {
  const DivFormOperator L(op.coeffs);
  if (DiracOperator(L).squared().rows() <= dense_limit) r.add(checks::oracle_equivalence(L, op.label, prm));
  r.add(checks::resolvent_identity(L, op.label, prm));
  r.add(checks::semigroup_property(L, op.label, prm));
  r.add(checks::link_identity(L, op.label, prm));
  r.add(checks::intertwining(L, op.label, prm));
}

inline Vec load_data(const RunConfig& c, const GridSpec& g, Eigen::Index ncomp) {
  FieldFile f = read_field(c.data_file);
  if (f.grid.n != g.n || f.grid.N != g.N || f.grid.m != g.m || f.ncomp != ncomp || !f.t.empty())
    throw UsageError("data file '" + c.data_file + "' does not match the grid (" + describe(g) + ")");
  return f.values.col(0);
}

inline void solve_pipeline(Report& r, const RunConfig& c, const LabelledOperator& op) {
  const DivFormOperator L(op.coeffs);
  const GridSpec& g = L.grid();
  SolveOptions so;
  so.calc.tol = c.tol;
  Rng rng(c.seed);
  Vec data;
  if (!c.data_file.empty())
    data = load_data(c, g, g.m);
  else if (c.problem == "holder")
    data = cusp(g, c.alpha);
  else
    data = random_bandlimited(g, g.m, c.band, rng);
  BvpSolution sol;
  if (c.problem == "dirichlet")
    sol = solve_dirichlet(L, c.p <= 1.0 ? Vec(L.mul_a_inv(data)) : data, c.p, so);
  else if (c.problem == "regularity")
    sol = solve_regularity(L, data, c.p, so);
  else if (c.problem == "neumann")
    sol = solve_neumann(L, data, c.p, so);
  else
    sol = solve_dirichlet_holder(L, data, c.alpha, true, so);
  std::map<std::string, double> m(sol.diagnostics.begin(), sol.diagnostics.end());
  m["residual_second"] = sol.residual_second;
  m["residual_first"] = sol.residual_first;
  m["p"] = c.p;
  const double tol = 1e-5;
  r.add({"solve_" + c.problem, op.label, sol.residual_second <= tol && sol.residual_first <= tol, m, tol,
         "pass criterion: PDE residuals on interior nodes"});
  for (const auto& [name, pts] : sol.curves) r.curves.push_back(named(name, op.label, "t", name, pts));
  const std::filesystem::path dir(c.output);
  std::filesystem::create_directories(dir);
  emit_field(sol.u, dir / ("u_" + op.label + ".scalc"));
  emit_field(sol.conormal_gradient, dir / ("conormal_gradient_" + op.label + ".scalc"));
}

inline void probe_pipeline(Report& r, const RunConfig& c, const LabelledOperator& op, const checks::Params& prm) {
  const DivFormOperator L(op.coeffs);
  const ProbeConfig pc = probe_config(c);
  if (c.problem == "offdiag") {
    r.add(checks::offdiag(L, op.label));
    const double sep = L.grid().period() / 8.0;
    for (auto fam : {OffdiagFamily::resolvent, OffdiagFamily::gradient_resolvent}) {
      auto fit = offdiag_standard(L, fam, sep);
      r.curves.push_back(named("offdiag_" + to_string(fam), op.label, "|z|", "norm", fit.curve));
    }
  } else if (c.problem == "critical") {
    CriticalEstimate ce;
    r.add(checks::critical(L, op.label, pc, prm, op.builtin && (op.family == Family::constant || L.grid().n == 1), &ce));
    for (const auto* cv : {&ce.resolvent, &ce.gradient, &ce.riesz, &ce.identification}) add_probe_curve(r, *cv, op.label);
  } else if (c.problem == "riesz") {
    auto cv = probe_riesz(L, pc);
    r.add({"riesz_probe", op.label, cv.contains(2.0),
           {{"lower", cv.lower}, {"upper", cv.upper}, {"rerun", cv.rerun ? 1.0 : 0.0}}, pc.blowup,
           "detected interval must contain 2; lower bound over a finite test family"});
    add_probe_curve(r, cv, op.label);
  } else if (c.problem == "kato") {
    r.add(checks::kato(L, op.label, prm, op.builtin && op.family == Family::constant));
  } else {
    const IdentMode mode = c.s == 0.0 ? IdentMode::L_s0 : IdentMode::L_s1;
    auto id = identification_ratio(L, mode, pc.p_grid, pc, psi::default_rational(), prm.calc);
    Curve lo, hi;
    bool finite = true;
    for (std::size_t i = 0; i < id.p.size(); ++i) {
      lo.emplace_back(id.p[i], id.lo[i]);
      hi.emplace_back(id.p[i], id.hi[i]);
      finite = finite && std::isfinite(id.hi[i]) && id.lo[i] > 0.0;
    }
    r.add({"identification", op.label, finite, {{"s", c.s}}, 0.0, "ratio adapted / classical is finite and positive"});
    r.curves.push_back(named("identification_lo", op.label, "p", "ratio", lo));
    r.curves.push_back(named("identification_hi", op.label, "p", "ratio", hi));
  }
}

inline void verify_all(Report& r, const RunConfig& c, const LabelledOperator& op, const checks::Params& prm) {
  const DivFormOperator L(op.coeffs);
  const bool t1 = op.builtin && op.family == Family::constant;
  operator_checks(r, op, prm);
  calculus_checks(r, op, prm);
  r.add(checks::kato(L, op.label, prm, t1));
  r.add(checks::identification_p2(L, op.label, prm));
  r.add(checks::fubini(L.grid(), op.label, prm));
  r.add(checks::bvp_residuals(L, op.label, prm));
  if (op.builtin) r.add(checks::compatibility(op.coeffs, op.label, prm, t1));
  r.add(checks::comparability(L, op.label, prm));
  r.add(checks::offdiag(L, op.label));
  CriticalEstimate ce;
  r.add(checks::critical(L, op.label, probe_config(c), prm, op.builtin && (t1 || L.grid().n == 1), &ce));
  add_probe_curve(r, ce.resolvent, op.label);
}

}  // namespace detail

/// Runs the configured pipeline; errors become a failure section and the
/// matching exit code. The report is written even on failure.
inline Report run_campaign(const RunConfig& c, bool write = true) {
  Report r;
  r.config = c;
  if (c.workers > 0 && !std::getenv("SCALC_WORKERS")) setenv("SCALC_WORKERS", std::to_string(c.workers).c_str(), 1);
  try {
    validate(c);
    auto ops = campaign_operators(c);
    r.grid = describe(ops.front().coeffs.grid);
    const checks::Params prm = check_params(c);
    for (const auto& op : ops) {
      if (c.command == "operator-check")
        detail::operator_checks(r, op, prm);
      else if (c.command == "calculus-check")
        detail::calculus_checks(r, op, prm);
      else if (c.command == "solve")
        detail::solve_pipeline(r, c, op);
      else if (c.command == "probe")
        detail::probe_pipeline(r, c, op, prm);
      else
        detail::verify_all(r, c, op, prm);
    }
  } catch (const UsageError& e) {
    r.failure = FailureKind::usage;
    r.failure_message = e.what();
  } catch (const ContractError& e) {
    r.failure = FailureKind::usage;
    r.failure_message = e.what();
  } catch (const IoError& e) {
    r.failure = FailureKind::usage;
    r.failure_message = e.what();
  } catch (const std::filesystem::filesystem_error& e) {
    r.failure = FailureKind::usage;
    r.failure_message = e.what();
  } catch (const NumericalError& e) {
    r.failure = FailureKind::numerical;
    r.failure_message = e.what();
  }
  if (write) {
    try {
      write_report(r);
    } catch (const UsageError& e) {
      if (r.failure == FailureKind::none) {
        r.failure = FailureKind::usage;
        r.failure_message = e.what();
      }
    } catch (const std::filesystem::filesystem_error& e) {
      if (r.failure == FailureKind::none) {
        r.failure = FailureKind::usage;
        r.failure_message = e.what();
      }
    }
  }
  return r;
}

}  // namespace scalc
