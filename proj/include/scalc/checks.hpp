#pragma once

// Self-checks shared by the CLI and the acceptance suite. Each returns a Check
// with the measured quantities and the tolerance it was judged against.

#include "scalc/probes.hpp"
#include "scalc/report.hpp"

namespace scalc::checks {

struct Params {
  int samples = 20;
  std::uint64_t seed = 1;
  CalculusOptions calc;
};

/// Complex Gaussian noise: exercises the whole spectrum, not just low modes.
inline Mat random_columns(Eigen::Index rows, int cols, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> nd;
  Mat F(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) F(i, j) = cplx(nd(rng), nd(rng));
  return F;
}

inline double rel_err(const Mat& a, const Mat& b) {
  const double den = b.norm();
  return den > 0.0 ? (a - b).norm() / den : (a - b).norm();
}

/// Largest per-column relative error.
inline double worst_col(const Mat& a, const Mat& b) {
  double w = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) w = std::max(w, rel_err(a.col(j), b.col(j)));
  return w;
}

// ---------------------------------------------------------------- operators and calculus

/// (DB)^2 against the independently assembled block diagonal.
inline Check block_identity(const DivFormOperator& L, const std::string& fam, const Params& prm, double tol = 1e-12) {
  DiracOperator db(L);
  SpMat blocks = dirac_square_blocks(L);
  Mat H = random_columns(L.grid().dirac_dim(), prm.samples, prm.seed);
  const double err = worst_col(db.squared() * H, blocks * H);
  return {"dirac_square_blocks", fam, err <= tol, {{"rel_error", err}}, tol, ""};
}

/// apply_psi, sqrt_apply, poisson_semigroup and dirac_semigroup against the
/// dense eigendecomposition oracle.
inline Check oracle_equivalence(const DivFormOperator& L, const std::string& fam, const Params& prm, double tol = 1e-8) {
  const GridSpec& g = L.grid();
  Mat F = random_columns(g.scalar_dim(), prm.samples, prm.seed);
  auto oL = oracle_eigen(L);
  const double t = 0.5;
  const double e_psi = worst_col(apply_psi(L.view(), psi::default_rational(), F, prm.calc), oL.apply(psi::default_rational(), F));
  AuxiliaryFunction sq{"z^1/2", [](cplx z) { return std::sqrt(z); }, 0.5, -0.5, pi, 0.0};
  const double e_sqrt = worst_col(sqrt_apply(L, F, prm.calc), oL.apply(sq, F));
  Mat P(g.scalar_dim(), F.cols());
  for (Eigen::Index j = 0; j < F.cols(); ++j) P.col(j) = poisson_semigroup(L, t, Vec(F.col(j)), prm.calc);
  const double e_poisson = worst_col(P, oL.apply(psi::poisson(t), F));
  DiracOperator db(L);
  Mat H = random_columns(g.dirac_dim(), prm.samples, prm.seed + 1);
  for (Eigen::Index j = 0; j < H.cols(); ++j) H.col(j) = db.range_projector(H.col(j));
  auto oD = oracle_eigen(db);
  const double e_dirac = worst_col(dirac_semigroup(db, t, H, prm.calc), oD.apply(psi::poisson(t), H));
  const double worst = std::max({e_psi, e_sqrt, e_poisson, e_dirac});
  return {"calculus_oracle",
          fam,
          worst <= tol,
          {{"psi", e_psi},
           {"sqrt", e_sqrt},
           {"poisson", e_poisson},
           {"dirac", e_dirac},
           {"oracle_condition_L", oL.condition},
           {"oracle_condition_DB2", oD.condition}},
          tol,
          "max relative column error over random inputs"};
}

/// (z1 - L)^{-1} - (z2 - L)^{-1} = (z2 - z1)(z1 - L)^{-1}(z2 - L)^{-1}.
inline Check resolvent_identity(const DivFormOperator& L, const std::string& fam, const Params& prm, double tol = 1e-9) {
  auto v = L.view();
  Mat F = random_columns(L.grid().scalar_dim(), prm.samples, prm.seed);
  const cplx z1 = std::polar(v.lambda_lo * 3.0, 0.5 * (L.omega_bound() + pi)), z2 = std::polar(v.lambda_hi * 0.1, -0.5 * (L.omega_bound() + pi));
  Mat R1 = resolvent(v, z1, F, prm.calc);
  Mat R2 = resolvent(v, z2, F, prm.calc);
  Mat R12 = resolvent(v, z1, R2, prm.calc);
  const double err = worst_col(R1 - R2, (z2 - z1) * R12);
  return {"resolvent_identity", fam, err <= tol, {{"rel_error", err}}, tol, ""};
}

/// e^{-s L^{1/2}} e^{-t L^{1/2}} f = e^{-(s+t) L^{1/2}} f, relative to ||f||.
inline Check semigroup_property(const DivFormOperator& L, const std::string& fam, const Params& prm, double tol = 1e-7) {
  Mat F = random_columns(L.grid().scalar_dim(), prm.samples, prm.seed);
  const double s = 0.3, t = 0.7;
  auto v = L.view();
  auto parts = apply_family(v, {psi::poisson(t), psi::poisson(s + t)}, F, prm.calc);
  Mat lhs = apply_psi(v, psi::poisson(s), parts[0], prm.calc);
  double err = 0.0;
  for (Eigen::Index j = 0; j < F.cols(); ++j) err = std::max(err, (lhs.col(j) - parts[1].col(j)).norm() / F.col(j).norm());
  return {"semigroup_property", fam, err <= tol, {{"rel_error", err}}, tol, "relative to ||f||"};
}

/// DB e^{-t[DB]} [a f, 0] = [0, -grad e^{-t L^{1/2}} f], both sides through different operators.
inline Check link_identity(const DivFormOperator& L, const std::string& fam, const Params& prm, double tol = 1e-7) {
  const GridSpec& g = L.grid();
  DiracOperator db(L);
  Mat F = L.to_range(random_columns(g.scalar_dim(), prm.samples, prm.seed));
  const double t = 0.4;
  Mat H(g.dirac_dim(), F.cols());
  for (Eigen::Index j = 0; j < F.cols(); ++j) H.col(j) = db.join(L.mul_a(F.col(j)), Vec::Zero(g.grad_dim()));
  Mat lhs = db.DB() * dirac_semigroup(db, t, H, prm.calc);
  Mat U = apply_psi(L.view(), psi::poisson(t), F, prm.calc);
  Mat rhs(g.dirac_dim(), F.cols());
  for (Eigen::Index j = 0; j < F.cols(); ++j) rhs.col(j) = db.join(Vec::Zero(g.scalar_dim()), -(L.grad() * U.col(j)));
  const double err = worst_col(lhs, rhs);
  return {"link_identity", fam, err <= tol, {{"rel_error", err}}, tol, ""};
}

/// e^{-t[DB]} [-a L^{1/2} f, grad f] = [a d_t u, grad u] for the Poisson extension u.
inline Check intertwining(const DivFormOperator& L, const std::string& fam, const Params& prm, double tol = 1e-6) {
  const GridSpec& g = L.grid();
  DiracOperator db(L);
  Mat F = L.to_range(random_columns(g.scalar_dim(), prm.samples, prm.seed));
  const double t = 0.4;
  Mat S = sqrt_apply(L, F, prm.calc);
  Mat H(g.dirac_dim(), F.cols());
  for (Eigen::Index j = 0; j < F.cols(); ++j) H.col(j) = db.join(-L.mul_a(S.col(j)), L.grad() * F.col(j));
  Mat lhs = dirac_semigroup(db, t, H, prm.calc);
  PoissonExtension P(L, F, 0.5 * t, 2.0 * t, prm.calc);
  Mat U = P.u(t), Ut = P.dt(t);
  Mat rhs(g.dirac_dim(), F.cols());
  for (Eigen::Index j = 0; j < F.cols(); ++j) rhs.col(j) = db.join(L.mul_a(Ut.col(j)), L.grad() * U.col(j));
  const double err = worst_col(lhs, rhs);
  return {"intertwining", fam, err <= tol, {{"rel_error", err}}, tol, ""};
}

/// T1: ratio identically one. Other families: a finite, non-degenerate interval.
inline Check kato(const DivFormOperator& L, const std::string& fam, const Params& prm, bool expect_one, double tol = 1e-9) {
  auto k = kato_ratio(L, std::max(prm.samples, 100), prm.seed, 8, prm.calc);
  const bool pass = expect_one ? std::max(std::abs(k.lo - 1.0), std::abs(k.hi - 1.0)) <= tol : !k.pathological;
  return {"kato_ratio", fam, pass, {{"lo", k.lo}, {"hi", k.hi}, {"samples", k.samples}}, expect_one ? tol : 0.0,
          expect_one ? "|ratio - 1| <= tolerance" : "finite interval"};
}

// ---------------------------------------------------------------- analysis

/// psi(t_j^2 L) F for every column of F from one bank.
inline std::vector<HalfSpaceField> q_extension_batch(const DivFormOperator& L, const AuxiliaryFunction& f_psi, const Mat& F,
                                                     const TGrid& tg, const CalculusOptions& opt) {
  const GridSpec& g = L.grid();
  std::vector<AuxiliaryFunction> probes;
  const std::size_t nt = tg.size();
  for (std::size_t j : {std::size_t{0}, nt / 2, nt - 1}) probes.push_back(psi::scaled(f_psi, tg.t[j] * tg.t[j]));
  auto bank = build_bank(L.view(), probes, F, opt);
  std::vector<HalfSpaceField> out(static_cast<std::size_t>(F.cols()), make_halfspace(g, g.m, tg));
  for (std::size_t j = 0; j < nt; ++j) {
    Mat V = bank.apply(psi::scaled(f_psi, tg.t[j] * tg.t[j]));
    for (Eigen::Index k = 0; k < F.cols(); ++k) out[static_cast<std::size_t>(k)].values.col(static_cast<Eigen::Index>(j)) = V.col(k);
  }
  return out;
}

/// adapted_hardy_norm(s=0, p=2) / ||f||_2 over random f for the two default
/// auxiliary functions, and the ratio between them.
inline Check identification_p2(const DivFormOperator& L, const std::string& fam, const Params& prm, double C = 20.0,
                               double psi_band = 10.0) {
  const GridSpec& g = L.grid();
  const int count = std::max(prm.samples, 100);
  Rng rng(prm.seed);
  Mat F(g.scalar_dim(), count);
  for (int s = 0; s < count; ++s) F.col(s) = random_bandlimited(g, g.m, 8, rng);
  const TGrid tg = default_tgrid(g);
  auto e1 = q_extension_batch(L, psi::default_rational(), F, tg, prm.calc);
  auto e2 = q_extension_batch(L, psi::sqrt_exp(), F, tg, prm.calc);
  const double inf = std::numeric_limits<double>::infinity();
  double lo1 = inf, hi1 = 0.0, lo2 = inf, hi2 = 0.0, plo = inf, phi = 0.0;
  for (int s = 0; s < count; ++s) {
    const double n2 = l2_norm(g, F.col(s));
    const double a1 = tent_norm(e1[static_cast<std::size_t>(s)], 0.0, 2.0) / n2;
    const double a2 = tent_norm(e2[static_cast<std::size_t>(s)], 0.0, 2.0) / n2;
    lo1 = std::min(lo1, a1);
    hi1 = std::max(hi1, a1);
    lo2 = std::min(lo2, a2);
    hi2 = std::max(hi2, a2);
    plo = std::min(plo, a1 / a2);
    phi = std::max(phi, a1 / a2);
  }
  // One interval [1/C, C] must hold both auxiliary functions at once.
  const double measured_C = std::max({hi1, hi2, 1.0 / lo1, 1.0 / lo2});
  const bool pass = measured_C <= C && plo >= 1.0 / psi_band && phi <= psi_band;
  return {"identification_p2",
          fam,
          pass,
          {{"rational_lo", lo1},
           {"rational_hi", hi1},
           {"sqrt_exp_lo", lo2},
           {"sqrt_exp_hi", hi2},
           {"C", measured_C},
           {"psi_ratio_lo", plo},
           {"psi_ratio_hi", phi},
           {"samples", count}},
          C,
          "ratio within [1/C, C]; psi-independence within [1/10, 10]"};
}

/// ||SF||_2^2 equals its Fubini rearrangement for a random half-space field.
inline Check fubini(const GridSpec& g, const std::string& fam, const Params& prm, double tol = 1e-12) {
  const TGrid tg = default_tgrid(g);
  HalfSpaceField F = make_halfspace(g, g.m, tg);
  F.values = random_columns(F.values.rows(), static_cast<int>(F.values.cols()), prm.seed);
  const double lhs = std::pow(tent_norm(F, 0.0, 2.0), 2);
  const double rhs = tent_fubini_sq(F);
  const double err = std::abs(lhs - rhs) / rhs;
  return {"tent_fubini", fam, err <= tol, {{"rel_error", err}, {"square_sq", lhs}, {"fubini_sq", rhs}}, tol, ""};
}

// ---------------------------------------------------------------- solvers

/// Second- and first-order residuals of all four solvers and the
/// Neumann/regularity consistency.
inline Check bvp_residuals(const DivFormOperator& L, const std::string& fam, const Params& prm, double tol = 1e-5,
                           double consistency_tol = 1e-8) {
  const GridSpec& g = L.grid();
  Rng rng(prm.seed);
  Vec f = random_bandlimited(g, g.m, 8, rng);
  SolveOptions so;
  so.calc = prm.calc;
  so.trace_curves = false;
  auto dir = solve_dirichlet(L, f, 2.0, so);
  auto reg = solve_regularity(L, f, 2.0, so);
  Vec gdat = -L.mul_a(sqrt_apply(L, f, prm.calc));
  auto neu = solve_neumann(L, gdat, 2.0, so);
  auto hol = solve_dirichlet_holder(L, cusp(g, 0.5), 0.5, false, so);
  double cons = 0.0;
  for (Eigen::Index j = 0; j < neu.u.values.cols(); ++j) {
    Vec a = subtract_mean(reg.u.values.col(j), g.m), b = neu.u.values.col(j);
    cons = std::max(cons, rel_err(b, a));
  }
  std::map<std::string, double> m{{"dirichlet_second", dir.residual_second}, {"dirichlet_first", dir.residual_first},
                                  {"regularity_second", reg.residual_second}, {"regularity_first", reg.residual_first},
                                  {"neumann_second", neu.residual_second},    {"neumann_first", neu.residual_first},
                                  {"holder_second", hol.residual_second},     {"holder_first", hol.residual_first},
                                  {"neumann_regularity_consistency", cons}};
  bool pass = cons <= consistency_tol;
  for (const auto& [k, v] : m)
    if (k != "neumann_regularity_consistency") pass = pass && v <= tol;
  return {"bvp_residuals", fam, pass, m, tol, "residuals relative to the equation scale; consistency tolerance 1e-8"};
}

/// Semigroup vs energy solution at the configured N (T1: absolute bound) and
/// the refinement order over N/4, N/2, N.
inline Check compatibility(const CoefficientField& base, const std::string& fam, const Params& prm, bool absolute,
                           double tol = 1e-6) {
  const GridSpec& g = base.grid;
  const Family family = family_from_string(base.family);
  std::vector<double> errs;
  std::vector<int> Ns;
  for (int div : {4, 2, 1}) {
    const int N = g.N / div;
    if (N < 16) continue;
    GridSpec gg = build_grid(g.n, g.m, N, g.lengths);
    auto L = assemble_divform(make_coefficients(gg, family));
    Rng rng(prm.seed);
    Vec f = random_bandlimited(gg, g.m, 4, rng);
    auto es = energy_solution(L, f, gg.period());
    errs.push_back(check_compatibility(L, f, es, prm.calc));
    Ns.push_back(N);
  }
  std::map<std::string, double> m;
  for (std::size_t i = 0; i < Ns.size(); ++i) m["error_N" + std::to_string(Ns[i])] = errs[i];
  bool decreasing = true;
  double order = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < errs.size(); ++i) {
    // Below rounding level the trend carries no information.
    if (errs[i - 1] < 1e-12) break;
    decreasing = decreasing && errs[i] < errs[i - 1];
    order = std::min(order, std::log(errs[i - 1] / std::max(errs[i], 1e-300)) / std::log(static_cast<double>(Ns[i]) / Ns[i - 1]));
  }
  m["order"] = order;
  const bool pass = absolute ? errs.back() <= tol : (decreasing && order >= 1.0);
  return {"energy_compatibility", fam, pass, m, absolute ? tol : 1.0,
          absolute ? "relative L2 error at the finest N" : "errors decrease under refinement with order >= 1"};
}

/// Comparability ratios of the Dirichlet and regularity problems over random
/// data, plus exact invariance under rescaling of the data.
inline Check comparability(const DivFormOperator& L, const std::string& fam, const Params& prm, double C = 100.0,
                           double scale_tol = 1e-12) {
  const GridSpec& g = L.grid();
  Rng rng(prm.seed);
  SolveOptions so;
  so.calc = prm.calc;
  so.trace_curves = false;
  so.residuals = false;
  const std::vector<std::string> dkeys{"ratio_nt_data", "ratio_square_data", "ratio_nt_square"};
  const std::vector<std::string> rkeys{"ratio_nt_gradf", "ratio_square_gradf", "ratio_g_gradf", "ratio_nt_square"};
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0, scale_err = 0.0;
  for (int s = 0; s < prm.samples; ++s) {
    Vec f = random_bandlimited(g, g.m, 8, rng);
    auto d = solve_dirichlet(L, f, 2.0, so);
    auto r = solve_regularity(L, f, 2.0, so);
    for (const auto& k : dkeys) {
      lo = std::min(lo, d.diagnostics[k]);
      hi = std::max(hi, d.diagnostics[k]);
    }
    for (const auto& k : rkeys) {
      lo = std::min(lo, r.diagnostics[k]);
      hi = std::max(hi, r.diagnostics[k]);
    }
    if (s == 0) {
      const double lambda = 37.5;
      auto d2 = solve_dirichlet(L, Vec(lambda * f), 2.0, so);
      auto r2 = solve_regularity(L, Vec(lambda * f), 2.0, so);
      for (const auto& k : dkeys) scale_err = std::max(scale_err, std::abs(d2.diagnostics[k] / d.diagnostics[k] - 1.0));
      for (const auto& k : rkeys) scale_err = std::max(scale_err, std::abs(r2.diagnostics[k] / r.diagnostics[k] - 1.0));
    }
  }
  const double measured_C = std::max(hi, 1.0 / lo);
  return {"comparability",
          fam,
          measured_C <= C && scale_err <= scale_tol,
          {{"ratio_lo", lo}, {"ratio_hi", hi}, {"C", measured_C}, {"rescaling_error", scale_err}, {"samples", prm.samples}},
          C,
          "all ratio pairs within [1/C, C]; rescaling tolerance 1e-12"};
}

// ---------------------------------------------------------------- probes

/// Off-diagonal decay for both families at separation period/8, |z| <= sep/8.
inline Check offdiag(const DivFormOperator& L, const std::string& fam, double gamma_min = 5.0, double resid_max = 0.2) {
  const double sep = L.grid().period() / 8.0;
  auto r = offdiag_standard(L, OffdiagFamily::resolvent, sep);
  auto gr = offdiag_standard(L, OffdiagFamily::gradient_resolvent, sep);
  const bool pass = r.gamma >= gamma_min && gr.gamma >= gamma_min && r.residual <= resid_max && gr.residual <= resid_max;
  return {"offdiag_decay",
          fam,
          pass,
          {{"gamma_resolvent", r.gamma},
           {"residual_resolvent", r.residual},
           {"gamma_gradient", gr.gamma},
           {"residual_gradient", gr.residual},
           {"separation", sep}},
          gamma_min,
          "gamma >= 5 with fit residual <= 0.2"};
}

/// Critical-number probes: structural consistency and, when requested, no
/// breakdown anywhere on the p-grid.
inline Check critical(const DivFormOperator& L, const std::string& fam, const ProbeConfig& cfg, const Params& prm,
                      bool expect_no_breakdown, CriticalEstimate* out = nullptr) {
  auto ce = estimate_critical(L, cfg, prm.calc);
  std::map<std::string, double> m{{"p_minus", ce.p_minus},
                                  {"p_plus", ce.p_plus},
                                  {"q_minus", ce.q_minus},
                                  {"q_plus", ce.q_plus},
                                  {"riesz_lower", ce.riesz.lower},
                                  {"riesz_upper", ce.riesz.upper},
                                  {"identification_lower", ce.identification.lower},
                                  {"identification_upper", ce.identification.upper},
                                  {"no_breakdown", ce.no_breakdown() ? 1.0 : 0.0},
                                  {"structural_ok", ce.structural_ok() ? 1.0 : 0.0}};
  for (const auto* c : {&ce.resolvent, &ce.gradient, &ce.riesz, &ce.identification}) {
    double mx = 0.0;
    for (double b : c->B) mx = std::max(mx, b);
    m["max_B_" + to_string(c->kind)] = mx;
  }
  const bool pass = ce.structural_ok() && (!expect_no_breakdown || ce.no_breakdown());
  std::string note = "operator norms are lower bounds over a finite test family";
  for (const auto& f : ce.flags) note += "; " + f;
  if (out) *out = ce;
  return {"critical_probes", fam, pass, m, cfg.blowup, note};
}

}  // namespace scalc::checks
