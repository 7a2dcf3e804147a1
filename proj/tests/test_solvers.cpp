#include "scalc/scalc.hpp"

#include <gtest/gtest.h>

using namespace scalc;

namespace {

DivFormOperator make_op(int N, Family fam) { return DivFormOperator(make_coefficients(build_grid(1, 1, N), fam)); }

double symbol(const GridSpec& g, int k) { return std::pow(2.0 * std::sin(k * g.h[0] / 2.0) / g.h[0], 2); }

Vec data(const GridSpec& g, std::uint64_t seed, int band = 6) {
  Rng rng(seed);
  return random_bandlimited(g, g.m, band, rng);
}

}  // namespace

TEST(Dirichlet, FourierModeOfConstantOperator) {
  const auto L = make_op(32, Family::constant);
  const auto& g = L.grid();
  Vec e = fourier_mode(g, {2, 0});
  auto sol = solve_dirichlet(L, e, 2.0);
  const double r = std::sqrt(symbol(g, 2));
  for (std::size_t j = 0; j < sol.u.tgrid.size(); j += 5) {
    const double t = sol.u.tgrid.t[j];
    EXPECT_LT((sol.u.at(j) - std::exp(-t * r) * e).norm(), 1e-8 * e.norm()) << "t=" << t;
  }
  EXPECT_LE(sol.residual_second, 1e-5);
  EXPECT_LE(sol.residual_first, 1e-5);
}

TEST(Dirichlet, ZeroDataGivesZeroSolution) {
  const auto L = make_op(32, Family::smooth_real);
  auto sol = solve_dirichlet(L, Vec::Zero(32), 2.0);
  EXPECT_EQ(sol.u.values.cwiseAbs().maxCoeff(), 0.0);
  for (const auto& [k, v] : sol.diagnostics) EXPECT_EQ(v, 0.0) << k;
}

TEST(Dirichlet, ResidualsOnEveryFamily) {
  for (auto fam : {Family::smooth_real, Family::complex_rotation, Family::checkerboard}) {
    const auto L = make_op(32, fam);
    auto sol = solve_dirichlet(L, data(L.grid(), 1), 2.0);
    EXPECT_LE(sol.residual_second, 1e-5) << to_string(fam);
    EXPECT_LE(sol.residual_first, 1e-5) << to_string(fam);
  }
}

TEST(Dirichlet, DiagnosticsAreScaleInvariant) {
  const auto L = make_op(32, Family::complex_rotation);
  const Vec f = data(L.grid(), 2);
  auto a = solve_dirichlet(L, f, 2.0);
  auto b = solve_dirichlet(L, 37.5 * f, 2.0);
  for (const char* k : {"ratio_nt_data", "ratio_square_data", "ratio_nt_square"})
    EXPECT_NEAR(a.diagnostics.at(k), b.diagnostics.at(k), 1e-12 * a.diagnostics.at(k)) << k;
  EXPECT_NEAR(b.diagnostics.at("nt_u"), 37.5 * a.diagnostics.at("nt_u"), 1e-10 * b.diagnostics.at("nt_u"));
}

TEST(Dirichlet, Linear) {
  const auto L = make_op(32, Family::smooth_real);
  const Vec f1 = data(L.grid(), 3), f2 = data(L.grid(), 4);
  const cplx al(0.5, 1.0), be(-2.0, 0.0);
  auto u1 = solve_dirichlet(L, f1, 2.0), u2 = solve_dirichlet(L, f2, 2.0), u = solve_dirichlet(L, al * f1 + be * f2, 2.0);
  const Mat comb = al * u1.u.values + be * u2.u.values;
  EXPECT_LT((u.u.values - comb).norm(), 1e-10 * comb.norm());
}

TEST(Dirichlet, WhitneyTraceShrinksTowardsTheBoundary) {
  const auto L = make_op(32, Family::constant);
  auto sol = solve_dirichlet(L, data(L.grid(), 5), 2.0);
  const auto& curve = sol.curves.at("whitney_trace_u");
  ASSERT_GE(curve.size(), 3u);
  // Points are stored by increasing t: the deviation must not grow as t decreases. Beyond half the
  // period the balls wrap the torus and the curve is flat up to rounding, so it is not compared there.
  for (std::size_t i = 1; i < curve.size() && curve[i].first <= 0.5 * L.grid().period(); ++i)
    EXPECT_LE(curve[i - 1].second, curve[i].second * (1.0 + 1e-9));
  EXPECT_LE(curve.front().second, 1e-4);
}

TEST(DirichletHp, DipoleDataGivesFiniteRatios) {
  const auto L = make_op(64, Family::constant);
  const Vec f = dipole(L.grid(), 0, 4);
  auto sol = solve_dirichlet_hp(L, f, 1.0);
  for (const char* k : {"ratio_nt_data", "ratio_square_data", "ratio_nt_square"}) {
    EXPECT_TRUE(std::isfinite(sol.diagnostics.at(k))) << k;
    EXPECT_GT(sol.diagnostics.at(k), 0.0) << k;
  }
}

TEST(DirichletHp, RejectsDataWithMean) {
  const auto L = make_op(32, Family::constant);
  EXPECT_THROW(solve_dirichlet_hp(L, Vec::Ones(32), 1.0), ContractError);
}

TEST(Regularity, ConormalOfAFourierMode) {
  const auto L = make_op(32, Family::constant);
  const auto& g = L.grid();
  Vec e = fourier_mode(g, {3, 0});
  auto sol = solve_regularity(L, e, 2.0);
  EXPECT_LT((sol.g + std::sqrt(symbol(g, 3)) * e).norm(), 1e-8 * std::sqrt(symbol(g, 3)) * e.norm());
  EXPECT_LE(sol.residual_second, 1e-5);
  EXPECT_LE(sol.residual_first, 1e-5);
}

TEST(Regularity, ZeroData) {
  const auto L = make_op(32, Family::complex_rotation);
  auto sol = solve_regularity(L, Vec::Zero(32), 2.0);
  EXPECT_EQ(sol.u.values.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(sol.conormal_gradient.values.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Neumann, FourierModeOfConstantOperator) {
  const auto L = make_op(32, Family::constant);
  const auto& g = L.grid();
  Vec e = fourier_mode(g, {2, 0});
  auto sol = solve_neumann(L, e, 2.0);
  const double r = std::sqrt(symbol(g, 2));
  EXPECT_LT((sol.f + e / r).norm(), 1e-8 * e.norm() / r);
  EXPECT_LT((sol.g - e).norm(), 1e-8 * e.norm());
}

TEST(Neumann, RejectsDataWithMean) {
  const auto L = make_op(32, Family::constant);
  try {
    solve_neumann(L, Vec::Ones(32), 2.0);
    FAIL() << "expected a contract error";
  } catch (const ContractError& e) {
    EXPECT_NE(std::string(e.what()).find("Neumann data must have zero mean on the torus"), std::string::npos);
  }
}

TEST(Neumann, ZeroDataGivesZeroModuloConstants) {
  const auto L = make_op(32, Family::smooth_real);
  auto sol = solve_neumann(L, Vec::Zero(32), 2.0);
  EXPECT_EQ(sol.u.values.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Neumann, ReproducesTheRegularitySolution) {
  const auto L = make_op(32, Family::complex_rotation);
  const Vec f = L.to_range(Mat(data(L.grid(), 6))).col(0);
  auto reg = solve_regularity(L, f, 2.0);
  auto neu = solve_neumann(L, reg.g, 2.0);
  const auto& g = L.grid();
  double worst = 0.0;
  for (Eigen::Index j = 0; j < reg.u.values.cols(); ++j) {
    const Vec a = subtract_mean(reg.u.values.col(j), g.m), b = neu.u.values.col(j);
    worst = std::max(worst, (a - b).norm() / std::max(f.norm(), 1e-300));
  }
  EXPECT_LE(worst, 1e-8);
}

TEST(Neumann, FluxErrorDecreasesUnderRefinement) {
  double prev = std::numeric_limits<double>::infinity();
  for (int N : {32, 64, 128}) {
    const auto L = make_op(N, Family::smooth_real);
    Vec gdat = fourier_mode(L.grid(), {1, 0}) + 0.5 * fourier_mode(L.grid(), {-2, 0});
    auto sol = solve_neumann(L, gdat, 2.0);
    const double err = sol.diagnostics.at("flux_error_tmin");
    EXPECT_LT(err, prev) << "N=" << N;
    prev = err;
  }
}

TEST(Holder, ConstantDataIsReproduced) {
  const auto L = make_op(32, Family::constant);
  Vec f = Vec::Constant(32, 2.0);
  auto sol = solve_dirichlet_holder(L, f, 0.5);
  for (Eigen::Index j = 0; j < sol.u.values.cols(); ++j) EXPECT_LT((sol.u.values.col(j) - f).norm(), 1e-8 * f.norm());
  EXPECT_NEAR(sol.diagnostics.at("carleson_tgrad_u"), 0.0, 1e-8);
}

TEST(Holder, CuspDataHasFiniteRatio) {
  const auto L = make_op(32, Family::constant);
  auto sol = solve_dirichlet_holder(L, cusp(L.grid(), 0.5), 0.5);
  EXPECT_TRUE(std::isfinite(sol.diagnostics.at("ratio_carleson_holder")));
  EXPECT_GT(sol.diagnostics.at("ratio_carleson_holder"), 0.0);
  // One difference per window doubling, from h up to the full torus.
  const auto& diffs = sol.curves.at("truncation_differences");
  EXPECT_EQ(diffs.size(), 5u);
  for (const auto& [r, d] : diffs) EXPECT_TRUE(std::isfinite(d)) << "r=" << r;
  EXPECT_LE(sol.residual_second, 1e-5);
}

TEST(Energy, MatchesThePoissonExtensionForConstantCoefficients) {
  const auto L = make_op(32, Family::constant);
  const auto& g = L.grid();
  Vec e = fourier_mode(g, {2, 0});
  auto es = energy_solution(L, e, g.period());
  EXPECT_LE(check_compatibility(L, e, es), 1e-8);
  const double r = std::sqrt(symbol(g, 2));
  for (std::size_t i = 0; i < es.t.size(); i += 4)
    EXPECT_LT((es.u.col(static_cast<Eigen::Index>(i)) - std::exp(-es.t[i] * r) * e).norm(), 1e-8 * e.norm());
}

TEST(Energy, ZeroData) {
  const auto L = make_op(16, Family::complex_rotation);
  auto es = energy_solution(L, Vec::Zero(16), L.grid().period());
  EXPECT_EQ(es.u.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Energy, ZeroDirichletTopDiffersByTheDecayedMode) {
  const auto L = make_op(32, Family::constant);
  const auto& g = L.grid();
  Vec e = fourier_mode(g, {1, 0});
  const double T = g.period();
  auto es = energy_solution(L, e, T, 0, TopCondition::zero_dirichlet);
  // Two-point solution of u'' = s u, u(0) = 1, u(T) = 0: sinh(r (T - t)) / sinh(r T).
  const double r = std::sqrt(symbol(g, 1));
  for (std::size_t i = 0; i < es.t.size(); i += 4) {
    const double want = std::sinh(r * (T - es.t[i])) / std::sinh(r * T);
    EXPECT_LT((es.u.col(static_cast<Eigen::Index>(i)) - want * e).norm(), 1e-8 * e.norm()) << "t=" << es.t[i];
  }
}

TEST(Energy, CompatibilityOnVariableFamilies) {
  for (auto fam : {Family::smooth_real, Family::complex_rotation}) {
    const auto L = make_op(32, fam);
    const Vec f = data(L.grid(), 7, 4);
    auto es = energy_solution(L, f, L.grid().period());
    EXPECT_LE(check_compatibility(L, f, es), 1e-6) << to_string(fam);
  }
}
