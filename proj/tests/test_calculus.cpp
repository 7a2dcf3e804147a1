#include "scalc/scalc.hpp"

#include <gtest/gtest.h>

using namespace scalc;

namespace {

double symbol(const GridSpec& g, int k) { return std::pow(2.0 * std::sin(k * g.h[0] / 2.0) / g.h[0], 2); }

DivFormOperator make_op(int n, int N, Family fam, int m = 1) { return DivFormOperator(make_coefficients(build_grid(n, m, N), fam)); }

Vec random_meanzero_vec(const GridSpec& g, std::uint64_t seed) {
  Rng rng(seed);
  return random_bandlimited(g, g.m, 8, rng);
}

}  // namespace

TEST(Resolvent, SolvesTheShiftedSystem) {
  const auto L = make_op(1, 32, Family::complex_rotation);
  const Vec f = random_meanzero_vec(L.grid(), 1);
  const cplx z(-2.0, 1.0);
  const Vec u = resolvent(L.view(), z, Mat(f)).col(0);
  EXPECT_LT((z * u - L.apply(u) - f).norm(), 1e-10 * f.norm());
}

TEST(Resolvent, LargeNegativeZApproachesIdentity) {
  const auto L = make_op(1, 32, Family::smooth_real);
  const Vec f = random_meanzero_vec(L.grid(), 2);
  double prev = std::numeric_limits<double>::infinity();
  for (double r : {1e2, 1e4, 1e6}) {
    const cplx z(-r, 0.0);
    const double err = (z * resolvent(L.view(), z, Mat(f)).col(0) - f).norm() / f.norm();
    EXPECT_LT(err, prev);
    prev = err;
  }
  EXPECT_LT(prev, 1e-2);
}

TEST(Resolvent, RefusesPointsInsideTheSector) {
  const auto L = make_op(1, 16, Family::constant);
  const Vec f = random_meanzero_vec(L.grid(), 3);
  EXPECT_THROW(resolvent(L.view(), cplx(1.0, 0.0), Mat(f)), ContractError);
  EXPECT_THROW(resolvent(L.view(), cplx(0.0, 0.0), Mat(f)), ContractError);
}

TEST(Sector, SelfAdjointCaseHasZeroAngle) {
  const auto L = make_op(1, 32, Family::constant);
  auto prof = estimate_sector(L, {pi / 2}, 6);
  EXPECT_LT(prof.omega_est, 1e-8);
  EXPECT_GE(prof.resolvent_bounds.front().second, 1.0 - 1e-9);
}

TEST(Sector, RotatedMultiplierRotatesTheSpectrum) {
  auto g = build_grid(1, 1, 32);
  auto cf = coefficients_from_functions(
      g, [](const auto&) { return Mat::Constant(1, 1, std::exp(I * pi / 4.0)); }, [](const auto&) { return Mat::Identity(1, 1); });
  const DivFormOperator L(cf);
  auto prof = estimate_sector(L, {0.5 * (pi / 4 + pi)}, 6);
  EXPECT_NEAR(prof.omega_est, pi / 4.0, 1e-9);
}

TEST(Psi, FourierModeOfConstantOperator) {
  const auto L = make_op(1, 32, Family::constant);
  const auto& g = L.grid();
  const auto f_psi = psi::sqrt_exp();
  for (int k : {1, 4}) {
    Vec e = fourier_mode(g, {k, 0});
    const double s = symbol(g, k);
    const Vec out = apply_psi(L, f_psi, e);
    EXPECT_LT((out - std::sqrt(s) * std::exp(-std::sqrt(s)) * e).norm(), 1e-9 * e.norm()) << "k=" << k;
  }
}

TEST(Psi, AgreesWithTheDenseOracle) {
  for (auto fam : {Family::smooth_real, Family::complex_rotation, Family::checkerboard}) {
    const auto L = make_op(1, 32, fam);
    const auto o = oracle_eigen(L);
    const Vec f = random_meanzero_vec(L.grid(), 4);
    for (const auto& fp : {psi::default_rational(), psi::sqrt_exp()}) {
      const Vec a = apply_psi(L, fp, f);
      const Vec b = o.apply(fp, Mat(f)).col(0);
      EXPECT_LT((a - b).norm(), 1e-8 * b.norm()) << to_string(fam) << " " << fp.label;
    }
  }
}

TEST(Sqrt, FourierModeOfConstantOperator) {
  const auto L = make_op(1, 32, Family::constant);
  const auto& g = L.grid();
  for (int k : {1, 5, 11}) {
    Vec e = fourier_mode(g, {k, 0});
    const double s = symbol(g, k);
    EXPECT_LT((sqrt_apply(L, e) - std::sqrt(s) * e).norm(), 1e-9 * std::sqrt(s) * e.norm()) << "k=" << k;
    EXPECT_LT((inv_sqrt_apply(L, e) - e / std::sqrt(s)).norm(), 1e-9 * e.norm() / std::sqrt(s)) << "k=" << k;
  }
}

TEST(Sqrt, SquaresBackToTheOperator) {
  for (auto fam : {Family::smooth_real, Family::complex_rotation}) {
    const auto L = make_op(2, 8, fam);
    const Vec f = random_meanzero_vec(L.grid(), 5);
    const Vec twice = sqrt_apply(L, sqrt_apply(L, f));
    const Vec lf = L.apply(f);
    EXPECT_LT((twice - lf).norm(), 1e-8 * lf.norm()) << to_string(fam);
  }
}

TEST(Sqrt, InverseSqrtInvertsOnTheRange) {
  const auto L = make_op(1, 32, Family::complex_rotation);
  const Vec f = L.to_range(Mat(random_meanzero_vec(L.grid(), 6))).col(0);
  EXPECT_LT((sqrt_apply(L, inv_sqrt_apply(L, f)) - f).norm(), 1e-8 * f.norm());
}

TEST(Poisson, FourierModeOfConstantOperator) {
  const auto L = make_op(1, 32, Family::constant);
  const auto& g = L.grid();
  for (double t : {0.3, 1.0}) {
    Vec e = fourier_mode(g, {3, 0});
    const double s = symbol(g, 3);
    EXPECT_LT((poisson_semigroup(L, t, e) - std::exp(-t * std::sqrt(s)) * e).norm(), 1e-9 * e.norm()) << "t=" << t;
  }
}

TEST(Poisson, ConvergesToTheDataAsTDecreases) {
  const auto L = make_op(1, 32, Family::smooth_real);
  const Vec f = random_meanzero_vec(L.grid(), 7);
  double prev = std::numeric_limits<double>::infinity();
  for (double t : {1.0, 0.5, 0.25, 0.125}) {
    const double err = (poisson_semigroup(L, t, f) - f).norm();
    EXPECT_LT(err, prev) << "t=" << t;
    prev = err;
  }
}

TEST(Poisson, ConstantsAreCarriedUnchanged) {
  const auto L = make_op(1, 16, Family::complex_rotation);
  const Vec c = constant_field(L.grid(), Vec::Constant(1, cplx(2.0, 1.0)));
  EXPECT_LT((poisson_semigroup(L, 0.5, c) - c).norm(), 1e-9 * c.norm());
}

TEST(Dirac, SemigroupAgreesWithTheDenseOracle) {
  const auto L = make_op(1, 16, Family::complex_rotation);
  const DiracOperator db(L);
  const auto o = oracle_eigen(db);
  Rng rng(8);
  Vec h = random_bandlimited(L.grid(), 2, 6, rng);
  Vec hs(L.grid().dirac_dim());
  // Undo the per-cell interleaving: scalar block, then the gradient block.
  for (Eigen::Index c = 0; c < L.grid().cells(); ++c) {
    hs[c] = h[2 * c];
    hs[L.grid().cells() + c] = h[2 * c + 1];
  }
  hs = db.range_projector(hs);
  const Vec a = dirac_semigroup(db, 0.5, hs);
  const Vec b = o.apply(psi::poisson(0.5), Mat(hs)).col(0);
  EXPECT_LT((a - b).norm(), 1e-8 * b.norm());
}

TEST(Riesz, ModeOfConstantOperatorHasUnitModulus) {
  const auto L = make_op(1, 64, Family::constant);
  const auto& g = L.grid();
  Vec e = fourier_mode(g, {2, 0});
  const Vec r = riesz_transform(L, e);
  // Forward difference over the root of the symbol: exactly unimodular.
  EXPECT_NEAR(r.norm() / e.norm(), 1.0, 1e-9);
}

TEST(Riesz, BoundedOnRandomData) {
  const auto L = make_op(1, 32, Family::complex_rotation);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Vec f = random_meanzero_vec(L.grid(), 20 + s);
    const double ratio = riesz_transform(L, f).norm() / f.norm();
    EXPECT_TRUE(std::isfinite(ratio));
    EXPECT_LT(ratio, 10.0);
  }
}

TEST(Oracle, ReproducesTheMatrix) {
  const auto L = make_op(1, 16, Family::complex_rotation);
  const auto o = oracle_eigen(L);
  AuxiliaryFunction id{"z", [](cplx z) { return z; }, 1.0, 0.0, pi, 0.0};
  const Mat M = o.matrix(id);
  EXPECT_LT((M - Mat(L.matrix())).norm(), 1e-10 * Mat(L.matrix()).norm());
}
