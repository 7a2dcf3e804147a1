#include "scalc/scalc.hpp"

#include <gtest/gtest.h>

using namespace scalc;

namespace {

Mat scalar(cplx v) { return Mat::Constant(1, 1, v); }

CoefficientField scalar_field(const GridSpec& g, std::function<cplx(double)> a, std::function<cplx(double)> d) {
  return coefficients_from_functions(
      g, [a](const auto& x) { return scalar(a(x[0])); }, [d](const auto& x) { return scalar(d(x[0])); });
}

Vec random_vec(Eigen::Index n, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> nd;
  Vec v(n);
  for (auto& x : v) x = cplx(nd(rng), nd(rng));
  return v;
}

}  // namespace

TEST(Grid, SpacingAndDimensions) {
  auto g = build_grid(1, 1, 8, 2.0 * pi);
  EXPECT_NEAR(g.h[0], pi / 4.0, 1e-15);
  EXPECT_EQ(g.scalar_dim(), 8);
  auto g2 = build_grid(2, 2, 16, 1.0);
  EXPECT_EQ(g2.cells(), 256);
  EXPECT_EQ(g2.scalar_dim(), 512);
  EXPECT_EQ(g2.grad_dim(), 1024);
  EXPECT_EQ(g2.dirac_dim(), 1536);
}

TEST(Grid, RejectsBadInput) {
  EXPECT_THROW(build_grid(3, 1, 8), UsageError);
  EXPECT_THROW(build_grid(1, 0, 8), UsageError);
  EXPECT_THROW(build_grid(1, 1, 2), UsageError);
  EXPECT_THROW(build_grid(1, 1, 8, -1.0), UsageError);
}

TEST(Grid, PeriodicShiftWraps) {
  auto g = build_grid(2, 1, 8);
  EXPECT_EQ(g.shift(g.cell(7, 3), 0, 1), g.cell(0, 3));
  EXPECT_EQ(g.shift(g.cell(2, 0), 1, -1), g.cell(2, 7));
  EXPECT_NEAR(g.distance(g.cell(0, 0), g.cell(7, 0)), g.h[0], 1e-14);
}

TEST(Accretivity, IdentityHasConstantOne) {
  auto g = build_grid(1, 1, 16);
  auto cf = make_coefficients(g, Family::constant);
  EXPECT_NEAR(cf.lambda_a, 1.0, 1e-14);
  EXPECT_NEAR(cf.omega_a, 0.0, 1e-12);
}

TEST(Accretivity, RealMultiplier) {
  auto g = build_grid(1, 1, 64);
  auto cf = scalar_field(g, [](double x) { return 2.0 + std::sin(x); }, [](double) { return 1.0; });
  // min over the nodes of 2 + sin x; the node x = 3 pi / 2 is on the grid.
  EXPECT_NEAR(cf.lambda_a, 1.0, 1e-12);
}

TEST(Accretivity, RotatedConstant) {
  auto g = build_grid(1, 1, 16);
  auto cf = scalar_field(g, [](double) { return std::exp(I * pi / 3.0); }, [](double) { return 1.0; });
  EXPECT_NEAR(cf.lambda_a, 0.5, 1e-12);
  EXPECT_NEAR(cf.omega_a, pi / 3.0, 1e-9);
}

TEST(Accretivity, RejectsNonAccretive) {
  auto g = build_grid(1, 1, 16);
  EXPECT_THROW(scalar_field(g, [](double) { return -1.0; }, [](double) { return 1.0; }), ContractError);
}

TEST(Garding, IdentityGivesOne) {
  auto g = build_grid(1, 1, 32);
  std::vector<Mat> d(g.cells(), scalar(1.0));
  EXPECT_NEAR(verify_garding(g, d), 1.0, 1e-10);
}

TEST(Garding, SmoothRealIsAboveThePointwiseMinimum) {
  auto g = build_grid(1, 1, 64);
  auto cf = scalar_field(g, [](double) { return 1.0; }, [](double x) { return 1.0 + 0.5 * std::sin(x); });
  const double lam = verify_garding(g, cf.d);
  double dmin = 2.0;
  for (const auto& d : cf.d) dmin = std::min(dmin, d(0, 0).real());
  // Gradients are mean-zero, so the constant sits between min d and the mean of d.
  EXPECT_GE(lam, dmin - 1e-12);
  EXPECT_LE(lam, 1.0);
  EXPECT_NEAR(lam, 0.5, 5e-3);
}

TEST(Garding, ComplexRotationStaysPositive) {
  auto g = build_grid(1, 1, 32);
  auto cf = make_coefficients(g, Family::complex_rotation);
  EXPECT_GE(verify_garding(g, cf.d), 0.5 - 1e-12);
}

TEST(Garding, RejectsNegativeDefinite) {
  auto g = build_grid(1, 1, 16);
  std::vector<Mat> d(g.cells(), scalar(-1.0));
  EXPECT_THROW(verify_garding(g, d), ContractError);
}

TEST(DivForm, FourierModeMatchesSymbol) {
  auto g = build_grid(1, 1, 32);
  const DivFormOperator L(make_coefficients(g, Family::constant));
  for (int k : {1, 3, 7}) {
    Vec e = fourier_mode(g, {k, 0});
    const double sym = std::pow(2.0 * std::sin(k * g.h[0] / 2.0) / g.h[0], 2);
    EXPECT_LT((L.apply(e) - sym * e).norm(), 1e-10 * sym * e.norm()) << "k=" << k;
  }
}

TEST(DivForm, FourierModeMatchesSymbol2D) {
  auto g = build_grid(2, 1, 16);
  const DivFormOperator L(make_coefficients(g, Family::constant));
  Vec e = fourier_mode(g, {2, 5});
  const double sym = std::pow(2.0 * std::sin(2 * g.h[0] / 2.0) / g.h[0], 2) + std::pow(2.0 * std::sin(5 * g.h[1] / 2.0) / g.h[1], 2);
  EXPECT_LT((L.apply(e) - sym * e).norm(), 1e-10 * sym * e.norm());
}

TEST(DivForm, AnnihilatesConstants) {
  for (auto fam : {Family::constant, Family::smooth_real, Family::complex_rotation, Family::checkerboard}) {
    auto g = build_grid(2, 2, 8);
    const DivFormOperator L(make_coefficients(g, fam));
    Vec c = constant_field(g, Vec::Constant(2, cplx(1.5, -0.5)));
    EXPECT_LT(L.apply(c).norm(), 1e-12 * c.norm()) << to_string(fam);
  }
}

TEST(DivForm, MatrixFreeAgreesWithAssembled) {
  auto g = build_grid(2, 2, 8);
  const DivFormOperator L(make_coefficients(g, Family::complex_rotation));
  Vec f = random_vec(g.scalar_dim(), 3);
  EXPECT_LT((L.apply(f) - L.apply_matrix_free(f)).norm(), 1e-12 * L.apply(f).norm());
}

TEST(DivForm, WeightedFormIsAccretive) {
  for (auto fam : {Family::constant, Family::smooth_real, Family::complex_rotation, Family::checkerboard}) {
    auto g = build_grid(1, 2, 32);
    const DivFormOperator L(make_coefficients(g, fam));
    for (std::uint64_t s = 0; s < 10; ++s) {
      Vec f = random_vec(g.scalar_dim(), 100 + s);
      EXPECT_GE(inner(L.mul_a(L.apply(f)), f).real(), -1e-10 * f.squaredNorm()) << to_string(fam);
    }
  }
}

TEST(DivForm, AdjointPairing) {
  auto g = build_grid(2, 1, 8);
  const DivFormOperator L(make_coefficients(g, Family::complex_rotation));
  Vec f = random_vec(g.scalar_dim(), 5), u = random_vec(g.scalar_dim(), 6);
  EXPECT_LT(std::abs(inner(L.apply(f), u) - inner(f, L.apply_adjoint(u))), 1e-10 * L.apply(f).norm() * u.norm());
}

TEST(DivForm, GradientAndDivergenceAreAdjoint) {
  auto g = build_grid(2, 2, 8);
  Vec f = random_vec(g.scalar_dim(), 7), v = random_vec(g.grad_dim(), 8);
  EXPECT_NEAR(std::abs(inner(gradient(g, f), v) + inner(f, divergence(g, v))), 0.0, 1e-10 * f.norm() * v.norm());
}

TEST(DivForm, KernelComponentProjectsOntoRange) {
  auto g = build_grid(1, 1, 16);
  const DivFormOperator L(make_coefficients(g, Family::smooth_real));
  Vec f = random_vec(g.scalar_dim(), 9);
  Vec r = f - L.kernel_component(f);
  EXPECT_LT(std::abs(L.mul_a(r).sum()), 1e-12 * f.norm());
}

TEST(Dirac, SquareHasTheDivFormBlocks) {
  for (auto fam : {Family::constant, Family::smooth_real, Family::complex_rotation}) {
    auto g = build_grid(2, 1, 8);
    const DivFormOperator L(make_coefficients(g, fam));
    const DiracOperator db(L);
    EXPECT_LT(Mat(db.squared() - dirac_square_blocks(L)).norm(), 1e-12 * Mat(db.squared()).norm()) << to_string(fam);
  }
}

TEST(Dirac, IdentityCoefficientGivesPlainDirac) {
  auto g = build_grid(1, 1, 16);
  const DivFormOperator L(make_coefficients(g, Family::constant));
  const DiracOperator db(L);
  EXPECT_LT(Mat(db.DB() - db.D()).norm(), 1e-15);
}

TEST(Dirac, ActsOnScalarBlockAsMinusGradient) {
  auto g = build_grid(2, 1, 8);
  const DivFormOperator L(make_coefficients(g, Family::complex_rotation));
  const DiracOperator db(L);
  Vec f = random_vec(g.scalar_dim(), 11);
  Vec h = db.join(L.mul_a(f), Vec::Zero(g.grad_dim()));
  Vec out = db.apply(h);
  EXPECT_LT(db.upper(out).norm(), 1e-14);
  EXPECT_LT((db.lower(out) + gradient(g, f)).norm(), 1e-12 * gradient(g, f).norm());
}

TEST(Dirac, RangeProjectorIsIdempotent) {
  auto g = build_grid(2, 1, 8);
  const DivFormOperator L(make_coefficients(g, Family::constant));
  const DiracOperator db(L);
  Vec h = random_vec(g.dirac_dim(), 12);
  Vec p = db.range_projector(h);
  EXPECT_LT((db.range_projector(p) - p).norm(), 1e-12 * p.norm());
  Vec gf = gradient(g, random_vec(g.scalar_dim(), 13));
  Vec r = db.join(Vec::Zero(g.scalar_dim()), gf);
  EXPECT_LT((db.range_projector(r) - r).norm(), 1e-12 * r.norm());
}

TEST(Sector, SpectrumInsideTheAngleBound) {
  for (auto fam : {Family::constant, Family::smooth_real, Family::complex_rotation}) {
    auto g = build_grid(1, 1, 32);
    const DivFormOperator L(make_coefficients(g, fam));
    auto prof = estimate_sector(L, {0.5 * (L.omega_bound() + pi)}, 6);
    EXPECT_LE(prof.omega_est, L.omega_bound() + 1e-9) << to_string(fam);
    EXPECT_TRUE(std::isfinite(prof.resolvent_bounds.front().second));
  }
}
