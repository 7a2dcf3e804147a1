#pragma once

// Functional calculus for L and (DB)^2 built on the contour engine: sector
// estimates, psi(L), square roots, the Poisson and Dirac semigroups and the
// Riesz transform.

#include "scalc/contour.hpp"

#include <random>

namespace scalc {

/// Largest singular value of a linear map by power iteration on A^* A.
inline double power_norm(const std::function<Vec(const Vec&)>& apply, const std::function<Vec(const Vec&)>& apply_adj,
                         Eigen::Index dim, int iters = 60, std::uint64_t seed = 7) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Vec x(dim);
  for (Eigen::Index i = 0; i < dim; ++i) x[i] = cplx(nd(rng), nd(rng));
  x.normalize();
  double est = 0.0;
  for (int it = 0; it < iters; ++it) {
    Vec y = apply_adj(apply(x));
    const double nrm = y.norm();
    if (nrm == 0.0) return 0.0;
    const double next = std::sqrt(nrm);
    x = y / nrm;
    if (it > 5 && std::abs(next - est) <= 1e-10 * next) {
      est = next;
      break;
    }
    est = next;
  }
  return apply(x).norm();
}

struct SectorialProfile {
  double omega_est = 0.0;
  bool from_field_of_values = false;
  std::vector<std::pair<double, double>> resolvent_bounds;  // (mu, M_{L,mu})
  Vec spectrum_sample;
};

/// omega_est from a dense eigensolve (or the field of values of a L for large
/// operators) and M_{L,mu} = max over z = r e^{+-i mu} of ||z (z - L)^{-1}||.
inline SectorialProfile estimate_sector(const DivFormOperator& L, const std::vector<double>& mu_grid, int radii = 24) {
  SectorialProfile prof;
  const SpMat& A = L.matrix();
  if (A.rows() <= dense_limit) {
    Eigen::ComplexEigenSolver<Mat> es(Mat(A), false);
    if (es.info() != Eigen::Success) throw NumericalError("estimate_sector: eigensolve failed");
    prof.spectrum_sample = es.eigenvalues();
    const double tol = 1e-9 * std::max(1.0, prof.spectrum_sample.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < prof.spectrum_sample.size(); ++i) {
      const cplx lam = prof.spectrum_sample[i];
      if (std::abs(lam) > tol) prof.omega_est = std::max(prof.omega_est, std::abs(std::arg(lam)));
    }
  } else {
    // arg of <a L f, f> / <a f, f> over random fields bounds the spectrum of L.
    prof.from_field_of_values = true;
    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd;
    for (int s = 0; s < 64; ++s) {
      Vec f(A.rows());
      for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = cplx(nd(rng), nd(rng));
      f = L.to_range(f);
      const cplx q = inner(L.stiffness() * f, f) / inner(L.mul_a(f), f);
      prof.omega_est = std::max(prof.omega_est, std::abs(std::arg(q)));
    }
  }
  auto v = L.view();
  detail::ShiftedSolver sv(A);
  for (double mu : mu_grid) {
    require(mu > 0.0 && mu < pi, "estimate_sector: mu must lie in (0, pi)");
    double worst = 0.0;
    for (int k = 0; k < radii; ++k) {
      const double r = std::exp(std::log(v.lambda_lo * 0.1) + (std::log(v.lambda_hi * 10.0) - std::log(v.lambda_lo * 0.1)) * k / (radii - 1));
      for (double s : {1.0, -1.0}) {
        const cplx z = std::polar(r, s * mu);
        sv.factorize(z);
        const double nrm = power_norm([&](const Vec& x) { return Vec(sv.solve(x)); },
                                      [&](const Vec& x) { return Vec(sv.solve_adjoint(x)); }, A.rows(), 40);
        worst = std::max(worst, std::abs(z) * nrm);
      }
    }
    prof.resolvent_bounds.emplace_back(mu, worst);
  }
  return prof;
}

/// psi(L) F via the contour engine.
inline Mat apply_psi(const SectorialView& v, const AuxiliaryFunction& f, const Mat& F, const CalculusOptions& opt = {},
                     QuadratureReport* rep = nullptr) {
  return apply_family(v, {f}, F, opt, rep).front();
}
inline Vec apply_psi(const DivFormOperator& L, const AuxiliaryFunction& f, const Vec& x, const CalculusOptions& opt = {}) {
  return apply_psi(L.view(), f, Mat(x), opt).col(0);
}

/// L^{-1/2} on the range of L (the kernel part is dropped).
inline Mat inv_sqrt_apply(const DivFormOperator& L, const Mat& F, const CalculusOptions& opt = {}) {
  return apply_psi(L.view(), psi::inv_sqrt(), F, opt);
}
inline Vec inv_sqrt_apply(const DivFormOperator& L, const Vec& f, const CalculusOptions& opt = {}) {
  return inv_sqrt_apply(L, Mat(f), opt).col(0);
}

/// L^{1/2} via the splitting z^{1/2} = z * z^{-1/2}: the quadrature only ever
/// sees the decaying integrand z^{-1/2}, followed by one application of L.
inline Mat sqrt_apply(const DivFormOperator& L, const Mat& F, const CalculusOptions& opt = {}) {
  return L.matrix() * inv_sqrt_apply(L, F, opt);
}
inline Vec sqrt_apply(const DivFormOperator& L, const Vec& f, const CalculusOptions& opt = {}) {
  return sqrt_apply(L, Mat(f), opt).col(0);
}
inline constexpr const char* sqrt_splitting = "z^1/2 = z * z^-1/2";

/// e^{-t L^{1/2}} f; the kernel component (constants) is carried along unchanged.
inline Vec poisson_semigroup(const DivFormOperator& L, double t, const Vec& f, const CalculusOptions& opt = {}) {
  require(t > 0.0, "poisson_semigroup: t must be positive");
  if (t < L.grid().min_h()) std::cerr << "warning: t below the grid spacing, continuum comparison degrades\n";
  return apply_psi(L.view(), psi::poisson(t), Mat(f), opt).col(0);
}

/// Resolvent bank for the Poisson extension over a whole t-grid: every
/// e^{-t L^{1/2}} and its t-derivatives are weighted sums of the same solves.
inline ResolventBank poisson_bank(const SectorialView& v, const std::vector<double>& tgrid, const Mat& F,
                                  const CalculusOptions& opt = {}) {
  require(!tgrid.empty(), "poisson_bank: empty t-grid");
  std::vector<AuxiliaryFunction> probes;
  const double tmin = *std::min_element(tgrid.begin(), tgrid.end());
  const double tmax = *std::max_element(tgrid.begin(), tgrid.end());
  // Derivatives are evaluated as L times a bounded symbol, so the probes are
  // the semigroup itself and z^{-1/2} e^{-t z^{1/2}}.
  for (double t : {tmin, std::sqrt(tmin * tmax), tmax}) {
    probes.push_back(psi::poisson(t));
    probes.push_back(psi::poisson_inv_sqrt(t));
  }
  return build_bank(v, probes, F, opt);
}

inline Mat dirac_semigroup(const DiracOperator& db, double t, const Mat& H, const CalculusOptions& opt = {}) {
  require(t > 0.0, "dirac_semigroup: t must be positive");
  return apply_psi(db.squared_view(), psi::poisson(t), H, opt);
}
inline Vec dirac_semigroup(const DiracOperator& db, double t, const Vec& h, const CalculusOptions& opt = {}) {
  return dirac_semigroup(db, t, Mat(h), opt).col(0);
}

/// R_L f = grad L^{-1/2} f.
inline Vec riesz_transform(const DivFormOperator& L, const Vec& f, const CalculusOptions& opt = {}) {
  return L.grad() * inv_sqrt_apply(L, f, opt);
}

/// Dense oracle for L or (DB)^2.
inline EigenOracle oracle_eigen(const DivFormOperator& L) { return oracle_eigen(L.matrix()); }
inline EigenOracle oracle_eigen(const DiracOperator& db) { return oracle_eigen(db.squared()); }

}  // namespace scalc
