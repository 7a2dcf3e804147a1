#pragma once

// Boundary value problems for d_t(a d_t u) + div(d grad u) = 0 via the Poisson
// semigroup u(t) = e^{-t L^{1/2}} f, the Neumann ansatz, the truncated Hoelder
// construction, and a Chebyshev-in-t energy solve used as compatibility oracle.

#include "scalc/analysis.hpp"
#include "scalc/samples.hpp"

#include <map>

#include <unsupported/Eigen/MatrixFunctions>

namespace scalc {

using Curve = std::vector<std::pair<double, double>>;

/// p^* = np/(n-p) for p < n, infinity otherwise.
inline double sobolev_upper(double p, int n) {
  return p < n ? n * p / (n - p) : std::numeric_limits<double>::infinity();
}
/// p_* = np/(n+p).
inline double sobolev_lower(double p, int n) { return n * p / (n + p); }

/// Very fine t-grid used for boundary-trace curves (t from 1e-7 period up to the period).
inline TGrid trace_tgrid(const GridSpec& g) { return make_tgrid(1e-7 * g.period(), g.period(), 8); }

/// e^{-t L^{1/2}} F and its t-derivatives for arbitrary t in a range, from one bank.
class PoissonExtension {
 public:
  PoissonExtension(const DivFormOperator& L, const Mat& F, double t_lo, double t_hi, const CalculusOptions& opt = {})
      : L_(&L), bank_(poisson_bank(L.view(), {t_lo, t_hi}, F, opt)) {}

  [[nodiscard]] Mat u(double t) const { return bank_.apply(psi::poisson(t)); }
  /// d_t u = -L (z^{-1/2} e^{-t z^{1/2}})(L) F.
  [[nodiscard]] Mat dt(double t) const { return -(L_->matrix() * bank_.apply(psi::poisson_inv_sqrt(t))); }
  /// d_tt u = L u.
  [[nodiscard]] Mat dtt(double t) const { return L_->matrix() * bank_.apply(psi::poisson(t)); }
  [[nodiscard]] const ResolventBank& bank() const { return bank_; }
  [[nodiscard]] const DivFormOperator& op() const { return *L_; }

 private:
  const DivFormOperator* L_;
  ResolventBank bank_;
};

struct BvpSolution {
  std::string kind;
  Vec f;         // Dirichlet trace
  Vec g;         // conormal derivative -a L^{1/2} f where applicable
  HalfSpaceField u;
  HalfSpaceField conormal_gradient;  // per cell [a d_t u, grad u]
  std::map<std::string, double> diagnostics;
  std::map<std::string, Curve> curves;
  double residual_second = 0.0;  // max over interior nodes, relative to the node scale
  double residual_first = 0.0;
};

namespace detail {

inline constexpr double fd_delta = 0.01;  // step in log t for the residual stencils

/// Five-point first and second derivatives in tau = log t.
inline std::pair<Mat, Mat> log_derivs(const std::array<Mat, 5>& v) {
  const double d = fd_delta;
  Mat d1 = (-v[4] + 8.0 * v[3] - 8.0 * v[1] + v[0]) / (12.0 * d);
  Mat d2 = (-v[4] + 16.0 * v[3] - 30.0 * v[2] + 16.0 * v[1] - v[0]) / (12.0 * d * d);
  return {d1, d2};
}

/// Max over per-cell Euclidean norms is avoided on purpose: residuals are
/// measured in discrete L^2.
inline double rel(const Vec& r, double scale) { return scale > 0.0 ? r.norm() / scale : 0.0; }

}  // namespace detail

/// Second-order residual a d_tt u - K u and first-order residual d_t F + DB F,
/// F = [a d_t u, grad u], at the interior nodes of tg. t-derivatives come from
/// five-point differences in log t; only u (and the exact F) come from the calculus.
inline std::pair<double, double> pde_residuals(const PoissonExtension& P, const DiracOperator& db, const TGrid& tg,
                                               std::size_t col = 0) {
  const DivFormOperator& L = P.op();
  const Eigen::Index c = static_cast<Eigen::Index>(col);
  double r2 = 0.0, r1 = 0.0;
  for (std::size_t j = 1; j + 1 < tg.size(); ++j) {
    const double t = tg.t[j];
    std::array<Mat, 5> v, Fv;
    for (int k = -2; k <= 2; ++k) {
      const double tk = t * std::exp(k * detail::fd_delta);
      Vec uk = P.u(tk).col(c);
      v[k + 2] = Mat(uk);
      Fv[k + 2] = Mat(db.join(L.mul_a(P.dt(tk).col(c)), L.grad() * uk));
    }
    auto [d1, d2] = detail::log_derivs(v);
    Vec dttu = (d2.col(0) - d1.col(0)) / (t * t);
    Vec a_dtt = L.mul_a(dttu);
    Vec Ku = L.stiffness() * v[2].col(0);
    const double s2 = a_dtt.norm() + Ku.norm();
    r2 = std::max(r2, detail::rel(a_dtt - Ku, s2));
    Vec dtF = detail::log_derivs(Fv).first.col(0) / t;
    Vec DBF = db.apply(Fv[2].col(0));
    r1 = std::max(r1, detail::rel(dtF + DBF, dtF.norm() + DBF.norm()));
  }
  return {r2, r1};
}

/// Fills u(t_j) and the conormal gradient on tg.
inline void fill_extension(const PoissonExtension& P, const TGrid& tg, BvpSolution& sol, std::size_t col = 0) {
  const DivFormOperator& L = P.op();
  const GridSpec& g = L.grid();
  const Eigen::Index c = static_cast<Eigen::Index>(col);
  sol.u = make_halfspace(g, g.m, tg);
  sol.conormal_gradient = make_halfspace(g, g.m + g.n * g.m, tg);
  for (std::size_t j = 0; j < tg.size(); ++j) {
    Vec uj = P.u(tg.t[j]).col(c);
    sol.u.values.col(static_cast<Eigen::Index>(j)) = uj;
    Vec h(g.dirac_dim());
    h << L.mul_a(P.dt(tg.t[j]).col(c)), L.grad() * uj;
    sol.conormal_gradient.values.col(static_cast<Eigen::Index>(j)) = interleave_dirac(g, h);
  }
}

/// Whitney mean over W(t_j, x) of |U - U0(x)|^2, for every cell x.
inline RVec whitney_deviation(const HalfSpaceField& U, const Vec& U0, std::size_t j) {
  const GridSpec& g = U.grid;
  const Eigen::Index nc = U.ncomp, cells = g.cells();
  const double t = U.tgrid.t[j];
  RVec ball = ball_kernel(g, t);
  const double count = ball.sum();
  RVec e2 = RVec::Zero(cells);
  std::vector<RVec> re(nc, RVec::Zero(cells)), im(nc, RVec::Zero(cells));
  double wsum = 0.0;
  for (std::size_t k = 0; k < U.tgrid.size(); ++k) {
    const double s = U.tgrid.t[k];
    if (s <= 0.5 * t || s >= 2.0 * t) continue;
    const double w = U.tgrid.w[k];
    wsum += w;
    e2 += w * U.energy(k);
    for (Eigen::Index a = 0; a < nc; ++a)
      for (Eigen::Index c = 0; c < cells; ++c) {
        const cplx v = U.values(c * nc + a, static_cast<Eigen::Index>(k));
        re[a][c] += w * v.real();
        im[a][c] += w * v.imag();
      }
  }
  // |U - U0|^2 = |U|^2 - 2 Re(conj(U0) U) + |U0|^2, each term averaged by convolution.
  RVec mean = periodic_convolve(g, e2, ball) / (wsum * count);
  for (Eigen::Index a = 0; a < nc; ++a) {
    RVec mr = periodic_convolve(g, re[a], ball) / (wsum * count);
    RVec mi = periodic_convolve(g, im[a], ball) / (wsum * count);
    for (Eigen::Index c = 0; c < cells; ++c) {
      const cplx f0 = U0[c * nc + a];
      mean[c] += -2.0 * (f0.real() * mr[c] + f0.imag() * mi[c]) + std::norm(f0);
    }
  }
  return mean.cwiseMax(0.0);
}

/// max_x (Whitney mean over W(t,x) of |U - U0(x)|^2)^{1/2} for every t of U's grid.
inline Curve whitney_trace_curve(const HalfSpaceField& U, const Vec& U0) {
  const std::size_t nt = U.tgrid.size();
  Curve out(nt);
  parallel_for(nt, default_workers(), [&](std::size_t j) {
    out[j] = {U.tgrid.t[j], std::sqrt(whitney_deviation(U, U0, j).maxCoeff())};
  });
  return out;
}

/// a / b; 0 when both vanish (zero data), infinity when only b does.
inline double ratio(double a, double b) { return b > 0.0 ? a / b : (a > 0.0 ? std::numeric_limits<double>::infinity() : 0.0); }

/// Ratios of the Dirichlet comparability triple; invariant under rescaling.
inline void dirichlet_diagnostics(const DivFormOperator& L, BvpSolution& sol, double p) {
  const GridSpec& g = L.grid();
  const double nt = lp_of_abs(g, nt_maximal(sol.u), p);
  const double data = hp_quasinorm(g, L.mul_a(sol.f), g.m, p);
  HalfSpaceField tgu = make_halfspace(g, g.n * g.m, sol.u.tgrid);
  for (std::size_t j = 0; j < sol.u.tgrid.size(); ++j)
    tgu.values.col(static_cast<Eigen::Index>(j)) = sol.u.tgrid.t[j] * (L.grad() * sol.u.at(j));
  const double sq = tent_norm(tgu, 0.0, p);
  sol.diagnostics["nt_u"] = nt;
  sol.diagnostics["hp_af"] = data;
  sol.diagnostics["square_tgrad_u"] = sq;
  sol.diagnostics["ratio_nt_data"] = ratio(nt, data);
  sol.diagnostics["ratio_square_data"] = ratio(sq, data);
  sol.diagnostics["ratio_nt_square"] = ratio(nt, sq);
  double sup = 0.0;
  for (std::size_t j = 0; j < sol.u.tgrid.size(); ++j) sup = std::max(sup, hp_quasinorm(g, L.mul_a(sol.u.at(j)), g.m, p));
  sol.diagnostics["sup_hp_au_ratio"] = ratio(sup, data);
}

struct SolveOptions {
  CalculusOptions calc;
  bool trace_curves = true;
  bool residuals = true;
};

/// The Poisson extension of f on the default t-grid, with residuals and the
/// Whitney trace curve.
inline BvpSolution poisson_solution(const DivFormOperator& L, const Vec& f, const TGrid& tg, const SolveOptions& opt,
                                    std::string kind) {
  const GridSpec& g = L.grid();
  require(f.size() == g.scalar_dim(), "boundary data has wrong size");
  BvpSolution sol;
  sol.kind = std::move(kind);
  sol.f = f;
  const TGrid tr = trace_tgrid(g);
  const double lo = std::min(tg.t.front(), opt.trace_curves ? tr.t.front() : tg.t.front()) * 0.9;
  const double hi = std::max(tg.t.back(), tr.t.back()) * 1.1;
  if (f.cwiseAbs().maxCoeff() == 0.0) {
    sol.u = make_halfspace(g, g.m, tg);
    sol.conormal_gradient = make_halfspace(g, g.m + g.n * g.m, tg);
    sol.g = Vec::Zero(g.scalar_dim());
    if (opt.trace_curves) {
      Curve zero;
      for (double t : tr.t) zero.emplace_back(t, 0.0);
      sol.curves["whitney_trace_u"] = zero;
    }
    return sol;
  }
  PoissonExtension P(L, Mat(f), lo, hi, opt.calc);
  fill_extension(P, tg, sol);
  if (opt.residuals) {
    DiracOperator db(L);
    std::tie(sol.residual_second, sol.residual_first) = pde_residuals(P, db, tg);
  }
  if (opt.trace_curves) {
    BvpSolution fine;
    fill_extension(P, tr, fine);
    sol.curves["whitney_trace_u"] = whitney_trace_curve(fine.u, f);
  }
  return sol;
}

/// Dirichlet problem with L^p / H^p data (p in (1/2, inf)).
inline BvpSolution solve_dirichlet(const DivFormOperator& L, const Vec& f, double p, const SolveOptions& opt = {}) {
  if (!(p > 0.5)) throw UsageError("exponent p must exceed 1/2");
  const GridSpec& g = L.grid();
  if (p <= 1.0 && !has_zero_mean(L.mul_a(f), g.m))
    throw ContractError("Dirichlet data in a^{-1}H^p with p <= 1 must have a f mean-zero");
  BvpSolution sol = poisson_solution(L, f, default_tgrid(g), opt, p <= 1.0 ? "dirichlet_hp" : "dirichlet");
  sol.g = -L.mul_a(sqrt_apply(L, f, opt.calc));
  dirichlet_diagnostics(L, sol, p);
  return sol;
}

inline BvpSolution solve_dirichlet_hp(const DivFormOperator& L, const Vec& f, double p, const SolveOptions& opt = {}) {
  if (!(p > 0.5 && p <= 1.0)) throw UsageError("solve_dirichlet_hp expects p in (1/2, 1]");
  return solve_dirichlet(L, f, p, opt);
}

/// Regularity problem: Poisson extension with the conormal derivative g = -a L^{1/2} f.
inline BvpSolution solve_regularity(const DivFormOperator& L, const Vec& f, double p, const SolveOptions& opt = {}) {
  if (!(p > 0.5)) throw UsageError("exponent p must exceed 1/2");
  const GridSpec& g = L.grid();
  const TGrid tg = default_tgrid(g);
  BvpSolution sol = poisson_solution(L, f, tg, opt, "regularity");
  sol.g = -L.mul_a(sqrt_apply(L, f, opt.calc));
  if (f.cwiseAbs().maxCoeff() == 0.0) {
    for (const char* k : {"nt_grad_u", "square_tgrad_dtu", "hp_grad_f", "hp_g", "whitney_osc_C", "sup_hp_grad_u_ratio",
                          "sup_hp_adtu_ratio"})
      sol.diagnostics[k] = 0.0;
    return sol;
  }
  const Eigen::Index m = g.m, nm = g.n * g.m;
  PoissonExtension P(L, Mat(f), tg.t.front() * 0.9, tg.t.back() * 1.1, opt.calc);
  // Full gradient (d_t u, grad u) and t grad(d_t u) with grad = (d_t, grad_x).
  HalfSpaceField grad_u = make_halfspace(g, m + nm, tg);
  HalfSpaceField tgrad_dtu = make_halfspace(g, m + nm, tg);
  double sup_grad = 0.0, sup_adtu = 0.0;
  for (std::size_t j = 0; j < tg.size(); ++j) {
    const double t = tg.t[j];
    Vec uj = sol.u.at(j);
    Vec dtu = P.dt(t).col(0);
    Vec dttu = P.dtt(t).col(0);
    Vec h1(g.dirac_dim()), h2(g.dirac_dim());
    h1 << dtu, L.grad() * uj;
    h2 << t * dttu, t * (L.grad() * dtu);
    grad_u.values.col(static_cast<Eigen::Index>(j)) = interleave_dirac(g, h1);
    tgrad_dtu.values.col(static_cast<Eigen::Index>(j)) = interleave_dirac(g, h2);
    sup_grad = std::max(sup_grad, hp_quasinorm(g, L.grad() * uj, nm, p));
    sup_adtu = std::max(sup_adtu, hp_quasinorm(g, L.mul_a(dtu), m, p));
  }
  RVec ntg = nt_maximal(grad_u);
  const double nt = lp_of_abs(g, ntg, p);
  const double sq = tent_norm(tgrad_dtu, 0.0, p);
  const double gf = sobolev_homog_norm(g, f, m, p);
  const double gn = hp_quasinorm(g, sol.g, m, p);
  sol.diagnostics["nt_grad_u"] = nt;
  sol.diagnostics["square_tgrad_dtu"] = sq;
  sol.diagnostics["hp_grad_f"] = gf;
  sol.diagnostics["hp_g"] = gn;
  sol.diagnostics["ratio_nt_gradf"] = ratio(nt, gf);
  sol.diagnostics["ratio_square_gradf"] = ratio(sq, gf);
  sol.diagnostics["ratio_g_gradf"] = ratio(gn, gf);
  sol.diagnostics["ratio_nt_square"] = ratio(nt, sq);
  sol.diagnostics["sup_hp_grad_u_ratio"] = ratio(sup_grad, gf);
  sol.diagnostics["sup_hp_adtu_ratio"] = ratio(sup_adtu, gn);
  sol.diagnostics["p_star"] = sobolev_upper(p, g.n);
  // (ii): Whitney oscillation of u - f(x) against (t N~(grad u)(x))^2.
  double worst = 0.0;
  for (std::size_t j = 0; j < tg.size(); ++j) {
    RVec dev = whitney_deviation(sol.u, f, j);
    for (Eigen::Index c = 0; c < g.cells(); ++c) {
      const double bound = tg.t[j] * ntg[c];
      if (bound > 0.0) worst = std::max(worst, dev[c] / (bound * bound));
    }
  }
  sol.diagnostics["whitney_osc_C"] = worst;
  if (opt.trace_curves) {
    const TGrid tr = trace_tgrid(g);
    PoissonExtension Pf(L, Mat(f), tr.t.front() * 0.9, tr.t.back() * 1.1, opt.calc);
    BvpSolution fine;
    fill_extension(Pf, tr, fine);
    Vec h0(g.dirac_dim());
    h0 << sol.g, L.grad() * f;
    sol.curves["whitney_trace_conormal_gradient"] = whitney_trace_curve(fine.conormal_gradient, interleave_dirac(g, h0));
  }
  return sol;
}

/// Neumann problem via the ansatz u = -e^{-t L^{1/2}} (a L^{1/2})^{-1} g; u is
/// reported modulo constants (mean-zero at every t).
inline BvpSolution solve_neumann(const DivFormOperator& L, const Vec& g_data, double p, const SolveOptions& opt = {}) {
  const GridSpec& g = L.grid();
  require(g_data.size() == g.scalar_dim(), "Neumann data has wrong size");
  if (g_data.cwiseAbs().maxCoeff() > 0.0 && !has_zero_mean(g_data, g.m))
    throw ContractError("Neumann data must have zero mean on the torus");
  Vec f = -inv_sqrt_apply(L, L.mul_a_inv(g_data), opt.calc);
  BvpSolution sol = solve_regularity(L, f, p, opt);
  sol.kind = "neumann";
  for (Eigen::Index j = 0; j < sol.u.values.cols(); ++j) sol.u.values.col(j) = subtract_mean(sol.u.values.col(j), g.m);
  if (g_data.cwiseAbs().maxCoeff() > 0.0) {
    const double gnorm = l2_norm(g, g_data);
    PoissonExtension P(L, Mat(f), g.min_h() * 0.5, g.period(), opt.calc);
    Curve flux;
    for (double t : {4.0 * g.min_h(), 2.0 * g.min_h(), g.min_h(), 0.5 * g.min_h()})
      flux.emplace_back(t, l2_norm(g, L.mul_a(P.dt(t).col(0)) - g_data) / gnorm);
    sol.curves["flux_error"] = flux;
    sol.diagnostics["flux_error_tmin"] = flux[2].second;
    sol.diagnostics["conormal_vs_data"] = l2_norm(g, sol.g - g_data) / gnorm;
  }
  return sol;
}

/// Hoelder/BMO data: u = lim_j e^{-t L^{1/2}}(1_{|x| < 2^j h} f), windows centred at cell 0.
inline BvpSolution solve_dirichlet_holder(const DivFormOperator& L, const Vec& f, double alpha, bool declare_iii = false,
                                          const SolveOptions& opt = {}) {
  require(alpha >= 0.0 && alpha < 1.0, "alpha must lie in [0, 1)");
  const GridSpec& g = L.grid();
  const TGrid tg = default_tgrid(g);
  std::vector<double> radii;
  const double reach = g.n == 2 ? std::sqrt(2.0) * 0.5 * g.period() : 0.5 * g.period();
  for (double r = g.min_h(); ; r *= 2.0) {
    radii.push_back(r);
    if (r > reach) break;
  }
  Mat F(g.scalar_dim(), static_cast<Eigen::Index>(radii.size()));
  for (std::size_t j = 0; j < radii.size(); ++j) F.col(static_cast<Eigen::Index>(j)) = mask(g, f, g.m, window(g, 0, radii[j]));
  BvpSolution sol;
  sol.kind = "holder";
  sol.f = f;
  sol.g = Vec::Zero(g.scalar_dim());
  const std::size_t last = radii.size() - 1;
  if (f.cwiseAbs().maxCoeff() == 0.0) {
    sol.u = make_halfspace(g, g.m, tg);
    sol.conormal_gradient = make_halfspace(g, g.m + g.n * g.m, tg);
    sol.diagnostics["ratio_carleson_holder"] = 0.0;
    return sol;
  }
  PoissonExtension P(L, F, tg.t.front() * 0.9, tg.t.back() * 1.1, opt.calc);
  fill_extension(P, tg, sol, last);
  // Successive truncation differences on the interior cylinder [h, period/4] x B(0, period/4).
  RVec cyl = window(g, 0, 0.25 * g.period());
  Curve diffs;
  for (std::size_t j = 0; j + 1 < radii.size(); ++j) {
    double acc = 0.0;
    for (std::size_t k = 0; k < tg.size(); ++k) {
      if (tg.t[k] > 0.25 * g.period()) break;
      Mat U = P.u(tg.t[k]);
      Vec d = mask(g, U.col(static_cast<Eigen::Index>(j + 1)) - U.col(static_cast<Eigen::Index>(j)), g.m, cyl);
      acc += tg.w[k] * d.squaredNorm() * g.cell_volume();
    }
    diffs.emplace_back(radii[j + 1], std::sqrt(acc));
  }
  sol.curves["truncation_differences"] = diffs;
  sol.diagnostics["truncation_last_difference"] = diffs.empty() ? 0.0 : diffs.back().second;
  if (opt.residuals) {
    DiracOperator db(L);
    std::tie(sol.residual_second, sol.residual_first) = pde_residuals(P, db, tg, last);
  }
  HalfSpaceField tgu = make_halfspace(g, g.n * g.m, tg);
  for (std::size_t j = 0; j < tg.size(); ++j)
    tgu.values.col(static_cast<Eigen::Index>(j)) = tg.t[j] * (L.grad() * sol.u.at(j));
  const double carl = carleson(tgu, alpha).maxCoeff();
  const double hn = holder_norm(g, f, g.m, alpha);
  sol.diagnostics["carleson_tgrad_u"] = carl;
  sol.diagnostics["holder_f"] = hn;
  sol.diagnostics["ratio_carleson_holder"] = ratio(carl, hn);
  Curve cont;
  for (std::size_t j = 0; j < tg.size(); ++j) cont.emplace_back(tg.t[j], (sol.u.at(j) - f).cwiseAbs().maxCoeff());
  sol.curves["interior_continuity"] = cont;
  if (declare_iii) {
    double sup = 0.0;
    for (std::size_t j = 0; j < tg.size(); ++j) sup = std::max(sup, holder_norm(g, sol.u.at(j), g.m, alpha));
    sol.diagnostics["sup_holder_u_ratio"] = ratio(sup, hn);
  }
  return sol;
}

// ---------------------------------------------------------------- energy oracle

enum class TopCondition { semigroup_matched, zero_dirichlet };

struct EnergySolution {
  double T = 0.0;
  std::vector<double> t;  // Chebyshev nodes, t[0] = 0, t.back() = T
  Mat u;                  // column i holds u(t_i)
  double residual = 0.0;
  TopCondition top = TopCondition::semigroup_matched;
};

/// Chebyshev differentiation matrix on [-1, 1] with nodes x_j = cos(pi j / K).
inline std::pair<RVec, Eigen::MatrixXd> chebyshev(int K) {
  RVec x(K + 1);
  for (int j = 0; j <= K; ++j) x[j] = std::cos(pi * j / K);
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(K + 1, K + 1);
  auto c = [K](int j) { return (j == 0 || j == K) ? 2.0 : 1.0; };
  for (int i = 0; i <= K; ++i)
    for (int j = 0; j <= K; ++j)
      if (i != j) D(i, j) = c(i) / c(j) * (((i + j) % 2) ? -1.0 : 1.0) / (x[i] - x[j]);
  for (int i = 0; i <= K; ++i) D(i, i) = -D.row(i).sum();
  return {x, D};
}

/// Dense L^{1/2} by the Schur square root of L + P0, P0 the spectral
/// projection onto the kernel (so the zero eigenvalues are lifted to one).
inline Mat dense_sqrt(const DivFormOperator& L) {
  const Eigen::Index n = L.grid().scalar_dim();
  Mat P0(n, n);
  for (Eigen::Index j = 0; j < n; ++j) P0.col(j) = L.kernel_component(Vec::Unit(n, j));
  Mat S = (Mat(L.matrix()) + P0).sqrt();
  return S - P0;
}

/// Chebyshev node count tied to the spatial resolution.
inline int energy_nodes(const GridSpec& g) { return std::max(16, g.N); }

/// Direct solve of a d_tt u - K u = 0 on [0, T] x torus, u(0) = f, with either
/// the absorbing condition d_t u + L^{1/2} u = 0 or u = 0 at t = T.
inline EnergySolution energy_solution(const DivFormOperator& L, const Vec& f, double T, int K = 0,
                                      TopCondition top = TopCondition::semigroup_matched) {
  const GridSpec& g = L.grid();
  require(T >= g.period() - 1e-12, "energy strip height must be at least the period");
  if (K <= 0) K = energy_nodes(g);
  const Eigen::Index n = g.scalar_dim();
  EnergySolution es;
  es.T = T;
  es.top = top;
  auto [x, Dx] = chebyshev(K);
  // t = T (1 - x) / 2 so that node 0 sits at t = 0.
  Eigen::MatrixXd Dt = Dx * (-2.0 / T);
  Eigen::MatrixXd D2 = Dt * Dt;
  for (int i = 0; i <= K; ++i) es.t.push_back(T * (1.0 - x[i]) / 2.0);
  if (f.cwiseAbs().maxCoeff() == 0.0) {
    es.u = Mat::Zero(n, K + 1);
    return es;
  }
  Mat S;
  if (top == TopCondition::semigroup_matched) {
    if (n > dense_limit) {
      top = TopCondition::zero_dirichlet;
      es.top = top;
    } else {
      S = dense_sqrt(L);
    }
  }
  std::vector<Triplet> tr;
  const SpMat& A = L.a_mat();
  const SpMat& Kmat = L.stiffness();
  auto idx = [n](int i, Eigen::Index r) { return static_cast<Eigen::Index>(i) * n + r; };
  for (Eigen::Index r = 0; r < n; ++r) tr.emplace_back(idx(0, r), idx(0, r), 1.0);
  for (int i = 1; i < K; ++i) {
    for (int k = 0; k <= K; ++k) {
      const double w = D2(i, k);
      for (int o = 0; o < A.outerSize(); ++o)
        for (SpMat::InnerIterator it(A, o); it; ++it) tr.emplace_back(idx(i, it.row()), idx(k, it.col()), w * it.value());
    }
    for (int o = 0; o < Kmat.outerSize(); ++o)
      for (SpMat::InnerIterator it(Kmat, o); it; ++it) tr.emplace_back(idx(i, it.row()), idx(i, it.col()), -it.value());
  }
  if (top == TopCondition::semigroup_matched) {
    for (int k = 0; k <= K; ++k)
      for (Eigen::Index r = 0; r < n; ++r) tr.emplace_back(idx(K, r), idx(k, r), Dt(K, k));
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index c = 0; c < n; ++c)
        if (S(r, c) != cplx(0.0)) tr.emplace_back(idx(K, r), idx(K, c), S(r, c));
  } else {
    for (Eigen::Index r = 0; r < n; ++r) tr.emplace_back(idx(K, r), idx(K, r), 1.0);
  }
  const Eigen::Index dim = n * (K + 1);
  SpMat M(dim, dim);
  M.setFromTriplets(tr.begin(), tr.end());
  M.makeCompressed();
  Vec b = Vec::Zero(dim);
  b.head(n) = f;
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu(M);
  if (lu.info() != Eigen::Success) throw NumericalError("energy system is singular");
  Vec sol = lu.solve(b);
  // One step of iterative refinement keeps the weak residual at rounding level.
  sol += lu.solve(Vec(b - M * sol));
  es.residual = (M * sol - b).norm() / b.norm();
  es.u = Mat(n, K + 1);
  for (int i = 0; i <= K; ++i) es.u.col(i) = sol.segment(static_cast<Eigen::Index>(i) * n, n);
  return es;
}

/// Relative L^2 error between the semigroup extension and the energy solution
/// on [0, T/2] (trapezoid rule over the Chebyshev nodes).
inline double check_compatibility(const DivFormOperator& L, const Vec& f, const EnergySolution& es,
                                  const CalculusOptions& opt = {}) {
  if (f.cwiseAbs().maxCoeff() == 0.0) return es.u.cwiseAbs().maxCoeff();
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < es.t.size(); ++i)
    if (es.t[i] <= 0.5 * es.T + 1e-12) idx.push_back(i);
  double tpos = es.T;
  for (auto i : idx)
    if (es.t[i] > 0.0) tpos = std::min(tpos, es.t[i]);
  PoissonExtension P(L, Mat(f), tpos * 0.9, es.T, opt);
  double num = 0.0, den = 0.0;
  for (std::size_t q = 0; q < idx.size(); ++q) {
    const std::size_t i = idx[q];
    const double left = q > 0 ? es.t[idx[q - 1]] : es.t[i];
    const double right = q + 1 < idx.size() ? es.t[idx[q + 1]] : es.t[i];
    const double w = 0.5 * std::abs(right - left);
    Vec us = es.t[i] > 0.0 ? Vec(P.u(es.t[i]).col(0)) : f;
    num += w * (us - es.u.col(static_cast<Eigen::Index>(i))).squaredNorm();
    den += w * us.squaredNorm();
  }
  return std::sqrt(num / den);
}

}  // namespace scalc
