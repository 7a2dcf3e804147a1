#pragma once

// Contour realization of the holomorphic functional calculus.
//
// psi(A) f = (1 / 2 pi i) \int_Gamma psi(z) (z - A)^{-1} f dz, with Gamma the
// boundary of the sector |arg z| < nu traversed around the spectrum: inward
// along r e^{+i nu}, outward along r e^{-i nu}. With z = e^s e^{+-i nu} the
// integrand is sampled on a uniform s grid (trapezoid rule, exponentially
// convergent for integrands in the decay class) between cutoffs chosen from the
// decay of psi. The spacing is halved until the relative change drops below
// the tolerance. Inputs are split into their range part (handled by the
// integral) and kernel part (multiplied by psi(0+)).

#include "scalc/operators.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <memory>

namespace scalc {

struct AuxiliaryFunction {
  std::string label;
  std::function<cplx(cplx)> eval;
  double sigma = 0.0;  // decay order at 0: |psi| <~ |z|^sigma
  double tau = 0.0;    // decay order at infinity: |psi| <~ |z|^-tau
  double mu = pi;      // half-angle of the sector of holomorphy
  cplx value_at_zero = 0.0;

  cplx operator()(cplx z) const { return eval(z); }
};

namespace psi {

/// z^sigma (1 + z)^(-sigma - tau).
inline AuxiliaryFunction sigma_tau(double sigma, double tau) {
  return {"z^" + std::to_string(sigma) + "(1+z)^-" + std::to_string(sigma + tau),
          [=](cplx z) { return std::pow(z, sigma) * std::pow(1.0 + z, -sigma - tau); }, sigma, tau, pi, 0.0};
}
/// Default family member with sigma = tau = 2.
inline AuxiliaryFunction default_rational() { return sigma_tau(2.0, 2.0); }
/// z^{1/2} exp(-z^{1/2}), the auxiliary function behind t d_t of the Poisson extension.
inline AuxiliaryFunction sqrt_exp() {
  return {"z^1/2 e^-z^1/2", [](cplx z) {
            const cplx r = std::sqrt(z);
            return r * std::exp(-r);
          },
          0.5, 100.0, pi, 0.0};
}
inline AuxiliaryFunction z_exp() {
  return {"z e^-z", [](cplx z) { return z * std::exp(-z); }, 1.0, 100.0, 0.5 * pi, 0.0};
}
/// exp(-t z^{1/2}); psi(0+) = 1 so kernel components are carried along.
inline AuxiliaryFunction poisson(double t) {
  return {"e^-t sqrt z", [t](cplx z) { return std::exp(-t * std::sqrt(z)); }, 0.0, 100.0, pi, 1.0};
}
/// d/dt exp(-t z^{1/2}) = -z^{1/2} exp(-t z^{1/2}).
inline AuxiliaryFunction poisson_dt(double t) {
  return {"-sqrt z e^-t sqrt z", [t](cplx z) {
            const cplx r = std::sqrt(z);
            return -r * std::exp(-t * r);
          },
          0.5, 100.0, pi, 0.0};
}
/// d^2/dt^2 exp(-t z^{1/2}) = z exp(-t z^{1/2}).
inline AuxiliaryFunction poisson_dtt(double t) {
  return {"z e^-t sqrt z", [t](cplx z) { return z * std::exp(-t * std::sqrt(z)); }, 1.0, 100.0, pi, 0.0};
}
/// z^{-1/2} exp(-t z^{1/2}); d_t e^{-t L^{1/2}} = -L (this)(L) keeps the integrand bounded for small t.
inline AuxiliaryFunction poisson_inv_sqrt(double t) {
  return {"z^-1/2 e^-t sqrt z", [t](cplx z) {
            const cplx r = std::sqrt(z);
            return std::exp(-t * r) / r;
          },
          -0.5, 100.0, pi, 0.0};
}
/// z^{-1/2}; only meaningful on the range (kernel part dropped).
inline AuxiliaryFunction inv_sqrt() {
  return {"z^-1/2", [](cplx z) { return 1.0 / std::sqrt(z); }, -0.5, 0.5, pi, 0.0};
}
/// (1 + s z)^{-1}.
inline AuxiliaryFunction resolvent_family(double s) {
  return {"(1+sz)^-1", [s](cplx z) { return 1.0 / (1.0 + s * z); }, 0.0, 1.0, pi, 1.0};
}
/// z -> psi(s z), the second-order (s = t^2) scaling used by extensions.
inline AuxiliaryFunction scaled(const AuxiliaryFunction& f, double s) {
  AuxiliaryFunction out = f;
  out.label = f.label + "@" + std::to_string(s);
  out.eval = [inner = f.eval, s](cplx z) { return inner(s * z); };
  return out;
}
inline AuxiliaryFunction product(const AuxiliaryFunction& f, const AuxiliaryFunction& g) {
  return {f.label + "*" + g.label, [a = f.eval, b = g.eval](cplx z) { return a(z) * b(z); }, f.sigma + g.sigma,
          f.tau + g.tau, std::min(f.mu, g.mu), f.value_at_zero * g.value_at_zero};
}

}  // namespace psi

/// Samples |psi| on the sector boundary and returns the largest ratio
/// |psi(z)| / (C min(|z|^sigma, |z|^-tau)) with C fitted at |z| = 1.
inline double check_decay(const AuxiliaryFunction& f, double angle) {
  const double c1 = std::max(std::abs(f(cplx(1.0, 0.0))), 1e-300);
  double worst = 0.0;
  for (double lr = -8.0; lr <= 8.0; lr += 0.25) {
    const double r = std::pow(10.0, lr);
    for (double s : {-1.0, 0.0, 1.0}) {
      const cplx z = std::polar(r, s * angle);
      const double bound = c1 * std::min(std::pow(r, f.sigma), std::pow(r, -f.tau));
      worst = std::max(worst, std::abs(f(z)) / bound);
    }
  }
  return worst;
}

struct Contour {
  double nu = 0.0;
  double r_min = 0.0;
  double r_max = 0.0;
  double ds = 0.0;
  std::vector<cplx> nodes;    // z_j
  std::vector<cplx> weights;  // w_j so that psi(A) f ~ sum_j w_j psi(z_j) (z_j - A)^{-1} f
  [[nodiscard]] std::size_t per_ray() const { return nodes.size() / 2; }
};

struct CalculusOptions {
  double tol = 1e-10;   // node-doubling stopping criterion (relative change)
  int max_levels = 5;   // halvings beyond the base spacing
  double nu = -1.0;     // ray angle; default (omega + pi) / 2
  int workers = 0;      // 0: default_workers()
  double margin = 1e-6; // resolvent refuses |arg z| <= omega + margin
};

struct QuadratureReport {
  int levels = 0;
  double change = 0.0;
  bool converged = false;
  std::size_t solves = 0;
};

/// Cached resolvent solves X_j = (z_j - A)^{-1} P f on a converged contour.
/// Any psi whose decay range lies inside the contour cutoffs can be applied
/// afterwards at the cost of a weighted sum.
class ResolventBank {
 public:
  Contour contour;
  QuadratureReport report;
  std::vector<Mat> solves;  // one block per node, ordered as contour.nodes
  Mat kernel_part;          // F - P F
  Eigen::Index rows = 0, cols = 0;

  [[nodiscard]] Mat apply(const AuxiliaryFunction& f) const {
    Mat out = Mat::Zero(rows, cols);
    for (std::size_t j = 0; j < solves.size(); ++j) {
      const cplx w = contour.weights[j] * f(contour.nodes[j]);
      if (w != cplx(0.0)) out.noalias() += w * solves[j];
    }
    if (f.value_at_zero != cplx(0.0)) out += f.value_at_zero * kernel_part;
    return out;
  }
};

namespace detail {

/// Factorizes z - A for arbitrary z with a single symbolic analysis.
class ShiftedSolver {
 public:
  explicit ShiftedSolver(const SpMat& A) {
    SpMat zero_diag(A.rows(), A.cols());
    zero_diag.setIdentity();
    zero_diag *= 0.0;  // structural zeros keep the diagonal in the pattern
    M_ = SpMat(-A) + zero_diag;
    M_.makeCompressed();
    base_.assign(M_.valuePtr(), M_.valuePtr() + M_.nonZeros());
    for (Eigen::Index k = 0; k < M_.outerSize(); ++k)
      for (SpMat::InnerIterator it(M_, k); it; ++it)
        if (it.row() == it.col()) diag_.push_back(&it.valueRef() - M_.valuePtr());
    lu_.analyzePattern(M_);
  }
  void factorize(cplx z) {
    std::copy(base_.begin(), base_.end(), M_.valuePtr());
    for (auto p : diag_) M_.valuePtr()[p] += z;
    lu_.factorize(M_);
    if (lu_.info() != Eigen::Success) throw NumericalError("sparse LU failed at z=" + std::to_string(z.real()) + "+" + std::to_string(z.imag()) + "i");
  }
  Mat solve(const Mat& F) { return lu_.solve(F); }
  Mat solve_adjoint(const Mat& F) { return lu_.adjoint().solve(F); }
  [[nodiscard]] const SpMat& shifted() const { return M_; }

 private:
  SpMat M_;
  std::vector<cplx> base_;
  std::vector<std::ptrdiff_t> diag_;
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
};

inline double sector_angle(const SectorialView& v, const CalculusOptions& opt) {
  if (opt.nu > 0.0) return opt.nu;
  return 0.5 * (v.omega + pi);
}

/// Cutoffs [r_min, r_max] outside which every probe's integrand is below
/// eps times its spectral scale.
inline std::pair<double, double> cutoffs(const SectorialView& v, double nu, const std::vector<AuxiliaryFunction>& probes,
                                         double eps) {
  double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
  const double lo = v.lambda_lo, hi = v.lambda_hi;
  const double s_lo = std::log10(lo) - 40.0, s_hi = std::log10(hi) + 40.0;
  const double step = 0.05;
  for (const auto& f : probes) {
    double scale = 0.0;
    for (double s = std::log10(lo); s <= std::log10(hi) + 1e-12; s += step)
      for (double ang : {0.0, v.omega, -v.omega}) scale = std::max(scale, std::abs(f(std::polar(std::pow(10.0, s), ang))));
    if (!(scale > 0.0)) continue;
    auto g = [&](double s) {
      const double r = std::pow(10.0, s);
      const double mag = std::max(std::abs(f(std::polar(r, nu))), std::abs(f(std::polar(r, -nu))));
      return mag * std::min(1.0, r / lo);
    };
    double a = s_lo;
    while (a < std::log10(lo) && g(a + step) <= eps * scale) a += step;
    double b = s_hi;
    while (b > std::log10(hi) && g(b - step) <= eps * scale) b -= step;
    if (a <= s_lo + step || b >= s_hi - step)
      throw NumericalError("auxiliary function '" + f.label + "' does not decay within the contour cutoffs");
    rmin = std::min(rmin, std::pow(10.0, a));
    rmax = std::max(rmax, std::pow(10.0, b));
  }
  if (!(rmax > 0.0)) return {lo, hi};
  return {rmin, rmax};
}

}  // namespace detail

/// Builds a resolvent bank for F, refining until every probe's value changes by
/// at most opt.tol (relative, per column).
inline ResolventBank build_bank(const SectorialView& v, const std::vector<AuxiliaryFunction>& probes, const Mat& F,
                                const CalculusOptions& opt = {}) {
  require(v.matrix != nullptr, "build_bank: empty operator view");
  require(F.rows() == v.matrix->rows(), "build_bank: right-hand side size mismatch");
  ResolventBank bank;
  bank.rows = F.rows();
  bank.cols = F.cols();
  Mat PF = v.to_range ? v.to_range(F) : F;
  // Columns that are kernel up to rounding carry no range part at all.
  for (Eigen::Index j = 0; j < F.cols(); ++j)
    if (PF.col(j).norm() <= 1e-12 * F.col(j).norm()) PF.col(j).setZero();
  bank.kernel_part = F - PF;
  const double nu = detail::sector_angle(v, opt);
  require(nu > v.omega && nu < pi, "contour angle must lie between the sector angle and pi");
  const double strip = 0.8 * std::min(nu - v.omega, pi - nu);
  auto [rmin, rmax] = detail::cutoffs(v, nu, probes, opt.tol * 1e-3);
  const double s0 = std::log(rmin), s1 = std::log(rmax);
  double ds = 2.0 * pi * strip / std::log(100.0 / opt.tol);
  const int k0 = std::max(4, static_cast<int>(std::ceil((s1 - s0) / ds)));
  ds = (s1 - s0) / k0;

  const int workers = opt.workers > 0 ? opt.workers : default_workers();
  std::vector<std::unique_ptr<detail::ShiftedSolver>> solvers;
  for (int w = 0; w < std::max(1, workers); ++w) solvers.push_back(std::make_unique<detail::ShiftedSolver>(*v.matrix));

  struct Node {
    double s;
    int ray;  // +1 upper, -1 lower
  };
  std::vector<Node> nodes;
  std::vector<Mat> X;
  auto z_of = [nu](const Node& nd) { return std::exp(nd.s) * std::exp(I * (nd.ray * nu)); };
  auto coef = [](const Node& nd, cplx z) { return -static_cast<double>(nd.ray) * z / (2.0 * pi * I); };
  auto solve_nodes = [&](const std::vector<Node>& batch) {
    std::vector<Mat> out(batch.size());
    const std::size_t W = solvers.size();
    for (std::size_t start = 0; start < batch.size(); start += W) {
      const std::size_t cnt = std::min(W, batch.size() - start);
      parallel_for(cnt, static_cast<int>(W), [&](std::size_t k) {
        auto& sv = *solvers[k];
        const cplx z = z_of(batch[start + k]);
        sv.factorize(z);
        // Re-projecting keeps rounding-level kernel components from being
        // amplified by psi near 0 when psi is singular there.
        out[start + k] = v.to_range ? v.to_range(sv.solve(PF)) : sv.solve(PF);
      });
    }
    return out;
  };
  auto estimate = [&](double spacing) {
    std::vector<Mat> vals(probes.size(), Mat::Zero(F.rows(), F.cols()));
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      const cplx z = z_of(nodes[j]);
      const cplx c = coef(nodes[j], z) * spacing;
      for (std::size_t k = 0; k < probes.size(); ++k) vals[k].noalias() += (c * probes[k](z)) * X[j];
    }
    return vals;
  };

  std::vector<Node> batch;
  for (int k = 0; k <= k0; ++k)
    for (int ray : {+1, -1}) batch.push_back({s0 + k * ds, ray});
  {
    auto sol = solve_nodes(batch);
    nodes = batch;
    X = std::move(sol);
  }
  auto prev = estimate(ds);
  const double fnorm = std::max(PF.norm(), 1e-300);
  int level = 0;
  double change = std::numeric_limits<double>::infinity();
  while (level < opt.max_levels) {
    batch.clear();
    for (int k = 0; k < k0 * (1 << level); ++k)
      for (int ray : {+1, -1}) batch.push_back({s0 + (k + 0.5) * ds, ray});
    auto sol = solve_nodes(batch);
    for (std::size_t j = 0; j < batch.size(); ++j) {
      nodes.push_back(batch[j]);
      X.push_back(std::move(sol[j]));
    }
    ds *= 0.5;
    ++level;
    auto cur = estimate(ds);
    change = 0.0;
    for (std::size_t k = 0; k < probes.size(); ++k)
      for (Eigen::Index j = 0; j < F.cols(); ++j) {
        // Outputs that decayed by more than four orders are measured against the input.
        const double den = std::max({cur[k].col(j).norm(), 1e-4 * PF.col(j).norm(), 1e-13 * fnorm});
        change = std::max(change, (cur[k].col(j) - prev[k].col(j)).norm() / den);
      }
    prev = std::move(cur);
    if (change <= opt.tol) break;
  }
  bank.report.levels = level;
  bank.report.change = change;
  bank.report.converged = change <= opt.tol;
  bank.report.solves = nodes.size();
  // Deterministic node order: by ray, then by s.
  std::vector<std::size_t> order(nodes.size());
  for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (nodes[a].ray != nodes[b].ray) return nodes[a].ray > nodes[b].ray;
    return nodes[a].s < nodes[b].s;
  });
  bank.contour.nu = nu;
  bank.contour.r_min = rmin;
  bank.contour.r_max = rmax;
  bank.contour.ds = ds;
  for (auto j : order) {
    const cplx z = z_of(nodes[j]);
    bank.contour.nodes.push_back(z);
    bank.contour.weights.push_back(coef(nodes[j], z) * ds);
    bank.solves.push_back(std::move(X[j]));
  }
  if (!bank.report.converged)
    throw NumericalError("contour quadrature did not converge under node doubling (relative change " +
                         std::to_string(change) + ")");
  return bank;
}

/// psi_k(A) F for each k, sharing the resolvent solves.
inline std::vector<Mat> apply_family(const SectorialView& v, const std::vector<AuxiliaryFunction>& fs, const Mat& F,
                                     const CalculusOptions& opt = {}, QuadratureReport* rep = nullptr) {
  ResolventBank bank = build_bank(v, fs, F, opt);
  if (rep) *rep = bank.report;
  std::vector<Mat> out;
  out.reserve(fs.size());
  for (const auto& f : fs) out.push_back(bank.apply(f));
  return out;
}

/// Solves (z - A) u = f; refuses z inside the closed sector of angle omega.
inline Mat resolvent(const SectorialView& v, cplx z, const Mat& F, const CalculusOptions& opt = {},
                     bool allow_ill_conditioned = false) {
  if (!allow_ill_conditioned) {
    if (std::abs(z) == 0.0 || std::abs(std::arg(z)) <= v.omega + opt.margin)
      throw ContractError("resolvent: z lies inside the spectral sector (|arg z| <= " + std::to_string(v.omega) + ")");
  }
  detail::ShiftedSolver sv(*v.matrix);
  sv.factorize(z);
  Mat U = sv.solve(F);
  const SpMat& M = sv.shifted();
  for (int it = 0; it < 2; ++it) {
    Mat R = F - M * U;
    bool ok = true;
    for (Eigen::Index j = 0; j < F.cols(); ++j)
      if (R.col(j).norm() > 1e-10 * std::max(F.col(j).norm(), 1e-300)) ok = false;
    if (ok) return U;
    U += sv.solve(R);
  }
  Mat R = F - M * U;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < F.cols(); ++j) worst = std::max(worst, R.col(j).norm() / std::max(F.col(j).norm(), 1e-300));
  if (worst > 1e-10) throw NumericalError("resolvent solve residual " + std::to_string(worst) + " exceeds 1e-10");
  return U;
}

/// Dense spectral decomposition of a matrix; the brute-force oracle.
struct EigenOracle {
  Vec lambda;
  Mat V;
  Mat Vinv;
  Mat schur_U, schur_T;
  double condition = 1.0;
  bool schur = false;
  double zero_tol = 0.0;

  /// psi(A) F; eigenvalues below zero_tol are treated as kernel (psi(0+)).
  [[nodiscard]] Mat apply(const AuxiliaryFunction& f, const Mat& F) const {
    if (!schur) {
      Vec fl(lambda.size());
      for (Eigen::Index i = 0; i < lambda.size(); ++i)
        fl[i] = std::abs(lambda[i]) <= zero_tol ? f.value_at_zero : f(lambda[i]);
      return V * (fl.asDiagonal() * (Vinv * F));
    }
    return schur_U * (function_of_triangular(f) * (schur_U.adjoint() * F));
  }
  [[nodiscard]] Mat matrix(const AuxiliaryFunction& f) const {
    const Eigen::Index n = lambda.size();
    return apply(f, Mat::Identity(n, n));
  }

 private:
  /// Parlett recurrence on the Schur factor; near-coincident eigenvalues use a
  /// centered difference for the divided difference.
  [[nodiscard]] Mat function_of_triangular(const AuxiliaryFunction& f) const {
    const Mat& T = schur_T;
    const Eigen::Index n = T.rows();
    auto fv = [&](cplx z) { return std::abs(z) <= zero_tol ? f.value_at_zero : f(z); };
    Mat Fm = Mat::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) Fm(i, i) = fv(T(i, i));
    for (Eigen::Index p = 1; p < n; ++p)
      for (Eigen::Index i = 0; i + p < n; ++i) {
        const Eigen::Index j = i + p;
        const cplx ti = T(i, i), tj = T(j, j);
        cplx s = T(i, j) * (Fm(j, j) - Fm(i, i));
        for (Eigen::Index k = i + 1; k < j; ++k) s += Fm(i, k) * T(k, j) - T(i, k) * Fm(k, j);
        const double sep = std::abs(tj - ti);
        if (sep > 1e-8 * (1.0 + std::abs(ti))) {
          Fm(i, j) = s / (tj - ti);
        } else {
          const double hstep = 1e-6 * (1.0 + std::abs(ti));
          const cplx deriv = (fv(ti + hstep) - fv(ti - hstep)) / (2.0 * hstep);
          Fm(i, j) = T(i, j) * deriv;
        }
      }
    return Fm;
  }
};

inline EigenOracle oracle_eigen(const SpMat& A, double cond_limit = 1e10) {
  require(A.rows() <= dense_limit, "oracle_eigen: dimension exceeds 4096");
  EigenOracle o;
  Mat Ad = Mat(A);
  Eigen::ComplexEigenSolver<Mat> es(Ad);
  if (es.info() != Eigen::Success) throw NumericalError("dense eigensolve failed");
  o.lambda = es.eigenvalues();
  o.V = es.eigenvectors();
  Eigen::PartialPivLU<Mat> lu(o.V);
  o.Vinv = lu.inverse();
  o.condition = o.V.cwiseAbs().colwise().sum().maxCoeff() * o.Vinv.cwiseAbs().colwise().sum().maxCoeff();
  o.zero_tol = 1e-9 * std::max(1.0, o.lambda.cwiseAbs().maxCoeff());
  if (!std::isfinite(o.condition) || o.condition > cond_limit) {
    Eigen::ComplexSchur<Mat> cs(Ad);
    o.schur_U = cs.matrixU();
    o.schur_T = cs.matrixT();
    o.schur = true;
  }
  return o;
}

}  // namespace scalc
