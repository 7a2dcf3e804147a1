#pragma once

// Boundary and half-space functionals: extensions Q_psi f, conical square
// function and tent norms, Whitney-average non-tangential maximal function,
// Carleson functional, discrete H^p / Sobolev / Hoelder / BMO norms and the
// adapted Hardy-Sobolev norms.

#include "scalc/calculus.hpp"
#include "scalc/fft.hpp"

namespace scalc {

/// Logarithmic t-grid with trapezoid weights in log t: w_j = t_j dlog t,
/// halved at both ends.
struct TGrid {
  std::vector<double> t;
  std::vector<double> w;
  double dlog = 0.0;

  [[nodiscard]] std::size_t size() const { return t.size(); }
};

inline TGrid make_tgrid(double t_min, double t_max, int per_decade = 16) {
  require(t_min > 0.0 && t_max > t_min, "t-grid needs 0 < t_min < t_max");
  require(per_decade >= 1, "t-grid needs at least one point per decade");
  TGrid tg;
  const double span = std::log(t_max / t_min);
  const int count = std::max(2, static_cast<int>(std::ceil(span / std::log(10.0) * per_decade - 1e-9)) + 1);
  tg.dlog = span / (count - 1);
  for (int j = 0; j < count; ++j) {
    const double t = j == count - 1 ? t_max : t_min * std::exp(j * tg.dlog);
    tg.t.push_back(t);
    tg.w.push_back(t * tg.dlog * ((j == 0 || j == count - 1) ? 0.5 : 1.0));
  }
  return tg;
}

/// Default grid: t from h to the period, 16 points per decade.
inline TGrid default_tgrid(const GridSpec& g) { return make_tgrid(g.min_h(), g.period(), 16); }

/// Restriction to the nodes with index in [first, last] (weights recomputed).
inline TGrid sub_tgrid(const TGrid& tg, std::size_t first, std::size_t last) {
  require(first < last && last < tg.size(), "sub_tgrid: bad index range");
  TGrid out;
  out.dlog = tg.dlog;
  for (std::size_t j = first; j <= last; ++j) {
    out.t.push_back(tg.t[j]);
    out.w.push_back(tg.t[j] * tg.dlog * ((j == first || j == last) ? 0.5 : 1.0));
  }
  return out;
}

/// F(t_j, x) for every t-node; column j of `values` holds t_j.
struct HalfSpaceField {
  GridSpec grid;
  Eigen::Index ncomp = 1;
  TGrid tgrid;
  Mat values;
  std::string meta;

  [[nodiscard]] Vec at(std::size_t j) const { return values.col(static_cast<Eigen::Index>(j)); }
  /// |F(t_j, x)|^2 summed over components, per cell.
  [[nodiscard]] RVec energy(std::size_t j) const {
    RVec e = RVec::Zero(grid.cells());
    for (Eigen::Index c = 0; c < grid.cells(); ++c)
      e[c] = values.col(static_cast<Eigen::Index>(j)).segment(c * ncomp, ncomp).squaredNorm();
    return e;
  }
};

inline HalfSpaceField make_halfspace(const GridSpec& g, Eigen::Index ncomp, const TGrid& tg) {
  HalfSpaceField F;
  F.grid = g;
  F.ncomp = ncomp;
  F.tgrid = tg;
  F.values = Mat::Zero(g.cells() * ncomp, static_cast<Eigen::Index>(tg.size()));
  return F;
}

// ---------------------------------------------------------------- discrete norms

/// Discrete L^2 norm with the cell-volume weight.
inline double l2_norm(const GridSpec& g, const Vec& f) { return std::sqrt(g.cell_volume()) * f.norm(); }

/// Pointwise Euclidean modulus over components.
inline RVec pointwise_abs(const GridSpec& g, const Vec& f, Eigen::Index ncomp) {
  RVec out(g.cells());
  for (Eigen::Index c = 0; c < g.cells(); ++c) out[c] = f.segment(c * ncomp, ncomp).norm();
  return out;
}

inline double lp_of_abs(const GridSpec& g, const RVec& v, double p) {
  if (std::isinf(p)) return v.maxCoeff();
  double s = 0.0;
  for (Eigen::Index c = 0; c < v.size(); ++c) s += std::pow(v[c], p);
  return std::pow(s * g.cell_volume(), 1.0 / p);
}

inline double lp_norm(const GridSpec& g, const Vec& f, Eigen::Index ncomp, double p) {
  return lp_of_abs(g, pointwise_abs(g, f, ncomp), p);
}

/// Frozen smooth-maximal realization of H^p, p <= 1: bump with Fourier
/// multiplier exp(-t^2 |xi|^2), t on [h, period/2] with 8 points per decade.
struct HardyMaximalSpec {
  static constexpr int per_decade = 8;
  static constexpr const char* bump = "exp(-t^2|xi|^2)";
};

inline std::vector<double> hardy_tgrid(const GridSpec& g) {
  return make_tgrid(g.min_h(), 0.5 * g.period(), HardyMaximalSpec::per_decade).t;
}

/// sup over the frozen t-range of |phi_t * f|, pointwise.
inline RVec smooth_maximal(const GridSpec& g, const Vec& f, Eigen::Index ncomp) {
  Vec F = fft_forward(g, f, ncomp);
  RVec xi2(g.cells());
  for (Eigen::Index c = 0; c < g.cells(); ++c) {
    auto xi = frequency(g, c);
    xi2[c] = xi[0] * xi[0] + xi[1] * xi[1];
  }
  RVec out = RVec::Zero(g.cells());
  for (double t : hardy_tgrid(g)) {
    Vec G = F;
    for (Eigen::Index c = 0; c < g.cells(); ++c) G.segment(c * ncomp, ncomp) *= std::exp(-t * t * xi2[c]);
    out = out.cwiseMax(pointwise_abs(g, fft_inverse(g, G, ncomp), ncomp));
  }
  return out;
}

inline bool has_zero_mean(const Vec& f, Eigen::Index ncomp, double rel = 1e-10) {
  const Vec mean = component_mean(f, ncomp);
  const double scale = f.cwiseAbs().maxCoeff();
  return mean.cwiseAbs().maxCoeff() <= rel * std::max(scale, 1e-300);
}

/// Discrete H^p quasi-norm: L^p for p > 1, smooth-maximal for p <= 1.
inline double hp_quasinorm(const GridSpec& g, const Vec& f, Eigen::Index ncomp, double p) {
  if (!(p > 0.5)) throw UsageError("exponent p must exceed 1/2");
  if (p > 1.0) return lp_norm(g, f, ncomp, p);
  if (f.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  if (!has_zero_mean(f, ncomp))
    throw ContractError("H^p quasi-norm with p <= 1 requires mean-zero data");
  return lp_of_abs(g, smooth_maximal(g, f, ncomp), p);
}

/// ||grad f||_{H^p}.
inline double sobolev_homog_norm(const GridSpec& g, const Vec& f, Eigen::Index ncomp, double p) {
  require(ncomp == g.m, "sobolev_homog_norm: expects a scalar-block field");
  return hp_quasinorm(g, gradient(g, f), g.n * g.m, p);
}

/// Hoelder seminorm for alpha in (0, 1), dyadic BMO for alpha = 0.
inline double holder_norm(const GridSpec& g, const Vec& f, Eigen::Index ncomp, double alpha) {
  require(alpha >= 0.0 && alpha < 1.0, "holder_norm: alpha must lie in [0, 1)");
  const Eigen::Index cells = g.cells();
  if (alpha > 0.0) {
    double best = 0.0;
    for (Eigen::Index x = 0; x < cells; ++x)
      for (Eigen::Index y = x + 1; y < cells; ++y) {
        const double diff = (f.segment(x * ncomp, ncomp) - f.segment(y * ncomp, ncomp)).norm();
        best = std::max(best, diff / std::pow(g.distance(x, y), alpha));
      }
    return best;
  }
  // Dyadic cubes of side N / 2^l cells, l = 0 (whole torus) down to single cells.
  double best = 0.0;
  for (int side = g.N; side >= 1; side /= 2) {
    const int per_axis = g.N / side;
    const int blocks = g.n == 2 ? per_axis * per_axis : per_axis;
    for (int b = 0; b < blocks; ++b) {
      const int b0 = g.n == 2 ? b / per_axis : b, b1 = g.n == 2 ? b % per_axis : 0;
      std::vector<Eigen::Index> members;
      for (int i = 0; i < side; ++i)
        for (int j = 0; j < (g.n == 2 ? side : 1); ++j) members.push_back(g.cell(b0 * side + i, b1 * side + j));
      Vec mean = Vec::Zero(ncomp);
      for (auto c : members) mean += f.segment(c * ncomp, ncomp);
      mean /= static_cast<double>(members.size());
      double osc = 0.0;
      for (auto c : members) osc += (f.segment(c * ncomp, ncomp) - mean).norm();
      best = std::max(best, osc / static_cast<double>(members.size()));
    }
    if (side == 1) break;
  }
  return best;
}

// ---------------------------------------------------------------- cones and balls

/// Indicator of the open ball |offset| < t as a kernel on cell offsets.
inline RVec ball_kernel(const GridSpec& g, double t) {
  RVec k(g.cells());
  for (Eigen::Index c = 0; c < g.cells(); ++c) {
    auto ij = g.coords(c);
    k[c] = g.offset_length(ij[0], ij[1]) < t ? 1.0 : 0.0;
  }
  return k;
}

/// Discrete volume of the ball of radius t.
inline double ball_volume(const GridSpec& g, double t) { return ball_kernel(g, t).sum() * g.cell_volume(); }

enum class Scaling { second_order, first_order };

/// (Q f)(t_j) = psi(t_j^2 L) f, computed from one shared resolvent bank.
inline HalfSpaceField q_extension(const DivFormOperator& L, const AuxiliaryFunction& f_psi, const Vec& f, const TGrid& tg,
                                  const CalculusOptions& opt = {}) {
  const GridSpec& g = L.grid();
  HalfSpaceField F = make_halfspace(g, g.m, tg);
  F.meta = "Q[" + f_psi.label + "] of " + L.view().label;
  if (f.cwiseAbs().maxCoeff() == 0.0) return F;
  std::vector<AuxiliaryFunction> probes;
  const std::size_t nt = tg.size();
  for (std::size_t j : {std::size_t{0}, nt / 2, nt - 1}) probes.push_back(psi::scaled(f_psi, tg.t[j] * tg.t[j]));
  auto bank = build_bank(L.view(), probes, Mat(f), opt);
  for (std::size_t j = 0; j < nt; ++j)
    F.values.col(static_cast<Eigen::Index>(j)) = bank.apply(psi::scaled(f_psi, tg.t[j] * tg.t[j])).col(0);
  return F;
}

/// First-order scaling for DB: psi(t^2 (DB)^2) h, i.e. the even function
/// zeta -> psi(zeta^2) of t DB.
inline HalfSpaceField q_extension(const DiracOperator& db, const AuxiliaryFunction& f_psi, const Vec& h, const TGrid& tg,
                                  const CalculusOptions& opt = {}) {
  const GridSpec& g = db.grid();
  HalfSpaceField F = make_halfspace(g, g.m + g.n * g.m, tg);
  F.meta = "Q[" + f_psi.label + "] of (DB)";
  if (h.cwiseAbs().maxCoeff() == 0.0) return F;
  std::vector<AuxiliaryFunction> probes;
  const std::size_t nt = tg.size();
  for (std::size_t j : {std::size_t{0}, nt / 2, nt - 1}) probes.push_back(psi::scaled(f_psi, tg.t[j] * tg.t[j]));
  auto bank = build_bank(db.squared_view(), probes, Mat(h), opt);
  // Store per cell as [scalar block, gradient block] so cone functionals see one vector per cell.
  const Eigen::Index ns = g.scalar_dim(), m = g.m, nm = g.n * g.m;
  for (std::size_t j = 0; j < nt; ++j) {
    Vec v = bank.apply(psi::scaled(f_psi, tg.t[j] * tg.t[j])).col(0);
    for (Eigen::Index c = 0; c < g.cells(); ++c) {
      F.values.col(static_cast<Eigen::Index>(j)).segment(c * (m + nm), m) = v.segment(c * m, m);
      F.values.col(static_cast<Eigen::Index>(j)).segment(c * (m + nm) + m, nm) = v.segment(ns + c * nm, nm);
    }
  }
  return F;
}

/// Interleaves a Dirac field (scalar block, gradient block) into per-cell vectors.
inline Vec interleave_dirac(const GridSpec& g, const Vec& h) {
  const Eigen::Index m = g.m, nm = g.n * g.m, ns = g.scalar_dim();
  Vec out(h.size());
  for (Eigen::Index c = 0; c < g.cells(); ++c) {
    out.segment(c * (m + nm), m) = h.segment(c * m, m);
    out.segment(c * (m + nm) + m, nm) = h.segment(ns + c * nm, nm);
  }
  return out;
}

/// (SF)(x)^2 = sum_j w_j t_j^{-2s} sum_{|x-y|<t_j} |F(t_j,y)|^2 dy / t_j^{1+n}.
inline RVec conical_square(const HalfSpaceField& F, double s = 0.0) {
  const GridSpec& g = F.grid;
  const std::size_t nt = F.tgrid.size();
  std::vector<RVec> parts(nt);
  parallel_for(nt, default_workers(), [&](std::size_t j) {
    const double t = F.tgrid.t[j];
    const double wt = F.tgrid.w[j] * std::pow(t, -2.0 * s) * g.cell_volume() / std::pow(t, 1.0 + g.n);
    parts[j] = wt * periodic_convolve(g, F.energy(j), ball_kernel(g, t));
  });
  RVec sq = RVec::Zero(g.cells());
  for (const auto& p : parts) sq += p;  // fixed order
  return sq.cwiseMax(0.0).cwiseSqrt();
}

/// ||S(t^{-s} F)||_p.
inline double tent_norm(const HalfSpaceField& F, double s, double p) {
  require(p > 0.0, "tent_norm: p must be positive");
  return lp_of_abs(F.grid, conical_square(F, s), p);
}

/// The Fubini side of ||SF||_2^2: sum_j w_j Vol(t_j)/t_j^{1+n} sum_y |F|^2 dy.
inline double tent_fubini_sq(const HalfSpaceField& F) {
  const GridSpec& g = F.grid;
  double acc = 0.0;
  for (std::size_t j = 0; j < F.tgrid.size(); ++j) {
    const double t = F.tgrid.t[j];
    acc += F.tgrid.w[j] * ball_volume(g, t) / std::pow(t, 1.0 + g.n) * F.energy(j).sum() * g.cell_volume();
  }
  return acc;
}

/// Whitney average of |F|^2 over (t_j/2, 2 t_j) x B(x, t_j), weighted by the
/// t-grid weights; one value per (j, x).
inline std::vector<RVec> whitney_means(const HalfSpaceField& F) {
  const GridSpec& g = F.grid;
  const std::size_t nt = F.tgrid.size();
  std::vector<RVec> energies(nt);
  for (std::size_t k = 0; k < nt; ++k) energies[k] = F.energy(k);
  std::vector<RVec> out(nt);
  parallel_for(nt, default_workers(), [&](std::size_t j) {
    const double t = F.tgrid.t[j];
    RVec acc = RVec::Zero(g.cells());
    double wsum = 0.0;
    for (std::size_t k = 0; k < nt; ++k) {
      if (F.tgrid.t[k] <= 0.5 * t || F.tgrid.t[k] >= 2.0 * t) continue;
      acc += F.tgrid.w[k] * energies[k];
      wsum += F.tgrid.w[k];
    }
    RVec ball = ball_kernel(g, t);
    out[j] = periodic_convolve(g, acc, ball) / (wsum * ball.sum());
  });
  return out;
}

/// N~F(x) = sup_j (Whitney mean of |F|^2 at (t_j, x))^{1/2}.
inline RVec nt_maximal(const HalfSpaceField& F) {
  auto means = whitney_means(F);
  RVec out = RVec::Zero(F.grid.cells());
  for (const auto& m : means) out = out.cwiseMax(m.cwiseMax(0.0).cwiseSqrt());
  return out;
}

/// C_alpha F(x) = sup_j t_j^{-alpha} (t_j^{-n} sum_{s_k <= t_j} sum_{|x-y|<t_j} |F|^2 dy ds/s)^{1/2},
/// with trapezoid weights in log s truncated at t_j.
inline RVec carleson(const HalfSpaceField& F, double alpha) {
  require(alpha >= 0.0 && alpha <= 1.0, "carleson: alpha must lie in [0, 1]");
  const GridSpec& g = F.grid;
  const std::size_t nt = F.tgrid.size();
  std::vector<RVec> energies(nt);
  for (std::size_t k = 0; k < nt; ++k) energies[k] = F.energy(k);
  std::vector<RVec> vals(nt);
  parallel_for(nt, default_workers(), [&](std::size_t j) {
    const double t = F.tgrid.t[j];
    RVec acc = RVec::Zero(g.cells());
    for (std::size_t k = 0; k <= j; ++k) {
      // ds/s weight: dlog, halved at the truncation ends.
      const double wk = F.tgrid.dlog * ((k == 0 || k == j) ? 0.5 : 1.0) * (j == 0 ? 0.0 : 1.0);
      acc += wk * energies[k];
    }
    RVec box = periodic_convolve(g, acc, ball_kernel(g, t)) * g.cell_volume();
    vals[j] = std::pow(t, -alpha) * (box.cwiseMax(0.0) / std::pow(t, g.n)).cwiseSqrt();
  });
  RVec out = RVec::Zero(g.cells());
  for (const auto& v : vals) out = out.cwiseMax(v);
  return out;
}

/// ||Q_psi f||_{T^{s,p}} with the second-order extension.
inline double adapted_hardy_norm(const DivFormOperator& L, const Vec& f, double s, double p, const AuxiliaryFunction& f_psi,
                                 const TGrid& tg, const CalculusOptions& opt = {}) {
  if (!(p > 0.5)) throw UsageError("exponent p must exceed 1/2");
  return tent_norm(q_extension(L, f_psi, f, tg, opt), s, p);
}

/// Oracle for a = d = 1 at p = 2, s = 0: per Fourier mode,
/// sum_k |f_k|^2 dx sum_j w_j Vol(t_j)/t_j^{1+n} |psi(t_j^2 s_k)|^2.
inline double adapted_norm_fourier_oracle(const GridSpec& g, const Vec& f, const AuxiliaryFunction& f_psi, const TGrid& tg) {
  require(g.m == 1, "fourier oracle is scalar");
  Vec F = fft_forward(g, f, 1);
  const double cells = static_cast<double>(g.cells());
  double acc = 0.0;
  for (Eigen::Index c = 0; c < g.cells(); ++c) {
    const double sk = laplace_symbol(g, c);
    double mult = 0.0;
    for (std::size_t j = 0; j < tg.size(); ++j) {
      const double t = tg.t[j];
      const double v = sk == 0.0 ? std::abs(f_psi.value_at_zero) : std::abs(f_psi(cplx(t * t * sk, 0.0)));
      mult += tg.w[j] * ball_volume(g, t) / std::pow(t, 1.0 + g.n) * v * v;
    }
    acc += std::norm(F[c]) / cells * g.cell_volume() * mult;
  }
  return std::sqrt(acc);
}

}  // namespace scalc
