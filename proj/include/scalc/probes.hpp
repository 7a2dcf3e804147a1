#pragma once

// Measurement campaigns: off-diagonal decay, Kato ratios, H^p boundedness
// curves of resolvent / gradient / Riesz families, identification ratios and
// the assembled critical-number estimate. Every H^p operator norm here is a
// supremum over a finite test family, i.e. a lower bound on the true norm.

#include "scalc/solvers.hpp"

#include <Eigen/SVD>
#include <set>

namespace scalc {

// ---------------------------------------------------------------- off-diagonal

enum class OffdiagFamily { resolvent, gradient_resolvent };

inline std::string to_string(OffdiagFamily f) {
  return f == OffdiagFamily::resolvent ? "resolvent" : "gradient-resolvent";
}

struct DecayFit {
  OffdiagFamily family = OffdiagFamily::resolvent;
  double separation = 0.0;
  double angle = 0.0;
  double gamma = 0.0;
  double residual = 0.0;  // sqrt(1 - R^2) of the log-log fit
  bool power_law = true;
  Curve curve;  // (|z|, ||1_F T(z) 1_E||)
};

/// Cells of the periodic ball of radius r around `center`.
inline std::vector<Eigen::Index> ball_cells(const GridSpec& g, Eigen::Index center, double r) {
  std::vector<Eigen::Index> out;
  for (Eigen::Index c = 0; c < g.cells(); ++c)
    if (g.distance(c, center) < r) out.push_back(c);
  return out;
}

inline double set_distance(const GridSpec& g, const std::vector<Eigen::Index>& E, const std::vector<Eigen::Index>& F) {
  double d = std::numeric_limits<double>::infinity();
  for (auto a : E)
    for (auto b : F) d = std::min(d, g.distance(a, b));
  return d;
}

/// ||1_F T(z) 1_E|| for T(z) = (1 + z^2 L)^{-1} or z grad (1 + z^2 L)^{-1}; the
/// restricted block is formed column by column and its largest singular value
/// taken exactly.
inline double offdiag_norm(const DivFormOperator& L, OffdiagFamily fam, const std::vector<Eigen::Index>& E,
                           const std::vector<Eigen::Index>& F, cplx z) {
  const GridSpec& g = L.grid();
  const Eigen::Index m = g.m, nm = g.n * g.m;
  const Eigen::Index ncol = static_cast<Eigen::Index>(E.size()) * m;
  Mat rhs = Mat::Zero(g.scalar_dim(), ncol);
  for (std::size_t i = 0; i < E.size(); ++i)
    for (Eigen::Index a = 0; a < m; ++a) rhs(E[i] * m + a, static_cast<Eigen::Index>(i) * m + a) = 1.0;
  // (1 + z^2 L) = -z^2 (w - L) with w = -1 / z^2.
  detail::ShiftedSolver sv(L.matrix());
  const cplx w = -1.0 / (z * z);
  sv.factorize(w);
  Mat X = sv.solve(rhs) * (-w);
  Mat out;
  Eigen::Index rows_per_cell = m;
  if (fam == OffdiagFamily::resolvent) {
    out = X;
  } else {
    out = z * (L.grad() * X);
    rows_per_cell = nm;
  }
  Mat block(static_cast<Eigen::Index>(F.size()) * rows_per_cell, ncol);
  for (std::size_t i = 0; i < F.size(); ++i) block.middleRows(static_cast<Eigen::Index>(i) * rows_per_cell, rows_per_cell) = out.middleRows(F[i] * rows_per_cell, rows_per_cell);
  Eigen::JacobiSVD<Mat> svd(block);
  return svd.singularValues()(0);
}

/// Fits log ||1_F T(z) 1_E|| against log(1 + d/|z|) over the given |z| values.
inline DecayFit offdiag_measure(const DivFormOperator& L, OffdiagFamily fam, const std::vector<Eigen::Index>& E,
                                const std::vector<Eigen::Index>& F, const std::vector<double>& zabs, double angle = 0.0) {
  const GridSpec& g = L.grid();
  const std::set<Eigen::Index> es(E.begin(), E.end());
  for (auto c : F)
    if (es.count(c)) throw ContractError("offdiag_measure: E and F must be disjoint");
  DecayFit fit;
  fit.family = fam;
  fit.angle = angle;
  fit.separation = set_distance(g, E, F);
  require(fit.separation > 0.0, "offdiag_measure: sets must be separated");
  std::vector<double> xs, ys;
  for (double r : zabs) {
    const double nrm = offdiag_norm(L, fam, E, F, std::polar(r, angle));
    fit.curve.emplace_back(r, nrm);
    // Values at the rounding floor carry no decay information.
    if (nrm > 1e-13) {
      xs.push_back(std::log(1.0 + fit.separation / r));
      ys.push_back(std::log(nrm));
    }
  }
  if (xs.size() < 3) {
    fit.power_law = false;
    fit.residual = 1.0;
    return fit;
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i] / n;
    my += ys[i] / n;
  }
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  fit.gamma = -slope;
  const double r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  fit.residual = std::sqrt(std::max(0.0, 1.0 - r2));
  fit.power_law = fit.residual <= 0.2;
  return fit;
}

/// Standard configuration: E a ball at the origin, F the ball diametrically
/// opposite at separation `sep`, |z| from sep/8 downwards.
inline DecayFit offdiag_standard(const DivFormOperator& L, OffdiagFamily fam, double sep, double angle = 0.0) {
  const GridSpec& g = L.grid();
  const double radius = 2.0 * g.min_h();
  auto E = ball_cells(g, 0, radius);
  // Centre of F along axis 0 at distance sep + 2 radius (sets are open balls).
  const int shift = static_cast<int>(std::lround((sep + 2.0 * radius) / g.h[0]));
  auto F = ball_cells(g, g.cell(shift, 0), radius);
  std::vector<double> zs;
  for (double q : {8.0, 10.0, 12.0, 16.0, 20.0, 24.0, 32.0}) zs.push_back(sep / q);
  return offdiag_measure(L, fam, E, F, zs, angle);
}

// ---------------------------------------------------------------- Kato

struct KatoResult {
  double lo = 0.0, hi = 0.0;
  int samples = 0;
  bool pathological = false;
};

/// min / max of ||a L^{1/2} f||_2 / ||grad f||_2 over random band-limited mean-zero f.
inline KatoResult kato_ratio(const DivFormOperator& L, int samples, std::uint64_t seed, int band = 8,
                             const CalculusOptions& opt = {}) {
  require(samples >= 1, "kato_ratio: need at least one sample");
  const GridSpec& g = L.grid();
  Rng rng(seed);
  Mat F(g.scalar_dim(), samples);
  for (int s = 0; s < samples; ++s) F.col(s) = random_bandlimited(g, g.m, band, rng);
  Mat S = sqrt_apply(L, F, opt);
  KatoResult r;
  r.samples = samples;
  r.lo = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const double q = (L.a_mat() * S.col(s)).norm() / (L.grad() * F.col(s)).norm();
    r.lo = std::min(r.lo, q);
    r.hi = std::max(r.hi, q);
  }
  r.pathological = r.lo < 1e-6 || r.hi > 1e6;
  return r;
}

// ---------------------------------------------------------------- H^p probes

struct ProbeConfig {
  std::vector<double> p_grid;
  int t_per_decade = 4;
  int random_fields = 8;
  int band = 8;
  int fourier_modes = 3;
  int repetitions = 1;
  std::uint64_t seed = 1;
  double blowup = 50.0;
};

/// 24 log-spaced exponents in [0.55, 16].
inline std::vector<double> default_p_grid(int count = 24) {
  std::vector<double> out;
  for (int i = 0; i < count; ++i) out.push_back(0.55 * std::pow(16.0 / 0.55, static_cast<double>(i) / (count - 1)));
  return out;
}

inline ProbeConfig default_probe_config() {
  ProbeConfig c;
  c.p_grid = default_p_grid();
  return c;
}

/// Test family: Fourier modes, random band-limited fields and dipole atoms,
/// all mean-zero per component.
inline Mat probe_test_family(const GridSpec& g, const ProbeConfig& cfg, int multiplier = 1) {
  std::vector<Vec> cols;
  for (int k = 1; k <= cfg.fourier_modes; ++k) {
    std::array<int, 2> kv{k * std::max(1, g.N / 16), 0};
    for (Eigen::Index a = 0; a < g.m; ++a) cols.push_back(fourier_mode(g, kv, g.m, a));
  }
  Rng rng(cfg.seed);
  for (int s = 0; s < cfg.random_fields * multiplier; ++s) cols.push_back(random_bandlimited(g, g.m, cfg.band, rng));
  for (int r = 1; r <= g.N / 4; r *= 2) {
    const Eigen::Index y = g.n == 2 ? g.cell(r, r) : g.cell(r);
    cols.push_back(dipole(g, 0, y, g.m, 0) * g.cell_volume());
  }
  Mat F(g.scalar_dim(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) F.col(static_cast<Eigen::Index>(j)) = cols[j];
  return F;
}

enum class ProbeKind { resolvent, gradient, riesz, identification };

inline std::string to_string(ProbeKind k) {
  switch (k) {
    case ProbeKind::resolvent: return "resolvent";
    case ProbeKind::gradient: return "gradient";
    case ProbeKind::riesz: return "riesz";
    case ProbeKind::identification: return "identification";
  }
  return "?";
}

struct BoundednessCurve {
  ProbeKind kind = ProbeKind::resolvent;
  std::vector<double> p;
  std::vector<double> B;                  // sup over t and the family
  std::vector<std::vector<double>> by_t;  // by_t[i][k]: sup over the family at p_i, t_k
  std::vector<double> t;
  double lower = 0.0, upper = std::numeric_limits<double>::infinity();  // detected breakdown exponents
  bool lower_breakdown = false, upper_breakdown = false;
  double bracket_lower = 0.0, bracket_upper = 0.0;
  bool rerun = false;
  std::string label = "lower bound over a finite test family";

  /// Detected interval as (low, high); infinity / the floor when no breakdown.
  [[nodiscard]] bool contains(double q) const { return q > lower && q < upper; }
};

namespace detail {

/// Quasi-norms of f for every p on the grid (L^p above 1, smooth maximal at or below 1).
inline std::vector<double> hp_all(const GridSpec& g, const Vec& f, Eigen::Index ncomp, const std::vector<double>& ps) {
  RVec absf = pointwise_abs(g, f, ncomp);
  RVec maxf;
  bool need_max = false;
  for (double p : ps) need_max |= p <= 1.0;
  if (need_max) maxf = smooth_maximal(g, f, ncomp);
  std::vector<double> out;
  for (double p : ps) out.push_back(p <= 1.0 ? lp_of_abs(g, maxf, p) : lp_of_abs(g, absf, p));
  return out;
}

/// Breakdown detection: B(p) > blowup * B(2) with the sup attained with growth
/// towards the end of the t-range; bracket = neighbouring grid spacing.
inline void detect_breakdown(BoundednessCurve& c, double blowup) {
  const auto& p = c.p;
  std::size_t i2 = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (std::abs(std::log(p[i] / 2.0)) < std::abs(std::log(p[i2] / 2.0))) i2 = i;
  const double B2 = c.B[i2];
  auto grows = [&](std::size_t i) {
    const auto& row = c.by_t[i];
    if (row.size() < 2) return true;
    return row.back() >= row[row.size() - 2] || row.front() >= row[1];
  };
  c.lower = p.front() > 0.5 ? 0.5 : p.front();
  c.upper = std::numeric_limits<double>::infinity();
  for (std::size_t i = i2; i-- > 0;) {
    if (c.B[i] > blowup * B2 && grows(i)) {
      c.lower = p[i];
      c.lower_breakdown = true;
      c.bracket_lower = p[i + 1] - p[i];
      break;
    }
  }
  for (std::size_t i = i2 + 1; i < p.size(); ++i) {
    if (c.B[i] > blowup * B2 && grows(i)) {
      c.upper = p[i];
      c.upper_breakdown = true;
      c.bracket_upper = p[i] - p[i - 1];
      break;
    }
  }
}

inline bool has_spike(const BoundednessCurve& c) {
  for (std::size_t i = 1; i + 1 < c.B.size(); ++i)
    if (c.B[i] > 3.0 * c.B[i - 1] && c.B[i] > 3.0 * c.B[i + 1]) return true;
  return false;
}

}  // namespace detail

/// Sup over t of the test-family ratio ||T_t f||_{H^p} / ||f||_{H^p} for the
/// resolvent family a (1 + t^2 L)^{-1} a^{-1}, the gradient family
/// t grad (1 + t^2 L)^{-1} a^{-1}, or the Riesz transform grad L^{-1/2} a^{-1}.
inline BoundednessCurve probe_family(const DivFormOperator& L, ProbeKind kind, const ProbeConfig& cfg, int multiplier = 1) {
  const GridSpec& g = L.grid();
  const Eigen::Index m = g.m, nm = g.n * g.m;
  BoundednessCurve c;
  c.kind = kind;
  c.p = cfg.p_grid;
  Mat Fam = probe_test_family(g, cfg, multiplier);
  const Eigen::Index nf = Fam.cols();
  std::vector<std::vector<double>> in_norms(static_cast<std::size_t>(nf));
  for (Eigen::Index j = 0; j < nf; ++j) in_norms[static_cast<std::size_t>(j)] = detail::hp_all(g, Fam.col(j), m, c.p);
  Mat AinvF = L.a_inv_mat() * Fam;
  std::vector<Mat> outputs;
  Eigen::Index out_comp = m;
  if (kind == ProbeKind::riesz) {
    c.t = {0.0};
    outputs.push_back(L.grad() * inv_sqrt_apply(L, AinvF));
    out_comp = nm;
  } else {
    c.t = make_tgrid(g.min_h(), g.period(), cfg.t_per_decade).t;
    detail::ShiftedSolver sv(L.matrix());
    for (double t : c.t) {
      // (1 + t^2 L)^{-1} = w (w - L)^{-1} with w = -1/t^2, up to sign.
      const cplx w = -1.0 / (t * t);
      sv.factorize(w);
      Mat R = sv.solve(AinvF) * (-w);
      if (kind == ProbeKind::resolvent) {
        outputs.push_back(L.a_mat() * R);
      } else {
        outputs.push_back(t * (L.grad() * R));
        out_comp = nm;
      }
    }
  }
  c.by_t.assign(c.p.size(), std::vector<double>(c.t.size(), 0.0));
  std::vector<std::vector<std::vector<double>>> ratios(c.t.size());
  parallel_for(c.t.size(), default_workers(), [&](std::size_t k) {
    ratios[k].assign(static_cast<std::size_t>(nf), {});
    for (Eigen::Index j = 0; j < nf; ++j) ratios[k][static_cast<std::size_t>(j)] = detail::hp_all(g, outputs[k].col(j), out_comp, c.p);
  });
  for (std::size_t k = 0; k < c.t.size(); ++k)
    for (Eigen::Index j = 0; j < nf; ++j)
      for (std::size_t i = 0; i < c.p.size(); ++i)
        c.by_t[i][k] = std::max(c.by_t[i][k], ratios[k][static_cast<std::size_t>(j)][i] / in_norms[static_cast<std::size_t>(j)][i]);
  c.B.assign(c.p.size(), 0.0);
  for (std::size_t i = 0; i < c.p.size(); ++i)
    for (double v : c.by_t[i]) c.B[i] = std::max(c.B[i], v);
  detail::detect_breakdown(c, cfg.blowup);
  if (detail::has_spike(c) && multiplier == 1) {
    BoundednessCurve again = probe_family(L, kind, cfg, 2);
    again.rerun = true;
    return again;
  }
  return c;
}

inline BoundednessCurve probe_resolvent_hp(const DivFormOperator& L, const ProbeConfig& cfg) {
  return probe_family(L, ProbeKind::resolvent, cfg);
}
inline BoundednessCurve probe_gradient_hp(const DivFormOperator& L, const ProbeConfig& cfg) {
  return probe_family(L, ProbeKind::gradient, cfg);
}
inline BoundednessCurve probe_riesz(const DivFormOperator& L, const ProbeConfig& cfg) {
  return probe_family(L, ProbeKind::riesz, cfg);
}

// ---------------------------------------------------------------- identification

enum class IdentMode { L_s0, L_s1, DB };

struct IdentificationResult {
  IdentMode mode = IdentMode::L_s0;
  std::vector<double> p;
  std::vector<double> lo, hi;  // min / max ratio over the family per p
};

/// adapted norm / classical norm over a test family:
///   L_s0: ||Q f||_{T^{0,p}} / ||a f||_{H^p}, f = a^{-1} (mean-zero field)
///   L_s1: ||Q f||_{T^{1,p}} / ||grad f||_{H^p}
///   DB:   ||Q h||_{T^{0,p}} / ||h||_{H^p}, h in ran(D), first-order scaling
inline IdentificationResult identification_ratio(const DivFormOperator& L, IdentMode mode, const std::vector<double>& ps,
                                                 const ProbeConfig& cfg, const AuxiliaryFunction& f_psi,
                                                 const CalculusOptions& opt = {}) {
  const GridSpec& g = L.grid();
  const TGrid tg = default_tgrid(g);
  IdentificationResult r;
  r.mode = mode;
  r.p = ps;
  r.lo.assign(ps.size(), std::numeric_limits<double>::infinity());
  r.hi.assign(ps.size(), 0.0);
  Rng rng(cfg.seed);
  const int count = cfg.random_fields + cfg.fourier_modes;
  std::vector<Vec> data;
  for (int s = 0; s < count; ++s) data.push_back(random_bandlimited(g, g.m, cfg.band, rng));
  std::vector<HalfSpaceField> ext;
  std::vector<std::vector<double>> classical;
  const double s_smooth = mode == IdentMode::L_s1 ? 1.0 : 0.0;
  if (mode == IdentMode::DB) {
    DiracOperator db(L);
    Mat H(g.dirac_dim(), count);
    for (int s = 0; s < count; ++s) {
      Vec lo = random_bandlimited(g, g.n * g.m, cfg.band, rng);
      H.col(s) = db.range_projector(db.join(data[static_cast<std::size_t>(s)], lo));
    }
    std::vector<AuxiliaryFunction> probes;
    for (std::size_t j : {std::size_t{0}, tg.size() / 2, tg.size() - 1}) probes.push_back(psi::scaled(f_psi, tg.t[j] * tg.t[j]));
    auto bank = build_bank(db.squared_view(), probes, H, opt);
    for (int s = 0; s < count; ++s) ext.push_back(make_halfspace(g, g.m + g.n * g.m, tg));
    for (std::size_t j = 0; j < tg.size(); ++j) {
      Mat V = bank.apply(psi::scaled(f_psi, tg.t[j] * tg.t[j]));
      for (int s = 0; s < count; ++s) ext[static_cast<std::size_t>(s)].values.col(static_cast<Eigen::Index>(j)) = interleave_dirac(g, V.col(s));
    }
    for (int s = 0; s < count; ++s) classical.push_back(detail::hp_all(g, interleave_dirac(g, H.col(s)), g.m + g.n * g.m, ps));
  } else {
    Mat F(g.scalar_dim(), count);
    for (int s = 0; s < count; ++s) F.col(s) = mode == IdentMode::L_s0 ? Vec(L.mul_a_inv(data[static_cast<std::size_t>(s)])) : data[static_cast<std::size_t>(s)];
    std::vector<AuxiliaryFunction> probes;
    for (std::size_t j : {std::size_t{0}, tg.size() / 2, tg.size() - 1}) probes.push_back(psi::scaled(f_psi, tg.t[j] * tg.t[j]));
    auto bank = build_bank(L.view(), probes, F, opt);
    for (int s = 0; s < count; ++s) ext.push_back(make_halfspace(g, g.m, tg));
    for (std::size_t j = 0; j < tg.size(); ++j) {
      Mat V = bank.apply(psi::scaled(f_psi, tg.t[j] * tg.t[j]));
      for (int s = 0; s < count; ++s) ext[static_cast<std::size_t>(s)].values.col(static_cast<Eigen::Index>(j)) = V.col(s);
    }
    for (int s = 0; s < count; ++s) {
      if (mode == IdentMode::L_s0)
        classical.push_back(detail::hp_all(g, L.mul_a(F.col(s)), g.m, ps));
      else
        classical.push_back(detail::hp_all(g, gradient(g, F.col(s)), g.n * g.m, ps));
    }
  }
  for (int s = 0; s < count; ++s) {
    RVec S = conical_square(ext[static_cast<std::size_t>(s)], s_smooth);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const double q = lp_of_abs(g, S, ps[i]) / classical[static_cast<std::size_t>(s)][i];
      r.lo[i] = std::min(r.lo[i], q);
      r.hi[i] = std::max(r.hi[i], q);
    }
  }
  return r;
}

/// Identification read as a boundedness curve: B(p) = hi(p) / lo(p), the
/// spread of the ratio over the family.
inline BoundednessCurve identification_curve(const IdentificationResult& r, double blowup) {
  BoundednessCurve c;
  c.kind = ProbeKind::identification;
  c.p = r.p;
  c.t = {0.0};
  for (std::size_t i = 0; i < r.p.size(); ++i) {
    c.B.push_back(r.hi[i] / r.lo[i]);
    c.by_t.push_back({c.B.back()});
  }
  detail::detect_breakdown(c, blowup);
  return c;
}

// ---------------------------------------------------------------- critical numbers

struct CriticalEstimate {
  BoundednessCurve resolvent, gradient, riesz, identification;
  double p_minus = 0.0, p_plus = 0.0, q_minus = 0.0, q_plus = 0.0;
  double bracket = 0.0;
  bool contains_two = true;
  bool q_equals_p_minus = true;
  bool riesz_matches_gradient = true;
  bool p_plus_vs_q_plus_star = true;
  std::vector<std::string> flags;
  [[nodiscard]] bool structural_ok() const {
    return contains_two && q_equals_p_minus && riesz_matches_gradient && p_plus_vs_q_plus_star;
  }
  [[nodiscard]] bool no_breakdown() const {
    for (const auto* c : {&resolvent, &gradient, &riesz, &identification})
      if (c->lower_breakdown || c->upper_breakdown) return false;
    return true;
  }
};

inline double grid_bracket(const std::vector<double>& ps, double p) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < ps.size(); ++i)
    if (ps[i] <= p + 1e-12 && ps[i + 1] >= p - 1e-12) best = std::min(best, ps[i + 1] - ps[i]);
  if (!std::isfinite(best) && ps.size() >= 2) best = ps[1] - ps[0];
  return best;
}

inline CriticalEstimate estimate_critical(const DivFormOperator& L, const ProbeConfig& cfg, const CalculusOptions& opt = {}) {
  const GridSpec& g = L.grid();
  CriticalEstimate ce;
  ce.resolvent = probe_resolvent_hp(L, cfg);
  ce.gradient = probe_gradient_hp(L, cfg);
  ce.riesz = probe_riesz(L, cfg);
  ce.identification = identification_curve(identification_ratio(L, IdentMode::L_s0, cfg.p_grid, cfg, psi::default_rational(), opt), cfg.blowup);
  ce.p_minus = ce.resolvent.lower;
  ce.p_plus = ce.resolvent.upper;
  ce.q_minus = ce.gradient.lower;
  ce.q_plus = ce.gradient.upper;
  for (const auto* c : {&ce.resolvent, &ce.gradient, &ce.riesz, &ce.identification}) {
    if (!c->contains(2.0)) {
      ce.contains_two = false;
      ce.flags.push_back(to_string(c->kind) + ": detected interval excludes p=2 (probe artifact)");
    }
  }
  auto within = [&](double a, double b) {
    if (std::isinf(a) || std::isinf(b)) return std::isinf(a) && std::isinf(b);
    return std::abs(a - b) <= std::max(grid_bracket(cfg.p_grid, a), grid_bracket(cfg.p_grid, b)) + 1e-12;
  };
  ce.bracket = grid_bracket(cfg.p_grid, std::max(ce.p_minus, cfg.p_grid.front()));
  ce.q_equals_p_minus = within(ce.q_minus, ce.p_minus);
  if (!ce.q_equals_p_minus) ce.flags.push_back("q_- and p_- differ by more than one bracket");
  ce.riesz_matches_gradient = within(ce.riesz.lower, ce.gradient.lower) && within(ce.riesz.upper, ce.gradient.upper);
  if (!ce.riesz_matches_gradient) ce.flags.push_back("Riesz interval differs from the gradient interval");
  if (std::isfinite(ce.p_plus) && std::isfinite(ce.q_plus)) {
    ce.p_plus_vs_q_plus_star = ce.p_plus + grid_bracket(cfg.p_grid, ce.p_plus) >= sobolev_upper(ce.q_plus, g.n);
    if (!ce.p_plus_vs_q_plus_star) ce.flags.push_back("p_+ below (q_+)^*");
  }
  return ce;
}

}  // namespace scalc
