#pragma once

// Deterministic test data: band-limited random fields, point atoms, dipoles,
// windows and sawtooth profiles.

#include "scalc/fft.hpp"

#include <random>

namespace scalc {

using Rng = std::mt19937_64;

/// sum over 0 < |k|_inf <= K of random complex coefficients times e^{i k.x},
/// per component; mean-zero by construction.
inline Vec random_bandlimited(const GridSpec& g, Eigen::Index ncomp, int K, Rng& rng, bool with_mean = false) {
  std::normal_distribution<double> nd;
  Vec F = Vec::Zero(g.cells() * ncomp);
  for (Eigen::Index c = 0; c < g.cells(); ++c) {
    auto ij = g.coords(c);
    const int k0 = wavenumber(ij[0], g.N), k1 = g.n == 2 ? wavenumber(ij[1], g.N) : 0;
    const int kmax = std::max(std::abs(k0), std::abs(k1));
    if (kmax > K) continue;
    if (kmax == 0 && !with_mean) continue;
    for (Eigen::Index a = 0; a < ncomp; ++a) F[c * ncomp + a] = cplx(nd(rng), nd(rng));
  }
  Vec f = fft_inverse(g, F, ncomp);
  return f / std::max(std::sqrt(g.cell_volume()) * f.norm(), 1e-300);
}

/// Gaussian white noise, mean removed per component.
inline Vec random_meanzero(const GridSpec& g, Eigen::Index ncomp, Rng& rng) {
  std::normal_distribution<double> nd;
  Vec f(g.cells() * ncomp);
  for (auto& x : f) x = cplx(nd(rng), nd(rng));
  Vec mean = Vec::Zero(ncomp);
  for (Eigen::Index c = 0; c < g.cells(); ++c) mean += f.segment(c * ncomp, ncomp);
  mean /= static_cast<double>(g.cells());
  for (Eigen::Index c = 0; c < g.cells(); ++c) f.segment(c * ncomp, ncomp) -= mean;
  return f;
}

/// delta_x - delta_y on component `comp`, scaled to unit L^1 mass per point.
inline Vec dipole(const GridSpec& g, Eigen::Index x, Eigen::Index y, Eigen::Index ncomp = 1, Eigen::Index comp = 0) {
  Vec f = Vec::Zero(g.cells() * ncomp);
  f[x * ncomp + comp] += 1.0 / g.cell_volume();
  f[y * ncomp + comp] -= 1.0 / g.cell_volume();
  return f;
}

/// Indicator of the periodic ball |x - center| < r.
inline RVec window(const GridSpec& g, Eigen::Index center, double r) {
  RVec w(g.cells());
  for (Eigen::Index c = 0; c < g.cells(); ++c) w[c] = g.distance(c, center) < r ? 1.0 : 0.0;
  return w;
}

/// Pointwise product of a cell scalar with every component.
inline Vec mask(const GridSpec& g, const Vec& f, Eigen::Index ncomp, const RVec& w) {
  Vec out = f;
  for (Eigen::Index c = 0; c < g.cells(); ++c) out.segment(c * ncomp, ncomp) *= w[c];
  return out;
}

/// dist(x, 0)^alpha, a periodic cusp with Hoelder seminorm close to one.
inline Vec cusp(const GridSpec& g, double alpha) {
  Vec f(g.cells());
  for (Eigen::Index c = 0; c < g.cells(); ++c) f[c] = std::pow(g.distance(c, 0), alpha);
  return f;
}

/// Periodic triangle wave of unit slope along axis 0.
inline Vec sawtooth(const GridSpec& g) {
  Vec f(g.cells());
  const double L = g.lengths[0];
  for (Eigen::Index c = 0; c < g.cells(); ++c) {
    const double x = g.position(c)[0];
    f[c] = std::min(x, L - x) - 0.25 * L;
  }
  return f;
}

/// +1 on the first half of the torus along axis 0, -1 on the other.
inline Vec step(const GridSpec& g) {
  Vec f(g.cells());
  for (Eigen::Index c = 0; c < g.cells(); ++c) f[c] = g.position(c)[0] < 0.5 * g.lengths[0] ? 1.0 : -1.0;
  return f;
}

}  // namespace scalc
