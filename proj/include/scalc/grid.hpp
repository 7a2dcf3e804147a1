#pragma once

// Flat periodic grids on the torus of side lengths `lengths`.
//
// Index maps (component index always fastest):
//   cell      c = i0            (n = 1)
//             c = i0 * N + i1   (n = 2)
//   scalar    (c, alpha)        -> c * m + alpha
//   gradient  (c, axis, alpha)  -> (c * n + axis) * m + alpha
//   dirac     scalar block first, then the gradient block.

#include "scalc/core.hpp"

#include <array>
#include <cmath>
#include <sstream>

namespace scalc {

struct GridSpec {
  int n = 1;
  int m = 1;
  int N = 0;
  std::array<double, 2> lengths{0.0, 0.0};
  std::array<double, 2> h{0.0, 0.0};

  [[nodiscard]] Eigen::Index cells() const { return n == 1 ? N : static_cast<Eigen::Index>(N) * N; }
  [[nodiscard]] Eigen::Index scalar_dim() const { return cells() * m; }
  [[nodiscard]] Eigen::Index grad_dim() const { return cells() * m * n; }
  [[nodiscard]] Eigen::Index dirac_dim() const { return scalar_dim() + grad_dim(); }
  /// Volume of one cell, the weight of the discrete L^2 inner product.
  [[nodiscard]] double cell_volume() const { return n == 1 ? h[0] : h[0] * h[1]; }
  [[nodiscard]] double period() const { return lengths[0]; }
  [[nodiscard]] double min_h() const { return n == 1 ? h[0] : std::min(h[0], h[1]); }

  [[nodiscard]] std::array<int, 2> coords(Eigen::Index c) const {
    if (n == 1) return {static_cast<int>(c), 0};
    return {static_cast<int>(c / N), static_cast<int>(c % N)};
  }
  [[nodiscard]] Eigen::Index cell(int i0, int i1 = 0) const {
    i0 = ((i0 % N) + N) % N;
    if (n == 1) return i0;
    i1 = ((i1 % N) + N) % N;
    return static_cast<Eigen::Index>(i0) * N + i1;
  }
  [[nodiscard]] Eigen::Index shift(Eigen::Index c, int axis, int step) const {
    auto ij = coords(c);
    ij[axis] += step;
    return cell(ij[0], ij[1]);
  }
  [[nodiscard]] std::array<double, 2> position(Eigen::Index c) const {
    auto ij = coords(c);
    return {ij[0] * h[0], n == 2 ? ij[1] * h[1] : 0.0};
  }
  /// Periodic (torus) distance between two cells.
  [[nodiscard]] double distance(Eigen::Index a, Eigen::Index b) const {
    auto ia = coords(a), ib = coords(b);
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
      int d = std::abs(ia[k] - ib[k]);
      d = std::min(d, N - d);
      s += (d * h[k]) * (d * h[k]);
    }
    return std::sqrt(s);
  }
  /// Distance of an integer offset vector, reduced periodically.
  [[nodiscard]] double offset_length(int d0, int d1) const {
    auto wrap = [this](int d) {
      d = ((d % N) + N) % N;
      return std::min(d, N - d);
    };
    const double x = wrap(d0) * h[0];
    const double y = n == 2 ? wrap(d1) * h[1] : 0.0;
    return std::sqrt(x * x + y * y);
  }
};

inline GridSpec build_grid(int n, int m, int N, std::array<double, 2> lengths) {
  if (n < 1 || n > 2) throw UsageError("unsupported spatial dimension n=" + std::to_string(n) + " (n must be 1 or 2)");
  if (m < 1) throw UsageError("system size m must be >= 1");
  if (N % 2 != 0) throw UsageError("N must be even");
  if (N < 8) throw UsageError("N must be at least 8");
  for (int k = 0; k < n; ++k)
    if (!(lengths[k] > 0.0)) throw UsageError("period lengths must be positive");
  GridSpec g;
  g.n = n;
  g.m = m;
  g.N = N;
  g.lengths = lengths;
  if (n == 1) g.lengths[1] = 0.0;
  for (int k = 0; k < n; ++k) g.h[k] = lengths[k] / N;
  return g;
}

inline GridSpec build_grid(int n, int m, int N, double length = 2.0 * pi) {
  return build_grid(n, m, N, {length, n == 2 ? length : 0.0});
}

inline std::string describe(const GridSpec& g) {
  std::ostringstream os;
  os << "n=" << g.n << " m=" << g.m << " N=" << g.N << " L=" << g.lengths[0];
  if (g.n == 2) os << "x" << g.lengths[1];
  return os.str();
}

}  // namespace scalc
