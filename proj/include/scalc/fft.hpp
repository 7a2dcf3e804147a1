#pragma once

// Periodic FFTs of interleaved multi-component grid fields.

#include "scalc/grid.hpp"

#include <unsupported/Eigen/FFT>

namespace scalc {

/// Integer wave number of FFT bin j on an axis of N points, in [-N/2, N/2).
inline int wavenumber(int j, int N) { return j < N / 2 ? j : j - N; }

namespace detail {

inline void fft_axis(const GridSpec& g, Vec& data, Eigen::Index ncomp, int axis, bool inverse) {
  Eigen::FFT<double> fft;
  const int N = g.N;
  std::vector<cplx> line(N), out(N);
  const Eigen::Index cells = g.cells();
  // Lines along `axis`: iterate over all cells with coordinate 0 on that axis.
  for (Eigen::Index c0 = 0; c0 < cells; ++c0) {
    if (g.coords(c0)[axis] != 0) continue;
    for (Eigen::Index a = 0; a < ncomp; ++a) {
      Eigen::Index c = c0;
      for (int j = 0; j < N; ++j, c = g.shift(c, axis, 1)) line[j] = data[c * ncomp + a];
      if (inverse)
        fft.inv(out, line);
      else
        fft.fwd(out, line);
      c = c0;
      for (int j = 0; j < N; ++j, c = g.shift(c, axis, 1)) data[c * ncomp + a] = out[j];
    }
  }
}

}  // namespace detail

/// Unnormalized forward transform: F_k = sum_c f_c exp(-i k.x_c).
inline Vec fft_forward(const GridSpec& g, const Vec& f, Eigen::Index ncomp) {
  Vec out = f;
  for (int axis = 0; axis < g.n; ++axis) detail::fft_axis(g, out, ncomp, axis, false);
  return out;
}

/// Inverse of fft_forward (includes the 1/cells factor).
inline Vec fft_inverse(const GridSpec& g, const Vec& F, Eigen::Index ncomp) {
  Vec out = F;
  for (int axis = 0; axis < g.n; ++axis) detail::fft_axis(g, out, ncomp, axis, true);
  return out;
}

/// Angular frequency vector (2 pi k / L) of Fourier cell c.
inline std::array<double, 2> frequency(const GridSpec& g, Eigen::Index c) {
  auto ij = g.coords(c);
  std::array<double, 2> xi{0.0, 0.0};
  for (int k = 0; k < g.n; ++k) xi[k] = 2.0 * pi * wavenumber(ij[k], g.N) / g.lengths[k];
  return xi;
}

/// Symbol of the forward difference on axis k at frequency xi: (e^{i xi h} - 1)/h.
inline cplx forward_symbol(const GridSpec& g, int axis, double xi) {
  const double h = g.h[axis];
  return (std::exp(I * xi * h) - 1.0) / h;
}

/// Discrete symbol of -Laplacian for the forward/backward pair: sum_k 4 sin^2(xi_k h_k / 2)/h_k^2.
inline double laplace_symbol(const GridSpec& g, Eigen::Index c) {
  auto xi = frequency(g, c);
  double s = 0.0;
  for (int k = 0; k < g.n; ++k) {
    const double v = std::sin(0.5 * xi[k] * g.h[k]) / g.h[k] * 2.0;
    s += v * v;
  }
  return s;
}

/// Single Fourier mode exp(i k.x) on component `comp` of an ncomp field.
inline Vec fourier_mode(const GridSpec& g, std::array<int, 2> k, Eigen::Index ncomp = 1, Eigen::Index comp = 0) {
  Vec f = Vec::Zero(g.cells() * ncomp);
  for (Eigen::Index c = 0; c < g.cells(); ++c) {
    auto x = g.position(c);
    double phase = 2.0 * pi * k[0] * x[0] / g.lengths[0];
    if (g.n == 2) phase += 2.0 * pi * k[1] * x[1] / g.lengths[1];
    f[c * ncomp + comp] = std::exp(I * phase);
  }
  return f;
}

/// Periodic convolution of each column of a nonnegative cell field with a kernel
/// given on cell offsets (kernel[c] is the weight of offset coords(c)).
inline RVec periodic_convolve(const GridSpec& g, const RVec& field, const RVec& kernel) {
  Vec F = fft_forward(g, field.cast<cplx>(), 1);
  Vec K = fft_forward(g, kernel.cast<cplx>(), 1);
  Vec out = fft_inverse(g, F.cwiseProduct(K), 1);
  return out.real();
}

}  // namespace scalc
