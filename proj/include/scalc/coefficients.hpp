#pragma once

// Coefficient fields (a, d) on the periodic grid, their ellipticity constants
// and the built-in families.

#include "scalc/grid.hpp"

#include <map>
#include <optional>

namespace scalc {

using CoeffFn = std::function<Mat(const std::array<double, 2>&)>;

struct CoefficientField {
  GridSpec grid;
  std::vector<Mat> a;  // m x m per cell, sampled at cell nodes
  std::vector<Mat> d;  // nm x nm per cell, sampled at cell midpoints
  std::string family = "custom";
  double lambda_a = 0.0;      // accretivity constant of a
  double lambda_a_inv = 0.0;  // accretivity constant of a^{-1}
  double lambda_d = 0.0;      // discrete Garding constant (set by verify_garding)
  double omega_a = 0.0;       // numerical range half-angle of a (max over cells)
  double omega_d = 0.0;       // numerical range half-angle of d (max over cells)
  double norm_a_inv = 0.0;    // max over cells of ||a^{-1}(x)||
  double norm_d = 0.0;        // max over cells of ||d(x)||
};

/// Smallest eigenvalue of the Hermitian part (M + M^*)/2.
inline double hermitian_part_min_eig(const Mat& M) {
  Mat H = 0.5 * (M + M.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(H, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

/// Half-angle of the smallest closed sector around (0, inf) containing the
/// numerical range of an accretive matrix; pi/2 when the matrix is not accretive.
inline double numerical_range_angle(const Mat& M) {
  auto inside = [&](double w) {
    const cplx up = std::exp(I * (0.5 * pi - w));
    return hermitian_part_min_eig(up * M) >= -1e-14 * M.norm() &&
           hermitian_part_min_eig(std::conj(up) * M) >= -1e-14 * M.norm();
  };
  if (!inside(0.5 * pi)) return 0.5 * pi;
  double lo = 0.0, hi = 0.5 * pi;
  if (inside(0.0)) return 0.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (inside(mid) ? hi : lo) = mid;
  }
  return hi;
}

/// Returns lambda_a = min over cells of the smallest eigenvalue of Re a(x);
/// also records the constant of a^{-1}, the angles and the norms.
inline double verify_accretivity(CoefficientField& cf) {
  const auto& g = cf.grid;
  require(static_cast<Eigen::Index>(cf.a.size()) == g.cells(), "coefficient a has wrong number of cells");
  require(static_cast<Eigen::Index>(cf.d.size()) == g.cells(), "coefficient d has wrong number of cells");
  double lam = std::numeric_limits<double>::infinity();
  double lam_inv = lam;
  double wa = 0.0, wd = 0.0, nai = 0.0, nd = 0.0;
  for (Eigen::Index c = 0; c < g.cells(); ++c) {
    const Mat& a = cf.a[c];
    require(a.rows() == g.m && a.cols() == g.m, "coefficient a(x) must be m x m");
    require(cf.d[c].rows() == g.n * g.m && cf.d[c].cols() == g.n * g.m, "coefficient d(x) must be nm x nm");
    lam = std::min(lam, hermitian_part_min_eig(a));
    Eigen::FullPivLU<Mat> lu(a);
    if (!lu.isInvertible()) throw ContractError("coefficient a(x) is singular at cell " + std::to_string(c));
    Mat ainv = lu.inverse();
    lam_inv = std::min(lam_inv, hermitian_part_min_eig(ainv));
    wa = std::max(wa, numerical_range_angle(a));
    wd = std::max(wd, numerical_range_angle(cf.d[c]));
    nai = std::max(nai, ainv.operatorNorm());
    nd = std::max(nd, cf.d[c].operatorNorm());
  }
  if (!(lam > 0.0)) throw ContractError("coefficient a is not strictly accretive (lambda_a=" + std::to_string(lam) + ")");
  cf.lambda_a = lam;
  cf.lambda_a_inv = lam_inv;
  cf.omega_a = wa;
  cf.omega_d = wd;
  cf.norm_a_inv = nai;
  cf.norm_d = nd;
  return lam;
}

/// Cell midpoint used for sampling d.
inline std::array<double, 2> midpoint(const GridSpec& g, Eigen::Index c) {
  auto x = g.position(c);
  x[0] += 0.5 * g.h[0];
  if (g.n == 2) x[1] += 0.5 * g.h[1];
  return x;
}

inline CoefficientField coefficients_from_functions(const GridSpec& g, const CoeffFn& afun, const CoeffFn& dfun,
                                                    std::string family = "custom") {
  CoefficientField cf;
  cf.grid = g;
  cf.family = std::move(family);
  cf.a.reserve(g.cells());
  cf.d.reserve(g.cells());
  for (Eigen::Index c = 0; c < g.cells(); ++c) {
    cf.a.push_back(afun(g.position(c)));
    cf.d.push_back(dfun(midpoint(g, c)));
  }
  verify_accretivity(cf);
  return cf;
}

enum class Family { constant, smooth_real, complex_rotation, checkerboard };

inline std::string to_string(Family f) {
  switch (f) {
    case Family::constant: return "constant";
    case Family::smooth_real: return "smooth-real";
    case Family::complex_rotation: return "complex-rotation";
    case Family::checkerboard: return "checkerboard";
  }
  return "?";
}

inline Family family_from_string(const std::string& s) {
  if (s == "constant" || s == "T1") return Family::constant;
  if (s == "smooth-real" || s == "T2") return Family::smooth_real;
  if (s == "complex-rotation" || s == "T3") return Family::complex_rotation;
  if (s == "checkerboard") return Family::checkerboard;
  throw UsageError("unknown coefficient family '" + s + "'");
}

/// Built-in families. With phase(x) = 2 pi x_0 / L_0 (times cos(2 pi x_1 / L_1) when n = 2):
///   constant          a = I, d = I
///   smooth-real       a = (1 + cos(phase)/4) I, d = (1 + sin(phase)/2) I (+ symmetric axis coupling for n = 2)
///   complex-rotation  a = (1 + i sin(phase)/4) I, d = exp(i (pi/3) sin(phase)) I
///   checkerboard      a = I, d = 1 or 4 on alternating half-period cells
inline CoefficientField make_coefficients(const GridSpec& g, Family fam) {
  const int m = g.m, nm = g.n * g.m;
  auto phase = [&g](const std::array<double, 2>& x) {
    double p = 2.0 * pi * x[0] / g.lengths[0];
    return p;
  };
  auto modulation = [&g](const std::array<double, 2>& x) {
    return g.n == 2 ? std::cos(2.0 * pi * x[1] / g.lengths[1]) : 1.0;
  };
  CoeffFn afun, dfun;
  switch (fam) {
    case Family::constant:
      afun = [m](const auto&) { return Mat::Identity(m, m); };
      dfun = [nm](const auto&) { return Mat::Identity(nm, nm); };
      break;
    case Family::smooth_real:
      afun = [=](const auto& x) { return Mat((1.0 + 0.25 * std::cos(phase(x))) * Mat::Identity(m, m)); };
      dfun = [=, &g](const auto& x) {
        Mat d = (1.0 + 0.5 * std::sin(phase(x)) * modulation(x)) * Mat::Identity(nm, nm);
        if (g.n == 2) {
          const double b = 0.2 * std::sin(2.0 * pi * x[1] / g.lengths[1]);
          for (int al = 0; al < m; ++al) {
            d(al, m + al) = b;
            d(m + al, al) = b;
          }
        }
        return d;
      };
      break;
    case Family::complex_rotation:
      afun = [=](const auto& x) { return Mat((1.0 + 0.25 * I * std::sin(phase(x))) * Mat::Identity(m, m)); };
      dfun = [=](const auto& x) {
        const double theta = (pi / 3.0) * std::sin(phase(x)) * modulation(x);
        return Mat(std::exp(I * theta) * Mat::Identity(nm, nm));
      };
      break;
    case Family::checkerboard:
      afun = [m](const auto&) { return Mat::Identity(m, m); };
      dfun = [=, &g](const auto& x) {
        int parity = x[0] < 0.5 * g.lengths[0] ? 0 : 1;
        if (g.n == 2) parity ^= x[1] < 0.5 * g.lengths[1] ? 0 : 1;
        return Mat((parity ? 4.0 : 1.0) * Mat::Identity(nm, nm));
      };
      break;
  }
  return coefficients_from_functions(g, afun, dfun, to_string(fam));
}

/// Coefficients (a^*, d^*) of the adjoint boundary operator -(a^*)^{-1} div d^* grad.
inline CoefficientField adjoint_coefficients(const CoefficientField& cf) {
  CoefficientField out = cf;
  for (auto& a : out.a) a = Mat(a.adjoint());
  for (auto& d : out.d) d = Mat(d.adjoint());
  out.family = cf.family + "#";
  verify_accretivity(out);
  return out;
}

/// d replaced by factor * d.
inline CoefficientField scale_d(const CoefficientField& cf, double factor) {
  CoefficientField out = cf;
  for (auto& d : out.d) d *= factor;
  verify_accretivity(out);
  return out;
}

}  // namespace scalc
