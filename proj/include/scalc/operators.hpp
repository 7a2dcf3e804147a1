#pragma once

// Discrete divergence-form operator L = -a^{-1} div d grad and the Dirac pair
// (D, B) on the periodic grid. The gradient is the forward difference and the
// divergence is minus its adjoint, so div = -grad^* holds exactly.

#include "scalc/coefficients.hpp"
#include "scalc/fft.hpp"

#include <iostream>

namespace scalc {

/// Matrix-free forward-difference gradient of an m-component scalar field.
inline Vec gradient(const GridSpec& g, const Vec& f) {
  require(f.size() == g.scalar_dim(), "gradient: field size mismatch");
  Vec out(g.grad_dim());
  for (Eigen::Index c = 0; c < g.cells(); ++c)
    for (int j = 0; j < g.n; ++j) {
      const Eigen::Index cn = g.shift(c, j, 1);
      for (int al = 0; al < g.m; ++al)
        out[(c * g.n + j) * g.m + al] = (f[cn * g.m + al] - f[c * g.m + al]) / g.h[j];
    }
  return out;
}

/// Matrix-free backward-difference divergence, the negative adjoint of gradient().
inline Vec divergence(const GridSpec& g, const Vec& v) {
  require(v.size() == g.grad_dim(), "divergence: field size mismatch");
  Vec out = Vec::Zero(g.scalar_dim());
  for (Eigen::Index c = 0; c < g.cells(); ++c)
    for (int j = 0; j < g.n; ++j) {
      const Eigen::Index cp = g.shift(c, j, -1);
      for (int al = 0; al < g.m; ++al)
        out[c * g.m + al] += (v[(c * g.n + j) * g.m + al] - v[(cp * g.n + j) * g.m + al]) / g.h[j];
    }
  return out;
}

/// Unweighted discrete inner product <u, v> = sum conj(v) u.
inline cplx inner(const Vec& u, const Vec& v) { return v.dot(u); }

/// Per-component mean of an ncomp-interleaved field.
inline Vec component_mean(const Vec& f, Eigen::Index ncomp) {
  const Eigen::Index cells = f.size() / ncomp;
  Vec mean = Vec::Zero(ncomp);
  for (Eigen::Index c = 0; c < cells; ++c) mean += f.segment(c * ncomp, ncomp);
  return mean / static_cast<double>(cells);
}

inline Vec subtract_mean(const Vec& f, Eigen::Index ncomp) {
  Vec mean = component_mean(f, ncomp);
  Vec out = f;
  for (Eigen::Index c = 0; c < f.size() / ncomp; ++c) out.segment(c * ncomp, ncomp) -= mean;
  return out;
}

inline Vec constant_field(const GridSpec& g, const Vec& value) {
  Vec out(g.cells() * value.size());
  for (Eigen::Index c = 0; c < g.cells(); ++c) out.segment(c * value.size(), value.size()) = value;
  return out;
}

/// Block-diagonal sparse matrix with one dense block per cell.
inline SpMat block_diagonal(const std::vector<Mat>& blocks) {
  std::vector<Triplet> tr;
  Eigen::Index off = 0;
  for (const auto& b : blocks) {
    for (Eigen::Index i = 0; i < b.rows(); ++i)
      for (Eigen::Index j = 0; j < b.cols(); ++j)
        if (b(i, j) != cplx(0.0)) tr.emplace_back(off + i, off + j, b(i, j));
    off += b.rows();
  }
  SpMat M(off, off);
  M.setFromTriplets(tr.begin(), tr.end());
  return M;
}

inline SpMat gradient_matrix(const GridSpec& g) {
  std::vector<Triplet> tr;
  tr.reserve(2 * g.grad_dim());
  for (Eigen::Index c = 0; c < g.cells(); ++c)
    for (int j = 0; j < g.n; ++j) {
      const Eigen::Index cn = g.shift(c, j, 1);
      for (int al = 0; al < g.m; ++al) {
        const Eigen::Index row = (c * g.n + j) * g.m + al;
        tr.emplace_back(row, cn * g.m + al, 1.0 / g.h[j]);
        tr.emplace_back(row, c * g.m + al, -1.0 / g.h[j]);
      }
    }
  SpMat G(g.grad_dim(), g.scalar_dim());
  G.setFromTriplets(tr.begin(), tr.end());
  return G;
}

/// View of a sectorial matrix consumed by the contour engine: the matrix, its
/// spectral projection onto the range (along the kernel) and spectral bounds.
struct SectorialView {
  const SpMat* matrix = nullptr;
  std::function<Mat(const Mat&)> to_range;
  double omega = 0.0;      // upper bound for the sectoriality angle
  double lambda_lo = 0.0;  // lower bound for |lambda| over nonzero eigenvalues
  double lambda_hi = 0.0;  // upper bound for |lambda|
  std::string label;
};

struct GardingResult {
  double lambda_d = 0.0;
  bool pointwise_fallback = false;
  bool degenerate = false;
};

inline constexpr Eigen::Index dense_limit = 4096;

/// Smallest generalized eigenvalue of Re(G^* d G) x = lambda G^* G x on the
/// complement of the constants. Above dense_limit unknowns this falls back to
/// the pointwise bound min_x lambda_min(Re d(x)), flagged in the result.
inline GardingResult verify_garding_detailed(const GridSpec& g, const std::vector<Mat>& d) {
  GardingResult res;
  if (g.scalar_dim() > dense_limit) {
    double lam = std::numeric_limits<double>::infinity();
    for (const auto& dc : d) lam = std::min(lam, hermitian_part_min_eig(dc));
    res.lambda_d = lam;
    res.pointwise_fallback = true;
  } else {
    SpMat G = gradient_matrix(g);
    SpMat Dm = block_diagonal(d);
    Mat K = Mat(SpMat(G.adjoint() * Dm * G));
    Mat H = 0.5 * (K + K.adjoint());
    Mat B = Mat(SpMat(G.adjoint() * G));
    // Deflate the constants: they become eigenvalue `shift`, far above the rest.
    const Eigen::Index dim = g.scalar_dim();
    Mat P0 = Mat::Zero(dim, dim);
    for (Eigen::Index c1 = 0; c1 < g.cells(); ++c1)
      for (Eigen::Index c2 = 0; c2 < g.cells(); ++c2)
        for (int al = 0; al < g.m; ++al) P0(c1 * g.m + al, c2 * g.m + al) = 1.0 / static_cast<double>(g.cells());
    const double shift = 1e3 * (1.0 + H.norm());
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(H + shift * P0, B + P0, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("Garding eigensolve failed");
    res.lambda_d = es.eigenvalues()(0);
  }
  if (!(res.lambda_d > 0.0))
    throw ContractError("coefficient d fails the discrete Garding inequality (lambda_d=" + std::to_string(res.lambda_d) + ")");
  if (res.lambda_d < 1e-10) res.degenerate = true;
  return res;
}

inline double verify_garding(const GridSpec& g, const std::vector<Mat>& d) {
  auto r = verify_garding_detailed(g, d);
  if (r.degenerate) std::cerr << "warning: Garding constant below 1e-10, discretization is degenerate\n";
  return r.lambda_d;
}

class DivFormOperator {
 public:
  DivFormOperator() = default;

  DivFormOperator(CoefficientField coeffs) : cf_(std::move(coeffs)) {
    const GridSpec& g = cf_.grid;
    if (cf_.lambda_a <= 0.0) verify_accretivity(cf_);
    if (cf_.lambda_d <= 0.0) {
      auto gr = verify_garding_detailed(g, cf_.d);
      cf_.lambda_d = gr.lambda_d;
      garding_pointwise_ = gr.pointwise_fallback;
    }
    G_ = gradient_matrix(g);
    A_ = block_diagonal(cf_.a);
    std::vector<Mat> ainv;
    ainv.reserve(cf_.a.size());
    double norm_a = 0.0;
    for (const auto& a : cf_.a) {
      ainv.push_back(a.inverse());
      norm_a = std::max(norm_a, a.operatorNorm());
    }
    Ainv_ = block_diagonal(ainv);
    D_ = block_diagonal(cf_.d);
    K_ = SpMat(G_.adjoint() * D_ * G_);
    L_ = SpMat(Ainv_ * K_);
    L_.makeCompressed();
    // |arg lambda| <= omega_a + omega_d for eigenvalues of a^{-1} G^* d G.
    omega_ = std::min(cf_.omega_a + cf_.omega_d, pi - 1e-3);
    double lap_max = 0.0;
    for (int k = 0; k < g.n; ++k) lap_max += 4.0 / (g.h[k] * g.h[k]);
    lambda_hi_ = cf_.norm_a_inv * cf_.norm_d * lap_max;
    const double s1 = 2.0 * std::sin(pi / g.N) / std::max(g.h[0], g.n == 2 ? g.h[1] : 0.0);
    lambda_lo_ = 0.1 * cf_.lambda_d * s1 * s1 / norm_a;
    // Constants-per-component solve: (sum_x a(x)) c = sum_x a(x) f(x).
    Mat asum = Mat::Zero(g.m, g.m);
    for (const auto& a : cf_.a) asum += a;
    asum_lu_ = Eigen::PartialPivLU<Mat>(asum);
  }

  [[nodiscard]] const GridSpec& grid() const { return cf_.grid; }
  [[nodiscard]] const CoefficientField& coeffs() const { return cf_; }
  [[nodiscard]] const SpMat& matrix() const { return L_; }
  [[nodiscard]] const SpMat& grad() const { return G_; }
  [[nodiscard]] SpMat div() const { return SpMat(-G_.adjoint()); }
  [[nodiscard]] const SpMat& a_mat() const { return A_; }
  [[nodiscard]] const SpMat& a_inv_mat() const { return Ainv_; }
  [[nodiscard]] const SpMat& d_mat() const { return D_; }
  /// -div d grad = G^* d G.
  [[nodiscard]] const SpMat& stiffness() const { return K_; }
  [[nodiscard]] double omega_bound() const { return omega_; }
  [[nodiscard]] bool garding_pointwise() const { return garding_pointwise_; }

  [[nodiscard]] Vec apply(const Vec& f) const { return L_ * f; }
  [[nodiscard]] Vec apply_adjoint(const Vec& f) const { return L_.adjoint() * f; }
  /// -a^{-1} div(d grad f) evaluated with the matrix-free stencils.
  [[nodiscard]] Vec apply_matrix_free(const Vec& f) const {
    const GridSpec& g = cf_.grid;
    Vec gr = gradient(g, f);
    Vec flux(g.grad_dim());
    const Eigen::Index nm = g.n * g.m;
    for (Eigen::Index c = 0; c < g.cells(); ++c) flux.segment(c * nm, nm) = cf_.d[c] * gr.segment(c * nm, nm);
    Vec dv = -divergence(g, flux);
    Vec out(g.scalar_dim());
    for (Eigen::Index c = 0; c < g.cells(); ++c)
      out.segment(c * g.m, g.m) = cf_.a[c].partialPivLu().solve(dv.segment(c * g.m, g.m));
    return out;
  }
  [[nodiscard]] Vec mul_a(const Vec& f) const { return A_ * f; }
  [[nodiscard]] Vec mul_a_inv(const Vec& f) const { return Ainv_ * f; }

  /// Constant c with a(f - c) mean-zero; f - c is the spectral projection onto ran(L).
  [[nodiscard]] Vec kernel_component(const Vec& f) const {
    const GridSpec& g = cf_.grid;
    Vec af = A_ * f;
    Vec s = Vec::Zero(g.m);
    for (Eigen::Index c = 0; c < g.cells(); ++c) s += af.segment(c * g.m, g.m);
    return constant_field(g, asum_lu_.solve(s));
  }
  [[nodiscard]] Mat to_range(const Mat& F) const {
    Mat out = F;
    for (Eigen::Index j = 0; j < F.cols(); ++j) out.col(j) -= kernel_component(F.col(j));
    return out;
  }

  [[nodiscard]] SectorialView view() const {
    SectorialView v;
    v.matrix = &L_;
    v.to_range = [this](const Mat& F) { return to_range(F); };
    v.omega = omega_;
    v.lambda_lo = lambda_lo_;
    v.lambda_hi = lambda_hi_;
    v.label = "L[" + cf_.family + "]";
    return v;
  }

 private:
  CoefficientField cf_;
  SpMat G_, A_, Ainv_, D_, K_, L_;
  Eigen::PartialPivLU<Mat> asum_lu_;
  double omega_ = 0.0, lambda_lo_ = 0.0, lambda_hi_ = 0.0;
  bool garding_pointwise_ = false;
};

inline DivFormOperator assemble_divform(const CoefficientField& cf) { return DivFormOperator(cf); }

/// Dirac pair D = [[0, div], [-grad, 0]], B = diag(a^{-1}, d) acting on the
/// scalar block followed by the gradient block.
class DiracOperator {
 public:
  explicit DiracOperator(const DivFormOperator& L) : g_(L.grid()) {
    const Eigen::Index ns = g_.scalar_dim(), ng = g_.grad_dim(), nd = ns + ng;
    std::vector<Triplet> tr;
    const SpMat& G = L.grad();
    SpMat Div = L.div();
    for (int k = 0; k < Div.outerSize(); ++k)
      for (SpMat::InnerIterator it(Div, k); it; ++it) tr.emplace_back(it.row(), ns + it.col(), it.value());
    for (int k = 0; k < G.outerSize(); ++k)
      for (SpMat::InnerIterator it(G, k); it; ++it) tr.emplace_back(ns + it.row(), it.col(), -it.value());
    D_ = SpMat(nd, nd);
    D_.setFromTriplets(tr.begin(), tr.end());
    tr.clear();
    const SpMat& Ai = L.a_inv_mat();
    for (int k = 0; k < Ai.outerSize(); ++k)
      for (SpMat::InnerIterator it(Ai, k); it; ++it) tr.emplace_back(it.row(), it.col(), it.value());
    const SpMat& Dm = L.d_mat();
    for (int k = 0; k < Dm.outerSize(); ++k)
      for (SpMat::InnerIterator it(Dm, k); it; ++it) tr.emplace_back(ns + it.row(), ns + it.col(), it.value());
    B_ = SpMat(nd, nd);
    B_.setFromTriplets(tr.begin(), tr.end());
    DB_ = SpMat(D_ * B_);
    DB2_ = SpMat(DB_ * DB_);
    DB2_.makeCompressed();
    // Upper-left block -div d grad a^{-1}: kernel a * constants, range mean-zero.
    Mat asum = Mat::Zero(g_.m, g_.m);
    for (const auto& a : L.coeffs().a) asum += a;
    asum_lu_ = Eigen::PartialPivLU<Mat>(asum);
    A_ = L.a_mat();
    omega_ = L.omega_bound();
    auto v = L.view();
    lambda_lo_ = v.lambda_lo;
    lambda_hi_ = v.lambda_hi;
  }

  [[nodiscard]] const GridSpec& grid() const { return g_; }
  [[nodiscard]] const SpMat& D() const { return D_; }
  [[nodiscard]] const SpMat& B() const { return B_; }
  [[nodiscard]] const SpMat& DB() const { return DB_; }
  [[nodiscard]] const SpMat& squared() const { return DB2_; }
  [[nodiscard]] Vec apply(const Vec& h) const { return DB_ * h; }

  [[nodiscard]] Vec upper(const Vec& h) const { return h.head(g_.scalar_dim()); }
  [[nodiscard]] Vec lower(const Vec& h) const { return h.tail(g_.grad_dim()); }
  [[nodiscard]] Vec join(const Vec& up, const Vec& lo) const {
    Vec h(g_.dirac_dim());
    h << up, lo;
    return h;
  }

  /// Orthogonal projector onto ran(D) = (mean-zero) x ran(grad), computed in Fourier space.
  [[nodiscard]] Vec range_projector(const Vec& h) const {
    require(h.size() == g_.dirac_dim(), "range_projector: size mismatch");
    const int n = g_.n, m = g_.m;
    Vec up = subtract_mean(upper(h), m);
    Vec lo = lower(h);
    Vec F = fft_forward(g_, lo, n * m);
    for (Eigen::Index c = 0; c < g_.cells(); ++c) {
      auto xi = frequency(g_, c);
      Eigen::Vector2cd sym(0.0, 0.0);
      double s2 = 0.0;
      for (int j = 0; j < n; ++j) {
        sym[j] = forward_symbol(g_, j, xi[j]);
        s2 += std::norm(sym[j]);
      }
      for (int al = 0; al < m; ++al) {
        cplx proj = 0.0;
        for (int j = 0; j < n; ++j) proj += std::conj(sym[j]) * F[(c * n + j) * m + al];
        for (int j = 0; j < n; ++j) F[(c * n + j) * m + al] = s2 > 1e-300 ? sym[j] * proj / s2 : cplx(0.0);
      }
    }
    return join(up, fft_inverse(g_, F, n * m));
  }

  /// Spectral projection of (DB)^2 onto its range, assuming the lower block is
  /// already in ran(grad): subtracts the a * constant kernel part of the upper block.
  [[nodiscard]] Mat to_range(const Mat& H) const {
    Mat out = H;
    const Eigen::Index ns = g_.scalar_dim();
    for (Eigen::Index j = 0; j < H.cols(); ++j) {
      Vec up = H.col(j).head(ns);
      Vec s = Vec::Zero(g_.m);
      for (Eigen::Index c = 0; c < g_.cells(); ++c) s += up.segment(c * g_.m, g_.m);
      Vec kc = A_ * constant_field(g_, asum_lu_.solve(s));
      out.col(j).head(ns) -= kc;
    }
    return out;
  }

  [[nodiscard]] SectorialView squared_view() const {
    SectorialView v;
    v.matrix = &DB2_;
    v.to_range = [this](const Mat& H) { return to_range(H); };
    v.omega = omega_;
    v.lambda_lo = lambda_lo_;
    v.lambda_hi = lambda_hi_;
    v.label = "(DB)^2";
    return v;
  }

 private:
  GridSpec g_;
  SpMat D_, B_, DB_, DB2_, A_;
  Eigen::PartialPivLU<Mat> asum_lu_;
  double omega_ = 0.0, lambda_lo_ = 0.0, lambda_hi_ = 0.0;
};

inline DiracOperator assemble_dirac(const DivFormOperator& L) { return DiracOperator(L); }

/// The two diagonal blocks of (DB)^2 assembled independently of D and B:
/// -div d grad a^{-1} and -grad a^{-1} div d.
inline SpMat dirac_square_blocks(const DivFormOperator& L) {
  const GridSpec& g = L.grid();
  SpMat up = SpMat(L.stiffness() * L.a_inv_mat());
  SpMat lo = SpMat(L.grad() * L.a_inv_mat() * L.grad().adjoint() * L.d_mat());
  std::vector<Triplet> tr;
  for (int k = 0; k < up.outerSize(); ++k)
    for (SpMat::InnerIterator it(up, k); it; ++it) tr.emplace_back(it.row(), it.col(), it.value());
  const Eigen::Index ns = g.scalar_dim();
  for (int k = 0; k < lo.outerSize(); ++k)
    for (SpMat::InnerIterator it(lo, k); it; ++it) tr.emplace_back(ns + it.row(), ns + it.col(), it.value());
  SpMat M(g.dirac_dim(), g.dirac_dim());
  M.setFromTriplets(tr.begin(), tr.end());
  return M;
}

}  // namespace scalc
