#pragma once

// Shared scalar/matrix aliases, error types and the deterministic worker helper.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace scalc {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<cplx>;
using Triplet = Eigen::Triplet<cplx>;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

/// Error categories mirror the CLI exit codes (2 usage/config, 3 numerical).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition violations detected inside the numerical modules.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ContractError(msg);
}

/// Worker count: SCALC_WORKERS overrides the library default of one worker.
inline int default_workers() {
  if (const char* env = std::getenv("SCALC_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  return 1;
}

/// Runs fn(i) for i in [0, count) on up to `workers` threads. Callers write
/// into per-index slots so that any later reduction has a fixed order.
inline void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(workers), count);
  std::vector<std::thread> pool;
  pool.reserve(w);
  std::vector<std::exception_ptr> errors(w);
  for (std::size_t k = 0; k < w; ++k) {
    pool.emplace_back([&, k] {
      try {
        for (std::size_t i = k; i < count; i += w) fn(i);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// Column-wise maximum of ||a_j - b_j|| / ||b_j|| with a floor on the denominator.
inline double max_rel_col_diff(const Mat& a, const Mat& b, double floor = 1e-300) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    const double den = std::max(b.col(j).norm(), floor);
    worst = std::max(worst, (a.col(j) - b.col(j)).norm() / den);
  }
  return worst;
}

inline double rel_diff(const Vec& a, const Vec& b) {
  const double den = std::max(b.norm(), 1e-300);
  return (a - b).norm() / den;
}

}  // namespace scalc
