#pragma once

// SCALC1 array container.
//
// Layout (little-endian, all integers int64, all reals IEEE double):
//   "SCALC1\0\0"  n  m  ncomp  N[n]  lengths[n]  nt  t[nt]  data
// data is row-major over (t, cell, component) as interleaved (re, im) pairs.
// nt = 0 marks a boundary field. Coefficient files are boundary fields with
// ncomp = m^2 + (nm)^2: the row-major a(x) block followed by d(x).

#include "scalc/analysis.hpp"
#include "scalc/coefficients.hpp"

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace scalc {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FieldFile {
  GridSpec grid;
  Eigen::Index ncomp = 1;
  std::vector<double> t;  // empty for boundary fields
  Mat values;             // cells*ncomp x max(1, nt)
};

namespace detail {

inline constexpr char scalc_magic[8] = {'S', 'C', 'A', 'L', 'C', '1', '\0', '\0'};

inline void put_i64(std::ostream& os, std::int64_t v) { os.write(reinterpret_cast<const char*>(&v), sizeof v); }
inline void put_f64(std::ostream& os, double v) { os.write(reinterpret_cast<const char*>(&v), sizeof v); }
inline std::int64_t get_i64(std::istream& is) {
  std::int64_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw IoError("SCALC1: truncated header");
  return v;
}
inline double get_f64(std::istream& is) {
  double v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw IoError("SCALC1: truncated data");
  return v;
}

}  // namespace detail

inline void write_field(const FieldFile& f, const std::filesystem::path& path) {
  const Eigen::Index rows = f.grid.cells() * f.ncomp;
  const Eigen::Index cols = f.t.empty() ? 1 : static_cast<Eigen::Index>(f.t.size());
  require(f.values.rows() == rows && f.values.cols() == cols, "write_field: values do not match the header");
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open '" + tmp.string() + "' for writing");
    os.write(detail::scalc_magic, 8);
    detail::put_i64(os, f.grid.n);
    detail::put_i64(os, f.grid.m);
    detail::put_i64(os, f.ncomp);
    for (int k = 0; k < f.grid.n; ++k) detail::put_i64(os, f.grid.N);
    for (int k = 0; k < f.grid.n; ++k) detail::put_f64(os, f.grid.lengths[k]);
    detail::put_i64(os, static_cast<std::int64_t>(f.t.size()));
    for (double t : f.t) detail::put_f64(os, t);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) {
        detail::put_f64(os, f.values(i, j).real());
        detail::put_f64(os, f.values(i, j).imag());
      }
    if (!os) throw IoError("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

inline FieldFile read_field(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path.string() + "'");
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, detail::scalc_magic, 8) != 0)
    throw IoError("'" + path.string() + "' is not a SCALC1 file (bad magic)");
  FieldFile f;
  const auto n = detail::get_i64(is), m = detail::get_i64(is), ncomp = detail::get_i64(is);
  if (n < 1 || n > 2 || m < 1 || ncomp < 1) throw IoError("SCALC1: malformed header");
  std::array<std::int64_t, 2> N{0, 0};
  std::array<double, 2> len{0.0, 0.0};
  for (int k = 0; k < n; ++k) N[k] = detail::get_i64(is);
  for (int k = 0; k < n; ++k) len[k] = detail::get_f64(is);
  if (n == 2 && N[0] != N[1]) throw IoError("SCALC1: only square grids are supported");
  try {
    f.grid = build_grid(static_cast<int>(n), static_cast<int>(m), static_cast<int>(N[0]), len);
  } catch (const UsageError& e) {
    throw IoError(std::string("SCALC1: ") + e.what());
  }
  f.ncomp = ncomp;
  const auto nt = detail::get_i64(is);
  if (nt < 0) throw IoError("SCALC1: negative t-grid length");
  for (std::int64_t j = 0; j < nt; ++j) f.t.push_back(detail::get_f64(is));
  const Eigen::Index rows = f.grid.cells() * ncomp, cols = nt == 0 ? 1 : nt;
  f.values.resize(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = detail::get_f64(is);
      const double im = detail::get_f64(is);
      f.values(i, j) = cplx(re, im);
    }
  if (is.peek() != std::char_traits<char>::eof()) throw IoError("SCALC1: trailing bytes after data");
  return f;
}

inline void emit_field(const GridSpec& g, const Vec& f, Eigen::Index ncomp, const std::filesystem::path& path) {
  write_field(FieldFile{g, ncomp, {}, Mat(f)}, path);
}

inline void emit_field(const HalfSpaceField& F, const std::filesystem::path& path) {
  write_field(FieldFile{F.grid, F.ncomp, F.tgrid.t, F.values}, path);
}

inline void write_coefficients(const CoefficientField& cf, const std::filesystem::path& path) {
  const GridSpec& g = cf.grid;
  const Eigen::Index m = g.m, nm = g.n * g.m, nc = m * m + nm * nm;
  Vec data(g.cells() * nc);
  for (Eigen::Index c = 0; c < g.cells(); ++c) {
    Eigen::Index k = c * nc;
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j) data[k++] = cf.a[static_cast<std::size_t>(c)](i, j);
    for (Eigen::Index i = 0; i < nm; ++i)
      for (Eigen::Index j = 0; j < nm; ++j) data[k++] = cf.d[static_cast<std::size_t>(c)](i, j);
  }
  emit_field(g, data, nc, path);
}

/// Loads a coefficient file; a missing file is a usage error.
inline CoefficientField read_coefficients(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw UsageError("coefficient file '" + path.string() + "' does not exist");
  FieldFile f = read_field(path);
  const GridSpec& g = f.grid;
  const Eigen::Index m = g.m, nm = g.n * g.m, nc = m * m + nm * nm;
  if (!f.t.empty() || f.ncomp != nc) throw IoError("'" + path.string() + "' is not a coefficient file");
  CoefficientField cf;
  cf.grid = g;
  cf.family = "file:" + path.filename().string();
  for (Eigen::Index c = 0; c < g.cells(); ++c) {
    Eigen::Index k = c * nc;
    Mat a(m, m), d(nm, nm);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j) a(i, j) = f.values(k++, 0);
    for (Eigen::Index i = 0; i < nm; ++i)
      for (Eigen::Index j = 0; j < nm; ++j) d(i, j) = f.values(k++, 0);
    cf.a.push_back(a);
    cf.d.push_back(d);
  }
  verify_accretivity(cf);
  return cf;
}

}  // namespace scalc
