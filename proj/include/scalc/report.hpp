#pragma once

// Run reports: a JSON document with per-check results, CSV tables per curve
// and optional SVG line plots. Files are written temp-then-rename and carry no
// timestamps, so reruns with the same config are byte-identical.

#include "scalc/config.hpp"

#include <cstdio>
#include <iomanip>
#include <map>
#include <sstream>

#ifndef SCALC_VERSION
#define SCALC_VERSION "0.1.0"
#endif

namespace scalc {

struct Check {
  std::string name;
  std::string family;
  bool pass = false;
  std::map<std::string, double> measured;
  double tolerance = 0.0;
  std::string note;
};

struct NamedCurve {
  std::string name;
  std::string family;
  std::string xlabel = "x", ylabel = "y";
  bool logx = true, logy = true;
  std::vector<std::pair<double, double>> points;
};

enum class FailureKind { none, check, usage, numerical };

struct Report {
  RunConfig config;
  std::string grid;  // describe(GridSpec) of the run
  std::vector<Check> checks;
  std::vector<NamedCurve> curves;
  FailureKind failure = FailureKind::none;
  std::string failure_message;

  [[nodiscard]] bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  /// 0 pass, 1 check failure, 2 usage/config error, 3 numerical failure.
  [[nodiscard]] int exit_code() const {
    switch (failure) {
      case FailureKind::usage: return 2;
      case FailureKind::numerical: return 3;
      case FailureKind::check: return 1;
      case FailureKind::none: break;
    }
    return all_pass() ? 0 : 1;
  }
  Check& add(Check c) {
    checks.push_back(std::move(c));
    return checks.back();
  }
};

inline std::string to_string(FailureKind k) {
  switch (k) {
    case FailureKind::none: return "none";
    case FailureKind::check: return "check";
    case FailureKind::usage: return "usage";
    case FailureKind::numerical: return "numerical";
  }
  return "?";
}

/// Non-finite numbers are written as strings so the document stays valid JSON.
inline json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

inline std::string curve_file(const NamedCurve& c) {
  std::string s = c.name + (c.family.empty() ? "" : "_" + c.family);
  for (char& ch : s)
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_' && ch != '-') ch = '_';
  return s;
}

inline json to_json(const Report& r) {
  json j;
  j["version"] = SCALC_VERSION;
  j["config"] = to_json(r.config);
  j["pass"] = r.exit_code() == 0;
  j["exit_code"] = r.exit_code();
  json checks = json::array();
  for (const auto& c : r.checks) {
    json m = json::object();
    for (const auto& [k, v] : c.measured) m[k] = number(v);
    checks.push_back({{"name", c.name},
                      {"family", c.family},
                      {"pass", c.pass},
                      {"measured", m},
                      {"tolerance", number(c.tolerance)},
                      {"note", c.note},
                      {"grid", r.grid},
                      {"seed", r.config.seed},
                      {"tol", r.config.tol}});
  }
  j["checks"] = checks;
  json curves = json::array();
  for (const auto& c : r.curves)
    curves.push_back({{"name", c.name},
                      {"family", c.family},
                      {"csv", curve_file(c) + ".csv"},
                      {"points", c.points.size()},
                      {"grid", r.grid},
                      {"seed", r.config.seed},
                      {"tol", r.config.tol}});
  j["curves"] = curves;
  if (r.failure == FailureKind::usage || r.failure == FailureKind::numerical)
    j["failure"] = {{"category", to_string(r.failure)}, {"message", r.failure_message}};
  else
    j["failure"] = nullptr;
  return j;
}

/// Writes `text` to `path` through a temporary file in the same directory.
inline void write_atomic(const std::filesystem::path& path, const std::string& text) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw UsageError("cannot write '" + tmp.string() + "'");
    os << text;
    if (!os) throw UsageError("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

inline std::string curve_csv(const NamedCurve& c) {
  std::ostringstream os;
  os << std::setprecision(17) << c.xlabel << "," << c.ylabel << "\n";
  for (const auto& [x, y] : c.points) os << x << "," << y << "\n";
  return os.str();
}

/// Minimal line plot: axes box, tick labels at the data range ends, one polyline.
inline std::string curve_svg(const NamedCurve& c) {
  const double W = 480, H = 320, ml = 70, mr = 20, mt = 30, mb = 50;
  std::vector<std::pair<double, double>> pts;
  for (const auto& [x, y] : c.points) {
    if ((c.logx && x <= 0.0) || (c.logy && y <= 0.0) || !std::isfinite(x) || !std::isfinite(y)) continue;
    pts.emplace_back(c.logx ? std::log10(x) : x, c.logy ? std::log10(y) : y);
  }
  std::ostringstream os;
  os << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\"" << H - mt - mb
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">" << c.name
     << (c.family.empty() ? "" : " (" + c.family + ")") << "</text>\n";
  if (!pts.empty()) {
    double x0 = pts[0].first, x1 = x0, y0 = pts[0].second, y1 = y0;
    for (const auto& [x, y] : pts) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * (W - ml - mr); };
    auto py = [&](double y) { return H - mb - (y - y0) / (y1 - y0) * (H - mt - mb); };
    os << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : pts) os << px(x) << "," << py(y) << " ";
    os << "\"/>\n";
    auto lab = [](double v, bool lg) { return lg ? std::pow(10.0, v) : v; };
    os << "<text x=\"" << ml << "\" y=\"" << H - mb + 16 << "\" font-size=\"11\">" << lab(x0, c.logx) << "</text>\n";
    os << "<text x=\"" << W - mr << "\" y=\"" << H - mb + 16 << "\" text-anchor=\"end\" font-size=\"11\">" << lab(x1, c.logx)
       << "</text>\n";
    os << "<text x=\"" << ml - 4 << "\" y=\"" << H - mb << "\" text-anchor=\"end\" font-size=\"11\">" << lab(y0, c.logy)
       << "</text>\n";
    os << "<text x=\"" << ml - 4 << "\" y=\"" << mt + 10 << "\" text-anchor=\"end\" font-size=\"11\">" << lab(y1, c.logy)
       << "</text>\n";
  }
  os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">" << c.xlabel
     << (c.logx ? " (log)" : "") << "</text>\n";
  os << "<text x=\"14\" y=\"" << H / 2 << "\" font-size=\"12\" transform=\"rotate(-90 14 " << H / 2 << ")\">" << c.ylabel
     << (c.logy ? " (log)" : "") << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

/// Writes report.json, one CSV per curve and (optionally) one SVG per curve
/// into the configured output directory. Returns the path of report.json.
inline std::filesystem::path write_report(const Report& r) {
  const std::filesystem::path dir(r.config.output);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw UsageError("cannot create output directory '" + dir.string() + "': " + ec.message());
  for (const auto& c : r.curves) {
    write_atomic(dir / (curve_file(c) + ".csv"), curve_csv(c));
    if (r.config.svg) write_atomic(dir / (curve_file(c) + ".svg"), curve_svg(c));
  }
  const auto path = dir / "report.json";
  write_atomic(path, to_json(r).dump(2) + "\n");
  return path;
}

}  // namespace scalc
