// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "scalc/scalc.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <sys/wait.h>

using namespace scalc;
namespace fs = std::filesystem;

namespace {

const std::vector<Family> kFamilies{Family::constant, Family::smooth_real, Family::complex_rotation};

DivFormOperator op(int n, int N, Family fam) { return assemble_divform(make_coefficients(build_grid(n, 1, N), fam)); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const Check& c) {
  std::ostringstream os;
  os << c.name << "[" << c.family << "]";
  for (const auto& [k, v] : c.measured) os << " " << k << "=" << v;
  return os.str();
}

struct Gate {
  int failures = 0;

  /// Runs one criterion: the body appends detail lines and returns pass/fail.
  template <class F>
  void run(int id, const std::string& title, F&& body) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::string> detail;
    bool pass = false;
    try {
      pass = body(detail);
    } catch (const std::exception& e) {
      detail.push_back(std::string("exception: ") + e.what());
    }
    const double secs = seconds_since(t0);
    if (!pass) ++failures;
    std::cout << (pass ? "PASS" : "FAIL") << "  " << id << ". " << title << " (" << secs << " s)\n";
    for (const auto& d : detail) std::cout << "        " << d << "\n";
    std::cout.flush();
  }

  static bool record(std::vector<std::string>& detail, const Check& c) {
    detail.push_back(std::string(c.pass ? "ok   " : "bad  ") + fmt(c));
    return c.pass;
  }
};

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SCALC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
}

}  // namespace

int main() {
  std::cout.precision(4);
  Gate gate;
  checks::Params prm;

  gate.run(1, "calculus matches the dense oracle to 1e-8 (N=32, T1-T3, 20 inputs, < 60 s)", [&](auto& d) {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    for (auto fam : kFamilies) ok = Gate::record(d, checks::oracle_equivalence(op(1, 32, fam), to_string(fam), prm, 1e-8)) && ok;
    const double secs = seconds_since(t0);
    d.push_back("runtime " + std::to_string(secs) + " s (limit 60 s)");
    return ok && secs < 60.0;
  });

  gate.run(2, "structural identities (N=64, T1-T3)", [&](auto& d) {
    bool ok = true;
    for (auto fam : kFamilies) {
      const auto L = op(1, 64, fam);
      const std::string f = to_string(fam);
      ok = Gate::record(d, checks::resolvent_identity(L, f, prm, 1e-9)) && ok;
      ok = Gate::record(d, checks::semigroup_property(L, f, prm, 1e-7)) && ok;
      ok = Gate::record(d, checks::block_identity(L, f, prm, 1e-12)) && ok;
      ok = Gate::record(d, checks::link_identity(L, f, prm, 1e-7)) && ok;
      ok = Gate::record(d, checks::intertwining(L, f, prm, 1e-6)) && ok;
    }
    // The block identity involves no functional calculus, so it is also checked on the 2D grid.
    for (auto fam : kFamilies) ok = Gate::record(d, checks::block_identity(op(2, 16, fam), to_string(fam) + ",2D", prm, 1e-12)) && ok;
    return ok;
  });

  gate.run(3, "Kato ratio: T1 = 1 +- 1e-9; T2/T3 intervals stable within 10% from N=64 to N=128", [&](auto& d) {
    bool ok = Gate::record(d, checks::kato(op(1, 64, Family::constant), "constant", prm, true, 1e-9));
    for (auto fam : {Family::smooth_real, Family::complex_rotation}) {
      auto a = kato_ratio(op(1, 64, fam), 100, prm.seed);
      auto b = kato_ratio(op(1, 128, fam), 100, prm.seed);
      const double dlo = std::abs(b.lo / a.lo - 1.0), dhi = std::abs(b.hi / a.hi - 1.0);
      const bool pass = !a.pathological && !b.pathological && dlo <= 0.1 && dhi <= 0.1;
      std::ostringstream os;
      os << (pass ? "ok   " : "bad  ") << to_string(fam) << " N=64 [" << a.lo << ", " << a.hi << "] N=128 [" << b.lo << ", " << b.hi
         << "] drift lo=" << dlo << " hi=" << dhi;
      d.push_back(os.str());
      ok = ok && pass;
    }
    return ok;
  });

  gate.run(4, "p=2 identification: C <= 20 over 100 f per family, psi ratio within [1/10, 10] (N=32)", [&](auto& d) {
    checks::Params p100 = prm;
    p100.samples = 100;
    bool ok = true;
    for (auto fam : kFamilies) ok = Gate::record(d, checks::identification_p2(op(1, 32, fam), to_string(fam), p100, 20.0, 10.0)) && ok;
    return ok;
  });

  gate.run(5, "discrete Fubini tent identity at (s,p)=(0,2) to 1e-12", [&](auto& d) {
    bool ok = Gate::record(d, checks::fubini(build_grid(1, 1, 64), "1D", prm, 1e-12));
    return Gate::record(d, checks::fubini(build_grid(2, 1, 16), "2D", prm, 1e-12)) && ok;
  });

  gate.run(6, "BVP residuals <= 1e-5 for all four solvers, Neumann/regularity consistency 1e-8 (N=32)", [&](auto& d) {
    bool ok = true;
    for (auto fam : kFamilies) ok = Gate::record(d, checks::bvp_residuals(op(1, 32, fam), to_string(fam), prm, 1e-5)) && ok;
    return ok;
  });

  gate.run(7, "compatibility: T1 <= 1e-6; T2/T3 decrease with order >= 1 over N=16,32,64", [&](auto& d) {
    bool ok = Gate::record(d, checks::compatibility(make_coefficients(build_grid(1, 1, 32), Family::constant), "constant", prm, true, 1e-6));
    for (auto fam : {Family::smooth_real, Family::complex_rotation})
      ok = Gate::record(d, checks::compatibility(make_coefficients(build_grid(1, 1, 64), fam), to_string(fam), prm, false)) && ok;
    return ok;
  });

  gate.run(8, "comparability at p=2: C <= 100 over 50 data per family, rescaling invariance 1e-12 (N=32)", [&](auto& d) {
    checks::Params p50 = prm;
    p50.samples = 50;
    bool ok = true;
    for (auto fam : kFamilies) ok = Gate::record(d, checks::comparability(op(1, 32, fam), to_string(fam), p50, 100.0, 1e-12)) && ok;
    return ok;
  });

  gate.run(9, "off-diagonal decay: gamma >= 5, fit residual <= 0.2, both families (N=64)", [&](auto& d) {
    bool ok = true;
    for (auto fam : kFamilies) ok = Gate::record(d, checks::offdiag(op(1, 64, fam), to_string(fam), 5.0, 0.2)) && ok;
    return ok;
  });

  // Criteria 10 and 11 share the probe runs.
  std::vector<std::pair<std::string, CriticalEstimate>> estimates;
  gate.run(10, "no breakdown on the full p-grid: T1 and n=1 T2/T3 at N=32,64,128", [&](auto& d) {
    const ProbeConfig cfg = default_probe_config();
    bool ok = true;
    for (int N : {32, 64, 128})
      for (auto fam : kFamilies) {
        CriticalEstimate ce;
        auto c = checks::critical(op(1, N, fam), to_string(fam) + ",N=" + std::to_string(N), cfg, prm, true, &ce);
        const bool pass = ce.no_breakdown();
        d.push_back(std::string(pass ? "ok   " : "bad  ") + fmt(c));
        ok = ok && pass;
        estimates.emplace_back(c.family, ce);
      }
    return ok;
  });

  gate.run(11, "probe structure: 2 in every interval, q- = p- and Riesz = gradient within one bracket", [&](auto& d) {
    const ProbeConfig cfg = default_probe_config();
    for (auto fam : kFamilies) {
      CriticalEstimate ce;
      auto c = checks::critical(op(2, 16, fam), to_string(fam) + ",2D,N=16", cfg, prm, false, &ce);
      estimates.emplace_back(c.family, ce);
    }
    bool ok = !estimates.empty();
    for (const auto& [label, ce] : estimates) {
      std::ostringstream os;
      os << (ce.structural_ok() ? "ok   " : "bad  ") << label << " contains_two=" << ce.contains_two
         << " q_equals_p_minus=" << ce.q_equals_p_minus << " riesz_matches_gradient=" << ce.riesz_matches_gradient;
      d.push_back(os.str());
      ok = ok && ce.structural_ok();
    }
    return ok;
  });

  gate.run(12, "verify-all twice with one config and seed gives byte-identical report.json", [&](auto& d) {
    const fs::path cfg = fs::path(SCALC_SOURCE_DIR) / "configs" / "verify_t1.json";
    const RunConfig rc = parse_config_file(cfg);
    const fs::path report = fs::path(rc.output) / "report.json";
    const int r1 = run_cli("verify-all -c " + cfg.string());
    const std::string a = slurp(report);
    fs::remove_all(rc.output);
    const int r2 = run_cli("verify-all -c " + cfg.string());
    const std::string b = slurp(report);
    d.push_back("exit codes " + std::to_string(r1) + ", " + std::to_string(r2) + "; report sizes " + std::to_string(a.size()) + ", " +
                std::to_string(b.size()) + " bytes");
    return r1 == r2 && (r1 == 0 || r1 == 1) && !a.empty() && a == b;
  });

  std::cout << (gate.failures == 0 ? "ALL CRITERIA PASS" : std::to_string(gate.failures) + " CRITERIA FAILED") << "\n";
  return gate.failures == 0 ? 0 : 1;
}
