#include "scalc/scalc.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sys/wait.h>

using namespace scalc;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("scalc_test_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

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

TEST(Config, Defaults) {
  RunConfig c;
  EXPECT_EQ(c.command, "verify-all");
  EXPECT_EQ(c.n, 1);
  EXPECT_EQ(c.N, 32);
  EXPECT_EQ(c.families, (std::vector<std::string>{"T1", "T2", "T3"}));
  EXPECT_NO_THROW(validate(c));
  EXPECT_EQ(parse_config_text("{}"), c);
}

TEST(Config, RoundTrip) {
  RunConfig c;
  c.command = "probe";
  c.problem = "critical";
  c.n = 2;
  c.N = 16;
  c.p = 1.25;
  c.p_grid = {0.75, 1.5, 3.0};
  c.families = {"T2"};
  c.seed = 42;
  c.svg = false;
  EXPECT_EQ(parse_config_text(emit_config(c)), c);
}

TEST(Config, RejectsExponentsAtTheFloor) {
  for (double p : {0.4, 0.5}) {
    try {
      parse_config_text("{\"p\": " + std::to_string(p) + "}");
      FAIL() << "expected a usage error for p=" << p;
    } catch (const UsageError& e) {
      EXPECT_NE(std::string(e.what()).find("1_*"), std::string::npos) << e.what();
    }
  }
  EXPECT_NO_THROW(parse_config_text("{\"p\": 0.55}"));
}

TEST(Config, RejectsUnknownKeysAndBadTypes) {
  EXPECT_THROW(parse_config_text("{\"colour\": 1}"), UsageError);
  EXPECT_THROW(parse_config_text("{\"grid\": {\"N\": 32, \"depth\": 2}}"), UsageError);
  EXPECT_THROW(parse_config_text("{\"samples\": \"many\"}"), UsageError);
  EXPECT_THROW(parse_config_text("{not json"), UsageError);
  EXPECT_THROW(parse_config_text("{\"command\": \"solve\"}"), UsageError);
}

TEST(Config, SampleConfigsParse) {
  const fs::path dir = fs::path(SCALC_SOURCE_DIR) / "configs";
  int count = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    EXPECT_NO_THROW(parse_config_file(e.path())) << e.path();
    ++count;
  }
  EXPECT_GT(count, 0);
}

TEST(FieldIo, BoundaryRoundTrip) {
  const auto dir = scratch("boundary");
  auto g = build_grid(2, 1, 8);
  Rng rng(1);
  Vec f = random_bandlimited(g, 2, 3, rng);
  emit_field(g, f, 2, dir / "f.scalc");
  FieldFile back = read_field(dir / "f.scalc");
  EXPECT_EQ(back.grid.n, 2);
  EXPECT_EQ(back.grid.N, 8);
  EXPECT_EQ(back.ncomp, 2);
  EXPECT_TRUE(back.t.empty());
  ASSERT_EQ(back.values.cols(), 1);
  EXPECT_EQ((back.values.col(0) - f).cwiseAbs().maxCoeff(), 0.0);
}

TEST(FieldIo, HalfSpaceRoundTrip) {
  const auto dir = scratch("halfspace");
  auto g = build_grid(1, 1, 16);
  auto F = make_halfspace(g, 1, make_tgrid(0.1, 1.0, 4));
  for (Eigen::Index i = 0; i < F.values.size(); ++i) F.values.data()[i] = cplx(static_cast<double>(i), -0.5 * static_cast<double>(i));
  emit_field(F, dir / "u.scalc");
  FieldFile back = read_field(dir / "u.scalc");
  EXPECT_EQ(back.t, F.tgrid.t);
  EXPECT_EQ((back.values - F.values).cwiseAbs().maxCoeff(), 0.0);
}

TEST(FieldIo, RejectsBadMagicAndTruncation) {
  const auto dir = scratch("bad");
  {
    std::ofstream os(dir / "bad.scalc", std::ios::binary);
    os << "NOTSCALC and some bytes";
  }
  EXPECT_THROW(read_field(dir / "bad.scalc"), IoError);
  auto g = build_grid(1, 1, 8);
  emit_field(g, Vec::Ones(8), 1, dir / "ok.scalc");
  const std::string bytes = slurp(dir / "ok.scalc");
  {
    std::ofstream os(dir / "short.scalc", std::ios::binary);
    os << bytes.substr(0, bytes.size() - 5);
  }
  EXPECT_THROW(read_field(dir / "short.scalc"), IoError);
  {
    std::ofstream os(dir / "long.scalc", std::ios::binary);
    os << bytes << "x";
  }
  EXPECT_THROW(read_field(dir / "long.scalc"), IoError);
}

TEST(FieldIo, CoefficientRoundTrip) {
  const auto dir = scratch("coeffs");
  auto cf = make_coefficients(build_grid(2, 1, 8), Family::complex_rotation);
  write_coefficients(cf, dir / "c.scalc");
  auto back = read_coefficients(dir / "c.scalc");
  ASSERT_EQ(back.a.size(), cf.a.size());
  for (std::size_t c = 0; c < cf.a.size(); ++c) {
    EXPECT_EQ((back.a[c] - cf.a[c]).norm(), 0.0);
    EXPECT_EQ((back.d[c] - cf.d[c]).norm(), 0.0);
  }
  EXPECT_THROW(read_coefficients(dir / "missing.scalc"), UsageError);
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("exit");
  EXPECT_EQ(run_cli("operator-check --family T1 --N 16 --no-svg -o " + (dir / "ok").string()), 0);
  EXPECT_EQ(run_cli(""), 2);
  EXPECT_EQ(run_cli("operator-check --p 0.4 -o " + dir.string()), 2);
  EXPECT_EQ(run_cli("operator-check --coefficients " + (dir / "nope.scalc").string() + " -o " + dir.string()), 2);
  EXPECT_EQ(run_cli("solve sideways -o " + dir.string()), 2);
  EXPECT_EQ(run_cli("--version"), 0);
  EXPECT_TRUE(fs::exists(dir / "ok" / "report.json"));
}

TEST(Cli, CoefficientFileRun) {
  const auto dir = scratch("coeffrun");
  write_coefficients(make_coefficients(build_grid(1, 1, 16), Family::smooth_real), dir / "c.scalc");
  EXPECT_EQ(run_cli("operator-check --coefficients " + (dir / "c.scalc").string() + " --no-svg -o " + (dir / "out").string()), 0);
  const auto j = json::parse(slurp(dir / "out" / "report.json"));
  EXPECT_EQ(j.at("exit_code"), 0);
}

TEST(Cli, ReportIsByteIdenticalAcrossRuns) {
  const auto dir = scratch("determinism");
  const std::string args = "calculus-check --family T2 --N 16 --samples 4 --no-svg -o ";
  EXPECT_EQ(run_cli(args + (dir / "a").string()), 0);
  EXPECT_EQ(run_cli(args + (dir / "b").string()), 0);
  const std::string a = slurp(dir / "a" / "report.json"), b = slurp(dir / "b" / "report.json");
  ASSERT_FALSE(a.empty());
  // The output directory is part of the echoed config, so compare with it normalised.
  auto ja = json::parse(a), jb = json::parse(b);
  ja["config"]["output"] = jb["config"]["output"] = "";
  EXPECT_EQ(ja.dump(), jb.dump());
}
