#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "kernelgauge/cli.hpp"
#include "kernelgauge/scenario.hpp"

using namespace kernelgauge;

namespace {

std::string config_error(const std::string& text) {
  try {
    (void)parse_scenario(text, "s.json");
  } catch (const InvalidConfig& e) {
    return e.what();
  }
  return "";
}

const char* kDisc = R"({
  "domain": {"kind": "disc"},
  "point": {"z0": 0.25},
  "weight": {"p0": 1}
})";

int run(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
  args.insert(args.begin(), "kernelgauge");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_command(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("kernelgauge_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST(Scenario, ParsesFullSchema) {
  const auto sc = parse_scenario(R"({
    "domain": {"kind": "annulus", "q": 0.3},
    "point": {"z0": [0.5, 0.1]},
    "weight": {"p0": 2, "aG": 0.5, "epsilon": 0.05,
               "u": {"log": 0.2, "laurent": [[1, 0.1], [-2, 0.0, 0.3]]},
               "c": {"kind": "poly", "m": 0.5}},
    "k": 1,
    "run": {"schedule": [8, 16, 24], "boundary_nodes": 128, "tol_eq": 1e-3, "curve_points": 10,
            "output_dir": "x", "area": {"radial_cells": 6, "grading": 0.6}}
  })");
  const auto& c = sc.config;
  EXPECT_FALSE(c.domain.is_disc());
  EXPECT_DOUBLE_EQ(c.domain.inner_radius(), 0.3);
  EXPECT_EQ(c.z0, cplx(0.5, 0.1));
  EXPECT_EQ(c.k, 1);
  EXPECT_DOUBLE_EQ(c.psi.p0, 2.0);
  EXPECT_DOUBLE_EQ(c.psi.epsilon, 0.05);
  EXPECT_DOUBLE_EQ(c.phi.a_green, 0.5);
  EXPECT_DOUBLE_EQ(c.phi.u.log_coefficient(), 0.2);
  EXPECT_EQ(c.phi.u.coefficient(-2), cplx(0.0, 0.3));
  EXPECT_EQ(c.profile.kind(), ProfileKind::poly);
  EXPECT_EQ(sc.run.verify.kernel.schedule, (std::vector<int>{8, 16, 24}));
  EXPECT_EQ(sc.run.verify.kernel.boundary_nodes, 128);
  EXPECT_EQ(sc.run.verify.kernel.area.radial_cells, 6);
  EXPECT_DOUBLE_EQ(sc.run.verify.tol_eq, 1e-3);
  EXPECT_EQ(sc.run.curve_points, 10);
  EXPECT_EQ(sc.run.output_dir, "x");
}

TEST(Scenario, UnknownKeysRejectedWithLine) {
  const std::string msg = config_error(R"({
  "domain": {"kind": "disc"},
  "point": {"z0": 0.0},
  "weight": {"p0": 1,
    "colour": 3}
})");
  EXPECT_NE(msg.find("s.json:5:"), std::string::npos) << msg;
  EXPECT_NE(msg.find("unknown key 'weight.colour'"), std::string::npos) << msg;
  EXPECT_NE(config_error(R"({"domain": {"kind": "disc"}, "point": {"z0": 0}, "weight": {}, "extra": 1})").find(
                "unknown key"),
            std::string::npos);
}

TEST(Scenario, Diagnostics) {
  EXPECT_NE(config_error("{\n  \"domain\": \n}").find("s.json:3:"), std::string::npos);
  EXPECT_NE(config_error(R"({"domain": {"kind": "disc", "q": 0.2}, "point": {"z0": 0}, "weight": {}})")
                .find("annulus only"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"domain": {"kind": "annulus"}, "point": {"z0": 0.5}, "weight": {}})").find("needs 'q'"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"domain": {"kind": "annulus", "q": 0.5}, "point": {"z0": 0.2}, "weight": {}})")
                .find("inside"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"domain": {"kind": "disc"}, "point": {"z0": 0}, "weight": {}, "k": 9})").find("k"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"domain": {"kind": "disc"}, "point": {"z0": 0}, "weight": {"u": {"log": 1}}})")
                .find("singular"),
            std::string::npos);
  const std::string bad = config_error(R"({"domain": {"kind": "disc"}, "point": {"z0": 0},
    "weight": {"c": {"kind": "exp_delta", "delta": 1.2}}})");
  EXPECT_NE(bad.find("s.json:2:"), std::string::npos) << bad;
  EXPECT_NE(bad.find("c-profile not integrable"), std::string::npos) << bad;
  EXPECT_NE(config_error(R"({"domain": {"kind": "disc"}, "point": {"z0": 0}, "weight": {},
    "run": {"schedule": [16, 8]}})").find("must increase"),
            std::string::npos);
}

TEST(Scenario, ExampleFilesLoad) {
  for (const char* f : {"disc_baseline", "disc_weighted", "annulus", "annulus_higher"}) {
    EXPECT_NO_THROW(load_scenario(std::string(KERNELGAUGE_SCENARIO_DIR) + "/" + f + ".json")) << f;
  }
  EXPECT_THROW(load_scenario(std::string(KERNELGAUGE_SCENARIO_DIR) + "/bad.json"), InvalidConfig);
  EXPECT_THROW(load_scenario("/nonexistent/x.json"), InvalidConfig);
}

TEST(Cli, ParseRange) {
  const auto r = parse_range("0:1:5");
  EXPECT_EQ(r.n, 5);
  EXPECT_DOUBLE_EQ(r.value(0), 0.0);
  EXPECT_DOUBLE_EQ(r.value(2), 0.5);
  EXPECT_DOUBLE_EQ(r.value(4), 1.0);
  EXPECT_DOUBLE_EQ(parse_range("0.3:0.9:1").value(0), 0.3);
  for (const char* bad : {"0:1", "0:1:5:6", "a:1:2", "0:1:0", "0:1:2.5", ""}) EXPECT_THROW(parse_range(bad), InvalidConfig) << bad;
}

TEST(Cli, SweepExitPriority) {
  std::vector<SweepRow> rows(3);
  EXPECT_EQ(sweep_exit(rows), exit_pass);
  rows[1].code = exit_inconclusive;
  EXPECT_EQ(sweep_exit(rows), exit_inconclusive);
  rows[2].code = exit_fail;
  EXPECT_EQ(sweep_exit(rows), exit_fail);
  rows[0].code = exit_config;
  EXPECT_EQ(sweep_exit(rows), exit_config);
}

TEST(Cli, ExitCodesAndNumbers) {
  EXPECT_EQ(exit_code(Verdict::pass), 0);
  EXPECT_EQ(exit_code(Verdict::fail), 1);
  EXPECT_EQ(exit_code(Verdict::inconclusive), 3);
  EXPECT_EQ(num(0.1), "0.1");
  EXPECT_EQ(num(1.0 / 3.0), "0.333333333333333");
}

TEST(Cli, WithParam) {
  WeightConfig c;
  c.domain = DomainSpec::annulus(0.25);
  c.z0 = 0.5;
  EXPECT_DOUBLE_EQ(with_param(c, "alpha_u", 0.25).phi.u.log_coefficient(), 0.25);
  EXPECT_DOUBLE_EQ(with_param(c, "q", 0.3).domain.inner_radius(), 0.3);
  EXPECT_EQ(with_param(c, "z0", 0.6).z0, cplx(0.6));
  EXPECT_THROW(with_param(c, "delta", 1.2), InvalidProfile);
  EXPECT_THROW(with_param(c, "nope", 1.0), InvalidConfig);
}

TEST(Cli, ThreadCap) {
  ::setenv("KERNELGAUGE_THREADS", "3", 1);
  EXPECT_EQ(thread_cap(), 3u);
  ::setenv("KERNELGAUGE_THREADS", "zero", 1);
  EXPECT_THROW(thread_cap(), InvalidConfig);
  ::unsetenv("KERNELGAUGE_THREADS");
  EXPECT_GE(thread_cap(), 1u);
}

TEST(Cli, CurvePoints) {
  WeightConfig c;
  c.domain = DomainSpec::annulus(0.25);
  c.z0 = cplx(0.0, 0.5);
  const auto b = curve_points(c, "boundary", 8);
  for (const cplx z : b) EXPECT_TRUE(std::abs(std::abs(z) - 1.0) < 1e-12 || std::abs(std::abs(z) - 0.25) < 1e-12);
  for (const cplx z : curve_points(c, "radial", 8)) {
    EXPECT_TRUE(c.domain.contains(z));
    EXPECT_NEAR(std::arg(z), kPi / 2, 1e-12);
  }
  EXPECT_THROW(curve_points(c, "spiral", 8), InvalidConfig);
}

TEST(Cli, VerifyBadScenarioExitsTwo) {
  std::string out, err;
  const auto dir = scratch("bad");
  EXPECT_EQ(run({"verify", std::string(KERNELGAUGE_SCENARIO_DIR) + "/bad.json", "--out", dir.string()}, &out, &err),
            exit_config);
  EXPECT_NE(err.find("c-profile not integrable"), std::string::npos) << err;
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({"frobnicate"}), exit_config);
  EXPECT_EQ(run({"verify"}), exit_config);
  EXPECT_EQ(run({"sweep", std::string(KERNELGAUGE_SCENARIO_DIR) + "/annulus.json", "--param", "alpha_u", "--range",
                 "0:1"}),
            exit_config);
  EXPECT_EQ(run({"kernel-eval", std::string(KERNELGAUGE_SCENARIO_DIR) + "/annulus.json", "--curve", "spiral"}),
            exit_config);
}

TEST(Cli, VerifyWritesReportsDeterministically) {
  const auto dir = scratch("verify");
  std::string out1, out2;
  const std::string scen = std::string(KERNELGAUGE_SCENARIO_DIR) + "/disc_weighted.json";
  ASSERT_EQ(run({"verify", scen, "--out", (dir / "a").string()}, &out1), exit_pass);
  ASSERT_EQ(run({"verify", scen, "--out", (dir / "b").string()}, &out2), exit_pass);
  EXPECT_EQ(out1, out2);
  EXPECT_EQ(slurp(dir / "a" / "report.csv"), slurp(dir / "b" / "report.csv"));
  EXPECT_EQ(slurp(dir / "a" / "report.md"), slurp(dir / "b" / "report.md"));
  const std::string csv = slurp(dir / "a" / "report.csv");
  EXPECT_EQ(csv.rfind("quantity,value\n", 0), 0u);
  EXPECT_NE(csv.find("verdict,pass"), std::string::npos);
}

TEST(Cli, SweepOverDeltaOnDisc) {
  const auto dir = scratch("sweep");
  std::string out;
  ::setenv("KERNELGAUGE_THREADS", "2", 1);
  const int code = run({"sweep", std::string(KERNELGAUGE_SCENARIO_DIR) + "/disc_baseline.json", "--param", "delta",
                        "--range", "0:1.2:3", "--out", dir.string()},
                       &out);
  ::unsetenv("KERNELGAUGE_THREADS");
  // δ = 1.2 is not integrable: that row is a config error and sets the exit code
  EXPECT_EQ(code, exit_config);
  std::istringstream lines(slurp(dir / "sweep.csv"));
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(lines, line)) rows.push_back(line);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], "param,K,B,I_c,ratio,character_distance,expected_equality,verdict");
  EXPECT_EQ(rows[1].substr(rows[1].size() - 5), ",pass");
  EXPECT_EQ(rows[2].substr(rows[2].size() - 5), ",pass");
  EXPECT_EQ(rows[3].substr(rows[3].size() - 13), ",config_error");
}
