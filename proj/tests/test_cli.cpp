#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "phia/trajectory_csv.hpp"

namespace {

namespace fs = std::filesystem;

struct Outcome {
  int exit_code;
  std::string out;
};

Outcome run_cli(const std::string& args) {
  const std::string cmd = std::string(PHIA_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {-1, ""};
  std::string out;
  std::array<char, 4096> buf{};
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string fig1() { return std::string(PHIA_CONFIG_DIR) + "/fig1.yaml"; }

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("phia_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST_F(CliTest, ValidateBundledConfig) {
  const auto r = run_cli("validate " + fig1());
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_NE(r.out.find("valid"), std::string::npos);
  EXPECT_EQ(run_cli("validate " + fig1()).out, r.out);
}

TEST_F(CliTest, ValidateExitCodes) {
  const std::string text = slurp(fig1());
  const fs::path truncated = dir_ / "truncated.yaml";
  std::ofstream(truncated) << text.substr(0, text.find("{t: 30.0") + 10);
  EXPECT_EQ(run_cli("validate " + truncated.string()).exit_code, 2);
  EXPECT_EQ(run_cli("validate " + fig1() + " --set controller.gains.k_i=[1,1]").exit_code, 3);
  EXPECT_EQ(run_cli("validate " + (dir_ / "missing.yaml").string()).exit_code, 2);
  EXPECT_EQ(run_cli("frobnicate").exit_code, 2);
}

TEST_F(CliTest, RunWritesCsvAndIsDeterministic) {
  const auto a = run_cli("run " + fig1() + " --out " + (dir_ / "a").string());
  ASSERT_EQ(a.exit_code, 0);
  const auto b = run_cli("run " + fig1() + " --out " + (dir_ / "b").string());
  ASSERT_EQ(b.exit_code, 0);
  const std::string csv = slurp(dir_ / "a" / "fig1.csv");
  EXPECT_EQ(csv, slurp(dir_ / "b" / "fig1.csv"));
  std::size_t lines = 0;
  for (char c : csv) lines += c == '\n';
  EXPECT_EQ(lines, 60002u);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,q1,q2,p1,p2,zeta1,u1,d1,H_d,W");
  EXPECT_TRUE(fs::exists(dir_ / "a" / "fig1.gp"));
  EXPECT_NE(a.out.find("settled"), std::string::npos);
  EXPECT_NE(a.out.find("zeta equilibrium: [4]"), std::string::npos) << a.out;

  const auto tr = phia::read_trajectory_csv((dir_ / "a" / "fig1.csv").string());
  EXPECT_EQ(tr.size(), 60001u);
  EXPECT_EQ(tr.times.back(), 60.0);
}

TEST_F(CliTest, UndisturbedRunSettlesBeforeThirtySeconds) {
  const auto r = run_cli("run " + fig1() + " --set disturbance=none --set integrator.t_final=40 --out " +
                         dir_.string());
  ASSERT_EQ(r.exit_code, 0);
  const auto pos = r.out.find("settled at t=");
  ASSERT_NE(pos, std::string::npos) << r.out;
  EXPECT_LT(std::stod(r.out.substr(pos + 13)), 30.0);
  const auto after = r.out.find("after settling ");
  ASSERT_NE(after, std::string::npos);
  EXPECT_LT(std::stod(r.out.substr(after + 15)), 0.02);
  EXPECT_EQ(r.out.find("segment [30"), std::string::npos);
}

TEST_F(CliTest, FailedRunRemovesPartialOutput) {
  fs::create_directories(dir_ / "blocked.gp");
  const auto r = run_cli("run " + fig1() +
                         " --set integrator.t_final=1 --set outputs.gnuplot=blocked.gp --out " +
                         dir_.string());
  EXPECT_NE(r.exit_code, 0);
  EXPECT_FALSE(fs::exists(dir_ / "fig1.csv"));
}

TEST_F(CliTest, RunFailureFromDivergence) {
  const auto r = run_cli("run " + fig1() +
                         " --set controller.kind=none --set controller.gains=null"
                         " --set initial_state.q=[1.3,0] --set initial_state.p=[50,0]"
                         " --set integrator.t_final=1 --out " + dir_.string());
  EXPECT_EQ(r.exit_code, 4);
  EXPECT_FALSE(fs::exists(dir_ / "fig1.csv"));
}

TEST_F(CliTest, VerifyTransform) {
  const auto r = run_cli("verify transform --seed 7");
  EXPECT_EQ(r.exit_code, 0) << r.out;
  EXPECT_NE(r.out.find("PASS transform.pushforward"), std::string::npos);
  EXPECT_EQ(run_cli("verify transform --seed 7").out, r.out);
  EXPECT_NE(run_cli("verify bogus").exit_code, 0);
}

}  // namespace
