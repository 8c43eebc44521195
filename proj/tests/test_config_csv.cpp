#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "phia/scenario_config.hpp"
#include "phia/trajectory_csv.hpp"
#include "support.hpp"

namespace phia {
namespace {

using testing::expect_error_code;
using testing::vec;

std::string fig1_path() { return std::string(PHIA_CONFIG_DIR) + "/fig1.yaml"; }

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

TEST(Config, BundledFig1MatchesBuiltInScenario) {
  const auto loaded = load_scenario_file(fig1_path());
  const auto ref = cart_pendulum::fig1_scenario();
  const auto& sc = loaded.scenario;
  EXPECT_EQ(sc.system_id, ref.system_id);
  EXPECT_EQ(sc.params, ref.params);
  EXPECT_EQ(sc.controller, ref.controller);
  EXPECT_EQ(sc.ia_gains->k_i(), ref.ia_gains->k_i());
  EXPECT_EQ(sc.ia_gains->j_c1(), ref.ia_gains->j_c1());
  EXPECT_EQ(sc.ia_gains->r_c1(), ref.ia_gains->r_c1());
  EXPECT_EQ(sc.ia_gains->r_c2(), ref.ia_gains->r_c2());
  EXPECT_EQ(sc.q0, ref.q0);
  EXPECT_EQ(sc.p0, ref.p0);
  EXPECT_EQ(sc.zeta0, ref.zeta0);
  ASSERT_EQ(sc.disturbance.segments().size(), 2u);
  EXPECT_EQ(sc.disturbance.switch_times(), ref.disturbance.switch_times());
  EXPECT_EQ(sc.disturbance.at(31)(0), 2.0);
  EXPECT_EQ(sc.integrator.step, ref.integrator.step);
  EXPECT_EQ(sc.integrator.t_final, ref.integrator.t_final);
  EXPECT_EQ(loaded.system.variant, "tan");
}

TEST(Config, Overrides) {
  const auto loaded = load_scenario_file(
      fig1_path(), {"integrator.step=5e-4", "controller.gains.k_i=0.1", "disturbance=none",
                    "initial_state.q=[0.1, 0.5]", "system.params.K_p=5"});
  const auto& sc = loaded.scenario;
  EXPECT_EQ(sc.integrator.step, 5e-4);
  EXPECT_EQ(sc.ia_gains->k_i()(0, 0), 0.1);
  EXPECT_TRUE(sc.disturbance.switch_times().empty());
  EXPECT_EQ(sc.disturbance.at(40)(0), 0.0);
  EXPECT_EQ(sc.q0, vec({0.1, 0.5}));
  EXPECT_EQ(sc.params.at("K_p"), 5.0);
  expect_error_code([] { load_scenario_file(fig1_path(), {"integrator.step"}); },
                    errc::kConfigParse);
  expect_error_code([] { load_scenario_file(fig1_path(), {"name.x=1"}); }, errc::kConfigParse);
}

TEST(Config, ParseErrors) {
  const std::string text = read_file(fig1_path());
  const auto cut = text.find("{t: 30.0");
  ASSERT_NE(cut, std::string::npos);
  expect_error_code([&] { load_scenario_text(text.substr(0, cut + 10)); }, errc::kConfigParse);
  expect_error_code([] { load_scenario_text("just a string"); }, errc::kConfigParse);
  expect_error_code([] { load_scenario_file("/nonexistent/file.yaml"); }, errc::kConfigParse);
}

void expect_semantic(const std::vector<std::string>& overrides, const std::string& field) {
  try {
    load_scenario_file(fig1_path(), overrides);
    ADD_FAILURE() << "accepted " << overrides.front();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::kConfigInvalid) << e.what();
    EXPECT_EQ(e.detail().rfind(field, 0), 0u) << e.detail();
  }
}

TEST(Config, SemanticErrorsNameTheField) {
  expect_semantic({"controller.gains.k_i=[0.05, 0.05]"}, "controller.gains.k_i");
  expect_semantic({"controller.gains.k_i=-1"}, "controller.gains");
  expect_semantic({"initial_state.q=[0, 1, 2]"}, "initial_state.q");
  expect_semantic({"initial_state.q=[2.0, 0]"}, "initial_state.q");
  expect_semantic({"system.id=double-pendulum"}, "system.id");
  expect_semantic({"system.params.mass=2"}, "system.params.mass");
  expect_semantic({"system.params.P=-1"}, "system.params");
  expect_semantic({"controller.kind=pid"}, "controller.kind");
  expect_semantic({"integrator.method=euler"}, "integrator.method");
  expect_semantic({"integrator.step=0"}, "integrator");
  expect_semantic({"disturbance=[{t: 1, value: [0]}]"}, "disturbance");
  expect_semantic({"disturbance=[{t: 0, value: [0, 1]}]"}, "disturbance[0].value");
  expect_semantic({"extra=1"}, "extra");
  expect_semantic({"settling.band=0"}, "settling");
}

TEST(Config, GainShapes) {
  const std::string base = R"(
system: {id: linear-2dof}
controller:
  kind: reference-pid
  gains: {k1: [1.0], k_p_outer: [[1.5]], k_i: 2, k3: 2}
initial_state: {q: [0, 0]}
disturbance: [{t: 0, value: 1}]
)";
  const auto loaded = load_scenario_text(base);
  EXPECT_EQ(loaded.scenario.pid_gains->k_p_outer()(0, 0), 1.5);
  EXPECT_EQ(loaded.scenario.p0, vec({0, 0}));
  EXPECT_EQ(loaded.scenario.disturbance.at(0)(0), 1.0);
  EXPECT_EQ(loaded.scenario.name, "scenario");
}

TEST(Config, ReportIsDeterministic) {
  const auto a = scenario_report(load_scenario_file(fig1_path()));
  const auto b = scenario_report(load_scenario_file(fig1_path()));
  EXPECT_EQ(a, b);
  EXPECT_NE(a.find("shaped potential variant: tan"), std::string::npos);
}

Trajectory sample_trajectory() {
  Trajectory tr;
  tr.n = 2;
  tr.m = 1;
  for (int i = 0; i < 5; ++i) {
    const double t = 0.1 * i;
    tr.times.push_back(t);
    tr.q.push_back(vec({std::sin(t) / 3.0, 1.0 / 7.0 + t}));
    tr.p.push_back(vec({-1e-300, 2.5e17 * t}));
    tr.zeta.push_back(vec({std::exp(t)}));
    tr.u.push_back(vec({std::sqrt(2.0) * t}));
    tr.d.push_back(vec({i > 2 ? 2.0 : 0.0}));
    tr.shaped_energy.push_back(std::acos(-1.0) * t);
    tr.lyapunov.push_back(-0.0);
  }
  return tr;
}

TEST(Csv, HeaderLayout) {
  EXPECT_EQ(csv_header(2, 1), "t,q1,q2,p1,p2,zeta1,u1,d1,H_d,W");
}

TEST(Csv, RoundTripIsExact) {
  const Trajectory tr = sample_trajectory();
  std::stringstream ss;
  write_trajectory_csv(ss, tr);
  const std::string text = ss.str();
  EXPECT_EQ(text.find('\r'), std::string::npos);
  const Trajectory back = read_trajectory_csv(ss);
  ASSERT_EQ(back.size(), tr.size());
  EXPECT_EQ(back.n, 2);
  EXPECT_EQ(back.m, 1);
  for (std::size_t i = 0; i < tr.size(); ++i) {
    EXPECT_EQ(back.times[i], tr.times[i]);
    EXPECT_EQ(back.q[i], tr.q[i]);
    EXPECT_EQ(back.p[i], tr.p[i]);
    EXPECT_EQ(back.zeta[i], tr.zeta[i]);
    EXPECT_EQ(back.u[i], tr.u[i]);
    EXPECT_EQ(back.d[i], tr.d[i]);
    EXPECT_EQ(back.shaped_energy[i], tr.shaped_energy[i]);
    EXPECT_EQ(back.lyapunov[i], tr.lyapunov[i]);
  }
  std::stringstream again;
  write_trajectory_csv(again, back);
  EXPECT_EQ(again.str(), text);
}

TEST(Csv, RejectsMalformedInput) {
  std::stringstream bad_header("t,x\n");
  expect_error_code([&] { read_trajectory_csv(bad_header); }, errc::kInvalidArgument);
  std::stringstream short_row(csv_header(2, 1) + "\n0,1,2\n");
  expect_error_code([&] { read_trajectory_csv(short_row); }, errc::kInvalidArgument);
  std::stringstream bad_number(csv_header(1, 1) + "\n0,1,2,x,4,5,6,7\n");
  expect_error_code([&] { read_trajectory_csv(bad_number); }, errc::kInvalidArgument);
}

TEST(Csv, FileRoundTrip) {
  const auto path = (std::filesystem::temp_directory_path() / "phia_csv_roundtrip.csv").string();
  const Trajectory tr = sample_trajectory();
  write_trajectory_csv(path, tr);
  const Trajectory back = read_trajectory_csv(path);
  EXPECT_EQ(back.q.back(), tr.q.back());
  std::filesystem::remove(path);
}

TEST(Csv, GnuplotScriptReferencesColumns) {
  const auto s = gnuplot_script("run.csv", 2, 1);
  EXPECT_NE(s.find("'run.csv' using 1:2"), std::string::npos);
  EXPECT_NE(s.find("($7-$8)"), std::string::npos);
}

}  // namespace
}  // namespace phia
