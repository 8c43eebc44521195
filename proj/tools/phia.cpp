#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "phia/error.hpp"
#include "phia/scenario_config.hpp"
#include "phia/trajectory_csv.hpp"
#include "phia/verification.hpp"

namespace fs = std::filesystem;

namespace {

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,
  kParseError = 2,
  kSemanticError = 3,
  kRunError = 4,
};

void setup_logging() {
  auto logger = spdlog::stderr_color_st("phia");
  spdlog::set_default_logger(logger);
  const char* env = std::getenv("PHIA_LOG");
  const std::string level = env ? env : "off";
  if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else if (level == "info") {
    spdlog::set_level(spdlog::level::info);
  } else {
    if (level != "off") std::cerr << "PHIA_LOG: unknown level '" << level << "', using off\n";
    spdlog::set_level(spdlog::level::off);
  }
}

int exit_code_for(const phia::Error& e) {
  if (e.code() == phia::errc::kConfigParse) return kParseError;
  if (e.code() == phia::errc::kConfigInvalid) return kSemanticError;
  return kRunError;
}

int cmd_validate(const std::string& path, const std::vector<std::string>& overrides) {
  const auto loaded = phia::load_scenario_file(path, overrides);
  std::cout << phia::scenario_report(loaded);
  return kOk;
}

std::string describe(const phia::Vector& v) { return phia::format_vector(v); }

void print_summary(const phia::RunSummary& s, const std::string& csv_path) {
  std::cout << fmt::format("system: {}\n", s.system_id);
  std::cout << fmt::format("controller: {}\n", phia::to_string(s.controller));
  if (!s.potential_variant.empty()) {
    std::cout << fmt::format("shaped potential variant: {}\n", s.potential_variant);
  }
  std::cout << fmt::format("points: {}\n", s.points);
  for (const auto& seg : s.segments) {
    if (seg.settling_time) {
      std::cout << fmt::format(
          "segment [{}, {}]: settled at t={:.3f}, max |q-q*|={:.6g}, after settling {:.6g}\n",
          seg.t_start, seg.t_end, *seg.settling_time, seg.max_error,
          seg.max_error_after_settling);
    } else {
      std::cout << fmt::format("segment [{}, {}]: not settled, max |q-q*|={:.6g}\n",
                               seg.t_start, seg.t_end, seg.max_error);
    }
  }
  std::cout << fmt::format("final q - q*: {}\n", describe(s.final_q_error));
  std::cout << fmt::format("final |p|: {:.6g}\n", s.final_p_norm);
  std::cout << fmt::format("final zeta: {}\n", describe(s.final_zeta));
  if (s.zeta_equilibrium) {
    std::cout << fmt::format("zeta equilibrium: {}\n", describe(*s.zeta_equilibrium));
  }
  std::cout << fmt::format("max per-step Lyapunov increase: {:.3e}\n",
                           s.max_lyapunov_increase);
  std::cout << fmt::format("csv: {}\n", csv_path);
}

int cmd_run(const std::string& path, const std::vector<std::string>& overrides,
            const std::string& out_dir) {
  const auto loaded = phia::load_scenario_file(path, overrides);
  const auto& sc = loaded.scenario;
  const fs::path dir(out_dir);
  const fs::path csv = dir / (sc.outputs.csv.empty() ? sc.name + ".csv" : sc.outputs.csv);
  const fs::path gp = sc.outputs.gnuplot.empty() ? fs::path() : dir / sc.outputs.gnuplot;

  std::vector<fs::path> written;
  try {
    const auto start = std::chrono::steady_clock::now();
    const auto result = phia::run_scenario(sc, loaded.system);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    spdlog::info("integrated {} points in {:.2f} s", result.summary.points, secs);

    fs::create_directories(dir);
    written.push_back(csv);
    phia::write_trajectory_csv(csv.string(), result.trajectory);
    if (!gp.empty()) {
      written.push_back(gp);
      std::ofstream os(gp, std::ios::binary);
      os << phia::gnuplot_script(csv.filename().string(), result.trajectory.n,
                                 result.trajectory.m);
      if (!os) throw phia::Error(phia::errc::kInvalidArgument, "cannot write " + gp.string());
    }
    print_summary(result.summary, csv.string());
  } catch (...) {
    std::error_code ec;
    for (const auto& f : written) fs::remove(f, ec);
    throw;
  }
  return kOk;
}

int cmd_verify(const std::string& suite, std::uint64_t seed) {
  const auto reports = phia::run_suites(suite, seed);
  bool ok = true;
  for (const auto& r : reports) {
    std::cout << phia::format_report(r);
    ok = ok && r.ok();
  }
  std::cout << (ok ? "all checks passed\n" : "some checks FAILED\n");
  return ok ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Integral action for port-Hamiltonian mechanical systems"};
  app.require_subcommand(1);

  std::string path;
  std::vector<std::string> overrides;
  std::string out_dir = ".";
  std::string suite = "all";
  std::uint64_t seed = 1;

  auto* validate = app.add_subcommand("validate", "Check a scenario file");
  validate->add_option("config", path, "Scenario YAML file")->required();
  validate->add_option("--set", overrides, "Override key=value (repeatable)");

  auto* run = app.add_subcommand("run", "Simulate a scenario and export CSV");
  run->add_option("config", path, "Scenario YAML file")->required();
  run->add_option("--set", overrides, "Override key=value (repeatable)");
  run->add_option("--out", out_dir, "Output directory");

  auto* verify = app.add_subcommand("verify", "Run numerical verification suites");
  verify->add_option("suite", suite, "transform | matching | lyapunov | all")
      ->check(CLI::IsMember({"transform", "matching", "lyapunov", "all"}));
  verify->add_option("--seed", seed, "RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kParseError;
  }

  try {
    if (*validate) return cmd_validate(path, overrides);
    if (*run) return cmd_run(path, overrides, out_dir);
    return cmd_verify(suite, seed);
  } catch (const phia::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRunError;
  }
}
