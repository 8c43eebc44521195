#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace phia {

struct CheckResult {
  std::string name;
  double value = 0.0;      // worst observed residual / statistic
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

struct SuiteReport {
  std::string name;
  std::vector<CheckResult> checks;

  bool ok() const;
};

inline constexpr int kDefaultVerificationSamples = 100;

// Momentum-change checks on the cart-pendulum and linear-2dof systems.
SuiteReport run_transform_suite(std::uint64_t seed,
                                int samples = kDefaultVerificationSamples);
// Closed-loop matching, F + F^T, energy-shaping assembly and the simplified law.
SuiteReport run_matching_suite(std::uint64_t seed,
                               int samples = kDefaultVerificationSamples);
// Equilibrium, Lyapunov rate and monotonicity along the Fig. 1 run.
SuiteReport run_lyapunov_suite(std::uint64_t seed,
                               int samples = kDefaultVerificationSamples);

// which: "transform", "matching", "lyapunov" or "all". Throws
// "invalid-argument" for anything else.
std::vector<SuiteReport> run_suites(std::string_view which, std::uint64_t seed);

// One line per check: "PASS transform.pushforward max=1.2e-12 tol=1e-06".
std::string format_report(const SuiteReport& report);

}  // namespace phia
