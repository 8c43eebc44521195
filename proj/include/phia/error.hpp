#pragma once

#include <stdexcept>
#include <string>

namespace phia {

// Every failure carries a stable machine-readable code ("domain-violation",
// "mass-matrix-singular", ...) plus a human-readable detail string.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& detail);

  const std::string& code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string code_;
  std::string detail_;
};

namespace errc {
inline constexpr const char* kDomainViolation = "domain-violation";
inline constexpr const char* kMassMatrixSingular = "mass-matrix-singular";
inline constexpr const char* kEvalFailed = "eval-failed";
inline constexpr const char* kNotAnAnnihilator = "not-an-annihilator";
inline constexpr const char* kRankDeficientG = "rank-deficient-G";
inline constexpr const char* kSingularNormalMatrix = "singular-normal-matrix";
inline constexpr const char* kGainsInvalid = "gains-invalid";
inline constexpr const char* kGainsDegenerate = "gains-degenerate";
inline constexpr const char* kAssumptionViolated = "assumption-violated";
inline constexpr const char* kSingularMatrix = "singular-matrix";
inline constexpr const char* kShapingInvalid = "shaping-invalid";
inline constexpr const char* kStepUnderflow = "step-underflow";
inline constexpr const char* kInvalidArgument = "invalid-argument";
inline constexpr const char* kUnknownSystem = "unknown-system";
inline constexpr const char* kUnknownController = "unknown-controller";
inline constexpr const char* kConfigParse = "config-parse";
inline constexpr const char* kConfigInvalid = "config-invalid";
}  // namespace errc

}  // namespace phia
