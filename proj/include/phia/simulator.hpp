#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "phia/linalg.hpp"

namespace phia {

struct DisturbanceSegment {
  double t_start = 0.0;
  Vector value;
};

// Piecewise-constant, right-continuous d(t). The first segment starts at 0
// and start times are strictly increasing.
class DisturbanceSchedule {
 public:
  DisturbanceSchedule() = default;
  explicit DisturbanceSchedule(std::vector<DisturbanceSegment> segments);

  static DisturbanceSchedule constant(const Vector& d);

  const Vector& at(double t) const;
  // Start times of every segment after the first.
  std::vector<double> switch_times() const;
  const std::vector<DisturbanceSegment>& segments() const { return segments_; }
  int size() const;
  bool empty() const { return segments_.empty(); }

 private:
  std::vector<DisturbanceSegment> segments_;
};

enum class IntegratorMethod { kFixedRk4, kAdaptiveRk45 };

struct IntegratorConfig {
  IntegratorMethod method = IntegratorMethod::kFixedRk4;
  double step = 1e-3;
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double min_step = 1e-12;
  double max_step = 0.05;
  double t_final = 60.0;

  void validate() const;
};

inline constexpr std::size_t kMaxRecordedPoints = 1'000'000;

using Rhs = std::function<Vector(double t, const Vector& x, const Vector& d)>;
// Called on every accepted state; throw to abort the run.
using StateCheck = std::function<void(double t, const Vector& x)>;

struct IntegrationResult {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<Vector> disturbance;  // d(t) at each recorded time
  std::size_t stride = 1;           // > 1 only when decimated
  std::size_t steps = 0;            // accepted steps
};

// Integrates from t = 0 to cfg.t_final. Disturbance switches are grid points:
// in fixed mode each segment [a, b] is split into ceil((b - a) / h) equal
// steps, so no step straddles a switch.
//
// Errors: "domain-violation" (rethrown with the time at which it occurred),
// "step-underflow" in adaptive mode, "invalid-argument" for bad config.
IntegrationResult integrate(const Rhs& rhs, const Vector& x0,
                            const IntegratorConfig& cfg,
                            const DisturbanceSchedule& schedule,
                            const StateCheck& check = {});

}  // namespace phia
