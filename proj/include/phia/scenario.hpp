#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "phia/ia_controller.hpp"
#include "phia/reference_pid.hpp"
#include "phia/registry.hpp"
#include "phia/simulator.hpp"

namespace phia {

enum class ControllerKind { kNone, kIntegralAction, kReferencePid };

// "none", "ia", "reference-pid"
std::string_view to_string(ControllerKind kind);
// Throws "unknown-controller".
ControllerKind parse_controller_kind(std::string_view name);

struct SettlingConfig {
  double band = 0.02;  // on |q - q*|_inf
  double hold = 2.0;   // seconds
};

struct OutputConfig {
  std::string csv;      // empty: no CSV
  std::string gnuplot;  // empty: no script
};

struct Scenario {
  std::string name;
  std::string system_id;
  ParamMap params;
  ControllerKind controller = ControllerKind::kNone;
  std::optional<IaGains> ia_gains;
  std::optional<PidGains> pid_gains;
  Vector q0;
  Vector p0;    // momentum in the original coordinates
  Vector zeta0; // integrator state; ignored without a controller
  DisturbanceSchedule disturbance;
  IntegratorConfig integrator;
  SettlingConfig settling;
  OutputConfig outputs;
};

// Throws "invalid-argument" naming the offending field when dimensions or
// gain blocks do not fit the registered system.
void validate_scenario(const Scenario& sc, const RegisteredSystem& sys);

/// Recorded run. With the integral-action controller p holds the transformed
/// momenta T(q) pbold and `lyapunov` is W; with the reference PID p is the
/// original momentum and `lyapunov` is H_z; without a controller `lyapunov`
/// repeats H_d and zeta is zero.
struct Trajectory {
  int n = 0;
  int m = 0;
  std::vector<double> times;
  std::vector<Vector> q;
  std::vector<Vector> p;
  std::vector<Vector> zeta;
  std::vector<Vector> u;
  std::vector<Vector> d;
  std::vector<double> shaped_energy;
  std::vector<double> lyapunov;
  std::size_t stride = 1;

  std::size_t size() const { return times.size(); }
};

struct SegmentSettling {
  double t_start = 0.0;
  double t_end = 0.0;
  std::optional<double> settling_time;  // absolute time
  double max_error = 0.0;               // max |q - q*|_inf over the segment
  double max_error_after_settling = 0.0;
};

struct RunSummary {
  std::string system_id;
  ControllerKind controller = ControllerKind::kNone;
  std::string potential_variant;
  std::size_t points = 0;
  std::size_t steps = 0;
  std::vector<SegmentSettling> segments;
  Vector final_q_error;
  double final_p_norm = 0.0;
  Vector final_zeta;
  std::optional<Vector> zeta_equilibrium;  // IA only, for the last d
  // Largest increase of the recorded Lyapunov quantity over one recorded
  // interval, both ends evaluated with that interval's d. Negative when the
  // quantity decreased on every interval.
  double max_lyapunov_increase = 0.0;
};

struct RunResult {
  Trajectory trajectory;
  RunSummary summary;
};

RunResult run_scenario(const Scenario& sc);
RunResult run_scenario(const Scenario& sc, const RegisteredSystem& sys);

std::vector<SegmentSettling> settling_times(const Trajectory& tr,
                                            const Vector& q_star,
                                            const DisturbanceSchedule& schedule,
                                            const SettlingConfig& cfg);

}  // namespace phia
