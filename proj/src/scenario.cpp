#include "phia/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "phia/error.hpp"

namespace phia {

std::string_view to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::kNone: return "none";
    case ControllerKind::kIntegralAction: return "ia";
    case ControllerKind::kReferencePid: return "reference-pid";
  }
  return "none";
}

ControllerKind parse_controller_kind(std::string_view name) {
  if (name == "none") return ControllerKind::kNone;
  if (name == "ia") return ControllerKind::kIntegralAction;
  if (name == "reference-pid") return ControllerKind::kReferencePid;
  throw Error(errc::kUnknownController, fmt::format("unknown controller '{}'", name));
}

namespace {

void require_size(const Vector& v, int expected, const char* field) {
  if (v.size() != expected) {
    throw Error(errc::kInvalidArgument,
                fmt::format("{}: expected {} entries, got {}", field, expected,
                            v.size()));
  }
  if (!all_finite(v)) {
    throw Error(errc::kInvalidArgument, fmt::format("{}: entries must be finite", field));
  }
}

Vector initial_zeta(const Scenario& sc, int m) {
  return sc.zeta0.size() == 0 ? Vector(Vector::Zero(m)) : sc.zeta0;
}

StateCheck guard_check(const RegisteredSystem& sys) {
  return [&sys](double, const Vector& x) {
    const Vector q = x.head(sys.transform.n());
    if (!sys.guard.contains(q)) {
      throw Error(errc::kDomainViolation,
                  fmt::format("q = {} left the guard {}", format_vector(q),
                              sys.guard.description));
    }
  };
}

struct Recorded {
  Vector u;
  double energy;
  double lyapunov;
};

}  // namespace

void validate_scenario(const Scenario& sc, const RegisteredSystem& sys) {
  const int n = sys.transform.n();
  const int m = sys.transform.m();
  require_size(sc.q0, n, "initial_state.q");
  require_size(sc.p0, n, "initial_state.p");
  if (sc.zeta0.size() != 0) require_size(sc.zeta0, m, "initial_state.zeta");
  if (sc.disturbance.empty()) {
    throw Error(errc::kInvalidArgument, "disturbance: schedule is empty");
  }
  if (sc.disturbance.size() != m) {
    throw Error(errc::kInvalidArgument,
                fmt::format("disturbance: values must have {} entries, got {}", m,
                            sc.disturbance.size()));
  }
  sc.integrator.validate();
  if (!(sc.settling.band > 0.0) || !(sc.settling.hold >= 0.0)) {
    throw Error(errc::kInvalidArgument, "settling: band must be > 0 and hold >= 0");
  }
  if (sc.controller == ControllerKind::kIntegralAction) {
    if (!sc.ia_gains) {
      throw Error(errc::kInvalidArgument, "controller.gains: ia gains missing");
    }
    if (sc.ia_gains->inputs() != m) {
      throw Error(errc::kInvalidArgument,
                  fmt::format("controller.gains: expected {}x{} blocks", m, m));
    }
  }
  if (sc.controller == ControllerKind::kReferencePid) {
    if (!sc.pid_gains) {
      throw Error(errc::kInvalidArgument, "controller.gains: pid gains missing");
    }
    if (sc.pid_gains->inputs() != m) {
      throw Error(errc::kInvalidArgument,
                  fmt::format("controller.gains: expected {}x{} blocks", m, m));
    }
  }
  if (!sys.transform.base.domain.contains(sc.q0) || !sys.guard.contains(sc.q0)) {
    throw Error(errc::kDomainViolation,
                fmt::format("initial_state.q: {} outside {}", format_vector(sc.q0),
                            sys.guard.description));
  }
}

std::vector<SegmentSettling> settling_times(const Trajectory& tr,
                                            const Vector& q_star,
                                            const DisturbanceSchedule& schedule,
                                            const SettlingConfig& cfg) {
  std::vector<SegmentSettling> out;
  if (tr.times.empty()) return out;
  const double t_final = tr.times.back();
  std::vector<double> bounds{0.0};
  for (double t : schedule.switch_times()) {
    if (t < t_final) bounds.push_back(t);
  }
  bounds.push_back(t_final);
  constexpr double kTimeTol = 1e-9;

  for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
    SegmentSettling seg{bounds[s], bounds[s + 1], std::nullopt, 0.0, 0.0};
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < tr.size(); ++i) {
      if (tr.times[i] >= seg.t_start - kTimeTol && tr.times[i] <= seg.t_end + kTimeTol) {
        idx.push_back(i);
      }
    }
    std::vector<double> err(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      err[k] = (tr.q[idx[k]] - q_star).lpNorm<Eigen::Infinity>();
      seg.max_error = std::max(seg.max_error, err[k]);
    }
    // good_until[k]: last time of the run of in-band samples starting at k.
    std::vector<double> good_until(idx.size(), -std::numeric_limits<double>::infinity());
    for (std::size_t k = idx.size(); k-- > 0;) {
      if (err[k] >= cfg.band) continue;
      good_until[k] = (k + 1 < idx.size() && err[k + 1] < cfg.band)
                          ? good_until[k + 1]
                          : tr.times[idx[k]];
    }
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const double t = tr.times[idx[k]];
      if (t + cfg.hold > seg.t_end + kTimeTol) break;
      if (good_until[k] >= t + cfg.hold - kTimeTol) {
        seg.settling_time = t;
        for (std::size_t j = k; j < idx.size(); ++j) {
          seg.max_error_after_settling = std::max(seg.max_error_after_settling, err[j]);
        }
        break;
      }
    }
    out.push_back(seg);
  }
  return out;
}

RunResult run_scenario(const Scenario& sc) {
  const auto sys = build_system(sc.system_id, sc.params);
  return run_scenario(sc, sys);
}

RunResult run_scenario(const Scenario& sc, const RegisteredSystem& sys) {
  validate_scenario(sc, sys);
  const TransformedSystem& ts = sys.transform;
  const ShapedMechanicalSystem& base = ts.base;
  const int n = ts.n();
  const int m = ts.m();
  const Vector zeta0 = initial_zeta(sc, m);

  Rhs rhs;
  Vector x0;
  std::function<Recorded(const Vector& x, const Vector& d)> record;
  std::function<double(const Vector& x, const Vector& d)> lyapunov;

  switch (sc.controller) {
    case ControllerKind::kNone: {
      x0 = Vector(2 * n);
      x0 << sc.q0, sc.p0;
      const Vector u0 = Vector::Zero(m);
      rhs = [&base, n, u0](double, const Vector& x, const Vector& d) {
        const auto r = open_loop_dynamics(base, {x.head(n), x.tail(n)}, u0, d);
        Vector dx(2 * n);
        dx << r.dq, r.dp;
        return dx;
      };
      lyapunov = [&base, n](const Vector& x, const Vector&) {
        return eval_hamiltonian(base, {x.head(n), x.tail(n)});
      };
      record = [&base, n, u0](const Vector& x, const Vector&) {
        const double h = eval_hamiltonian(base, {x.head(n), x.tail(n)});
        return Recorded{u0, h, h};
      };
      break;
    }
    case ControllerKind::kIntegralAction: {
      const IaGains& g = *sc.ia_gains;
      x0 = ClosedLoopState::from_plant(ts, {sc.q0, sc.p0}, zeta0).stacked();
      rhs = [&ts, &g, n, m](double, const Vector& x, const Vector& d) {
        return closed_loop_dynamics(ts, g, ClosedLoopState::from_stacked(x, n, m), d)
            .stacked();
      };
      lyapunov = [&ts, &g, n, m](const Vector& x, const Vector& d) {
        return lyapunov_w(ts, g, ClosedLoopState::from_stacked(x, n, m), d);
      };
      record = [&ts, &g, n, m](const Vector& x, const Vector& d) {
        const auto s = ClosedLoopState::from_stacked(x, n, m);
        return Recorded{ia_control(ts, g, s), transformed_hamiltonian(ts, s.q, s.p()),
                        lyapunov_w(ts, g, s, d)};
      };
      break;
    }
    case ControllerKind::kReferencePid: {
      const PidGains& g = *sc.pid_gains;
      std::vector<PlantState> samples;
      samples.push_back({sc.q0, sc.p0});
      for (const Vector* centre : {&sc.q0, &base.q_star}) {
        for (int i = 0; i < n; ++i) {
          for (double step : {-0.1, 0.1}) {
            Vector q = *centre;
            q(i) += step;
            if (base.domain.contains(q)) samples.push_back({q, sc.p0});
          }
        }
      }
      const auto report = check_assumptions(base, samples);
      if (!report.constant_input_and_shaped_mass || !report.kinetic_gradient_annihilated) {
        throw Error(errc::kAssumptionViolated,
                    fmt::format("{} violates the reference-pid assumptions "
                                "(constant G/Md: {:.3g}, kinetic: {:.3g})",
                                base.name, report.constant_violation,
                                report.kinetic_violation));
      }
      x0 = Vector(2 * n + m);
      x0 << sc.q0, sc.p0, zeta0;
      rhs = [&base, &g, n, m](double, const Vector& x, const Vector& d) {
        const Vector q = x.head(n);
        const Vector pb = x.segment(n, n);
        const auto c = pid_control_unchecked(base, g, q, pb, x.tail(m));
        const auto r = open_loop_dynamics(base, {q, pb}, c.u, d);
        Vector dx(2 * n + m);
        dx << r.dq, r.dp, c.zeta_dot;
        return dx;
      };
      lyapunov = [&base, &g, n, m](const Vector& x, const Vector& d) {
        return z2_coordinates(base, g, x.head(n), x.segment(n, n), x.tail(m), d).h_z;
      };
      record = [&base, &g, n, m](const Vector& x, const Vector& d) {
        const Vector q = x.head(n);
        const Vector pb = x.segment(n, n);
        const auto c = pid_control_unchecked(base, g, q, pb, x.tail(m));
        return Recorded{c.u, eval_hamiltonian(base, {q, pb}),
                        z2_coordinates(base, g, q, pb, x.tail(m), d).h_z};
      };
      break;
    }
  }

  const auto res = integrate(rhs, x0, sc.integrator, sc.disturbance, guard_check(sys));

  RunResult out;
  Trajectory& tr = out.trajectory;
  tr.n = n;
  tr.m = m;
  tr.stride = res.stride;
  tr.times = res.times;
  tr.d = res.disturbance;
  const std::size_t count = res.times.size();
  tr.q.reserve(count);
  tr.p.reserve(count);
  tr.zeta.reserve(count);
  tr.u.reserve(count);
  tr.shaped_energy.reserve(count);
  tr.lyapunov.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Vector& x = res.states[i];
    tr.q.push_back(x.head(n));
    tr.p.push_back(x.segment(n, n));
    tr.zeta.push_back(x.size() > 2 * n ? Vector(x.tail(m)) : Vector(Vector::Zero(m)));
    const auto r = record(x, res.disturbance[i]);
    tr.u.push_back(r.u);
    tr.shaped_energy.push_back(r.energy);
    tr.lyapunov.push_back(r.lyapunov);
  }

  RunSummary& sum = out.summary;
  sum.system_id = sc.system_id;
  sum.controller = sc.controller;
  sum.potential_variant = sys.variant;
  sum.points = count;
  sum.steps = res.steps;
  sum.segments = settling_times(tr, base.q_star, sc.disturbance, sc.settling);
  sum.final_q_error = tr.q.back() - base.q_star;
  sum.final_p_norm = tr.p.back().lpNorm<Eigen::Infinity>();
  sum.final_zeta = tr.zeta.back();
  if (sc.controller == ControllerKind::kIntegralAction) {
    sum.zeta_equilibrium = equilibrium(ts, *sc.ia_gains, tr.d.back()).zeta;
  }
  if (count > 1) sum.max_lyapunov_increase = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < count; ++i) {
    const Vector& d = res.disturbance[i];
    const double inc = lyapunov(res.states[i + 1], d) - lyapunov(res.states[i], d);
    sum.max_lyapunov_increase = std::max(sum.max_lyapunov_increase, inc);
  }
  return out;
}

}  // namespace phia
