#include "phia/simulator.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <fmt/format.h>

#include "phia/error.hpp"

namespace phia {

DisturbanceSchedule::DisturbanceSchedule(std::vector<DisturbanceSegment> segments)
    : segments_(std::move(segments)) {
  if (segments_.empty()) {
    throw Error(errc::kInvalidArgument, "disturbance schedule has no segments");
  }
  if (segments_.front().t_start != 0.0) {
    throw Error(errc::kInvalidArgument, "first disturbance segment must start at 0");
  }
  const auto m = segments_.front().value.size();
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto& s = segments_[i];
    if (s.value.size() != m || m == 0) {
      throw Error(errc::kInvalidArgument,
                  fmt::format("disturbance segment {} has inconsistent size", i));
    }
    if (!all_finite(s.value) || !std::isfinite(s.t_start)) {
      throw Error(errc::kInvalidArgument,
                  fmt::format("disturbance segment {} is not finite", i));
    }
    if (i > 0 && !(s.t_start > segments_[i - 1].t_start)) {
      throw Error(errc::kInvalidArgument,
                  "disturbance start times must be strictly increasing");
    }
  }
}

DisturbanceSchedule DisturbanceSchedule::constant(const Vector& d) {
  return DisturbanceSchedule({{0.0, d}});
}

const Vector& DisturbanceSchedule::at(double t) const {
  auto it = std::upper_bound(
      segments_.begin(), segments_.end(), t,
      [](double v, const DisturbanceSegment& s) { return v < s.t_start; });
  if (it == segments_.begin()) return segments_.front().value;
  return std::prev(it)->value;
}

std::vector<double> DisturbanceSchedule::switch_times() const {
  std::vector<double> out;
  for (std::size_t i = 1; i < segments_.size(); ++i) {
    out.push_back(segments_[i].t_start);
  }
  return out;
}

int DisturbanceSchedule::size() const {
  return segments_.empty() ? 0 : static_cast<int>(segments_.front().value.size());
}

void IntegratorConfig::validate() const {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!positive(t_final)) {
    throw Error(errc::kInvalidArgument, "integrator.t_final must be positive");
  }
  if (method == IntegratorMethod::kFixedRk4) {
    if (!positive(step)) {
      throw Error(errc::kInvalidArgument, "integrator.step must be positive");
    }
    return;
  }
  if (!positive(rel_tol) || !positive(abs_tol)) {
    throw Error(errc::kInvalidArgument, "integrator tolerances must be positive");
  }
  if (!positive(min_step) || !positive(max_step) || min_step > max_step) {
    throw Error(errc::kInvalidArgument,
                "integrator.min_step and max_step must satisfy 0 < min <= max");
  }
}

namespace {

// Segment boundaries clipped to [0, t_final], including both ends.
std::vector<double> breakpoints(const DisturbanceSchedule& schedule,
                                double t_final) {
  std::vector<double> pts{0.0};
  for (double t : schedule.switch_times()) {
    if (t < t_final) pts.push_back(t);
  }
  pts.push_back(t_final);
  return pts;
}

Vector eval(const Rhs& rhs, double t, const Vector& x, const Vector& d) {
  Vector k = rhs(t, x, d);
  if (!all_finite(k)) {
    throw Error(errc::kEvalFailed, fmt::format("non-finite derivative at t = {}", t));
  }
  return k;
}

Vector rk4_step(const Rhs& rhs, double t, const Vector& x, double h,
                const Vector& d) {
  const Vector k1 = eval(rhs, t, x, d);
  const Vector k2 = eval(rhs, t + 0.5 * h, x + 0.5 * h * k1, d);
  const Vector k3 = eval(rhs, t + 0.5 * h, x + 0.5 * h * k2, d);
  const Vector k4 = eval(rhs, t + h, x + h * k3, d);
  return x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Dormand-Prince 5(4) tableau.
constexpr std::array<double, 7> kC{0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
constexpr std::array<double, 7> kB5{35.0 / 384,     0.0,           500.0 / 1113,
                                    125.0 / 192,    -2187.0 / 6784, 11.0 / 84,
                                    0.0};
constexpr std::array<double, 7> kB4{5179.0 / 57600,    0.0,        7571.0 / 16695,
                                    393.0 / 640,       -92097.0 / 339200,
                                    187.0 / 2100,      1.0 / 40};

struct Rk45Step {
  Vector x;
  double error_norm;
};

Rk45Step rk45_step(const Rhs& rhs, double t, const Vector& x, double h,
                   const Vector& d, const IntegratorConfig& cfg) {
  std::array<Vector, 7> k;
  for (int i = 0; i < 7; ++i) {
    Vector xi = x;
    for (int j = 0; j < i; ++j) xi += h * kA[i][j] * k[j];
    k[i] = eval(rhs, t + kC[i] * h, xi, d);
  }
  Vector x5 = x;
  Vector err = Vector::Zero(x.size());
  for (int i = 0; i < 7; ++i) {
    x5 += h * kB5[i] * k[i];
    err += h * (kB5[i] - kB4[i]) * k[i];
  }
  double norm = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double scale =
        cfg.abs_tol + cfg.rel_tol * std::max(std::abs(x(i)), std::abs(x5(i)));
    norm = std::max(norm, std::abs(err(i)) / scale);
  }
  return {x5, norm};
}

class Recorder {
 public:
  Recorder(IntegrationResult& out, std::size_t stride) : out_(out) {
    out_.stride = stride;
  }
  void add(double t, const Vector& x, const Vector& d, bool force) {
    if (force || count_ % out_.stride == 0) {
      out_.times.push_back(t);
      out_.states.push_back(x);
      out_.disturbance.push_back(d);
    }
    ++count_;
  }

 private:
  IntegrationResult& out_;
  std::size_t count_ = 0;
};

void decimate(IntegrationResult& r) {
  if (r.times.size() <= kMaxRecordedPoints) return;
  const std::size_t stride = (r.times.size() + kMaxRecordedPoints - 2) /
                             (kMaxRecordedPoints - 1);
  IntegrationResult d;
  d.stride = stride;
  d.steps = r.steps;
  for (std::size_t i = 0; i < r.times.size(); i += stride) {
    d.times.push_back(r.times[i]);
    d.states.push_back(r.states[i]);
    d.disturbance.push_back(r.disturbance[i]);
  }
  if (d.times.back() != r.times.back()) {
    d.times.push_back(r.times.back());
    d.states.push_back(r.states.back());
    d.disturbance.push_back(r.disturbance.back());
  }
  r = std::move(d);
}

}  // namespace

IntegrationResult integrate(const Rhs& rhs, const Vector& x0,
                            const IntegratorConfig& cfg,
                            const DisturbanceSchedule& schedule,
                            const StateCheck& check) {
  cfg.validate();
  if (schedule.empty()) {
    throw Error(errc::kInvalidArgument, "disturbance schedule is empty");
  }
  if (!all_finite(x0)) {
    throw Error(errc::kInvalidArgument, "initial state is not finite");
  }
  const auto pts = breakpoints(schedule, cfg.t_final);
  IntegrationResult out;
  double t = 0.0;
  try {
    if (check) check(0.0, x0);
    Vector x = x0;
    if (cfg.method == IntegratorMethod::kFixedRk4) {
      std::vector<long long> counts;
      std::size_t total = 1;
      for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double len = pts[i + 1] - pts[i];
        counts.push_back(std::max(1LL, static_cast<long long>(
                                           std::ceil(len / cfg.step - 1e-9))));
        total += static_cast<std::size_t>(counts.back());
      }
      const std::size_t stride =
          total <= kMaxRecordedPoints
              ? 1
              : (total + kMaxRecordedPoints - 2) / (kMaxRecordedPoints - 1);
      Recorder rec(out, stride);
      rec.add(0.0, x, schedule.at(0.0), true);
      for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double a = pts[i];
        const double b = pts[i + 1];
        const Vector& d = schedule.at(a);
        const auto n = counts[i];
        const double h = (b - a) / static_cast<double>(n);
        for (long long k = 0; k < n; ++k) {
          t = a + static_cast<double>(k) * h;
          x = rk4_step(rhs, t, x, h, d);
          t = k + 1 == n ? b : a + static_cast<double>(k + 1) * h;
          if (check) check(t, x);
          ++out.steps;
          const bool last = i + 2 == pts.size() && k + 1 == n;
          rec.add(t, x, schedule.at(t), last);
        }
      }
      return out;
    }

    out.times.push_back(0.0);
    out.states.push_back(x);
    out.disturbance.push_back(schedule.at(0.0));
    double h = std::min(cfg.max_step, std::max(cfg.min_step, 1e-3));
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const double b = pts[i + 1];
      const Vector& d = schedule.at(pts[i]);
      t = pts[i];
      while (t < b) {
        const bool hits_end = t + h >= b;
        const double step = hits_end ? b - t : h;
        const auto trial = rk45_step(rhs, t, x, step, d, cfg);
        if (trial.error_norm <= 1.0) {
          x = trial.x;
          t = hits_end ? b : t + step;
          if (check) check(t, x);
          ++out.steps;
          out.times.push_back(t);
          out.states.push_back(x);
          out.disturbance.push_back(schedule.at(t));
        }
        const double factor =
            trial.error_norm == 0.0
                ? 5.0
                : std::clamp(0.9 * std::pow(trial.error_norm, -0.2), 0.2, 5.0);
        const double next = std::min(cfg.max_step, step * factor);
        if (trial.error_norm > 1.0 && next < cfg.min_step) {
          throw Error(errc::kStepUnderflow,
                      fmt::format("adaptive step fell below {} at t = {}",
                                  cfg.min_step, t));
        }
        // Keep the pre-clipped step size when the last step was shortened
        // to land on a boundary.
        h = hits_end && trial.error_norm <= 1.0 ? std::max(h, next) : next;
        h = std::min(cfg.max_step, std::max(h, cfg.min_step));
      }
    }
    decimate(out);
    return out;
  } catch (const Error& e) {
    if (e.code() == errc::kDomainViolation) {
      throw Error(e.code(), fmt::format("t = {}: {}", t, e.detail()));
    }
    throw;
  }
}

}  // namespace phia
