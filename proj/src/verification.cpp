#include "phia/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "phia/cart_pendulum.hpp"
#include "phia/error.hpp"
#include "phia/registry.hpp"
#include "phia/sampling.hpp"
#include "phia/scenario.hpp"

namespace phia {

namespace {

// Tracks the worst value of one check over many samples.
class Tracker {
 public:
  Tracker(std::string name, double tol) : name_(std::move(name)), tol_(tol) {}

  void add(double v) {
    if (std::isnan(v)) nan_ = true;
    worst_ = std::max(worst_, v);
  }
  CheckResult result(std::string detail = {}) const {
    return {name_, worst_, tol_, !nan_ && worst_ < tol_, std::move(detail)};
  }

 private:
  std::string name_;
  double tol_;
  double worst_ = -std::numeric_limits<double>::infinity();
  bool nan_ = false;
};

double inf_norm(const Matrix& a) { return max_abs(a); }

struct Systems {
  cart_pendulum::Params cart_params;
  cart_pendulum::ShapingParams shaping;
  RegisteredSystem cart;
  RegisteredSystem linear;
};

Systems make_systems() {
  Systems s;
  s.cart = build_system("cart-pendulum", {});
  s.linear = build_system("linear-2dof", {});
  return s;
}

IaGains cart_gains() { return IaGains::scalar(0.05, 0.0, 10.0, 1.0); }
IaGains linear_gains() { return IaGains::scalar(0.4, 0.0, 1.5, 0.8); }

ClosedLoopState random_closed_loop(StateSampler& sampler, int n, int m) {
  ClosedLoopState x;
  x.q = sampler.configuration();
  const Vector p = sampler.momentum();
  x.p1 = p.head(m);
  x.p2 = p.tail(n - m);
  x.zeta = sampler.integrator();
  return x;
}

Vector random_input(StateSampler& sampler, int m) {
  Vector v(m);
  for (int i = 0; i < m; ++i) v(i) = sampler.uniform(-2.0, 2.0);
  return v;
}

}  // namespace

bool SuiteReport::ok() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.passed; });
}

SuiteReport run_transform_suite(std::uint64_t seed, int samples) {
  const Systems sys = make_systems();
  SuiteReport report{"transform", {}};
  Tracker pushforward("transform.pushforward", 1e-6);
  Tracker output("transform.output_invariance", 1e-10);
  Tracker t_two_path("transform.printed_T", 1e-12);
  Tracker s1("transform.printed_S1", 1e-10);
  Tracker s31("transform.S31_zero", 1e-10);
  Tracker s32("transform.printed_S32", 1e-10);
  Tracker md_pd("transform.Md_negated_min_eig", 0.0);
  Tracker lin_push("transform.linear2dof_pushforward", 1e-6);

  const auto& cart = sys.cart.transform;
  StateSampler sampler(cart.base, seed);
  for (int i = 0; i < samples; ++i) {
    const auto st = sampler.plant_state();
    const Vector u = random_input(sampler, 1);
    const Vector d = random_input(sampler, 1);
    pushforward.add(verify_pushforward(cart, st.q, st.pbold, u, d));
    output.add(output_equivalence(cart, st.q, st.pbold));

    const Matrix g = cart.base.input_matrix(st.q);
    const Matrix printed = cart_pendulum::printed_t(sys.cart_params, st.q);
    const Matrix generic =
        build_T(g, cart_pendulum::printed_annihilator(sys.cart_params, st.q));
    t_two_path.add(inf_norm(printed - generic) / std::max(1.0, inf_norm(printed)));

    const Vector p = t_matrix(cart, st.q) * st.pbold;
    const auto blocks = compute_s_blocks(cart, st.q, p);
    s1.add(inf_norm(blocks.s1 - cart_pendulum::printed_s1(sys.cart_params,
                                                          sys.shaping, st.q)));
    s31.add(inf_norm(blocks.s31));
    const Matrix jp = compute_jp(cart, st.q, p);
    s32.add(inf_norm(blocks.s32 -
                     cart_pendulum::printed_s32(sys.cart_params, st.q, jp)));

    Vector q_wide = st.q;
    q_wide(0) = sampler.uniform(-1.4, 1.4);
    md_pd.add(-min_symmetric_eigenvalue(md_small(cart, q_wide)));
  }

  const auto& lin = sys.linear.transform;
  StateSampler lin_sampler(lin.base, seed + 1);
  for (int i = 0; i < samples; ++i) {
    const auto st = lin_sampler.plant_state();
    lin_push.add(verify_pushforward(lin, st.q, st.pbold, random_input(lin_sampler, 1),
                                    random_input(lin_sampler, 1)));
  }

  for (const Tracker* t : {&pushforward, &output, &t_two_path, &s1, &s31, &s32, &md_pd,
                           &lin_push}) {
    report.checks.push_back(t->result());
  }
  return report;
}

SuiteReport run_matching_suite(std::uint64_t seed, int samples) {
  const Systems sys = make_systems();
  SuiteReport report{"matching", {}};
  Tracker matching("matching.closed_loop", 1e-9);
  Tracker symmetric("matching.F_symmetric_part_max_eig", 1e-10);
  Tracker lin_matching("matching.linear2dof_closed_loop", 1e-9);
  Tracker lin_symmetric("matching.linear2dof_F_symmetric_part_max_eig", 1e-10);
  Tracker assembly("matching.energy_shaping_assembly", 1e-9);
  Tracker scaling("matching.input_scaling", 1e-9);
  Tracker simplified("matching.simplified_law", 1e-12);

  auto run = [&](const RegisteredSystem& rs, const IaGains& gains, std::uint64_t s,
                 Tracker& match, Tracker& sym) {
    const auto& ts = rs.transform;
    StateSampler sampler(ts.base, s);
    for (int i = 0; i < samples; ++i) {
      const auto x = random_closed_loop(sampler, ts.n(), ts.m());
      const Vector d = random_input(sampler, ts.m());
      const Vector a = closed_loop_dynamics(ts, gains, x, d).stacked();
      const Vector b = plant_closed_loop_dynamics(ts, gains, x, d).stacked();
      match.add((a - b).lpNorm<Eigen::Infinity>() /
                std::max(1.0, b.lpNorm<Eigen::Infinity>()));
      const Matrix f = closed_loop_F(ts, gains, x);
      const Matrix sym_part = 0.5 * (f + f.transpose());
      sym.add(max_symmetric_eigenvalue(sym_part));
    }
  };
  run(sys.cart, cart_gains(), seed, matching, symmetric);
  run(sys.linear, linear_gains(), seed + 1, lin_matching, lin_symmetric);

  const auto& cart = sys.cart.transform;
  const auto plant = cart_pendulum::pendulum_open_loop(sys.cart_params);
  StateSampler sampler(cart.base, seed + 2);
  for (int i = 0; i < samples; ++i) {
    const auto st = sampler.plant_state();
    const double d = sampler.uniform(-2.0, 2.0);
    const double u_prime = sampler.uniform(-2.0, 2.0);

    const double u0 = cart_pendulum::energy_shaping_control(sys.cart_params, cart.base,
                                                            st.q, st.pbold, 0.0);
    const auto lhs = plant.dynamics(st.q, st.pbold, u0, d);
    const auto rhs = open_loop_dynamics(cart.base, st, Vector::Zero(1),
                                        Vector::Constant(1, d));
    const double scale = std::max(1.0, rhs.dp.lpNorm<Eigen::Infinity>());
    assembly.add(std::max((lhs.dq - rhs.dq).lpNorm<Eigen::Infinity>(),
                          (lhs.dp - rhs.dp).lpNorm<Eigen::Infinity>()) /
                 scale);

    const double u1 = cart_pendulum::energy_shaping_control(
        sys.cart_params, cart.base, st.q, st.pbold, u_prime);
    const Vector shift = plant.dynamics(st.q, st.pbold, u1, 0.0).dp -
                         plant.dynamics(st.q, st.pbold, u0, 0.0).dp;
    const Vector expected = cart.base.input_matrix(st.q) *
                            (cart_pendulum::sigma(sys.cart_params, st.q(0)) * u_prime);
    scaling.add((shift - expected).lpNorm<Eigen::Infinity>());

    const auto x = random_closed_loop(sampler, 2, 1);
    const IaGains g = cart_gains();
    const double generic = ia_control(cart, g, x)(0);
    const double simple = cart_pendulum::simplified_ia_control(
        cart, g.k_i()(0, 0), g.r_c2()(0, 0), x);
    simplified.add(std::abs(generic - simple) / std::max(1.0, std::abs(generic)));
  }

  for (const Tracker* t : {&matching, &symmetric, &lin_matching, &lin_symmetric,
                           &assembly, &scaling, &simplified}) {
    report.checks.push_back(t->result());
  }
  return report;
}

SuiteReport run_lyapunov_suite(std::uint64_t seed, int samples) {
  const Systems sys = make_systems();
  SuiteReport report{"lyapunov", {}};
  Tracker equilibrium_res("lyapunov.equilibrium_residual", 1e-9);
  Tracker rate("lyapunov.rate_vs_fd_relative", 1e-4);
  Tracker sign("lyapunov.rate_max", 1e-10);
  Tracker monotone("lyapunov.fig1_max_step_increase", 1e-8);

  for (const auto* rs : {&sys.cart, &sys.linear}) {
    const auto& ts = rs->transform;
    const IaGains g = rs == &sys.cart ? cart_gains() : linear_gains();
    for (double dv : {0.0, 2.0, -1.0}) {
      const Vector d = Vector::Constant(ts.m(), dv);
      const auto eq = equilibrium(ts, g, d);
      equilibrium_res.add(
          closed_loop_dynamics(ts, g, eq, d).stacked().lpNorm<Eigen::Infinity>());
    }

    StateSampler sampler(ts.base, rs == &sys.cart ? seed : seed + 1);
    for (int i = 0; i < samples; ++i) {
      const auto x = random_closed_loop(sampler, ts.n(), ts.m());
      const Vector d = random_input(sampler, ts.m());
      const double analytic = lyapunov_rate(ts, g, x, d);
      const Vector w = x.stacked();
      const Vector f = closed_loop_dynamics(ts, g, x, d).stacked();
      const double eps = 1e-5 / std::max(1.0, f.lpNorm<Eigen::Infinity>());
      const auto at = [&](double s) {
        return lyapunov_w(ts, g,
                          ClosedLoopState::from_stacked(w + s * f, ts.n(), ts.m()), d);
      };
      const double fd = (at(eps) - at(-eps)) / (2.0 * eps);
      rate.add(std::abs(analytic - fd) / std::max(std::abs(fd), 1e-9));
      sign.add(analytic);
    }
  }

  const auto run = run_scenario(cart_pendulum::fig1_scenario(), sys.cart);
  monotone.add(run.summary.max_lyapunov_increase);

  for (const Tracker* t : {&equilibrium_res, &rate, &sign, &monotone}) {
    report.checks.push_back(t->result());
  }
  return report;
}

std::vector<SuiteReport> run_suites(std::string_view which, std::uint64_t seed) {
  std::vector<SuiteReport> out;
  const bool all = which == "all";
  if (!all && which != "transform" && which != "matching" && which != "lyapunov") {
    throw Error(errc::kInvalidArgument, fmt::format("unknown suite '{}'", which));
  }
  if (all || which == "transform") out.push_back(run_transform_suite(seed));
  if (all || which == "matching") out.push_back(run_matching_suite(seed));
  if (all || which == "lyapunov") out.push_back(run_lyapunov_suite(seed));
  return out;
}

std::string format_report(const SuiteReport& report) {
  std::string out;
  for (const auto& c : report.checks) {
    out += fmt::format("{} {} max={:.3e} tol={:.0e}{}\n", c.passed ? "PASS" : "FAIL",
                       c.name, c.value, c.tolerance,
                       c.detail.empty() ? "" : " " + c.detail);
  }
  return out;
}

}  // namespace phia
