#include <cmath>

#include <gtest/gtest.h>

#include "phia/reference_pid.hpp"
#include "phia/scenario.hpp"
#include "support.hpp"

namespace phia {
namespace {

using testing::expect_error_code;
using testing::inf_norm;
using testing::vec;

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

// The benchmark gains: K_P equal to the plant damping.
PidGains benchmark_gains() { return PidGains(scalar(1.0), scalar(1.5), scalar(2.0), scalar(2.0)); }

std::vector<PlantState> samples(const ShapedMechanicalSystem& sys, std::uint64_t seed) {
  StateSampler sampler(sys, seed);
  std::vector<PlantState> out;
  for (int i = 0; i < 30; ++i) out.push_back(sampler.plant_state());
  return out;
}

TEST(PidGains, Validation) {
  expect_error_code([] { PidGains(scalar(0), scalar(1), scalar(1), scalar(1)); },
                    errc::kGainsInvalid);
  expect_error_code([] { PidGains(scalar(1), scalar(1), scalar(-1), scalar(1)); },
                    errc::kGainsInvalid);
  expect_error_code(
      [] { PidGains(scalar(1), Matrix::Identity(2, 2), scalar(1), scalar(1)); },
      errc::kGainsInvalid);
}

TEST(ReferencePid, AssumptionsHoldOnLinearBenchmark) {
  const auto& sys = testing::linear().transform.base;
  const auto r = check_assumptions(sys, samples(sys, 1));
  EXPECT_TRUE(r.constant_input_and_shaped_mass);
  EXPECT_TRUE(r.kinetic_gradient_annihilated);
  EXPECT_EQ(r.constant_violation, 0.0);
  EXPECT_EQ(r.kinetic_violation, 0.0);
}

TEST(ReferencePid, CartPendulumViolatesConstantShapedMass) {
  const auto& sys = testing::cart().transform.base;
  const auto r = check_assumptions(sys, samples(sys, 1));
  EXPECT_FALSE(r.constant_input_and_shaped_mass);
  EXPECT_GT(r.constant_violation, 1e-3);
}

TEST(ReferencePid, RaisesOnCartPendulumWhileIntegralActionDoesNot) {
  const auto& ts = testing::cart().transform;
  const Vector q = vec({0.2, 0.5});
  const Vector p = vec({0.1, -0.1});
  expect_error_code([&] { pid_control(ts.base, benchmark_gains(), q, p, vec({0})); },
                    errc::kAssumptionViolated);
  const auto x = ClosedLoopState::from_plant(ts, {q, p}, vec({0}));
  EXPECT_NO_THROW(ia_control(ts, testing::fig1_gains(), x));

  Scenario sc = cart_pendulum::fig1_scenario();
  sc.controller = ControllerKind::kReferencePid;
  sc.pid_gains = benchmark_gains();
  expect_error_code([&] { run_scenario(sc, testing::cart()); }, errc::kAssumptionViolated);
}

TEST(ReferencePid, ZeroAtEquilibrium) {
  const auto& sys = testing::linear().transform.base;
  const auto out = pid_control(sys, benchmark_gains(), sys.q_star, Vector::Zero(2), vec({0}));
  EXPECT_LT(inf_norm(out.u), 1e-14);
  EXPECT_LT(inf_norm(out.zeta_dot), 1e-14);
}

TEST(ReferencePid, CheckedAndUncheckedAgree) {
  const auto& sys = testing::linear().transform.base;
  const auto g = benchmark_gains();
  StateSampler sampler(sys, 3);
  for (int i = 0; i < 10; ++i) {
    const auto s = sampler.plant_state();
    const Vector z = sampler.integrator();
    const auto a = pid_control(sys, g, s.q, s.pbold, z);
    const auto b = pid_control_unchecked(sys, g, s.q, s.pbold, z);
    EXPECT_EQ(a.u, b.u);
    EXPECT_EQ(a.zeta_dot, b.zeta_dot);
  }
}

TEST(ReferencePid, K2ByHand) {
  // G^T Md^-1 G = (Md^-1)_11 = 1 / 1.75
  const auto& sys = testing::linear().transform.base;
  EXPECT_NEAR(pid_k2(sys, sys.q_star)(0, 0), 1.75, 1e-14);
}

TEST(ReferencePid, AlphaFollowsInputConvention) {
  const auto& sys = testing::linear().transform.base;
  // -K_I^-1 (K_p + K_3)^-1 d = -(1/2)(1/3.5) d
  EXPECT_NEAR(pid_alpha(sys, benchmark_gains(), vec({1.0}))(0), -1.0 / 7.0, 1e-15);
}

TEST(ReferencePid, Z2VanishesAtEquilibrium) {
  const auto& sys = testing::linear().transform.base;
  const auto g = benchmark_gains();
  const Vector d = vec({1.0});
  const auto z = z2_coordinates(sys, g, sys.q_star, Vector::Zero(2), pid_alpha(sys, g, d), d);
  EXPECT_LT(inf_norm(z.z2), 1e-15);
  EXPECT_NEAR(z.h_z, sys.shaped_potential(sys.q_star), 1e-15);
}

TEST(ReferencePid, Z2CancellationWithoutDisturbance) {
  const auto& sys = testing::linear().transform.base;
  const auto g = benchmark_gains();
  const Vector q = vec({1.0, 0.3});
  const Matrix G = sys.input_matrix(q);
  const Vector p = -G * g.k1() * G.transpose() * sys.shaped_potential_grad(q);
  const auto z = z2_coordinates(sys, g, q, p, vec({0}), vec({0}));
  EXPECT_LT(inf_norm(z.z2), 1e-14);
}

TEST(ReferencePid, HzTwoPathEvaluation) {
  const auto& sys = testing::linear().transform.base;
  const auto g = benchmark_gains();
  const Vector q = vec({-0.2, 0.7}), p = vec({0.4, -1.1}), zeta = vec({0.3}), d = vec({0.5});
  const auto z = z2_coordinates(sys, g, q, p, zeta, d);
  // independent evaluation with hand-entered matrices
  Matrix md_inv(2, 2);
  md_inv << 1.0, -0.5, -0.5, 2.0;
  md_inv /= 1.75;
  Matrix k(2, 2);
  k << 3, 1, 1, 2;
  const Vector e = q - vec({0.5, -0.25});
  const Vector grad_v = k * e;
  const double alpha = -0.5 / 7.0;
  Vector z2 = p;
  z2(0) += grad_v(0) + 1.75 * 2.0 * (zeta(0) - alpha);
  const double hz = 0.5 * z2.dot(md_inv * z2) + 0.5 * e.dot(k * e) +
                    0.5 * 2.0 * (zeta(0) - alpha) * (zeta(0) - alpha);
  EXPECT_LT(inf_norm(z.z2 - z2), 1e-14);
  EXPECT_NEAR(z.h_z, hz, 1e-13);
}

TEST(ReferencePid, ClosedLoopConvergesAndHzDecreases) {
  Scenario sc;
  sc.name = "pid";
  sc.system_id = "linear-2dof";
  sc.controller = ControllerKind::kReferencePid;
  sc.pid_gains = benchmark_gains();
  sc.q0 = vec({0, 0});
  sc.p0 = vec({0, 0});
  sc.zeta0 = vec({0});
  sc.disturbance = DisturbanceSchedule::constant(vec({1.0}));
  sc.integrator.t_final = 60.0;
  const auto run = run_scenario(sc);
  const auto& sys = testing::linear().transform.base;
  EXPECT_LT(inf_norm(run.trajectory.q.back() - sys.q_star), 1e-3);
  // converges to the sign-consistent alpha
  EXPECT_NEAR(run.trajectory.zeta.back()(0), -1.0 / 7.0, 1e-3);
  EXPECT_LT(run.summary.max_lyapunov_increase, 1e-8);
}

}  // namespace
}  // namespace phia
