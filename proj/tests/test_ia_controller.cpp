#include <cmath>

#include <gtest/gtest.h>

#include "phia/scenario.hpp"
#include "support.hpp"

namespace phia {

// Builds gains without validation, to show what the checks guard against.
struct IaGainsTestAccess {
  static IaGains raw(Matrix k_i, Matrix j_c1, Matrix r_c1, Matrix r_c2) {
    IaGains g;
    g.k_i_ = std::move(k_i);
    g.j_c1_ = std::move(j_c1);
    g.r_c1_ = std::move(r_c1);
    g.r_c2_ = std::move(r_c2);
    return g;
  }
};

namespace {

using testing::expect_error_code;
using testing::inf_norm;
using testing::vec;

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

TEST(IaGains, Validation) {
  expect_error_code([] { IaGains::scalar(-0.05, 0, 10, 1); }, errc::kGainsInvalid);
  expect_error_code([] { IaGains::scalar(0.05, 0, 0, 1); }, errc::kGainsInvalid);
  expect_error_code([] { IaGains::scalar(0.05, 0, 10, -1); }, errc::kGainsInvalid);
  expect_error_code([] { IaGains::scalar(0.05, 1, 10, 1); }, errc::kGainsInvalid);
  Matrix j(2, 2);
  j << 0, 1, -1, 0;
  const Matrix i2 = Matrix::Identity(2, 2);
  EXPECT_NO_THROW(IaGains(i2, j, i2, i2));
  expect_error_code([&] { IaGains(i2, Matrix(j + i2), i2, i2); },
                    errc::kGainsInvalid);
  expect_error_code([&] { IaGains(i2, j, scalar(1), i2); }, errc::kGainsInvalid);
}

TEST(IaGains, SimplifiedPresetOnCart) {
  const auto& ts = testing::cart().transform;
  StateSampler sampler(ts.base, 2);
  std::vector<PlantState> samples;
  for (int i = 0; i < 20; ++i) samples.push_back(sampler.plant_state());
  const auto g = IaGains::simplified_preset(ts, scalar(0.05), scalar(1.0), samples);
  EXPECT_EQ(g.j_c1()(0, 0), 0.0);
  EXPECT_EQ(g.r_c1()(0, 0), 10.0);
}

TEST(IaController, Fig1Equilibrium) {
  // zeta* = -K_I^-1 (J_c1 - R_c1)^-1 d = -(1 / 0.05)(-1 / 10) 2 = 4
  const auto& ts = testing::cart().transform;
  const auto eq = equilibrium(ts, testing::fig1_gains(), vec({2.0}));
  EXPECT_NEAR(eq.zeta(0), 4.0, 1e-12);
  EXPECT_LT(inf_norm(eq.q - vec({0, 0})), 1e-15);
  EXPECT_LT(inf_norm(eq.p()), 1e-15);
}

TEST(IaController, EquilibriumIsStationary) {
  for (const auto* rs : {&testing::cart(), &testing::linear()}) {
    const auto& ts = rs->transform;
    for (double dv : {0.0, 2.0, -1.0}) {
      const auto g = testing::fig1_gains();
      const auto eq = equilibrium(ts, g, vec({dv}));
      EXPECT_LT(inf_norm(closed_loop_dynamics(ts, g, eq, vec({dv})).stacked()), 1e-9);
      EXPECT_LT(inf_norm(detectability_output(ts, g, eq, vec({dv}))), 1e-12);
      // u = d at the equilibrium
      EXPECT_NEAR(ia_control(ts, g, eq)(0), dv, 1e-9);
    }
  }
}

TEST(IaController, StackingRoundTrip) {
  const ClosedLoopState x{vec({1, 2}), vec({3}), vec({4}), vec({5})};
  const Vector w = x.stacked();
  EXPECT_EQ(inf_norm(w - vec({1, 2, 3, 4, 5})), 0.0);
  const auto y = ClosedLoopState::from_stacked(w, 2, 1);
  EXPECT_EQ(y.p2(0), 4.0);
  EXPECT_EQ(y.zeta(0), 5.0);
  expect_error_code([&] { ClosedLoopState::from_stacked(vec({1, 2}), 2, 1); },
                    errc::kInvalidArgument);
}

TEST(IaController, ClosedLoopMatchesPlantUnderControl) {
  for (const auto* rs : {&testing::cart(), &testing::linear()}) {
    const auto& ts = rs->transform;
    const auto g = testing::fig1_gains();
    StateSampler sampler(ts.base, 31);
    for (int i = 0; i < 100; ++i) {
      const auto x = testing::random_closed_loop(sampler, 2, 1);
      const Vector d = vec({sampler.uniform(-2, 2)});
      const Vector a = closed_loop_dynamics(ts, g, x, d).stacked();
      const Vector b = plant_closed_loop_dynamics(ts, g, x, d).stacked();
      EXPECT_LT(inf_norm(a - b) / std::max(1.0, inf_norm(b)), 1e-9);
    }
  }
}

TEST(IaController, InterconnectionHasNegativeSemidefiniteSymmetricPart) {
  const auto& ts = testing::cart().transform;
  const auto g = testing::fig1_gains();
  StateSampler sampler(ts.base, 32);
  for (int i = 0; i < 100; ++i) {
    const auto x = testing::random_closed_loop(sampler, 2, 1);
    const Matrix f = closed_loop_F(ts, g, x);
    ASSERT_EQ(f.rows(), 5);
    EXPECT_LT(max_symmetric_eigenvalue(0.5 * (f + f.transpose())), 1e-10);
  }
}

TEST(IaController, ClosedLoopGradientMatchesFiniteDifferences) {
  const auto& ts = testing::cart().transform;
  const auto g = testing::fig1_gains();
  StateSampler sampler(ts.base, 33);
  for (int i = 0; i < 30; ++i) {
    const auto x = testing::random_closed_loop(sampler, 2, 1);
    const Vector d = vec({sampler.uniform(-2, 2)});
    const auto w_of = [&](const Vector& w) {
      return lyapunov_w(ts, g, ClosedLoopState::from_stacked(w, 2, 1), d);
    };
    const Vector fd = fd_gradient_relative(w_of, x.stacked());
    const Vector a = lyapunov_gradient(ts, g, x, d);
    EXPECT_LT(inf_norm(a - fd) / std::max(1.0, inf_norm(a)), 1e-5);

    const Vector hcl = closed_loop_gradient(ts, g, x);
    const Vector z = x.p1 - x.zeta;
    const double hcl_value = transformed_hamiltonian(ts, x.q, x.p()) + 0.5 * 0.05 * z.squaredNorm();
    const Vector fd_h = fd_gradient_relative(
        [&](const Vector& w) {
          const auto s = ClosedLoopState::from_stacked(w, 2, 1);
          const Vector zz = s.p1 - s.zeta;
          return transformed_hamiltonian(ts, s.q, s.p()) + 0.5 * 0.05 * zz.squaredNorm();
        },
        x.stacked());
    EXPECT_LT(inf_norm(hcl - fd_h) / std::max(1.0, inf_norm(hcl)), 1e-5) << hcl_value;
  }
}

TEST(IaController, LyapunovAtEquilibriumIsShapedPotential) {
  const auto& ts = testing::cart().transform;
  const auto g = testing::fig1_gains();
  const auto eq = equilibrium(ts, g, vec({2.0}));
  EXPECT_NEAR(lyapunov_w(ts, g, eq, vec({2.0})), ts.base.shaped_potential(ts.base.q_star),
              1e-12);
  EXPECT_NEAR(lyapunov_rate(ts, g, eq, vec({2.0})), 0.0, 1e-14);
}

TEST(IaController, LyapunovRateIsNonPositive) {
  const auto& ts = testing::cart().transform;
  const auto g = testing::fig1_gains();
  StateSampler sampler(ts.base, 34);
  for (int i = 0; i < 100; ++i) {
    const auto x = testing::random_closed_loop(sampler, 2, 1);
    EXPECT_LE(lyapunov_rate(ts, g, x, vec({sampler.uniform(-2, 2)})), 1e-10);
  }
}

TEST(IaController, InvalidGainsBreakTheLyapunovDecrease) {
  // R_c2 < 0 makes the symmetric part of F indefinite.
  const auto& ts = testing::cart().transform;
  const auto g = IaGainsTestAccess::raw(scalar(0.05), scalar(0), scalar(10), scalar(-5));
  StateSampler sampler(ts.base, 35);
  double worst = -1.0;
  for (int i = 0; i < 50; ++i) {
    const auto x = testing::random_closed_loop(sampler, 2, 1);
    const Matrix f = closed_loop_F(ts, g, x);
    worst = std::max(worst, max_symmetric_eigenvalue(0.5 * (f + f.transpose())));
  }
  EXPECT_GT(worst, 1e-3);
}

TEST(IaController, SimplifiedCartLawMatchesGeneric) {
  const auto& ts = testing::cart().transform;
  const auto g = testing::fig1_gains();
  StateSampler sampler(ts.base, 36);
  for (int i = 0; i < 100; ++i) {
    const auto x = testing::random_closed_loop(sampler, 2, 1);
    const double generic = ia_control(ts, g, x)(0);
    EXPECT_NEAR(cart_pendulum::simplified_ia_control(ts, 0.05, 1.0, x), generic,
                1e-12 * std::max(1.0, std::abs(generic)));
    EXPECT_EQ(reconstruct_plant_input(ts, g, x)(0), generic);
  }
}

TEST(IaController, PlantCoordinatesPushForward) {
  // d/dt (T pbold) along the original-coordinate closed loop equals the
  // transformed p-dynamics.
  const auto& ts = testing::cart().transform;
  const auto g = testing::fig1_gains();
  StateSampler sampler(ts.base, 37);
  for (int i = 0; i < 30; ++i) {
    const auto s = sampler.plant_state();
    const Vector zeta = sampler.integrator();
    const Vector d = vec({sampler.uniform(-2, 2)});
    const auto orig = ia_plant_dynamics(ts, g, s, zeta, d);
    const auto x = ClosedLoopState::from_plant(ts, s, zeta);
    const auto cl = closed_loop_dynamics(ts, g, x, d);
    const Matrix tdot = fd_matrix_directional([&](const Vector& q) { return t_matrix(ts, q); },
                                              s.q, orig.dq);
    const Vector pdot = tdot * s.pbold + t_matrix(ts, s.q) * orig.dpbold;
    EXPECT_LT(inf_norm(orig.dq - cl.q), 1e-12);
    EXPECT_LT(inf_norm(pdot - cl.p()) / std::max(1.0, inf_norm(pdot)), 1e-7);
    EXPECT_LT(inf_norm(orig.dzeta - cl.zeta), 1e-12);
  }
}

// Independent oracle: the plant of the feedback-linearized cart-pendulum in
// original coordinates, driven by energy shaping plus the simplified law
// written in xi = p1 - zeta. With S31 = 0 the law gives
//   u_tilde = -R_c2 y - K_p K_I xi,   xi_dot = -K_p y - K_p K_I xi - d,
// where y = G^T Md^-1 pbold. No transformed quantities are used.
TEST(IaController, DualCoordinateSimulationAgrees) {
  const cart_pendulum::Params params;
  const auto& ts = testing::cart().transform;
  const auto& shaped = ts.base;
  const auto plant = cart_pendulum::pendulum_open_loop(params);
  const double k_i = 0.05, r_c2 = 1.0, k_p = 10.0;

  Scenario sc = cart_pendulum::fig1_scenario();
  sc.integrator.t_final = 10.0;
  sc.disturbance = DisturbanceSchedule({{0.0, vec({0.0})}, {5.0, vec({2.0})}});
  const auto run = run_scenario(sc, testing::cart());

  auto rhs = [&](const Vector& x, double d) {
    const Vector q = x.head(2), pb = x.segment(2, 2);
    const double xi = x(4);
    const double sg = cart_pendulum::sigma(params, q(0));
    const double y = (shaped.input_matrix(q).transpose() * shaped_mass_inverse(shaped, q) * pb)(0);
    const double u_tilde = -r_c2 * y - k_p * k_i * xi;
    const double u = cart_pendulum::energy_shaping_control(params, shaped, q, pb, u_tilde / sg);
    const auto r = plant.dynamics(q, pb, u, d);
    Vector dx(5);
    dx << r.dq, r.dp, -k_p * y - k_p * k_i * xi - d;
    return dx;
  };
  auto p1_of = [&](const Vector& x) {
    return (cart_pendulum::printed_t(params, x.head(2)).row(0) * x.segment(2, 2))(0);
  };

  Vector x(5);
  x << 0, 1, 0, 0, 0;
  const double h = 1e-3;
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < run.trajectory.size(); ++k) {
    const double t = run.trajectory.times[k];
    const double d = t < 5.0 - 1e-9 ? 0.0 : 2.0;
    const Vector k1 = rhs(x, d), k2 = rhs(x + 0.5 * h * k1, d),
                 k3 = rhs(x + 0.5 * h * k2, d), k4 = rhs(x + h * k3, d);
    x += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    const auto& tr = run.trajectory;
    const Vector p = cart_pendulum::printed_t(params, x.head(2)) * x.segment(2, 2);
    const double zeta = p1_of(x) - x(4);
    worst = std::max({worst, inf_norm(tr.q[k + 1] - x.head(2)), inf_norm(tr.p[k + 1] - p),
                      std::abs(tr.zeta[k + 1](0) - zeta)});
  }
  EXPECT_LT(worst, 1e-6);
}

}  // namespace
}  // namespace phia
