#include "phia/cart_pendulum.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "phia/error.hpp"
#include "phia/scenario.hpp"

namespace phia::cart_pendulum {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(errc::kInvalidArgument,
                fmt::format("cart-pendulum parameter {} must be positive", name));
  }
}

BoxDomain angle_domain() {
  const double inf = std::numeric_limits<double>::infinity();
  const double half_pi = std::numbers::pi / 2.0;
  BoxDomain d;
  d.lower = Vector(2);
  d.upper = Vector(2);
  d.lower << -half_pi, -inf;
  d.upper << half_pi, inf;
  d.description = "|q1| < pi/2";
  return d;
}

void require_angle(const Vector& q) {
  if (q.size() != 2 || !angle_domain().contains(q)) {
    throw Error(errc::kDomainViolation,
                fmt::format("cart-pendulum: q = {} outside |q1| < pi/2",
                            format_vector(q)));
  }
}

Matrix column(double a, double b) {
  Matrix c(2, 1);
  c << a, b;
  return c;
}

// Bracket of the shaped potential and its q1-derivative.
struct Bracket {
  double value;
  double d_q1;
};

Bracket bracket(const Params& p, const ShapingParams& s, PotentialVariant v,
                const Vector& q) {
  const double c = std::cos(q(0));
  const double t = std::tan(q(0));
  const double sec = 1.0 / c;
  const double b = p.b();
  const double coeff = 6.0 * s.m22_0 / (s.k * b);
  const double last = v == PotentialVariant::kTan ? t : t * t;
  const double last_d = v == PotentialVariant::kTan ? sec * sec : 2.0 * t * sec * sec;
  return {q(1) - s.q2_star + 3.0 / b * std::log(sec + t) + coeff * last,
          3.0 / b * sec + coeff * last_d};
}

Matrix j2_matrix(const Params& p, const ShapingParams& s, const Vector& q,
                 const Vector& pbold) {
  const double c = std::cos(q(0));
  const double sn = std::sin(q(0));
  const double b = p.b();
  const double gamma1 = -s.k * b * b / 6.0 * c * c * c;
  Vector alpha(2);
  alpha << -b * c, 1.0;
  alpha *= s.k * gamma1 / 2.0 * sn;
  const double coeff =
      pbold.dot(checked_solve(shaped_mass(p, s, q), alpha,
                              errc::kMassMatrixSingular, "Md(q)"));
  Matrix j(2, 2);
  j << 0.0, coeff, -coeff, 0.0;
  return j;
}

std::vector<Vector> grid_points(double q2_star) {
  std::vector<Vector> pts;
  for (int i = -4; i <= 4; ++i) {
    for (double dq2 : {-1.0, 0.5, 2.0}) {
      Vector q(2);
      q << 0.3 * i, q2_star + dq2;
      pts.push_back(q);
    }
  }
  return pts;
}

}  // namespace

void Params::validate() const {
  require_positive(m_c, "m_c");
  require_positive(m_p, "m_p");
  require_positive(l, "l");
  require_positive(g, "g");
}

void ShapingParams::validate() const {
  require_positive(k, "k");
  require_positive(m22_0, "m22_0");
  require_positive(P, "P");
  require_positive(k_p_damp, "K_p");
  if (!std::isfinite(q2_star)) {
    throw Error(errc::kInvalidArgument, "q2_star must be finite");
  }
}

std::string_view to_string(PotentialVariant v) {
  return v == PotentialVariant::kTan ? "tan" : "tan^2";
}

double sigma(const Params& p, double q1) {
  const double sn = std::sin(q1);
  return p.m_c + p.m_p * sn * sn;
}

double OpenLoopPlant::potential(const Vector& q) const {
  return params.a() * std::cos(q(0));
}

Vector OpenLoopPlant::potential_grad(const Vector& q) const {
  Vector g(2);
  g << -params.a() * std::sin(q(0)), 0.0;
  return g;
}

Vector OpenLoopPlant::input_vector(const Vector& q) const {
  Vector g(2);
  g << -params.b() * std::cos(q(0)), 1.0;
  return g;
}

double OpenLoopPlant::hamiltonian(const Vector& q, const Vector& pbold) const {
  require_angle(q);
  return 0.5 * pbold.squaredNorm() + potential(q);
}

PlantDerivative OpenLoopPlant::dynamics(const Vector& q, const Vector& pbold,
                                        double u, double d) const {
  require_angle(q);
  const Vector gb = input_vector(q);
  PlantDerivative out;
  out.dq = pbold;
  out.dp = -potential_grad(q) + gb * (u - d / sigma(params, q(0)));
  out.y = gb.transpose() * pbold;
  return out;
}

BoxDomain OpenLoopPlant::domain() const { return angle_domain(); }

OpenLoopPlant pendulum_open_loop(const Params& params) {
  params.validate();
  return {params};
}

Matrix shaped_mass(const Params& p, const ShapingParams& s, const Vector& q) {
  const double c = std::cos(q(0));
  const double b = p.b();
  Matrix md(2, 2);
  md << s.k * b * b / 3.0 * c * c * c, -s.k * b / 2.0 * c * c,
      -s.k * b / 2.0 * c * c, s.k * c + s.m22_0;
  return md;
}

double shaped_potential(const Params& p, const ShapingParams& s,
                        PotentialVariant v, const Vector& q) {
  const double c = std::cos(q(0));
  const double b = p.b();
  const double br = bracket(p, s, v, q).value;
  return 3.0 * p.a() / (s.k * b * b * c * c) + 0.5 * s.P * br * br;
}

Vector shaped_potential_grad(const Params& p, const ShapingParams& s,
                             PotentialVariant v, const Vector& q) {
  const double c = std::cos(q(0));
  const double sn = std::sin(q(0));
  const double b = p.b();
  const auto br = bracket(p, s, v, q);
  Vector g(2);
  g << 6.0 * p.a() * sn / (s.k * b * b * c * c * c) + s.P * br.value * br.d_q1,
      s.P * br.value;
  return g;
}

PotentialCheck check_potential_variant(const Params& p, const ShapingParams& s,
                                       PotentialVariant v) {
  PotentialCheck check;
  check.variant = v;
  Vector q_star(2);
  q_star << 0.0, s.q2_star;
  const ScalarField vd = [&](const Vector& q) { return shaped_potential(p, s, v, q); };
  const VectorField vd_grad = [&](const Vector& q) {
    return shaped_potential_grad(p, s, v, q);
  };
  check.grad_norm_at_target =
      fd_gradient_relative(vd, q_star).lpNorm<Eigen::Infinity>();
  check.hessian_min_eig =
      min_symmetric_eigenvalue(fd_hessian_from_gradient(vd_grad, q_star));

  const OpenLoopPlant plant{p};
  for (const auto& q : grid_points(s.q2_star)) {
    const Vector shaped_term = shaped_mass(p, s, q) * vd_grad(q);
    const Matrix gperp = printed_annihilator(p, q) / sigma(p, q(0));
    const double r = (gperp * (plant.potential_grad(q) - shaped_term))
                         .lpNorm<Eigen::Infinity>();
    check.matching_residual =
        std::max(check.matching_residual,
                 r / std::max(1.0, shaped_term.lpNorm<Eigen::Infinity>()));
  }
  check.passed = check.grad_norm_at_target < 1e-6 && check.hessian_min_eig > 0.0 &&
                 check.matching_residual < 1e-9;
  return check;
}

VariantSelection select_potential_variant(const Params& p,
                                          const ShapingParams& s) {
  p.validate();
  s.validate();
  VariantSelection sel;
  for (auto v : {PotentialVariant::kTanSquared, PotentialVariant::kTan}) {
    sel.attempts.push_back(check_potential_variant(p, s, v));
    if (sel.attempts.back().passed) {
      sel.chosen = v;
      return sel;
    }
  }
  throw Error(errc::kShapingInvalid,
              "no shaped-potential variant has a matched strict minimum at q*");
}

ShapedMechanicalSystem shaped_system(const Params& p, const ShapingParams& s) {
  return shaped_system(p, s, select_potential_variant(p, s).chosen);
}

ShapedMechanicalSystem shaped_system(const Params& p, const ShapingParams& s,
                                     PotentialVariant v) {
  p.validate();
  s.validate();
  ShapedMechanicalSystem sys;
  sys.name = "cart-pendulum";
  sys.dof = 2;
  sys.inputs = 1;
  sys.mass = [](const Vector&) { return Matrix(Matrix::Identity(2, 2)); };
  sys.shaped_mass = [p, s](const Vector& q) { return shaped_mass(p, s, q); };
  sys.shaped_potential = [p, s, v](const Vector& q) {
    return shaped_potential(p, s, v, q);
  };
  sys.shaped_potential_grad = [p, s, v](const Vector& q) {
    return shaped_potential_grad(p, s, v, q);
  };
  sys.j2 = [p, s](const Vector& q, const Vector& pbold) {
    return j2_matrix(p, s, q, pbold);
  };
  sys.input_matrix = [p](const Vector& q) {
    return Matrix(column(-p.b() * std::cos(q(0)), 1.0) / sigma(p, q(0)));
  };
  sys.damping_gain = [kp = s.k_p_damp](const Vector&) {
    return Matrix(Matrix::Constant(1, 1, kp));
  };
  sys.q_star = Vector(2);
  sys.q_star << 0.0, s.q2_star;
  sys.domain = angle_domain();
  sys.shaped_mass_partials = [p, s](const Vector& q) {
    const double c = std::cos(q(0));
    const double sn = std::sin(q(0));
    const double b = p.b();
    Matrix d1(2, 2);
    d1 << -s.k * b * b * c * c * sn, s.k * b * c * sn, s.k * b * c * sn, -s.k * sn;
    return std::vector<Matrix>{d1, Matrix::Zero(2, 2)};
  };

  const auto check = check_potential_variant(p, s, v);
  if (check.grad_norm_at_target >= 1e-6 || !(check.hessian_min_eig > 0.0)) {
    throw Error(errc::kShapingInvalid,
                fmt::format("Vd ({}) has no strict minimum at q*", to_string(v)));
  }
  return sys;
}

double energy_shaping_control(const Params& p,
                              const ShapedMechanicalSystem& shaped,
                              const Vector& q, const Vector& pbold,
                              double u_prime) {
  require_angle(q);
  const OpenLoopPlant plant{p};
  const Vector gb = plant.input_vector(q);
  const Matrix md = shaped.shaped_mass(q);
  const Vector v = shaped_mass_inverse(shaped, q) * pbold;
  const auto grad = grad_hamiltonian(shaped, {q, pbold});
  // grad_q of the open-loop Hamiltonian; M = I so only the potential depends on q.
  const Vector bracket_term =
      plant.potential_grad(q) - md * grad.dq + shaped.j2(q, pbold) * v;
  const double sg = sigma(p, q(0));
  const double kp = shaped.damping_gain(q)(0, 0);
  return gb.dot(bracket_term) / gb.squaredNorm() - kp / (sg * sg) * gb.dot(v) +
         u_prime;
}

Matrix printed_annihilator(const Params& p, const Vector& q) {
  Matrix g(1, 2);
  g << 1.0, p.b() * std::cos(q(0));
  return sigma(p, q(0)) * g;
}

Matrix printed_t(const Params& p, const Vector& q) {
  const double bc = p.b() * std::cos(q(0));
  const double den = bc * bc + 1.0;
  Matrix t(2, 2);
  t << -bc / den, 1.0 / den, 1.0, bc;
  return sigma(p, q(0)) * t;
}

Matrix printed_t_inverse(const Params& p, const Vector& q) {
  const double bc = p.b() * std::cos(q(0));
  const double den = bc * bc + 1.0;
  Matrix t(2, 2);
  t << -bc, 1.0 / den, 1.0, bc / den;
  return t / sigma(p, q(0));
}

std::vector<Matrix> printed_t_inverse_partials(const Params& p, const Vector& q) {
  const double b = p.b();
  const double c = std::cos(q(0));
  const double sn = std::sin(q(0));
  const double bc = b * c;
  const double den = bc * bc + 1.0;
  const double sg = sigma(p, q(0));
  const double sg_d = 2.0 * p.m_p * sn * c;
  Matrix base(2, 2);
  base << -bc, 1.0 / den, 1.0, bc / den;
  Matrix base_d(2, 2);
  base_d << b * sn, 2.0 * b * b * c * sn / (den * den), 0.0,
      b * sn * (bc * bc - 1.0) / (den * den);
  return {Matrix(-sg_d / (sg * sg) * base + base_d / sg), Matrix::Zero(2, 2)};
}

Matrix printed_s1(const Params& p, const ShapingParams& s, const Vector& q) {
  const double b = p.b();
  const double c = std::cos(q(0));
  const double den = b * b * c * c + 1.0;
  const double k = s.k;
  return sigma(p, q(0)) / den *
         column(-k * b * b * b / 3.0 * std::pow(c, 4) - k * b / 2.0 * c * c,
                k * b * b / 2.0 * c * c * c + k * c + s.m22_0);
}

Matrix printed_s32(const Params& p, const Vector& q, const Matrix& jp) {
  const double bc = p.b() * std::cos(q(0));
  const double den = bc * bc + 1.0;
  const double sg = sigma(p, q(0));
  Matrix left(1, 2);
  left << -bc, 1.0;
  return sg * sg / den * left * jp * column(1.0, bc);
}

TransformedSystem cart_transform(const Params& p, const ShapingParams& s) {
  return cart_transform(p, s, select_potential_variant(p, s).chosen);
}

TransformedSystem cart_transform(const Params& p, const ShapingParams& s,
                                 PotentialVariant v) {
  auto sys = shaped_system(p, s, v);
  std::vector<Vector> samples = grid_points(s.q2_star);
  auto ann = build_annihilator(
      sys.input_matrix, 2, 1, AnnihilatorMode::kUserSupplied,
      [p](const Vector& q) { return printed_annihilator(p, q); }, samples);
  return make_transformed_system(
      std::move(sys), std::move(ann),
      [p](const Vector& q) { return printed_t_inverse_partials(p, q); });
}

double simplified_ia_control(const TransformedSystem& ts, double k_i,
                             double r_c2, const ClosedLoopState& x) {
  const auto grad = transformed_gradient(ts, x.q, x.p());
  const double kp = ts.base.damping_gain(x.q)(0, 0);
  return -r_c2 * grad.dp1(0) - kp * k_i * (x.p1(0) - x.zeta(0));
}

Scenario fig1_scenario() {
  const Params p;
  const ShapingParams s;
  Scenario sc;
  sc.name = "fig1";
  sc.system_id = "cart-pendulum";
  sc.params = {{"m_c", p.m_c},   {"m_p", p.m_p}, {"l", p.l},
               {"g", p.g},       {"k", s.k},     {"m22_0", s.m22_0},
               {"P", s.P},       {"K_p", s.k_p_damp}, {"q2_star", s.q2_star}};
  sc.controller = ControllerKind::kIntegralAction;
  sc.ia_gains = IaGains::scalar(0.05, 0.0, 10.0, 1.0);
  sc.q0 = Vector(2);
  sc.q0 << 0.0, 1.0;
  sc.p0 = Vector::Zero(2);
  sc.zeta0 = Vector::Zero(1);
  sc.disturbance = DisturbanceSchedule(
      {{0.0, Vector::Zero(1)}, {30.0, Vector::Constant(1, 2.0)}});
  sc.integrator.method = IntegratorMethod::kFixedRk4;
  sc.integrator.step = 1e-3;
  sc.integrator.t_final = 60.0;
  return sc;
}

}  // namespace phia::cart_pendulum
