#include "phia/ia_controller.hpp"

#include <fmt/format.h>

#include "phia/error.hpp"

namespace phia {

namespace {

constexpr double kStructureTol = 1e-12;

void require_square(const Matrix& a, Eigen::Index m, const char* name) {
  if (a.rows() != m || a.cols() != m) {
    throw Error(errc::kGainsInvalid,
                fmt::format("{} must be {}x{}, got {}x{}", name, m, m, a.rows(),
                            a.cols()));
  }
}

void require_spd(const Matrix& a, const char* name) {
  const double scale = std::max(1.0, max_abs(a));
  if (!a.allFinite() || asymmetry(a) > kStructureTol * scale ||
      !(min_symmetric_eigenvalue(a) > 0.0)) {
    throw Error(errc::kGainsInvalid,
                fmt::format("{} must be symmetric positive definite", name));
  }
}

Matrix controller_coupling_inverse(const IaGains& g) {
  return checked_inverse(g.j_c1() - g.r_c1(), errc::kGainsDegenerate,
                         "J_c1 - R_c1");
}

}  // namespace

IaGains::IaGains(Matrix k_i, Matrix j_c1, Matrix r_c1, Matrix r_c2)
    : k_i_(std::move(k_i)),
      j_c1_(std::move(j_c1)),
      r_c1_(std::move(r_c1)),
      r_c2_(std::move(r_c2)) {
  const auto m = k_i_.rows();
  if (m == 0) throw Error(errc::kGainsInvalid, "K_I must be non-empty");
  require_square(k_i_, m, "K_I");
  require_square(j_c1_, m, "J_c1");
  require_square(r_c1_, m, "R_c1");
  require_square(r_c2_, m, "R_c2");
  require_spd(k_i_, "K_I");
  require_spd(r_c1_, "R_c1");
  require_spd(r_c2_, "R_c2");
  if (!j_c1_.allFinite() ||
      skewness_defect(j_c1_) > kStructureTol * std::max(1.0, max_abs(j_c1_))) {
    throw Error(errc::kGainsInvalid, "J_c1 must be skew-symmetric");
  }
  controller_coupling_inverse(*this);
}

IaGains IaGains::scalar(double k_i, double j_c1, double r_c1, double r_c2) {
  return IaGains(Matrix::Constant(1, 1, k_i), Matrix::Constant(1, 1, j_c1),
                 Matrix::Constant(1, 1, r_c1), Matrix::Constant(1, 1, r_c2));
}

IaGains IaGains::simplified_preset(const TransformedSystem& ts, Matrix k_i,
                                   Matrix r_c2,
                                   std::span<const PlantState> samples) {
  if (samples.empty()) {
    throw Error(errc::kGainsInvalid, "simplified preset needs sample states");
  }
  Matrix s31_ref;
  Matrix kp_ref;
  for (const auto& s : samples) {
    const auto pt = evaluate_transformed(ts, s.q, t_matrix(ts, s.q) * s.pbold);
    if (s31_ref.size() == 0) {
      s31_ref = pt.blocks.s31;
      kp_ref = pt.kp;
      continue;
    }
    if (max_abs(pt.blocks.s31 - s31_ref) > 1e-9 || max_abs(pt.kp - kp_ref) > 1e-9) {
      throw Error(errc::kGainsInvalid,
                  "S31 or Kp is state dependent; the simplified preset needs "
                  "both constant");
    }
  }
  // S31 is skew up to round-off; project so the gains validate exactly.
  Matrix j_c1 = 0.5 * (s31_ref - s31_ref.transpose());
  return IaGains(std::move(k_i), std::move(j_c1), kp_ref, std::move(r_c2));
}

Vector ClosedLoopState::p() const {
  Vector out(p1.size() + p2.size());
  out << p1, p2;
  return out;
}

Vector ClosedLoopState::stacked() const {
  Vector w(q.size() + p1.size() + p2.size() + zeta.size());
  w << q, p1, p2, zeta;
  return w;
}

ClosedLoopState ClosedLoopState::from_stacked(const Vector& w, int n, int m) {
  if (w.size() != 2 * n + m) {
    throw Error(errc::kInvalidArgument,
                fmt::format("closed-loop state has {} entries, expected {}",
                            w.size(), 2 * n + m));
  }
  const int s = n - m;
  return {w.segment(0, n), w.segment(n, m), w.segment(n + m, s),
          w.segment(2 * n, m)};
}

ClosedLoopState ClosedLoopState::from_plant(const TransformedSystem& ts,
                                            const PlantState& s,
                                            const Vector& zeta) {
  const Vector p = t_matrix(ts, s.q) * s.pbold;
  return {s.q, p.head(ts.m()), p.tail(ts.s()), zeta};
}

namespace {

Vector control_from_point(const TransformedPoint& pt, const IaGains& g,
                          const ClosedLoopState& x) {
  const Vector grad_c = g.k_i() * (x.p1 - x.zeta);
  return (-pt.blocks.s31 + pt.kp + g.j_c1() - g.r_c1() - g.r_c2()) * pt.grad.dp1 +
         (g.j_c1() - g.r_c1()) * grad_c;
}

Vector integrator_from_point(const TransformedPoint& pt, const IaGains& g) {
  return -g.r_c2() * pt.grad.dp1 - pt.blocks.s1.transpose() * pt.grad.dq +
         pt.blocks.s32 * pt.grad.dp2;
}

Matrix assemble_F(const TransformedPoint& pt, const IaGains& g, int n, int m) {
  const int s = n - m;
  const auto& b = pt.blocks;
  const int dim = 2 * n + m;
  Matrix f = Matrix::Zero(dim, dim);
  const int iq = 0, ip1 = n, ip2 = n + m, iz = 2 * n;

  f.block(iq, ip1, n, m) = b.s1;
  f.block(iq, ip2, n, s) = b.s2;
  f.block(iq, iz, n, m) = b.s1;

  f.block(ip1, iq, m, n) = -b.s1.transpose();
  f.block(ip1, ip1, m, m) = g.j_c1() - g.r_c1() - g.r_c2();
  f.block(ip1, ip2, m, s) = b.s32;
  f.block(ip1, iz, m, m) = -g.r_c2();

  f.block(ip2, iq, s, n) = -b.s2.transpose();
  f.block(ip2, ip1, s, m) = -b.s32.transpose();
  f.block(ip2, ip2, s, s) = b.s34;
  f.block(ip2, iz, s, m) = -b.s32.transpose();

  f.block(iz, iq, m, n) = -b.s1.transpose();
  f.block(iz, ip1, m, m) = -g.r_c2();
  f.block(iz, ip2, m, s) = b.s32;
  f.block(iz, iz, m, m) = -g.r_c2();
  return f;
}

Vector cl_gradient_from_point(const TransformedPoint& pt, const IaGains& g,
                              const ClosedLoopState& x) {
  const Vector grad_c = g.k_i() * (x.p1 - x.zeta);
  Vector out(x.q.size() + x.p1.size() + x.p2.size() + x.zeta.size());
  out << pt.grad.dq, pt.grad.dp1 + grad_c, pt.grad.dp2, -grad_c;
  return out;
}

TransformedPoint point_of(const TransformedSystem& ts, const ClosedLoopState& x) {
  return evaluate_transformed(ts, x.q, x.p());
}

}  // namespace

Vector ia_control(const TransformedSystem& ts, const IaGains& g,
                  const ClosedLoopState& x) {
  return control_from_point(point_of(ts, x), g, x);
}

Vector ia_integrator_dynamics(const TransformedSystem& ts, const IaGains& g,
                              const ClosedLoopState& x) {
  return integrator_from_point(point_of(ts, x), g);
}

Matrix closed_loop_F(const TransformedSystem& ts, const IaGains& g,
                     const ClosedLoopState& x) {
  return assemble_F(point_of(ts, x), g, ts.n(), ts.m());
}

Vector closed_loop_gradient(const TransformedSystem& ts, const IaGains& g,
                            const ClosedLoopState& x) {
  return cl_gradient_from_point(point_of(ts, x), g, x);
}

ClosedLoopState closed_loop_dynamics(const TransformedSystem& ts,
                                     const IaGains& g,
                                     const ClosedLoopState& x, const Vector& d) {
  const auto pt = point_of(ts, x);
  Vector w_dot = assemble_F(pt, g, ts.n(), ts.m()) * cl_gradient_from_point(pt, g, x);
  w_dot.segment(ts.n(), ts.m()) -= d;
  return ClosedLoopState::from_stacked(w_dot, ts.n(), ts.m());
}

ClosedLoopState plant_closed_loop_dynamics(const TransformedSystem& ts,
                                           const IaGains& g,
                                           const ClosedLoopState& x,
                                           const Vector& d) {
  const auto pt = point_of(ts, x);
  const auto tr = transformed_dynamics(pt, control_from_point(pt, g, x), d);
  return {tr.dq, tr.dp1, tr.dp2, integrator_from_point(pt, g)};
}

Vector lyapunov_offset(const IaGains& g, const Vector& d) {
  const Matrix k_i_inv = checked_inverse(g.k_i(), errc::kGainsDegenerate, "K_I");
  return k_i_inv * (controller_coupling_inverse(g) * d);
}

ClosedLoopState equilibrium(const TransformedSystem& ts, const IaGains& g,
                            const Vector& d) {
  return {ts.base.q_star, Vector::Zero(ts.m()), Vector::Zero(ts.s()),
          -lyapunov_offset(g, d)};
}

double lyapunov_w(const TransformedSystem& ts, const IaGains& g,
                  const ClosedLoopState& x, const Vector& d) {
  const Vector dz = (x.p1 - x.zeta) - lyapunov_offset(g, d);
  return transformed_hamiltonian(ts, x.q, x.p()) + 0.5 * dz.dot(g.k_i() * dz);
}

Vector lyapunov_gradient(const TransformedSystem& ts, const IaGains& g,
                         const ClosedLoopState& x, const Vector& d) {
  Vector grad = closed_loop_gradient(ts, g, x);
  const Vector c = controller_coupling_inverse(g) * d;
  grad.segment(ts.n(), ts.m()) -= c;
  grad.tail(ts.m()) += c;
  return grad;
}

double lyapunov_rate(const TransformedSystem& ts, const IaGains& g,
                     const ClosedLoopState& x, const Vector& d) {
  const Vector grad = lyapunov_gradient(ts, g, x, d);
  return grad.dot(closed_loop_F(ts, g, x) * grad);
}

Vector detectability_output(const TransformedSystem& ts, const IaGains& g,
                            const ClosedLoopState& x, const Vector& d) {
  const auto grad = transformed_gradient(ts, x.q, x.p());
  Vector out(2 * ts.m());
  out << grad.dp1,
      g.k_i() * (x.p1 - x.zeta) - controller_coupling_inverse(g) * d;
  return out;
}

Vector reconstruct_plant_input(const TransformedSystem& ts, const IaGains& g,
                               const ClosedLoopState& x) {
  return ia_control(ts, g, x);
}

PlantClosedLoopDerivative ia_plant_dynamics(const TransformedSystem& ts,
                                            const IaGains& g,
                                            const PlantState& s,
                                            const Vector& zeta,
                                            const Vector& d) {
  const auto x = ClosedLoopState::from_plant(ts, s, zeta);
  const auto pt = point_of(ts, x);
  const Vector u = control_from_point(pt, g, x);
  const auto orig = open_loop_dynamics(ts.base, s, u, d);
  return {orig.dq, orig.dp, integrator_from_point(pt, g)};
}

}  // namespace phia
