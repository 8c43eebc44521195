#include "phia/reference_pid.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "phia/error.hpp"
#include "phia/momentum_transform.hpp"

namespace phia {

namespace {

void require_spd(const Matrix& a, Eigen::Index m, const char* name) {
  if (a.rows() != m || a.cols() != m) {
    throw Error(errc::kGainsInvalid,
                fmt::format("{} must be {}x{}", name, m, m));
  }
  if (!a.allFinite() || asymmetry(a) > 1e-12 * std::max(1.0, max_abs(a)) ||
      !(min_symmetric_eigenvalue(a) > 0.0)) {
    throw Error(errc::kGainsInvalid,
                fmt::format("{} must be symmetric positive definite", name));
  }
}

double structural_change(const ShapedMechanicalSystem& sys, const Vector& a,
                         const Vector& b) {
  return std::max(max_abs(sys.input_matrix(a) - sys.input_matrix(b)),
                  max_abs(sys.shaped_mass(a) - sys.shaped_mass(b)));
}

}  // namespace

PidGains::PidGains(Matrix k1, Matrix k_p_outer, Matrix k_i, Matrix k3)
    : k1_(std::move(k1)),
      k_p_outer_(std::move(k_p_outer)),
      k_i_(std::move(k_i)),
      k3_(std::move(k3)) {
  const auto m = k1_.rows();
  if (m == 0) throw Error(errc::kGainsInvalid, "K1 must be non-empty");
  require_spd(k1_, m, "K1");
  require_spd(k_p_outer_, m, "K_P");
  require_spd(k_i_, m, "K_I");
  require_spd(k3_, m, "K3");
}

AssumptionReport check_assumptions(const ShapedMechanicalSystem& sys,
                                   std::span<const PlantState> samples) {
  AssumptionReport r;
  if (samples.empty()) return r;
  const Vector& q0 = samples.front().q;
  for (const auto& s : samples) {
    r.constant_violation =
        std::max(r.constant_violation, structural_change(sys, s.q, q0));
    const Matrix gperp = computed_annihilator(sys.input_matrix(s.q));
    const Vector& p = s.pbold;
    const Vector kinetic_grad = fd_gradient_relative(
        [&](const Vector& qq) { return p.dot(mass_inverse(sys, qq) * p); }, s.q);
    r.kinetic_violation = std::max(
        r.kinetic_violation, (gperp * kinetic_grad).lpNorm<Eigen::Infinity>());
  }
  r.constant_input_and_shaped_mass = r.constant_violation <= 1e-12;
  r.kinetic_gradient_annihilated = r.kinetic_violation <= 1e-8;
  return r;
}

Matrix pid_k2(const ShapedMechanicalSystem& sys, const Vector& q) {
  const Matrix g = sys.input_matrix(q);
  return checked_inverse(g.transpose() * shaped_mass_inverse(sys, q) * g,
                         errc::kSingularMatrix, "G^T Md^-1 G");
}

PidOutput pid_control(const ShapedMechanicalSystem& sys, const PidGains& g,
                      const Vector& q, const Vector& pbold, const Vector& zeta) {
  require_in_domain(sys, q);
  std::vector<Vector> probes{sys.q_star};
  for (const Vector* base : {&q, &sys.q_star}) {
    for (int i = 0; i < sys.dof; ++i) {
      for (double sign : {-1.0, 1.0}) {
        Vector probe = *base;
        probe(i) += sign * 0.1;
        if (sys.domain.contains(probe)) probes.push_back(std::move(probe));
      }
    }
  }
  for (const auto& probe : probes) {
    const double change = structural_change(sys, q, probe);
    if (change > 1e-12) {
      throw Error(errc::kAssumptionViolated,
                  fmt::format("{}: G or Md not constant (change {:.3e} between "
                              "q = {} and q = {})",
                              sys.name, change, format_vector(q),
                              format_vector(probe)));
    }
  }
  return pid_control_unchecked(sys, g, q, pbold, zeta);
}

PidOutput pid_control_unchecked(const ShapedMechanicalSystem& sys,
                                const PidGains& g, const Vector& q,
                                const Vector& pbold, const Vector& zeta) {
  require_in_domain(sys, q);
  const Matrix G = sys.input_matrix(q);
  const Matrix Gt = G.transpose();
  const Matrix m_inv = mass_inverse(sys, q);
  const Matrix md_inv = shaped_mass_inverse(sys, q);
  const Matrix kp = sys.damping_gain(q);
  const Matrix k2 = pid_k2(sys, q);
  const Vector grad_v = sys.shaped_potential_grad(q);
  const Matrix hess_v = potential_hessian(sys, q);
  const Matrix gtg_inv =
      checked_inverse(Gt * G, errc::kSingularNormalMatrix, "G^T G");

  // Time derivative of M^-1 along qdot = M^-1 pbold.
  const Vector q_dot = m_inv * pbold;
  const Matrix m_inv_dot = fd_matrix_directional(
      [&](const Vector& qq) { return mass_inverse(sys, qq); }, q, q_dot);

  const Matrix& k1 = g.k1();
  const Matrix& ki = g.k_i();
  const Matrix& k3 = g.k3();
  const Matrix gmg = Gt * md_inv * G;

  const Matrix grad_gain =
      kp * gmg * k1 * Gt * m_inv + k1 * Gt * m_inv_dot +
      k2 * ki * (k2.transpose() + k3.transpose() * gmg * k1) * Gt * m_inv;
  const Matrix momentum_gain = k1 * Gt * m_inv * hess_v * m_inv +
                               gtg_inv * Gt * sys.j2(q, pbold) * md_inv +
                               k2 * ki * k3.transpose() * Gt * md_inv;
  const Matrix integral_gain = (g.k_p_outer() * gmg * k2 + k3) * ki;

  PidOutput out;
  out.u = -grad_gain * grad_v - momentum_gain * pbold - integral_gain * zeta;
  out.zeta_dot =
      (k2.transpose() * Gt * m_inv + k3.transpose() * gmg * k1 * Gt * m_inv) *
          grad_v +
      k3.transpose() * Gt * md_inv * pbold;
  return out;
}

Vector pid_alpha(const ShapedMechanicalSystem& sys, const PidGains& g,
                 const Vector& d) {
  const Matrix kp = sys.damping_gain(sys.q_star);
  const Matrix inner =
      checked_inverse(kp + g.k3(), errc::kSingularMatrix, "Kp + K3");
  return -checked_inverse(g.k_i(), errc::kSingularMatrix, "K_I") * (inner * d);
}

Z2Coordinates z2_coordinates(const ShapedMechanicalSystem& sys,
                             const PidGains& g, const Vector& q,
                             const Vector& pbold, const Vector& zeta,
                             const Vector& d) {
  require_in_domain(sys, q);
  const Matrix G = sys.input_matrix(q);
  const Matrix m_inv = mass_inverse(sys, q);
  const Vector grad_v = sys.shaped_potential_grad(q);
  const Vector dz = zeta - pid_alpha(sys, g, d);

  Z2Coordinates out;
  out.z2 = pbold + G * g.k1() * G.transpose() * m_inv * grad_v +
           G * pid_k2(sys, q) * g.k_i() * dz;
  out.h_z = 0.5 * out.z2.dot(shaped_mass_inverse(sys, q) * out.z2) +
            sys.shaped_potential(q) + 0.5 * dz.dot(g.k_i() * dz);
  return out;
}

}  // namespace phia
