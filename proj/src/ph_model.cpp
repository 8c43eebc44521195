#include "phia/ph_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "phia/error.hpp"

namespace phia {

BoxDomain BoxDomain::unbounded(int dof) {
  const double inf = std::numeric_limits<double>::infinity();
  return {Vector::Constant(dof, -inf), Vector::Constant(dof, inf), "R^n"};
}

bool BoxDomain::contains(const Vector& q) const {
  if (q.size() != lower.size()) return false;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    if (!std::isfinite(q(i))) return false;
    if (!(q(i) > lower(i) && q(i) < upper(i))) return false;
  }
  return true;
}

void require_in_domain(const ShapedMechanicalSystem& sys, const Vector& q) {
  if (q.size() != sys.dof) {
    throw Error(errc::kInvalidArgument,
                fmt::format("{}: configuration has {} entries, expected {}",
                            sys.name, q.size(), sys.dof));
  }
  if (!sys.domain.contains(q)) {
    throw Error(errc::kDomainViolation,
                fmt::format("{}: q = {} outside domain {}", sys.name,
                            format_vector(q), sys.domain.description));
  }
}

Matrix shaped_mass_inverse(const ShapedMechanicalSystem& sys, const Vector& q) {
  return checked_inverse(sys.shaped_mass(q), errc::kMassMatrixSingular,
                         fmt::format("Md(q) at q = {}", format_vector(q)));
}

Matrix mass_inverse(const ShapedMechanicalSystem& sys, const Vector& q) {
  return checked_inverse(sys.mass(q), errc::kMassMatrixSingular,
                         fmt::format("M(q) at q = {}", format_vector(q)));
}

Matrix damping_matrix(const ShapedMechanicalSystem& sys, const Vector& q) {
  const Matrix g = sys.input_matrix(q);
  return g * sys.damping_gain(q) * g.transpose();
}

double eval_hamiltonian(const ShapedMechanicalSystem& sys, const PlantState& s) {
  require_in_domain(sys, s.q);
  const Vector v = shaped_mass_inverse(sys, s.q) * s.pbold;
  const double h = 0.5 * s.pbold.dot(v) + sys.shaped_potential(s.q);
  if (!std::isfinite(h)) {
    throw Error(errc::kEvalFailed,
                fmt::format("{}: non-finite energy at q = {}", sys.name, format_vector(s.q)));
  }
  return h;
}

HamiltonianGradient grad_hamiltonian(const ShapedMechanicalSystem& sys,
                                     const PlantState& s, DerivativeMode mode) {
  require_in_domain(sys, s.q);
  const Vector v = shaped_mass_inverse(sys, s.q) * s.pbold;
  Vector dq = sys.shaped_potential_grad(s.q);
  if (mode == DerivativeMode::kAnalytic && sys.shaped_mass_partials) {
    // d/dq_i (1/2 p^T Md^-1 p) = -1/2 v^T (dMd/dq_i) v
    const auto partials = sys.shaped_mass_partials(s.q);
    for (int i = 0; i < sys.dof; ++i) {
      dq(i) -= 0.5 * v.dot(partials[static_cast<std::size_t>(i)] * v);
    }
  } else {
    const Vector& p = s.pbold;
    dq += fd_gradient_relative(
        [&](const Vector& qq) {
          return 0.5 * p.dot(shaped_mass_inverse(sys, qq) * p);
        },
        s.q);
  }
  if (!all_finite(dq) || !all_finite(v)) {
    throw Error(errc::kEvalFailed,
                fmt::format("{}: non-finite gradient at q = {}", sys.name, format_vector(s.q)));
  }
  return {std::move(dq), v};
}

PlantDerivative open_loop_dynamics(const ShapedMechanicalSystem& sys,
                                   const PlantState& s, const Vector& u,
                                   const Vector& d) {
  const auto grad = grad_hamiltonian(sys, s);
  const Matrix m_inv = mass_inverse(sys, s.q);
  const Matrix md = sys.shaped_mass(s.q);
  const Matrix g = sys.input_matrix(s.q);
  const Matrix rd = g * sys.damping_gain(s.q) * g.transpose();

  PlantDerivative out;
  out.dq = m_inv * md * grad.dp;
  out.dp = -md * m_inv * grad.dq + (sys.j2(s.q, s.pbold) - rd) * grad.dp +
           g * (u - d);
  out.y = g.transpose() * grad.dp;
  return out;
}

Vector passive_output(const ShapedMechanicalSystem& sys, const PlantState& s) {
  require_in_domain(sys, s.q);
  return sys.input_matrix(s.q).transpose() *
         (shaped_mass_inverse(sys, s.q) * s.pbold);
}

Matrix potential_hessian(const ShapedMechanicalSystem& sys, const Vector& q) {
  if (sys.shaped_potential_hessian) return sys.shaped_potential_hessian(q);
  return fd_hessian_from_gradient(sys.shaped_potential_grad, q);
}

bool SystemCheckReport::ok() const {
  return min_input_rank == expected_input_rank && min_mass_eigenvalue > 0.0 && min_shaped_mass_eigenvalue > 0.0 &&
         max_mass_asymmetry < 1e-10 && max_j2_skewness_defect < 1e-10 &&
         potential_grad_at_target < 1e-6 && potential_hessian_min_eig > 0.0;
}

SystemCheckReport check_system(const ShapedMechanicalSystem& sys,
                               std::span<const PlantState> samples) {
  SystemCheckReport r;
  r.min_mass_eigenvalue = std::numeric_limits<double>::infinity();
  r.min_shaped_mass_eigenvalue = std::numeric_limits<double>::infinity();
  r.min_input_rank = sys.inputs;
  r.expected_input_rank = sys.inputs;
  for (const auto& s : samples) {
    require_in_domain(sys, s.q);
    const Matrix m = sys.mass(s.q);
    const Matrix md = sys.shaped_mass(s.q);
    r.min_mass_eigenvalue =
        std::min(r.min_mass_eigenvalue, min_symmetric_eigenvalue(m));
    r.min_shaped_mass_eigenvalue =
        std::min(r.min_shaped_mass_eigenvalue, min_symmetric_eigenvalue(md));
    r.max_mass_asymmetry =
        std::max({r.max_mass_asymmetry, asymmetry(m), asymmetry(md)});
    r.max_j2_skewness_defect = std::max(r.max_j2_skewness_defect,
                                        skewness_defect(sys.j2(s.q, s.pbold)));
    r.min_input_rank =
        std::min(r.min_input_rank, numerical_rank(sys.input_matrix(s.q)));
  }
  r.potential_grad_at_target =
      fd_gradient_relative(sys.shaped_potential, sys.q_star)
          .lpNorm<Eigen::Infinity>();
  r.potential_hessian_min_eig = min_symmetric_eigenvalue(
      fd_hessian_from_gradient(sys.shaped_potential_grad, sys.q_star));
  return r;
}

}  // namespace phia
