#include "phia/linear_2dof.hpp"

#include <cmath>

#include "phia/error.hpp"

namespace phia::linear_2dof {

namespace {

Matrix shaped_mass() {
  Matrix md(2, 2);
  md << 2.0, 0.5, 0.5, 1.0;
  return md;
}

Matrix stiffness() {
  Matrix k(2, 2);
  k << 3.0, 1.0, 1.0, 2.0;
  return k;
}

}  // namespace

void Params::validate() const {
  if (!std::isfinite(q1_star) || !std::isfinite(q2_star)) {
    throw Error(errc::kInvalidArgument, "linear-2dof target must be finite");
  }
  if (!(damping > 0.0) || !std::isfinite(damping)) {
    throw Error(errc::kInvalidArgument, "linear-2dof damping must be positive");
  }
}

ShapedMechanicalSystem system(const Params& p) {
  p.validate();
  ShapedMechanicalSystem sys;
  sys.name = "linear-2dof";
  sys.dof = 2;
  sys.inputs = 1;
  sys.q_star = Vector(2);
  sys.q_star << p.q1_star, p.q2_star;
  const Vector q_star = sys.q_star;
  sys.mass = [](const Vector&) { return Matrix(Matrix::Identity(2, 2)); };
  sys.shaped_mass = [](const Vector&) { return shaped_mass(); };
  sys.shaped_potential = [q_star](const Vector& q) {
    const Vector e = q - q_star;
    return 0.5 * e.dot(stiffness() * e);
  };
  sys.shaped_potential_grad = [q_star](const Vector& q) {
    return Vector(stiffness() * (q - q_star));
  };
  sys.shaped_potential_hessian = [](const Vector&) { return stiffness(); };
  sys.shaped_mass_partials = [](const Vector&) {
    return std::vector<Matrix>{Matrix::Zero(2, 2), Matrix::Zero(2, 2)};
  };
  sys.j2 = [](const Vector&, const Vector&) { return Matrix(Matrix::Zero(2, 2)); };
  sys.input_matrix = [](const Vector&) {
    Matrix g(2, 1);
    g << 1.0, 0.0;
    return g;
  };
  sys.damping_gain = [kp = p.damping](const Vector&) {
    return Matrix(Matrix::Constant(1, 1, kp));
  };
  sys.domain = BoxDomain::unbounded(2);
  return sys;
}

}  // namespace phia::linear_2dof
