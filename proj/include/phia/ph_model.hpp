#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "phia/finite_difference.hpp"
#include "phia/linalg.hpp"

namespace phia {

using MatrixPartials = std::function<std::vector<Matrix>(const Vector&)>;
using StateMatrixField = std::function<Matrix(const Vector& q, const Vector& p)>;

// Open box in configuration space; +-infinity bounds are allowed.
struct BoxDomain {
  Vector lower;
  Vector upper;
  std::string description;

  static BoxDomain unbounded(int dof);
  bool contains(const Vector& q) const;
};

enum class DerivativeMode { kAnalytic, kFiniteDifference };

/// A mechanical port-Hamiltonian system already stabilized by IDA-PBC and
/// subject to a matched disturbance:
///
///   qdot = M^-1 Md dH/dp
///   pdot = -Md M^-1 dH/dq + (J2 - G Kp G^T) dH/dp + G (u - d)
///   y    = G^T dH/dp,          H = 1/2 p^T Md^-1 p + Vd(q)
///
/// All maps are pure. The optional derivative closures are used when present;
/// missing ones fall back to central differences.
struct ShapedMechanicalSystem {
  std::string name;
  int dof = 0;
  int inputs = 0;
  MatrixField mass;
  MatrixField shaped_mass;
  ScalarField shaped_potential;
  VectorField shaped_potential_grad;
  StateMatrixField j2;
  MatrixField input_matrix;
  MatrixField damping_gain;
  Vector q_star;
  BoxDomain domain;

  MatrixPartials shaped_mass_partials;   // dMd/dq_i, optional
  MatrixField shaped_potential_hessian;  // optional
};

struct PlantState {
  Vector q;
  Vector pbold;
};

struct HamiltonianGradient {
  Vector dq;
  Vector dp;
};

struct PlantDerivative {
  Vector dq;
  Vector dp;
  Vector y;  // passive output G^T dH/dp
};

// Throws "domain-violation" naming q when q lies outside sys.domain.
void require_in_domain(const ShapedMechanicalSystem& sys, const Vector& q);

// Md(q)^-1 with the condition guard ("mass-matrix-singular").
Matrix shaped_mass_inverse(const ShapedMechanicalSystem& sys, const Vector& q);
Matrix mass_inverse(const ShapedMechanicalSystem& sys, const Vector& q);

Matrix damping_matrix(const ShapedMechanicalSystem& sys, const Vector& q);

double eval_hamiltonian(const ShapedMechanicalSystem& sys, const PlantState& s);

HamiltonianGradient grad_hamiltonian(
    const ShapedMechanicalSystem& sys, const PlantState& s,
    DerivativeMode mode = DerivativeMode::kAnalytic);

PlantDerivative open_loop_dynamics(const ShapedMechanicalSystem& sys,
                                   const PlantState& s, const Vector& u,
                                   const Vector& d);

Vector passive_output(const ShapedMechanicalSystem& sys, const PlantState& s);

Matrix potential_hessian(const ShapedMechanicalSystem& sys, const Vector& q);

struct SystemCheckReport {
  double min_mass_eigenvalue = 0.0;
  double min_shaped_mass_eigenvalue = 0.0;
  double max_mass_asymmetry = 0.0;
  double max_j2_skewness_defect = 0.0;
  int min_input_rank = 0;
  int expected_input_rank = 0;
  double potential_grad_at_target = 0.0;  // inf-norm of FD gradient at q*
  double potential_hessian_min_eig = 0.0;

  bool ok() const;
};

// Samples the structural invariants of the system at the given states.
SystemCheckReport check_system(const ShapedMechanicalSystem& sys,
                               std::span<const PlantState> samples);

}  // namespace phia
