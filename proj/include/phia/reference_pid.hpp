#pragma once

#include <span>

#include "phia/ph_model.hpp"

namespace phia {

/// Gains of the earlier nonlinear PID scheme. K_P (k_p_outer) is kept
/// distinct from the plant damping Kp; K2 = (G^T Md^-1 G)^-1 is derived.
class PidGains {
 public:
  // Throws "gains-invalid" unless all four are symmetric positive definite
  // and equally sized.
  PidGains(Matrix k1, Matrix k_p_outer, Matrix k_i, Matrix k3);

  const Matrix& k1() const { return k1_; }
  const Matrix& k_p_outer() const { return k_p_outer_; }
  const Matrix& k_i() const { return k_i_; }
  const Matrix& k3() const { return k3_; }
  int inputs() const { return static_cast<int>(k1_.rows()); }

 private:
  Matrix k1_;
  Matrix k_p_outer_;
  Matrix k_i_;
  Matrix k3_;
};

struct AssumptionReport {
  bool constant_input_and_shaped_mass = false;  // P.1
  double constant_violation = 0.0;
  bool kinetic_gradient_annihilated = false;    // P.2
  double kinetic_violation = 0.0;
};

// P.1 is measured as the largest entrywise change of G and Md across the
// samples; P.2 as the largest |G_perp grad_q(p^T M^-1 p)|.
AssumptionReport check_assumptions(const ShapedMechanicalSystem& sys,
                                   std::span<const PlantState> samples);

struct PidOutput {
  Vector u;
  Vector zeta_dot;
};

// Throws "assumption-violated" when G or Md vary between q, q* and nearby
// probe points.
PidOutput pid_control(const ShapedMechanicalSystem& sys, const PidGains& g,
                      const Vector& q, const Vector& pbold, const Vector& zeta);

// Same law without the P.1 probe; callers must have run check_assumptions.
PidOutput pid_control_unchecked(const ShapedMechanicalSystem& sys,
                                const PidGains& g, const Vector& q,
                                const Vector& pbold, const Vector& zeta);

Matrix pid_k2(const ShapedMechanicalSystem& sys, const Vector& q);

// Equilibrium value of the integrator state for a constant disturbance d
// entering as G (u - d): -K_I^-1 (Kp + K3)^-1 d.
Vector pid_alpha(const ShapedMechanicalSystem& sys, const PidGains& g,
                 const Vector& d);

struct Z2Coordinates {
  Vector z2;
  double h_z = 0.0;
};

Z2Coordinates z2_coordinates(const ShapedMechanicalSystem& sys,
                             const PidGains& g, const Vector& q,
                             const Vector& pbold, const Vector& zeta,
                             const Vector& d);

}  // namespace phia
