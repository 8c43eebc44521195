#pragma once

#include <string_view>
#include <vector>

#include "phia/ia_controller.hpp"
#include "phia/momentum_transform.hpp"

namespace phia {

struct Scenario;

namespace cart_pendulum {

struct Params {
  double m_c = 1.0;  // cart mass
  double m_p = 1.0;  // pendulum mass
  double l = 1.0;    // pendulum length
  double g = 9.8;

  double a() const { return g / l; }
  double b() const { return 1.0 / l; }
  void validate() const;
};

struct ShapingParams {
  double k = 1.0;
  double m22_0 = 1.0;
  double P = 1.0;
  double k_p_damp = 10.0;
  double q2_star = 0.0;
  void validate() const;
};

// Which last term of the shaped-potential bracket is used.
enum class PotentialVariant { kTanSquared, kTan };

std::string_view to_string(PotentialVariant v);

// m_c + m_p sin^2 q1
double sigma(const Params& p, double q1);

/// Cart-pendulum after partial feedback linearization: M = I,
/// V(q) = a cos q1, input vector Gbold = [-b cos q1; 1], and the disturbance
/// entering as Gbold d / sigma(q1). q1 is the pendulum angle, q2 the cart
/// position; the model is valid for |q1| < pi/2.
struct OpenLoopPlant {
  Params params;

  double potential(const Vector& q) const;
  Vector potential_grad(const Vector& q) const;
  Vector input_vector(const Vector& q) const;
  double hamiltonian(const Vector& q, const Vector& pbold) const;
  PlantDerivative dynamics(const Vector& q, const Vector& pbold, double u,
                           double d) const;
  BoxDomain domain() const;
};

OpenLoopPlant pendulum_open_loop(const Params& params);

Matrix shaped_mass(const Params& p, const ShapingParams& s, const Vector& q);
double shaped_potential(const Params& p, const ShapingParams& s,
                        PotentialVariant v, const Vector& q);
Vector shaped_potential_grad(const Params& p, const ShapingParams& s,
                             PotentialVariant v, const Vector& q);

struct PotentialCheck {
  PotentialVariant variant = PotentialVariant::kTanSquared;
  double grad_norm_at_target = 0.0;    // FD, inf-norm
  double hessian_min_eig = 0.0;        // FD Hessian at q*
  double matching_residual = 0.0;      // max |Gbold_perp (grad V - Md grad Vd)|
  bool passed = false;
};

struct VariantSelection {
  PotentialVariant chosen = PotentialVariant::kTan;
  std::vector<PotentialCheck> attempts;
};

// Tries the squared-tangent bracket first, then the tangent bracket. A
// variant passes when Vd has a stationary point with PD Hessian at q* and
// satisfies the potential matching equation on a fixed grid of q.
// Throws "shaping-invalid" when neither passes.
VariantSelection select_potential_variant(const Params& p,
                                          const ShapingParams& s);

PotentialCheck check_potential_variant(const Params& p, const ShapingParams& s,
                                       PotentialVariant v);

// The closed loop of the energy-shaping law in the disturbed pH form with
// G = Gbold / sigma. Uses the variant chosen by select_potential_variant.
ShapedMechanicalSystem shaped_system(const Params& p, const ShapingParams& s);
ShapedMechanicalSystem shaped_system(const Params& p, const ShapingParams& s,
                                     PotentialVariant v);

// Energy-shaping input for the feedback-linearized plant, plus u_prime.
// `shaped` must come from shaped_system() with the same parameters.
double energy_shaping_control(const Params& p,
                              const ShapedMechanicalSystem& shaped,
                              const Vector& q, const Vector& pbold,
                              double u_prime);

// Closed-form entries of the momentum change used for this plant.
Matrix printed_annihilator(const Params& p, const Vector& q);
Matrix printed_t(const Params& p, const Vector& q);
Matrix printed_t_inverse(const Params& p, const Vector& q);
std::vector<Matrix> printed_t_inverse_partials(const Params& p, const Vector& q);
Matrix printed_s1(const Params& p, const ShapingParams& s, const Vector& q);
// S32 from the bracket J_p. Carries the sigma^2 factor that the generic
// blocks produce.
Matrix printed_s32(const Params& p, const Vector& q, const Matrix& jp);

TransformedSystem cart_transform(const Params& p, const ShapingParams& s);
TransformedSystem cart_transform(const Params& p, const ShapingParams& s,
                                 PotentialVariant v);

// Integral-action law with J_c1 = 0 and R_c1 = K_p, valid because S31 = 0
// and K_p is constant on this plant:
//   u = -R_c2 dH/dp1 - K_p K_I (p1 - zeta)
double simplified_ia_control(const TransformedSystem& ts, double k_i,
                             double r_c2, const ClosedLoopState& x);

// Hard limit on |q1| during simulation.
inline constexpr double kAngleGuard = 1.45;

Scenario fig1_scenario();

}  // namespace cart_pendulum
}  // namespace phia
