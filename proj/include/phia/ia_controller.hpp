#pragma once

#include <span>

#include "phia/momentum_transform.hpp"

namespace phia {

struct IaGainsTestAccess;

/// Constant gains of the integral-action law: integral gain K_I, controller
/// interconnection J_c1 and the two damping matrices R_c1, R_c2 (all m x m).
class IaGains {
 public:
  // Throws "gains-invalid" unless K_I, R_c1, R_c2 are symmetric positive
  // definite and J_c1 is skew-symmetric; "gains-degenerate" if J_c1 - R_c1 is
  // singular.
  IaGains(Matrix k_i, Matrix j_c1, Matrix r_c1, Matrix r_c2);

  // Scalar convenience for single-input systems.
  static IaGains scalar(double k_i, double j_c1, double r_c1, double r_c2);

  // J_c1 = S31, R_c1 = Kp. Requires S31 and Kp to be constant over the
  // sampled states (max deviation 1e-9), else "gains-invalid".
  static IaGains simplified_preset(const TransformedSystem& ts, Matrix k_i,
                                   Matrix r_c2,
                                   std::span<const PlantState> samples);

  const Matrix& k_i() const { return k_i_; }
  const Matrix& j_c1() const { return j_c1_; }
  const Matrix& r_c1() const { return r_c1_; }
  const Matrix& r_c2() const { return r_c2_; }
  int inputs() const { return static_cast<int>(k_i_.rows()); }

 private:
  IaGains() = default;
  friend struct IaGainsTestAccess;

  Matrix k_i_;
  Matrix j_c1_;
  Matrix r_c1_;
  Matrix r_c2_;
};

// w = col(q, p1, p2, zeta)
struct ClosedLoopState {
  Vector q;
  Vector p1;
  Vector p2;
  Vector zeta;

  Vector p() const;
  Vector stacked() const;
  static ClosedLoopState from_stacked(const Vector& w, int n, int m);
  static ClosedLoopState from_plant(const TransformedSystem& ts,
                                    const PlantState& s, const Vector& zeta);
};

Vector ia_control(const TransformedSystem& ts, const IaGains& g,
                  const ClosedLoopState& x);

Vector ia_integrator_dynamics(const TransformedSystem& ts, const IaGains& g,
                              const ClosedLoopState& x);

// The (2n + m) x (2n + m) interconnection/damping matrix of the closed loop,
// blocks ordered (q, p1, p2, zeta).
Matrix closed_loop_F(const TransformedSystem& ts, const IaGains& g,
                     const ClosedLoopState& x);

// Gradient of H_cl = H_d + 1/2 (p1 - zeta)^T K_I (p1 - zeta), stacked like w.
Vector closed_loop_gradient(const TransformedSystem& ts, const IaGains& g,
                            const ClosedLoopState& x);

// F(x) grad H_cl - col(0, d, 0, 0)
ClosedLoopState closed_loop_dynamics(const TransformedSystem& ts,
                                     const IaGains& g,
                                     const ClosedLoopState& x, const Vector& d);

// The same vector field written as transformed plant dynamics under
// u = ia_control(x) stacked with ia_integrator_dynamics.
ClosedLoopState plant_closed_loop_dynamics(const TransformedSystem& ts,
                                           const IaGains& g,
                                           const ClosedLoopState& x,
                                           const Vector& d);

// (q*, 0, -K_I^-1 (J_c1 - R_c1)^-1 d)
ClosedLoopState equilibrium(const TransformedSystem& ts, const IaGains& g,
                            const Vector& d);

// K_I^-1 (J_c1 - R_c1)^-1 d
Vector lyapunov_offset(const IaGains& g, const Vector& d);

double lyapunov_w(const TransformedSystem& ts, const IaGains& g,
                  const ClosedLoopState& x, const Vector& d);

Vector lyapunov_gradient(const TransformedSystem& ts, const IaGains& g,
                         const ClosedLoopState& x, const Vector& d);

// (grad W)^T F (grad W)
double lyapunov_rate(const TransformedSystem& ts, const IaGains& g,
                     const ClosedLoopState& x, const Vector& d);

// col(dH_d/dp1, K_I (p1 - zeta) - (J_c1 - R_c1)^-1 d)
Vector detectability_output(const TransformedSystem& ts, const IaGains& g,
                            const ClosedLoopState& x, const Vector& d);

// The input to apply to the plant in original coordinates. The momentum
// change leaves the input channel untouched, so this is ia_control.
Vector reconstruct_plant_input(const TransformedSystem& ts, const IaGains& g,
                               const ClosedLoopState& x);

struct PlantClosedLoopDerivative {
  Vector dq;
  Vector dpbold;
  Vector dzeta;
};

// The closed loop simulated in the original (q, pbold) coordinates.
PlantClosedLoopDerivative ia_plant_dynamics(const TransformedSystem& ts,
                                            const IaGains& g,
                                            const PlantState& s,
                                            const Vector& zeta, const Vector& d);

}  // namespace phia
