#pragma once

#include <span>

#include "phia/ph_model.hpp"

namespace phia {

// Left annihilator G_perp(q) of the input matrix: s x n with G_perp G = 0.
struct Annihilator {
  MatrixField gperp;
  int rows = 0;
};

enum class AnnihilatorMode { kUserSupplied, kComputed };

// Orthonormal basis of the left null space of g (rows), obtained by
// Gram-Schmidt on the projected canonical basis. The first entry of each row
// whose magnitude exceeds 1e-12 is positive.
Matrix computed_annihilator(const Matrix& g);

// In computed mode `user` is ignored. In user-supplied mode the map is
// validated at `samples` (G_perp G = 0 to 1e-10 relative to the entry scale,
// full row rank). Throws "rank-deficient-G" or "not-an-annihilator".
Annihilator build_annihilator(const MatrixField& g, int dof, int inputs,
                              AnnihilatorMode mode, MatrixField user = {},
                              std::span<const Vector> samples = {});

// T = [ (G^T G)^-1 G^T ; G_perp ]. Throws "singular-normal-matrix".
Matrix build_T(const Matrix& g, const Matrix& gperp);

/// The system re-expressed in momenta p = T(q) pbold, p = col(p1, p2) with
/// p1 in R^m and p2 in R^s:
///
///   qdot  =  S1 dH/dp1 + S2 dH/dp2
///   p1dot = -S1^T dH/dq + (S31 - Kp) dH/dp1 + S32 dH/dp2 + u - d
///   p2dot = -S2^T dH/dq - S32^T dH/dp1 + S34 dH/dp2
///
/// with H(q, p) = 1/2 p^T (T Md T^T)^-1 p + Vd(q).
struct TransformedSystem {
  ShapedMechanicalSystem base;
  Annihilator annihilator;
  // dT^-1/dq_i, optional; central differences are used when absent or when
  // mode is kFiniteDifference.
  MatrixPartials t_inverse_partials;
  DerivativeMode mode = DerivativeMode::kAnalytic;

  int n() const { return base.dof; }
  int m() const { return base.inputs; }
  int s() const { return base.dof - base.inputs; }
};

TransformedSystem make_transformed_system(ShapedMechanicalSystem base,
                                          Annihilator annihilator,
                                          MatrixPartials t_inverse_partials = {});

struct SBlocks {
  Matrix s1;   // n x m
  Matrix s2;   // n x s
  Matrix s31;  // m x m
  Matrix s32;  // m x s
  Matrix s34;  // s x s
};

struct TransformedGradient {
  Vector dq;
  Vector dp1;
  Vector dp2;

  Vector dp() const;
};

// Everything the transformed dynamics needs at one (q, p), computed once.
struct TransformedPoint {
  Vector q;
  Vector p;
  Vector pbold;      // T^-1 p
  Matrix t;
  Matrix t_inv;
  Matrix g;
  Matrix g_left;     // (G^T G)^-1 G^T
  Matrix gperp;
  Matrix m_inv;
  Matrix md;         // shaped mass in original momenta
  Matrix kp;
  Matrix momentum_jacobian;  // d(T^-1 p)/dq at fixed p
  Matrix jp;
  SBlocks blocks;
  TransformedGradient grad;
};

TransformedPoint evaluate_transformed(const TransformedSystem& ts,
                                      const Vector& q, const Vector& p);

Matrix t_matrix(const TransformedSystem& ts, const Vector& q);
Matrix t_inverse(const TransformedSystem& ts, const Vector& q);
Matrix md_small(const TransformedSystem& ts, const Vector& q);

// d(T^-1(q) p)/dq with p held fixed; columns indexed by q.
Matrix momentum_jacobian(const TransformedSystem& ts, const Vector& q,
                         const Vector& p);

Matrix compute_jp(const TransformedSystem& ts, const Vector& q, const Vector& p);
SBlocks compute_s_blocks(const TransformedSystem& ts, const Vector& q,
                         const Vector& p);

double transformed_hamiltonian(const TransformedSystem& ts, const Vector& q,
                               const Vector& p);
TransformedGradient transformed_gradient(const TransformedSystem& ts,
                                         const Vector& q, const Vector& p);

struct TransformedDerivative {
  Vector dq;
  Vector dp1;
  Vector dp2;
  Vector y;  // dH/dp1
};

TransformedDerivative transformed_dynamics(const TransformedSystem& ts,
                                           const Vector& q, const Vector& p,
                                           const Vector& u, const Vector& d);
TransformedDerivative transformed_dynamics(const TransformedPoint& pt,
                                           const Vector& u, const Vector& d);

// Maps the original-coordinate vector field through (q, pbold) -> (q, T pbold),
// using central differences of T for Tdot, and returns the max-norm residual
// against transformed_dynamics at (q, T pbold).
double verify_pushforward(const TransformedSystem& ts, const Vector& q,
                          const Vector& pbold, const Vector& u, const Vector& d);

// || G^T dH/dpbold - dH/dp1 |_{p = T pbold} ||_inf
double output_equivalence(const TransformedSystem& ts, const Vector& q,
                          const Vector& pbold);

}  // namespace phia
