#include "phia/momentum_transform.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "phia/error.hpp"

namespace phia {

namespace {

Matrix normal_left_inverse(const Matrix& g) {
  return checked_inverse(g.transpose() * g, errc::kSingularNormalMatrix,
                         "G^T G") *
         g.transpose();
}

Matrix stack_rows(const Matrix& top, const Matrix& bottom) {
  Matrix out(top.rows() + bottom.rows(), top.cols());
  out << top, bottom;
  return out;
}

}  // namespace

Matrix computed_annihilator(const Matrix& g) {
  const auto n = g.rows();
  const auto m = g.cols();
  if (numerical_rank(g) != m) {
    throw Error(errc::kRankDeficientG,
                fmt::format("G ({}x{}) does not have full column rank", n, m));
  }
  const Matrix proj =
      Matrix::Identity(n, n) - g * normal_left_inverse(g);
  const auto s = n - m;
  Matrix basis(s, n);
  Eigen::Index found = 0;
  for (Eigen::Index i = 0; i < n && found < s; ++i) {
    Vector v = proj.col(i);
    for (Eigen::Index k = 0; k < found; ++k) {
      v -= basis.row(k).dot(v) * basis.row(k).transpose();
    }
    const double norm = v.norm();
    if (norm < 1e-8) continue;
    v /= norm;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::abs(v(j)) > 1e-12) {
        if (v(j) < 0.0) v = -v;
        break;
      }
    }
    basis.row(found++) = v.transpose();
  }
  if (found != s) {
    throw Error(errc::kRankDeficientG, "left null space basis incomplete");
  }
  return basis;
}

Annihilator build_annihilator(const MatrixField& g, int dof, int inputs,
                              AnnihilatorMode mode, MatrixField user,
                              std::span<const Vector> samples) {
  const int s = dof - inputs;
  if (mode == AnnihilatorMode::kComputed) {
    for (const auto& q : samples) computed_annihilator(g(q));
    return {[g](const Vector& q) { return computed_annihilator(g(q)); }, s};
  }
  if (!user) {
    throw Error(errc::kInvalidArgument,
                "user-supplied annihilator mode needs a map");
  }
  for (const auto& q : samples) {
    const Matrix gq = g(q);
    if (numerical_rank(gq) != inputs) {
      throw Error(errc::kRankDeficientG,
                  fmt::format("G(q) rank-deficient at q = {}", format_vector(q)));
    }
    const Matrix gp = user(q);
    const double scale = std::max(1.0, max_abs(gp) * max_abs(gq));
    if (gp.rows() != s || gp.cols() != dof ||
        max_abs(gp * gq) > 1e-10 * scale || numerical_rank(gp) != s) {
      throw Error(errc::kNotAnAnnihilator,
                  fmt::format("G_perp fails G_perp G = 0 / rank {} at q = {}",
                              s, format_vector(q)));
    }
  }
  return {std::move(user), s};
}

Matrix build_T(const Matrix& g, const Matrix& gperp) {
  return stack_rows(normal_left_inverse(g), gperp);
}

TransformedSystem make_transformed_system(ShapedMechanicalSystem base,
                                          Annihilator annihilator,
                                          MatrixPartials t_inverse_partials) {
  if (annihilator.rows != base.dof - base.inputs) {
    throw Error(errc::kInvalidArgument, "annihilator row count must be n - m");
  }
  TransformedSystem ts;
  ts.base = std::move(base);
  ts.annihilator = std::move(annihilator);
  ts.t_inverse_partials = std::move(t_inverse_partials);
  return ts;
}

Vector TransformedGradient::dp() const {
  Vector out(dp1.size() + dp2.size());
  out << dp1, dp2;
  return out;
}

Matrix t_matrix(const TransformedSystem& ts, const Vector& q) {
  return build_T(ts.base.input_matrix(q), ts.annihilator.gperp(q));
}

Matrix t_inverse(const TransformedSystem& ts, const Vector& q) {
  return checked_inverse(t_matrix(ts, q), errc::kSingularMatrix,
                         fmt::format("T(q) at q = {}", format_vector(q)));
}

Matrix md_small(const TransformedSystem& ts, const Vector& q) {
  const Matrix t = t_matrix(ts, q);
  return t * ts.base.shaped_mass(q) * t.transpose();
}

Matrix momentum_jacobian(const TransformedSystem& ts, const Vector& q,
                         const Vector& p) {
  if (ts.mode == DerivativeMode::kAnalytic && ts.t_inverse_partials) {
    const auto partials = ts.t_inverse_partials(q);
    Matrix jac(ts.n(), ts.n());
    for (int i = 0; i < ts.n(); ++i) {
      jac.col(i) = partials[static_cast<std::size_t>(i)] * p;
    }
    return jac;
  }
  return fd_jacobian([&](const Vector& qq) { return Vector(t_inverse(ts, qq) * p); },
                     q);
}

TransformedPoint evaluate_transformed(const TransformedSystem& ts,
                                      const Vector& q, const Vector& p) {
  const auto& sys = ts.base;
  require_in_domain(sys, q);
  if (p.size() != ts.n()) {
    throw Error(errc::kInvalidArgument,
                fmt::format("momentum has {} entries, expected {}", p.size(),
                            ts.n()));
  }
  TransformedPoint pt;
  pt.q = q;
  pt.p = p;
  pt.g = sys.input_matrix(q);
  pt.g_left = normal_left_inverse(pt.g);
  pt.gperp = ts.annihilator.gperp(q);
  pt.t = stack_rows(pt.g_left, pt.gperp);
  pt.t_inv = checked_inverse(pt.t, errc::kSingularMatrix,
                             fmt::format("T(q) at q = {}", format_vector(q)));
  pt.pbold = pt.t_inv * p;
  pt.m_inv = mass_inverse(sys, q);
  pt.md = sys.shaped_mass(q);
  pt.kp = sys.damping_gain(q);
  pt.momentum_jacobian = momentum_jacobian(ts, q, p);

  const Matrix& jac = pt.momentum_jacobian;
  const Matrix md_minv = pt.md * pt.m_inv;
  pt.jp = md_minv * jac.transpose() - jac * md_minv.transpose() +
          sys.j2(q, pt.pbold);

  const Matrix minv_md = pt.m_inv * pt.md;
  pt.blocks.s1 = minv_md * pt.g_left.transpose();
  pt.blocks.s2 = minv_md * pt.gperp.transpose();
  pt.blocks.s31 = pt.g_left * pt.jp * pt.g_left.transpose();
  pt.blocks.s32 = pt.g_left * pt.jp * pt.gperp.transpose();
  pt.blocks.s34 = pt.gperp * pt.jp * pt.gperp.transpose();

  // Chain rule through pbold = T^-1(q) p.
  const auto base_grad = grad_hamiltonian(sys, {q, pt.pbold}, ts.mode);
  const Vector dq = base_grad.dq + jac.transpose() * base_grad.dp;
  const Matrix md_small_inv =
      checked_inverse(pt.t * pt.md * pt.t.transpose(), errc::kMassMatrixSingular,
                      fmt::format("T Md T^T at q = {}", format_vector(q)));
  const Vector dp = md_small_inv * p;
  pt.grad = {dq, dp.head(ts.m()), dp.tail(ts.s())};
  return pt;
}

Matrix compute_jp(const TransformedSystem& ts, const Vector& q, const Vector& p) {
  return evaluate_transformed(ts, q, p).jp;
}

SBlocks compute_s_blocks(const TransformedSystem& ts, const Vector& q,
                         const Vector& p) {
  return evaluate_transformed(ts, q, p).blocks;
}

double transformed_hamiltonian(const TransformedSystem& ts, const Vector& q,
                               const Vector& p) {
  require_in_domain(ts.base, q);
  const Matrix mds = md_small(ts, q);
  return 0.5 * p.dot(checked_solve(mds, p, errc::kMassMatrixSingular,
                                   "T Md T^T")) +
         ts.base.shaped_potential(q);
}

TransformedGradient transformed_gradient(const TransformedSystem& ts,
                                         const Vector& q, const Vector& p) {
  return evaluate_transformed(ts, q, p).grad;
}

TransformedDerivative transformed_dynamics(const TransformedPoint& pt,
                                           const Vector& u, const Vector& d) {
  const auto& b = pt.blocks;
  const auto& g = pt.grad;
  TransformedDerivative out;
  out.dq = b.s1 * g.dp1 + b.s2 * g.dp2;
  out.dp1 = -b.s1.transpose() * g.dq + (b.s31 - pt.kp) * g.dp1 +
            b.s32 * g.dp2 + (u - d);
  out.dp2 = -b.s2.transpose() * g.dq - b.s32.transpose() * g.dp1 +
            b.s34 * g.dp2;
  out.y = g.dp1;
  return out;
}

TransformedDerivative transformed_dynamics(const TransformedSystem& ts,
                                           const Vector& q, const Vector& p,
                                           const Vector& u, const Vector& d) {
  return transformed_dynamics(evaluate_transformed(ts, q, p), u, d);
}

double verify_pushforward(const TransformedSystem& ts, const Vector& q,
                          const Vector& pbold, const Vector& u,
                          const Vector& d) {
  const auto orig = open_loop_dynamics(ts.base, {q, pbold}, u, d);
  const auto t_partials = fd_matrix_partials(
      [&](const Vector& qq) { return t_matrix(ts, qq); }, q);
  Matrix t_dot = Matrix::Zero(ts.n(), ts.n());
  for (int i = 0; i < ts.n(); ++i) {
    t_dot += orig.dq(i) * t_partials[static_cast<std::size_t>(i)];
  }
  const Matrix t = t_matrix(ts, q);
  const Vector p_dot = t_dot * pbold + t * orig.dp;

  const auto tr = transformed_dynamics(ts, q, t * pbold, u, d);
  Vector tr_p_dot(ts.n());
  tr_p_dot << tr.dp1, tr.dp2;
  return std::max((orig.dq - tr.dq).lpNorm<Eigen::Infinity>(),
                  (p_dot - tr_p_dot).lpNorm<Eigen::Infinity>());
}

double output_equivalence(const TransformedSystem& ts, const Vector& q,
                          const Vector& pbold) {
  const Vector y_orig = passive_output(ts.base, {q, pbold});
  const Matrix t = t_matrix(ts, q);
  const Vector grad_p = checked_solve(t * ts.base.shaped_mass(q) * t.transpose(),
                                      t * pbold, errc::kMassMatrixSingular,
                                      "T Md T^T");
  return (y_orig - grad_p.head(ts.m())).lpNorm<Eigen::Infinity>();
}

}  // namespace phia
