#include "phia/finite_difference.hpp"

#include <cmath>

#include <fmt/format.h>

#include "phia/error.hpp"

namespace phia {

namespace {

double checked_eval(const ScalarField& f, const Vector& x) {
  const double v = f(x);
  if (!std::isfinite(v)) {
    throw Error(errc::kEvalFailed,
                fmt::format("non-finite value at x = {}", format_vector(x)));
  }
  return v;
}

double step_for(double xi, double rel_step) {
  return rel_step * std::max(1.0, std::abs(xi));
}

}  // namespace

Vector fd_gradient(const ScalarField& f, const Vector& x, double h) {
  if (!(h > 0.0)) {
    throw Error(errc::kInvalidArgument, "finite-difference step must be > 0");
  }
  Vector g(x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe(i) = x(i) + h;
    const double fp = checked_eval(f, probe);
    probe(i) = x(i) - h;
    const double fm = checked_eval(f, probe);
    probe(i) = x(i);
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

Vector fd_gradient_relative(const ScalarField& f, const Vector& x,
                            double rel_step) {
  Vector g(x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = step_for(x(i), rel_step);
    probe(i) = x(i) + h;
    const double fp = checked_eval(f, probe);
    probe(i) = x(i) - h;
    const double fm = checked_eval(f, probe);
    probe(i) = x(i);
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

Matrix fd_jacobian(const VectorField& f, const Vector& x, double rel_step) {
  Matrix jac;
  Vector probe = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = step_for(x(j), rel_step);
    probe(j) = x(j) + h;
    const Vector fp = f(probe);
    probe(j) = x(j) - h;
    const Vector fm = f(probe);
    probe(j) = x(j);
    if (j == 0) jac.resize(fp.size(), x.size());
    jac.col(j) = (fp - fm) / (2.0 * h);
  }
  if (!jac.allFinite()) {
    throw Error(errc::kEvalFailed,
                fmt::format("non-finite Jacobian at x = {}", format_vector(x)));
  }
  return jac;
}

std::vector<Matrix> fd_matrix_partials(const MatrixField& f, const Vector& x,
                                       double rel_step) {
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(x.size()));
  Vector probe = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = step_for(x(j), rel_step);
    probe(j) = x(j) + h;
    const Matrix fp = f(probe);
    probe(j) = x(j) - h;
    const Matrix fm = f(probe);
    probe(j) = x(j);
    out.push_back((fp - fm) / (2.0 * h));
  }
  return out;
}

Matrix fd_matrix_directional(const MatrixField& f, const Vector& x,
                             const Vector& v, double rel_step) {
  const double vnorm = v.lpNorm<Eigen::Infinity>();
  const Matrix f0 = f(x);
  if (vnorm == 0.0) return Matrix::Zero(f0.rows(), f0.cols());
  const double h = rel_step * std::max(1.0, x.lpNorm<Eigen::Infinity>()) / vnorm;
  return (f(x + h * v) - f(x - h * v)) / (2.0 * h);
}

Matrix fd_hessian_from_gradient(const VectorField& grad, const Vector& x,
                                double rel_step) {
  const Matrix h = fd_jacobian(grad, x, rel_step);
  return 0.5 * (h + h.transpose());
}

}  // namespace phia
