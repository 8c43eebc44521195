#pragma once

#include <functional>

#include "phia/linalg.hpp"

namespace phia {

using ScalarField = std::function<double(const Vector&)>;
using VectorField = std::function<Vector(const Vector&)>;
using MatrixField = std::function<Matrix(const Vector&)>;

// Default relative step for every central difference in the library.
inline constexpr double kRelativeFdStep = 1e-6;

// Central-difference gradient with absolute step h. Throws "eval-failed" if
// f returns a non-finite value at any probe point.
Vector fd_gradient(const ScalarField& f, const Vector& x, double h);

// Same, with per-coordinate step rel_step * max(1, |x_i|).
Vector fd_gradient_relative(const ScalarField& f, const Vector& x,
                            double rel_step = kRelativeFdStep);

// Columns are the partials d f / d x_j (the ordinary Jacobian).
Matrix fd_jacobian(const VectorField& f, const Vector& x,
                   double rel_step = kRelativeFdStep);

// Partial derivatives of a matrix-valued map, one matrix per coordinate.
std::vector<Matrix> fd_matrix_partials(const MatrixField& f, const Vector& x,
                                       double rel_step = kRelativeFdStep);

// Directional derivative of a matrix-valued map along v.
Matrix fd_matrix_directional(const MatrixField& f, const Vector& x,
                             const Vector& v, double rel_step = kRelativeFdStep);

// Symmetrized Hessian of a scalar field from central differences of its
// gradient.
Matrix fd_hessian_from_gradient(const VectorField& grad, const Vector& x,
                                double rel_step = kRelativeFdStep);

}  // namespace phia
