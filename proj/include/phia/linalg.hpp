#pragma once

#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace phia {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Condition-number ceiling for every inverse taken in the library.
inline constexpr double kMaxConditionNumber = 1e12;

// Inverse of a square matrix via SVD; throws Error(code) naming `what` when
// the matrix is singular or its 2-norm condition number exceeds the ceiling.
Matrix checked_inverse(const Matrix& a, std::string_view code,
                       std::string_view what);

// Solves a x = b with the same guard as checked_inverse.
Vector checked_solve(const Matrix& a, const Vector& b, std::string_view code,
                     std::string_view what);

double condition_number(const Matrix& a);

double min_symmetric_eigenvalue(const Matrix& a);
double max_symmetric_eigenvalue(const Matrix& a);

// Max-abs deviation from symmetry / skew-symmetry.
double asymmetry(const Matrix& a);
double skewness_defect(const Matrix& a);

int numerical_rank(const Matrix& a, double rel_tol = 1e-10);

bool all_finite(const Matrix& a);

double max_abs(const Matrix& a);

std::string format_vector(const Vector& v);

}  // namespace phia
