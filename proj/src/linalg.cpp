#include "phia/linalg.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "phia/error.hpp"

namespace phia {

namespace {

void guard_condition(const Eigen::JacobiSVD<Matrix>& svd, std::string_view code,
                     std::string_view what) {
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  if (!(smin > 0.0) || !std::isfinite(smax) || smax / smin > kMaxConditionNumber) {
    throw Error(std::string(code),
                fmt::format("{} is singular or ill-conditioned (cond = {:.3e})",
                            what, smin > 0.0 ? smax / smin
                                             : std::numeric_limits<double>::infinity()));
  }
}

}  // namespace

Matrix checked_inverse(const Matrix& a, std::string_view code,
                       std::string_view what) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw Error(errc::kInvalidArgument,
                fmt::format("{} must be square and non-empty", what));
  }
  if (a.rows() == 1) {
    const double v = a(0, 0);
    if (!(std::abs(v) > 0.0) || !std::isfinite(v)) {
      throw Error(std::string(code), fmt::format("{} is singular", what));
    }
    return Matrix::Constant(1, 1, 1.0 / v);
  }
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  guard_condition(svd, code, what);
  return svd.matrixV() * svd.singularValues().cwiseInverse().asDiagonal() *
         svd.matrixU().transpose();
}

Vector checked_solve(const Matrix& a, const Vector& b, std::string_view code,
                     std::string_view what) {
  return checked_inverse(a, code, what) * b;
}

double condition_number(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  return smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
}

double min_symmetric_eigenvalue(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.transpose()),
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_symmetric_eigenvalue(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.transpose()),
                                           Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double asymmetry(const Matrix& a) { return max_abs(a - a.transpose()); }

double skewness_defect(const Matrix& a) { return max_abs(a + a.transpose()); }

int numerical_rank(const Matrix& a, double rel_tol) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(a);
  const auto& sv = svd.singularValues();
  const double cutoff = rel_tol * std::max(sv(0), 1e-300);
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) ++rank;
  }
  return rank;
}

bool all_finite(const Matrix& a) { return a.allFinite(); }

double max_abs(const Matrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

std::string format_vector(const Vector& v) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) out += ", ";
    out += fmt::format("{:.6g}", v(i));
  }
  return out + "]";
}

}  // namespace phia
