#include "phia/sampling.hpp"

#include <cmath>

namespace phia {

namespace {
constexpr double kShrink = 0.75;
constexpr double kUnboundedHalfWidth = 2.0;
constexpr double kMomentumHalfWidth = 2.0;
constexpr double kIntegratorHalfWidth = 5.0;
}  // namespace

StateSampler::StateSampler(const ShapedMechanicalSystem& sys, std::uint64_t seed)
    : lower_(sys.dof), upper_(sys.dof), dof_(sys.dof), inputs_(sys.inputs), rng_(seed) {
  for (int i = 0; i < dof_; ++i) {
    const double lo = sys.domain.lower(i);
    const double hi = sys.domain.upper(i);
    if (std::isfinite(lo) && std::isfinite(hi)) {
      const double mid = 0.5 * (lo + hi);
      const double half = 0.5 * kShrink * (hi - lo);
      lower_(i) = mid - half;
      upper_(i) = mid + half;
    } else {
      lower_(i) = sys.q_star(i) - kUnboundedHalfWidth;
      upper_(i) = sys.q_star(i) + kUnboundedHalfWidth;
    }
  }
}

double StateSampler::uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng_);
}

Vector StateSampler::configuration() {
  Vector q(dof_);
  for (int i = 0; i < dof_; ++i) q(i) = uniform(lower_(i), upper_(i));
  return q;
}

Vector StateSampler::momentum() {
  Vector p(dof_);
  for (int i = 0; i < dof_; ++i) p(i) = uniform(-kMomentumHalfWidth, kMomentumHalfWidth);
  return p;
}

Vector StateSampler::integrator() {
  Vector z(inputs_);
  for (int i = 0; i < inputs_; ++i) {
    z(i) = uniform(-kIntegratorHalfWidth, kIntegratorHalfWidth);
  }
  return z;
}

PlantState StateSampler::plant_state() {
  Vector q = configuration();
  return {q, momentum()};
}

}  // namespace phia
