#pragma once

#include <cstdint>
#include <random>

#include "phia/ph_model.hpp"

namespace phia {

// Seeded uniform sampler of in-domain states. Finite domain bounds are
// shrunk by 25% about their midpoint; unbounded coordinates are drawn from
// q* +- 2. Momenta are drawn from [-2, 2], integrator states from [-5, 5].
class StateSampler {
 public:
  StateSampler(const ShapedMechanicalSystem& sys, std::uint64_t seed);

  Vector configuration();
  Vector momentum();
  Vector integrator();
  PlantState plant_state();
  double uniform(double lo, double hi);

 private:
  Vector lower_;
  Vector upper_;
  int dof_;
  int inputs_;
  std::mt19937_64 rng_;
};

}  // namespace phia
