#pragma once

#include "phia/ph_model.hpp"

namespace phia::linear_2dof {

/// Benchmark with constant M = I, constant shaped mass, G = [1; 0] and a
/// quadratic shaped potential. It satisfies the assumptions of the reference
/// PID scheme, so both controllers can be compared on it.
struct Params {
  double q1_star = 0.5;
  double q2_star = -0.25;
  double damping = 1.5;
  void validate() const;
};

ShapedMechanicalSystem system(const Params& p);

}  // namespace phia::linear_2dof
