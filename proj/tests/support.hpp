#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include <gtest/gtest.h>

#include "phia/cart_pendulum.hpp"
#include "phia/error.hpp"
#include "phia/ia_controller.hpp"
#include "phia/registry.hpp"
#include "phia/sampling.hpp"

namespace phia::testing {

inline double inf_norm(const Matrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

inline const RegisteredSystem& cart() {
  static const RegisteredSystem sys = build_system("cart-pendulum", {});
  return sys;
}

inline const RegisteredSystem& linear() {
  static const RegisteredSystem sys = build_system("linear-2dof", {});
  return sys;
}

inline IaGains fig1_gains() { return IaGains::scalar(0.05, 0.0, 10.0, 1.0); }

inline ClosedLoopState random_closed_loop(StateSampler& s, int n, int m) {
  const Vector q = s.configuration();
  const Vector p = s.momentum();
  return {q, p.head(m), p.tail(n - m), s.integrator()};
}

// Runs fn and checks that it throws phia::Error with the given code.
inline void expect_error_code(const std::function<void()>& fn, const std::string& code) {
  try {
    fn();
    ADD_FAILURE() << "expected error " << code;
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

}  // namespace phia::testing
