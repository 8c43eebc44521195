#include "phia/registry.hpp"

#include <fmt/format.h>

#include "phia/cart_pendulum.hpp"
#include "phia/error.hpp"
#include "phia/linear_2dof.hpp"

namespace phia {

namespace {

constexpr const char* kCartPendulum = "cart-pendulum";
constexpr const char* kLinear2Dof = "linear-2dof";

ParamMap merged(const std::string& id, const ParamMap& params) {
  ParamMap out = default_parameters(id);
  for (const auto& [key, value] : params) {
    if (!out.contains(key)) {
      throw Error(errc::kInvalidArgument,
                  fmt::format("unknown parameter '{}' for system '{}'", key, id));
    }
    out[key] = value;
  }
  return out;
}

std::vector<Vector> grid(const Vector& center) {
  std::vector<Vector> out;
  for (double a : {-1.0, -0.3, 0.0, 0.4, 1.1}) {
    for (double b : {-0.7, 0.0, 0.9}) {
      Vector q = center;
      q(0) += a;
      q(1) += b;
      out.push_back(q);
    }
  }
  return out;
}

}  // namespace

std::vector<std::string> known_systems() { return {kCartPendulum, kLinear2Dof}; }

ParamMap default_parameters(const std::string& id) {
  if (id == kCartPendulum) {
    const cart_pendulum::Params p;
    const cart_pendulum::ShapingParams s;
    return {{"m_c", p.m_c},     {"m_p", p.m_p},         {"l", p.l},
            {"g", p.g},         {"k", s.k},             {"m22_0", s.m22_0},
            {"P", s.P},         {"K_p", s.k_p_damp},    {"q2_star", s.q2_star}};
  }
  if (id == kLinear2Dof) {
    const linear_2dof::Params p;
    return {{"q1_star", p.q1_star}, {"q2_star", p.q2_star}, {"damping", p.damping}};
  }
  throw Error(errc::kUnknownSystem, fmt::format("unknown system '{}'", id));
}

RegisteredSystem build_system(const std::string& id, const ParamMap& params) {
  const ParamMap v = merged(id, params);
  if (id == kCartPendulum) {
    cart_pendulum::Params p{v.at("m_c"), v.at("m_p"), v.at("l"), v.at("g")};
    cart_pendulum::ShapingParams s{v.at("k"), v.at("m22_0"), v.at("P"),
                                   v.at("K_p"), v.at("q2_star")};
    const auto sel = cart_pendulum::select_potential_variant(p, s);
    RegisteredSystem out{cart_pendulum::cart_transform(p, s, sel.chosen), {},
                         std::string(cart_pendulum::to_string(sel.chosen))};
    out.guard = BoxDomain::unbounded(2);
    out.guard.lower(0) = -cart_pendulum::kAngleGuard;
    out.guard.upper(0) = cart_pendulum::kAngleGuard;
    out.guard.description = fmt::format("|q1| <= {}", cart_pendulum::kAngleGuard);
    return out;
  }
  linear_2dof::Params p{v.at("q1_star"), v.at("q2_star"), v.at("damping")};
  auto sys = linear_2dof::system(p);
  const auto samples = grid(sys.q_star);
  auto ann = build_annihilator(sys.input_matrix, sys.dof, sys.inputs,
                               AnnihilatorMode::kComputed, {}, samples);
  auto ts = make_transformed_system(std::move(sys), std::move(ann),
                                    [](const Vector&) {
                                      return std::vector<Matrix>{
                                          Matrix::Zero(2, 2), Matrix::Zero(2, 2)};
                                    });
  return {std::move(ts), BoxDomain::unbounded(2), ""};
}

}  // namespace phia
