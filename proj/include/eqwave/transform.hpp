#pragma once

// Finite one-parameter equivalence transformations: the four closed-form
// families generated by φ¹ = m(u); φ¹ = m(u), φ² = p(u); φ¹ = m(u,y);
// φ² = m(u,x) (all other generator data zero), numeric exponentiation of a
// generator set, chain-rule checks and invariance sampling.
//
// Barred quantities reuse the unbarred symbol names: a map is a list of
// expressions in (x, y, t, u, v1, v2, v3, f, g, h, eps) giving the barred
// value of each coordinate.

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "eqwave/eval.hpp"
#include "eqwave/expr.hpp"
#include "eqwave/family.hpp"
#include "eqwave/generators.hpp"

namespace eqwave {

inline const std::string kEps = "eps";

struct PointTransformation {
  std::string family;             // "4.1" .. "4.4", "identity", or a composition
  std::array<Expr, 4> base;       // x̄, ȳ, t̄, ū
  std::array<Expr, 3> jets;       // v̄1, v̄2, v̄3
  std::array<Expr, 3> fluxes;     // f̄, ḡ, h̄
  std::vector<Expr> denominators; // validity: all nonzero
  FreeData generator;             // φ-form data whose flow is this map

  // Same maps at parameter value `e` (substituted for eps).
  PointTransformation at(const Expr& e) const;
  // True when every denominator exceeds `threshold` in magnitude at
  // `point` (which binds eps).
  bool valid(const Binding& point, double threshold = kSingularThreshold) const;
};

// `m` is an expression in u (in (u, y) for 4.3, (u, x) for 4.4); the
// default is the opaque function m(u) / m(u,y) / m(u,x).
PointTransformation make_identity();
PointTransformation make_transform_4_1(std::optional<Expr> m = std::nullopt);
PointTransformation make_transform_4_2(std::optional<Expr> m = std::nullopt, std::optional<Expr> p = std::nullopt);
PointTransformation make_transform_4_3(std::optional<Expr> m = std::nullopt);
PointTransformation make_transform_4_4(std::optional<Expr> m = std::nullopt);
// Dispatch on "4.1" .. "4.4". Throws std::invalid_argument.
PointTransformation make_transform(const std::string& family, std::optional<Expr> m = std::nullopt,
                                   std::optional<Expr> p = std::nullopt);

// Maps exactly as printed, before the chain-rule corrections; for
// comparison only.
PointTransformation printed_transform(const std::string& family);

// Apply `first`, then `second` (each with its own eps).
PointTransformation compose(const PointTransformation& first, const PointTransformation& second);

// Flow of a generator set, state (x, y, t, u, v1, v2, v3, f, g, h).
inline constexpr std::array<const char*, 10> kLieState = {"x", "y", "t", "u", "v1", "v2", "v3", "f", "g", "h"};
using LieState = std::array<double, 10>;

class SingularFlowError : public std::runtime_error {
 public:
  SingularFlowError(const std::string& what, double reached) : std::runtime_error(what), reached_(reached) {}
  double reached() const { return reached_; }

 private:
  double reached_;
};

struct LieSystem {
  std::array<Expr, 10> rhs;  // ξ¹, ξ², ξ³, η, ζ₁, ζ₂, ζ₃, μ¹, μ², H
  Binding functions;

  static LieSystem from(const GeneratorSet& gs, Binding functions = {});
};

// Classical RK4 with fixed step eps/steps.
LieState integrate_lie(const LieSystem& sys, const LieState& start, double eps, int steps = 1000);

// Closed-form evaluation at a state.
LieState apply(const PointTransformation& pt, const LieState& s, double eps, const Binding& functions = {});

// Jacobian A[j][k] = D_k x̄^j of the base map (total derivatives with
// frozen jets) and its determinant.
std::array<std::array<Expr, 3>, 3> base_jacobian(const PointTransformation& pt);
Expr jacobian_determinant(const PointTransformation& pt);

// Jet maps recomputed from the base map by the chain rule (Cramer's rule on
// Aᵀ v̄ = Dū), and stored - recomputed.
struct JetMapCheck {
  std::array<Expr, 3> recomputed;
  std::array<Expr, 3> residual;
  bool ok() const { return residual[0].is_zero() && residual[1].is_zero() && residual[2].is_zero(); }
};
JetMapCheck induced_jet_map(const PointTransformation& pt);

// Fluxes from Σ̄ⁱ = A^i_j Σ^j / J, Σ̄ = Σ / J (Σ = f, g, -v3; h), and
// stored - recomputed, including the Σ̄³ = -v̄3 consistency row.
struct FluxMapCheck {
  std::array<Expr, 4> recomputed;  // f̄, ḡ, Σ̄³, h̄
  std::array<Expr, 4> residual;
  bool ok() const;
};
FluxMapCheck induced_flux_map(const PointTransformation& pt);

// The member carried by the map, written in the barred variables (which
// reuse the names x, y, t, u, v1, v2, v3). Uses the inverse map eps -> -eps.
FamilyMember transform_member(const FamilyMember& m, const PointTransformation& pt);

// f_x + g_y + h - u_tt as an expression in first and second jets.
Expr equation_residual(const FamilyMember& m);

struct InvarianceReport {
  double max_deviation = 0;
  int samples = 0;
  int singular_rejections = 0;
};

struct SamplingOptions {
  int samples = 100;
  std::uint64_t seed = 1;
  std::optional<double> eps;  // sampled in [0.01, 0.3] when unset
  double min_denominator = 0.05;
  Binding functions;
};

// At random points checks R̄(barred point) = R(point) / J, where R is the
// equation residual with second jets.
InvarianceReport verify_invariance(const FamilyMember& m, const PointTransformation& pt, const SamplingOptions& opt);

}  // namespace eqwave
