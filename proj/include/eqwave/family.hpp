#pragma once

// Members of the wave family u_tt = f_x + g_y + h with f, g, h functions of
// (x, y, t, u, u_x, u_y, u_t).

#include <array>
#include <functional>
#include <set>
#include <stdexcept>
#include <string>

#include "eqwave/eval.hpp"
#include "eqwave/expr.hpp"

namespace eqwave {

class MemberError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct FamilyMember {
  Expr f, g, h;

  // Constant f or g. The equation class assumes both nonconstant; such
  // members are kept as fixtures but flagged.
  bool degenerate() const;
};

// Checks that f, g, h only involve first-order jet coordinates, eps and
// opaque functions. Throws MemberError otherwise.
FamilyMember make_member(Expr f, Expr g, Expr h);

// Text record with lines f=..., g=..., h=... (missing field means 0).
// Blank lines and lines starting with '#' are skipped.
FamilyMember parse_member(std::string_view text);
std::string format_member(const FamilyMember& m);

// The seven coordinates a flux may depend on, in this order.
inline constexpr std::array<std::string_view, 7> kMemberCoordinates = {"x", "y", "t", "u", "v1", "v2", "v3"};

struct DependencySignature {
  std::array<std::set<std::string>, 3> deps;  // for f, g, h
  bool f_is_zero = false;
  bool g_is_zero = false;
  bool h_is_zero = false;

  bool depends(int slot, std::string_view coord) const { return deps[slot].count(std::string(coord)) > 0; }
  friend bool operator==(const DependencySignature&, const DependencySignature&) = default;
};

DependencySignature signature(const FamilyMember& m);
std::string format_signature(const DependencySignature& s);

// Divergence form Σ¹_x + Σ²_y + Σ³_t + Σ = 0 of the equation.
struct BalanceForm {
  Expr sigma1, sigma2, sigma3, sigma;
};

BalanceForm balance_form(const FamilyMember& m);

// True iff f, g, h are jointly affine in (u, v1, v2, v3).
bool is_linear(const FamilyMember& m);

using ScalarField = std::function<double(double x, double y, double t)>;

// f_x + g_y + h - u_tt at `point`, by central differences with step
// h_step: the jets entering f and g are themselves differenced, so the
// result is second-order accurate in h_step. `functions` binds any opaque
// functions (and eps) appearing in the member.
double residual(const FamilyMember& m, const ScalarField& u, std::array<double, 3> point, double h_step,
                const Binding& functions = {});

}  // namespace eqwave
