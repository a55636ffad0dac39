#pragma once

// Infinitesimal generators of the equivalence group of the wave family,
// written through the balance form Σ¹_x + Σ²_y + Σ³_t + Σ = 0 with
// Σ¹ = f, Σ² = g, Σ³ = -u_t, Σ = h.
//
// Conventions: ξ^i = -φ^i, ζ_i = D_i η + (D_i φ^j) v_j and
//   μ^i = (w + φ^j_u v_j) Σ^i - (D_j φ^i) Σ^j + α^{ij} v_j + β^i.
// The f, g, h slots are the symbols f, g, h.

#include <array>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "eqwave/expr.hpp"

namespace eqwave {

class FreeDataError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct FreeData {
  std::array<Expr, 3> phi;
  Expr eta;
  Expr w;
  // Off-diagonal entries antisymmetric; the diagonal holds three
  // independent functions.
  std::array<std::array<Expr, 3>, 3> alpha;
  std::array<Expr, 3> beta;
  Expr lambda;  // of (x, y)
  Expr gamma;   // of (x, y, t)

  // Every slot an opaque function of its full argument list
  // (phi1(x,y,t,u), alpha12(x,y,t,u), lambda(x,y), ...).
  static FreeData generic();
  static FreeData zero() { return FreeData{}; }

  // Sets alpha[i][j] = a and alpha[j][i] = -a.
  void set_alpha(int i, int j, const Expr& a);
};

struct GeneratorSet {
  FreeData data;
  std::array<Expr, 3> xi;
  Expr eta;
  std::array<Expr, 3> zeta;
  std::array<Expr, 3> mu;  // mu[2] is μ³, the Σ³ component
  Expr H;
  bool solved = false;
};

// Slot symbols.
Expr slot_f();
Expr slot_g();
Expr slot_h();

GeneratorSet build_general(const FreeData& fd);

// ζ₃ + μ³ for the given set.
Expr wave_determining_residual(const GeneratorSet& gs);

// Imposes φ³ = φ³(t), α¹³ = φ¹_t, α²³ = φ²_t, β³ = -η_t and
// w = α³³ + 2φ̇³ + η_u. Placeholder slots (an opaque function of bare
// coordinates, e.g. from FreeData::generic) are replaced; concrete slots
// must already satisfy the constraint or FreeDataError names it. With
// `overwrite` the determined slots are always replaced.
GeneratorSet solve_wave_determining(const GeneratorSet& gs, bool overwrite = false);

// (w + φ^i_u v_i) h - D_i μ^i, with f, g and the jets held fixed under D_i.
Expr compute_H(const GeneratorSet& gs);

// Components on the extended coordinates. Indices are zero-based:
// S_lower[i][j] = S^i_j, S_upper[i][j] = S^{ij}, calS[i] = 𝒮^i for i in
// {f, g}; T_lower[j] = T_j, T_upper[j] = T^j, calT = 𝒯.
struct AdditionalComponents {
  std::array<std::array<Expr, 3>, 2> S_lower;
  std::array<Expr, 2> calS;
  std::array<std::array<Expr, 3>, 2> S_upper;
  std::array<Expr, 3> T_lower;
  Expr calT;
  std::array<Expr, 3> T_upper;
  std::array<Expr, 2> F;
  Expr G;
};

// Names of the extended coordinates: s1_1 .. s2_3 (s^i_j), sigma1, sigma2,
// s11 .. s23 (s^{ij}), t_1 .. t_3, tau, t1 .. t3 (t^j).
std::string s_lower_name(int i, int j);
std::string s_upper_name(int i, int j);
std::string sigma_name(int i);
std::string t_lower_name(int j);
std::string t_upper_name(int j);
inline const std::string kTau = "tau";

AdditionalComponents additional_components(const GeneratorSet& gs);

// (label, expression) pairs in a fixed order, for reports.
std::vector<std::pair<std::string, Expr>> generator_entries(const GeneratorSet& gs);
std::string format_generators(const GeneratorSet& gs);

}  // namespace eqwave
