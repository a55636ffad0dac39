#include "eqwave/generators.hpp"

#include <algorithm>
#include <set>

namespace eqwave {

namespace {

const std::vector<std::string> kBaseU = {"x", "y", "t", "u"};

Expr opaque(const std::string& name, const std::vector<std::string>& args) {
  std::vector<Expr> a;
  for (const auto& s : args) a.push_back(sym(s));
  return Expr::function(name, std::move(a));
}

void check_args(const Expr& e, const std::string& slot, const std::set<std::string>& allowed) {
  for (const auto& s : free_symbols(e)) {
    SymbolKind k = symbol_kind(s);
    bool coordinate = k == SymbolKind::independent_coordinate || k == SymbolKind::dependent_variable ||
                      k == SymbolKind::jet_variable || k == SymbolKind::free_function_slot;
    if (coordinate && !allowed.count(s))
      throw FreeDataError(slot + " may not depend on " + s + ": " + e.str());
  }
}

bool is_placeholder(const Expr& e) {
  if (e.kind() != Expr::Kind::function) return false;
  for (int o : e.orders())
    if (o != 0) return false;
  std::set<std::string> seen;
  for (const auto& a : e.arguments()) {
    if (a.kind() != Expr::Kind::symbol) return false;
    if (std::find(kBaseU.begin(), kBaseU.end(), a.name()) == kBaseU.end()) return false;
    if (!seen.insert(a.name()).second) return false;
  }
  return true;
}

Expr D(const Expr& e, int i) { return frozen_total_derivative(e, i); }

std::array<Expr, 3> sigmas() { return {slot_f(), slot_g(), -jet(2)}; }

// Either keep `slot` if it already equals `required`, replace a
// placeholder, or fail naming the constraint.
void impose(Expr& slot, const Expr& required, const char* constraint, bool overwrite) {
  if (slot == required) return;
  if (overwrite || is_placeholder(slot)) {
    slot = required;
    return;
  }
  throw FreeDataError(std::string("determining equation violated: ") + constraint + " (have " + slot.str() +
                      ", need " + required.str() + ")");
}

}  // namespace

Expr slot_f() { return sym("f"); }
Expr slot_g() { return sym("g"); }
Expr slot_h() { return sym("h"); }

FreeData FreeData::generic() {
  FreeData fd;
  for (int i = 0; i < 3; ++i) {
    fd.phi[i] = opaque("phi" + std::to_string(i + 1), kBaseU);
    fd.beta[i] = opaque("beta" + std::to_string(i + 1), kBaseU);
    fd.alpha[i][i] = opaque("alpha" + std::to_string(i + 1) + std::to_string(i + 1), kBaseU);
  }
  fd.set_alpha(0, 1, opaque("alpha12", kBaseU));
  fd.set_alpha(0, 2, opaque("alpha13", kBaseU));
  fd.set_alpha(1, 2, opaque("alpha23", kBaseU));
  fd.eta = opaque("eta", kBaseU);
  fd.w = opaque("w", kBaseU);
  fd.lambda = opaque("lambda", {"x", "y"});
  fd.gamma = opaque("gamma", {"x", "y", "t"});
  return fd;
}

void FreeData::set_alpha(int i, int j, const Expr& a) {
  alpha[i][j] = a;
  if (i != j) alpha[j][i] = -a;
}

GeneratorSet build_general(const FreeData& fd) {
  const std::set<std::string> base_u(kBaseU.begin(), kBaseU.end());
  for (int i = 0; i < 3; ++i) {
    check_args(fd.phi[i], "phi" + std::to_string(i + 1), base_u);
    check_args(fd.beta[i], "beta" + std::to_string(i + 1), base_u);
    for (int j = 0; j < 3; ++j) {
      check_args(fd.alpha[i][j], "alpha" + std::to_string(i + 1) + std::to_string(j + 1), base_u);
      if (i < j && fd.alpha[i][j] != -fd.alpha[j][i])
        throw FreeDataError("alpha is not antisymmetric in (" + std::to_string(i + 1) + "," +
                            std::to_string(j + 1) + ")");
    }
  }
  check_args(fd.eta, "eta", base_u);
  check_args(fd.w, "w", base_u);
  check_args(fd.lambda, "lambda", {"x", "y"});
  check_args(fd.gamma, "gamma", {"x", "y", "t"});

  GeneratorSet gs;
  gs.data = fd;
  gs.eta = fd.eta;
  Expr phi_u_v;
  for (int j = 0; j < 3; ++j) phi_u_v += partial(fd.phi[j], "u") * jet(j);
  auto sigma = sigmas();
  for (int i = 0; i < 3; ++i) {
    gs.xi[i] = -fd.phi[i];
    Expr z = D(fd.eta, i);
    for (int j = 0; j < 3; ++j) z += D(fd.phi[j], i) * jet(j);
    gs.zeta[i] = z;
    Expr m = (fd.w + phi_u_v) * sigma[i] + fd.beta[i];
    for (int j = 0; j < 3; ++j) m += fd.alpha[i][j] * jet(j) - D(fd.phi[i], j) * sigma[j];
    gs.mu[i] = m;
  }
  gs.H = compute_H(gs);
  return gs;
}

Expr wave_determining_residual(const GeneratorSet& gs) { return gs.zeta[2] + gs.mu[2]; }

GeneratorSet solve_wave_determining(const GeneratorSet& gs, bool overwrite) {
  FreeData fd = gs.data;
  Expr& phi3 = fd.phi[2];
  if (depends_on(phi3, "x") || depends_on(phi3, "y") || depends_on(phi3, "u")) {
    if (!is_placeholder(phi3)) throw FreeDataError("determining equation violated: phi3 must depend on t only");
    phi3 = Expr::function(phi3.name(), {sym("t")});
  }
  Expr a13 = fd.alpha[0][2], a23 = fd.alpha[1][2];
  impose(a13, partial(fd.phi[0], "t"), "alpha13 = phi1_t", overwrite);
  impose(a23, partial(fd.phi[1], "t"), "alpha23 = phi2_t", overwrite);
  fd.set_alpha(0, 2, a13);
  fd.set_alpha(1, 2, a23);
  impose(fd.beta[2], -partial(fd.eta, "t"), "beta3 = -eta_t", overwrite);
  impose(fd.w, fd.alpha[2][2] + 2 * partial(phi3, "t") + partial(fd.eta, "u"), "w = alpha33 + 2 phi3_t + eta_u",
         overwrite);

  GeneratorSet out = build_general(fd);
  Expr r = wave_determining_residual(out);
  if (!r.is_zero()) throw FreeDataError("zeta3 + mu3 does not vanish after solving: " + r.str());
  out.solved = true;
  return out;
}

Expr compute_H(const GeneratorSet& gs) {
  const FreeData& fd = gs.data;
  Expr out = fd.w;
  for (int i = 0; i < 3; ++i) out += partial(fd.phi[i], "u") * jet(i);
  out *= slot_h();
  for (int i = 0; i < 3; ++i) out -= D(gs.mu[i], i);
  return out;
}

std::string s_lower_name(int i, int j) { return "s" + std::to_string(i + 1) + "_" + std::to_string(j + 1); }
std::string s_upper_name(int i, int j) { return "s" + std::to_string(i + 1) + std::to_string(j + 1); }
std::string sigma_name(int i) { return "sigma" + std::to_string(i + 1); }
std::string t_lower_name(int j) { return "t_" + std::to_string(j + 1); }
std::string t_upper_name(int j) { return "t" + std::to_string(j + 1); }

AdditionalComponents additional_components(const GeneratorSet& gs) {
  AdditionalComponents c;
  const Expr tau = sym(kTau);
  for (int i = 0; i < 2; ++i) {
    Expr F = gs.mu[i] - sym(sigma_name(i)) * gs.eta;
    for (int j = 0; j < 3; ++j) F -= sym(s_lower_name(i, j)) * gs.xi[j] + sym(s_upper_name(i, j)) * gs.zeta[j];
    c.F[i] = F;
  }
  Expr G = gs.H - tau * gs.eta;
  for (int j = 0; j < 3; ++j) G -= sym(t_lower_name(j)) * gs.xi[j] + sym(t_upper_name(j)) * gs.zeta[j];
  c.G = G;

  // ∂/∂Σ contributions with the given weights on (f, g, h).
  auto slots = [](const Expr& e, const Expr& wf, const Expr& wg, const Expr& wh) {
    return partial(e, "f") * wf + partial(e, "g") * wg + partial(e, "h") * wh;
  };
  for (int i = 0; i < 2; ++i) {
    const Expr& F = c.F[i];
    for (int j = 0; j < 3; ++j) {
      c.S_lower[i][j] = partial(F, kBase[j]) +
                        slots(F, sym(s_lower_name(0, j)), sym(s_lower_name(1, j)), sym(t_lower_name(j)));
      // Σ³ = -v3 contributes s^{33} = -1 against ∂/∂Σ³ = -∂/∂v3.
      c.S_upper[i][j] = partial(F, kJet[j]) +
                        slots(F, sym(s_upper_name(0, j)), sym(s_upper_name(1, j)), sym(t_upper_name(j)));
      if (j == 2) c.S_upper[i][j] += partial(F, "v3");
    }
    c.calS[i] = partial(F, "u") + slots(F, sym(sigma_name(0)), sym(sigma_name(1)), tau);
  }
  for (int j = 0; j < 3; ++j) {
    c.T_lower[j] = partial(G, kBase[j]) + slots(G, sym(s_lower_name(0, j)), sym(s_lower_name(1, j)), sym(t_lower_name(j)));
    c.T_upper[j] = partial(G, kJet[j]) + slots(G, sym(s_upper_name(0, j)), sym(s_upper_name(1, j)), sym(t_upper_name(j)));
    if (j == 2) c.T_upper[j] += partial(G, "v3");
  }
  c.calT = partial(G, "u") + slots(G, sym(sigma_name(0)), sym(sigma_name(1)), tau);
  return c;
}

std::vector<std::pair<std::string, Expr>> generator_entries(const GeneratorSet& gs) {
  std::vector<std::pair<std::string, Expr>> out;
  for (int i = 0; i < 3; ++i) out.emplace_back("xi" + std::to_string(i + 1), gs.xi[i]);
  out.emplace_back("eta", gs.eta);
  for (int i = 0; i < 3; ++i) out.emplace_back("zeta" + std::to_string(i + 1), gs.zeta[i]);
  for (int i = 0; i < 3; ++i) out.emplace_back("mu" + std::to_string(i + 1), gs.mu[i]);
  out.emplace_back("H", gs.H);
  return out;
}

std::string format_generators(const GeneratorSet& gs) {
  std::string out;
  for (const auto& [k, v] : generator_entries(gs)) out += k + " = " + v.str() + "\n";
  return out;
}

}  // namespace eqwave
