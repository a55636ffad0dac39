#include "eqwave/family.hpp"

#include <optional>
#include <sstream>

#include "eqwave/parse.hpp"

namespace eqwave {

namespace {

void check_flux(const Expr& e, const char* slot) {
  for (const auto& s : free_symbols(e)) {
    SymbolKind k = symbol_kind(s);
    if (k == SymbolKind::free_function_slot)
      throw MemberError(std::string(slot) + " refers to the slot symbol " + s);
    if (k == SymbolKind::jet_variable && s[0] != 'v')
      throw MemberError(std::string(slot) + " involves a second-order jet: " + e.str());
  }
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

bool FamilyMember::degenerate() const { return f.is_constant() || g.is_constant(); }

FamilyMember make_member(Expr f, Expr g, Expr h) {
  check_flux(f, "f");
  check_flux(g, "g");
  check_flux(h, "h");
  return FamilyMember{std::move(f), std::move(g), std::move(h)};
}

FamilyMember parse_member(std::string_view text) {
  std::array<std::optional<Expr>, 3> slots;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    auto eq = s.find('=');
    if (eq == std::string::npos) throw MemberError("line " + std::to_string(lineno) + ": expected f=, g= or h=");
    std::string key = trim(std::string_view(s).substr(0, eq));
    int slot = key == "f" ? 0 : key == "g" ? 1 : key == "h" ? 2 : -1;
    if (slot < 0) throw MemberError("line " + std::to_string(lineno) + ": unknown field '" + key + "'");
    if (slots[slot]) throw MemberError("line " + std::to_string(lineno) + ": duplicate field '" + key + "'");
    try {
      slots[slot] = parse(std::string_view(s).substr(eq + 1));
    } catch (const ParseError& e) {
      throw MemberError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return make_member(slots[0].value_or(Expr()), slots[1].value_or(Expr()), slots[2].value_or(Expr()));
}

std::string format_member(const FamilyMember& m) {
  return "f=" + m.f.str() + "\ng=" + m.g.str() + "\nh=" + m.h.str() + "\n";
}

DependencySignature signature(const FamilyMember& m) {
  DependencySignature s;
  const Expr* slots[3] = {&m.f, &m.g, &m.h};
  for (int i = 0; i < 3; ++i)
    for (auto c : kMemberCoordinates)
      if (!partial(*slots[i], c).is_zero()) s.deps[i].emplace(c);
  s.f_is_zero = m.f.is_zero();
  s.g_is_zero = m.g.is_zero();
  s.h_is_zero = m.h.is_zero();
  return s;
}

std::string format_signature(const DependencySignature& s) {
  std::string out;
  const char* names[3] = {"f", "g", "h"};
  for (int i = 0; i < 3; ++i) {
    if (i) out += "; ";
    out += names[i];
    out += ":{";
    bool first = true;
    for (auto c : kMemberCoordinates) {
      if (!s.depends(i, c)) continue;
      if (!first) out += ",";
      first = false;
      out += c == "v1" ? "u_x" : c == "v2" ? "u_y" : c == "v3" ? "u_t" : std::string(c);
    }
    out += "}";
    bool zero = i == 0 ? s.f_is_zero : i == 1 ? s.g_is_zero : s.h_is_zero;
    if (zero) out += "=0";
  }
  return out;
}

BalanceForm balance_form(const FamilyMember& m) { return BalanceForm{m.f, m.g, -jet(2), m.h}; }

bool is_linear(const FamilyMember& m) {
  static const char* vars[] = {"u", "v1", "v2", "v3"};
  for (const Expr* e : {&m.f, &m.g, &m.h}) {
    for (int i = 0; i < 4; ++i) {
      Expr d = partial(*e, vars[i]);
      for (int j = i; j < 4; ++j)
        if (!partial(d, vars[j]).is_zero()) return false;
    }
  }
  return true;
}

double residual(const FamilyMember& m, const ScalarField& u, std::array<double, 3> p, double hs,
                const Binding& functions) {
  if (!(hs > 0)) throw std::invalid_argument("residual: h_step must be positive");
  static const std::vector<std::string> slots = {"x", "y", "t", "u", "v1", "v2", "v3"};
  CompiledExpr f(m.f, slots, functions), g(m.g, slots, functions), h(m.h, slots, functions);

  auto shifted = [&](std::array<double, 3> q, int axis, double d) {
    q[axis] += d;
    return q;
  };
  auto at = [&](std::array<double, 3> q) { return u(q[0], q[1], q[2]); };
  // Coordinates, u and first jets at q, jets by central differences.
  auto state = [&](std::array<double, 3> q) {
    std::array<double, 7> s{q[0], q[1], q[2], at(q), 0, 0, 0};
    for (int k = 0; k < 3; ++k) s[4 + k] = (at(shifted(q, k, hs)) - at(shifted(q, k, -hs))) / (2 * hs);
    return s;
  };
  auto flux_derivative = [&](const CompiledExpr& F, int axis) {
    auto a = state(shifted(p, axis, hs));
    auto b = state(shifted(p, axis, -hs));
    return (F(a) - F(b)) / (2 * hs);
  };
  double u_tt = (at(shifted(p, 2, hs)) - 2 * at(p) + at(shifted(p, 2, -hs))) / (hs * hs);
  return flux_derivative(f, 0) + flux_derivative(g, 1) + h(state(p)) - u_tt;
}

}  // namespace eqwave
