#include "eqwave/expr.hpp"

#include <algorithm>
#include <functional>
#include <mutex>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "ratfunc.hpp"

namespace eqwave {
namespace detail {

namespace {

std::mutex& intern_mutex() {
  static std::mutex m;
  return m;
}

std::unordered_map<std::string, std::unique_ptr<AtomNode>>& intern_table() {
  static std::unordered_map<std::string, std::unique_ptr<AtomNode>> table;
  return table;
}

Atom intern(AtomNode node) {
  std::lock_guard lock(intern_mutex());
  auto& table = intern_table();
  auto it = table.find(node.key);
  if (it != table.end()) return it->second.get();
  auto owned = std::make_unique<AtomNode>(std::move(node));
  Atom a = owned.get();
  table.emplace(a->key, std::move(owned));
  return a;
}

}  // namespace

Atom intern_symbol(const std::string& name) {
  AtomNode n;
  n.name = name;
  n.key = "a:" + name;
  return intern(std::move(n));
}

Atom intern_function(const std::string& name, std::vector<Expr> args, std::vector<int> orders) {
  if (orders.empty()) orders.assign(args.size(), 0);
  if (orders.size() != args.size())
    throw std::invalid_argument("derivative multi-index size does not match arity of " + name);
  AtomNode n;
  n.is_function = true;
  n.name = name;
  std::ostringstream key;
  key << "b:" << name << '#';
  for (std::size_t i = 0; i < orders.size(); ++i) {
    if (orders[i] < 0) throw std::invalid_argument("negative derivative order");
    key << (i ? "," : "") << orders[i];
  }
  key << '(';
  for (std::size_t i = 0; i < args.size(); ++i) key << (i ? "," : "") << args[i].str();
  key << ')';
  n.key = key.str();
  n.args = std::move(args);
  n.orders = std::move(orders);
  return intern(std::move(n));
}

bool MonoLess::operator()(const Monomial& a, const Monomial& b) const {
  std::size_t i = 0;
  for (; i < a.size() && i < b.size(); ++i) {
    if (a[i].first != b[i].first) {
      // The side holding the smaller atom has a positive exponent where the
      // other has zero, so it is the larger monomial.
      return atom_less(b[i].first, a[i].first);
    }
    if (a[i].second != b[i].second) return a[i].second < b[i].second;
  }
  return a.size() < b.size();
}

bool PolyLess::operator()(const Poly& a, const Poly& b) const {
  MonoLess ml;
  auto ia = a.begin();
  auto ib = b.begin();
  for (; ia != a.end() && ib != b.end(); ++ia, ++ib) {
    if (ia->first != ib->first) return ml(ia->first, ib->first);
    if (ia->second != ib->second) return ia->second < ib->second;
  }
  return ia == a.end() && ib != b.end();
}

Monomial mono_mul(const Monomial& a, const Monomial& b) {
  Monomial out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && atom_less(a[i].first, b[j].first))) {
      out.push_back(a[i++]);
    } else if (i == a.size() || atom_less(b[j].first, a[i].first)) {
      out.push_back(b[j++]);
    } else {
      out.emplace_back(a[i].first, a[i].second + b[j].second);
      ++i;
      ++j;
    }
  }
  return out;
}

namespace {

// a / b if b divides a as monomials.
std::optional<Monomial> mono_div(const Monomial& a, const Monomial& b) {
  Monomial out;
  std::size_t i = 0;
  for (const auto& [atom, e] : b) {
    while (i < a.size() && a[i].first != atom) {
      if (atom_less(atom, a[i].first)) return std::nullopt;
      out.push_back(a[i++]);
    }
    if (i == a.size() || a[i].second < e) return std::nullopt;
    if (a[i].second > e) out.emplace_back(atom, a[i].second - e);
    ++i;
  }
  for (; i < a.size(); ++i) out.push_back(a[i]);
  return out;
}

void accumulate(Poly& p, const Monomial& m, const Rational& c) {
  if (c == 0) return;
  auto [it, inserted] = p.emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) p.erase(it);
  }
}

}  // namespace

Poly poly_constant(const Rational& c) {
  Poly p;
  if (c != 0) p.emplace(Monomial{}, c);
  return p;
}

Poly poly_atom(Atom a, int exponent) {
  Poly p;
  p.emplace(Monomial{{a, exponent}}, Rational(1));
  return p;
}

Poly poly_add(const Poly& a, const Poly& b, const Rational& scale_b) {
  Poly out = a;
  for (const auto& [m, c] : b) accumulate(out, m, c * scale_b);
  return out;
}

Poly poly_scale(const Poly& a, const Rational& c) {
  if (c == 0) return {};
  Poly out = a;
  for (auto& [m, coef] : out) coef *= c;
  return out;
}

Poly poly_mul(const Poly& a, const Poly& b) {
  Poly out;
  for (const auto& [ma, ca] : a)
    for (const auto& [mb, cb] : b) accumulate(out, mono_mul(ma, mb), ca * cb);
  return out;
}

Poly poly_pow(const Poly& a, int n) {
  Poly result = poly_constant(1);
  Poly base = a;
  while (n > 0) {
    if (n & 1) result = poly_mul(result, base);
    n >>= 1;
    if (n) base = poly_mul(base, base);
  }
  return result;
}

std::optional<Poly> poly_divide_exact(const Poly& p, const Poly& d) {
  if (d.empty()) return std::nullopt;
  if (p.empty()) return Poly{};
  const auto& [lead_m, lead_c] = *d.rbegin();
  const Monomial& trail_d = d.begin()->first;
  const Monomial& trail_p = p.begin()->first;
  // Cheap rejections: leading and trailing terms must divide.
  if (!mono_div(p.rbegin()->first, lead_m) || !mono_div(trail_p, trail_d)) return std::nullopt;
  MonoLess less;
  Poly q;
  Poly r = p;
  while (!r.empty()) {
    const auto& [rm, rc] = *r.rbegin();
    auto qm = mono_div(rm, lead_m);
    if (!qm) return std::nullopt;
    // Every further quotient term is smaller, so its product with the
    // trailing divisor term can no longer reach the trailing term of p.
    if (less(mono_mul(*qm, trail_d), trail_p)) return std::nullopt;
    Rational qc = rc / lead_c;
    Monomial qmono = *qm;
    accumulate(q, qmono, qc);
    for (const auto& [dm, dc] : d) accumulate(r, mono_mul(qmono, dm), -qc * dc);
  }
  return q;
}

namespace {

// Split p into rational content, lone-atom factors and a primitive factor.
struct Factored {
  Rational content = 1;
  std::vector<std::pair<Poly, int>> factors;
};

Factored factor_for_denominator(const Poly& p) {
  Factored out;
  // Monomial content: atoms present in every term, with minimum exponent.
  Monomial content = p.begin()->first;
  for (const auto& [m, c] : p) {
    Monomial next;
    std::size_t j = 0;
    for (const auto& [atom, e] : content) {
      while (j < m.size() && atom_less(m[j].first, atom)) ++j;
      if (j < m.size() && m[j].first == atom) next.emplace_back(atom, std::min(e, m[j].second));
    }
    content = std::move(next);
    if (content.empty()) break;
  }
  Poly rest;
  for (const auto& [m, c] : p) rest.emplace(*mono_div(m, content), c);
  for (const auto& [atom, e] : content) out.factors.emplace_back(poly_atom(atom), e);
  Rational trailing = rest.begin()->second;
  out.content = trailing;
  if (rest.size() == 1 && rest.begin()->first.empty()) return out;
  out.factors.emplace_back(poly_scale(rest, 1 / trailing), 1);
  return out;
}

void cancel(RatFunc& r) {
  if (r.num.empty()) {
    r.den.clear();
    return;
  }
  for (auto it = r.den.begin(); it != r.den.end();) {
    while (it->second > 0) {
      auto q = poly_divide_exact(r.num, it->first);
      if (!q) break;
      r.num = std::move(*q);
      --it->second;
    }
    if (it->second == 0)
      it = r.den.erase(it);
    else
      ++it;
  }
}

Poly den_product(const std::map<Poly, int, PolyLess>& den) {
  Poly out = poly_constant(1);
  for (const auto& [d, k] : den) out = poly_mul(out, poly_pow(d, k));
  return out;
}

}  // namespace

RatFunc rf_from_poly(Poly p) { return RatFunc{std::move(p), {}}; }

RatFunc rf_neg(const RatFunc& a) { return RatFunc{poly_scale(a.num, -1), a.den}; }

RatFunc rf_add(const RatFunc& a, const RatFunc& b) {
  if (a.num.empty()) return b;
  if (b.num.empty()) return a;
  if (a.den == b.den) {
    RatFunc r{poly_add(a.num, b.num), a.den};
    cancel(r);
    return r;
  }
  RatFunc r;
  r.den = a.den;
  for (const auto& [d, k] : b.den) {
    auto [it, ins] = r.den.emplace(d, k);
    if (!ins) it->second = std::max(it->second, k);
  }
  auto lift = [&](const RatFunc& x) {
    Poly p = x.num;
    for (const auto& [d, k] : r.den) {
      auto it = x.den.find(d);
      int have = it == x.den.end() ? 0 : it->second;
      if (k > have) p = poly_mul(p, poly_pow(d, k - have));
    }
    return p;
  };
  r.num = poly_add(lift(a), lift(b));
  cancel(r);
  return r;
}

RatFunc rf_mul(const RatFunc& a, const RatFunc& b) {
  if (a.num.empty() || b.num.empty()) return {};
  RatFunc r;
  r.num = poly_mul(a.num, b.num);
  r.den = a.den;
  for (const auto& [d, k] : b.den) r.den[d] += k;
  if (!a.den.empty() && !b.den.empty()) cancel(r);
  else if (!r.den.empty()) cancel(r);
  return r;
}

RatFunc rf_inv(const RatFunc& a) {
  if (a.num.empty()) throw std::domain_error("symbolic division by zero");
  Factored f = factor_for_denominator(a.num);
  RatFunc r;
  r.num = poly_scale(den_product(a.den), 1 / f.content);
  for (auto& [d, k] : f.factors) r.den[d] += k;
  cancel(r);
  return r;
}

std::string display_name(const std::string& s) {
  static const std::map<std::string, std::string> names = {
      {"v1", "u_x"},   {"v2", "u_y"},   {"v3", "u_t"},   {"w11", "u_xx"}, {"w12", "u_xy"},
      {"w13", "u_xt"}, {"w22", "u_yy"}, {"w23", "u_yt"}, {"w33", "u_tt"}};
  auto it = names.find(s);
  return it == names.end() ? s : it->second;
}

std::string atom_str(Atom a) {
  if (!a->is_function) return display_name(a->name);
  std::string s = a->name;
  if (a->args.size() == 1) {
    s.append(static_cast<std::size_t>(a->orders[0]), '\'');
  } else if (std::any_of(a->orders.begin(), a->orders.end(), [](int o) { return o > 0; })) {
    s += '[';
    for (std::size_t i = 0; i < a->orders.size(); ++i) s += (i ? "," : "") + std::to_string(a->orders[i]);
    s += ']';
  }
  s += '(';
  for (std::size_t i = 0; i < a->args.size(); ++i) s += (i ? ", " : "") + a->args[i].str();
  s += ')';
  return s;
}

namespace {

std::string mono_str(const Monomial& m) {
  std::string s;
  for (const auto& [atom, e] : m) {
    if (!s.empty()) s += '*';
    s += atom_str(atom);
    if (e != 1) s += '^' + std::to_string(e);
  }
  return s;
}

std::string rational_str(const Rational& c) { return c.get_str(); }

// Signed term; `first` controls whether a leading '+' is emitted.
std::string term_str(const Monomial& m, const Rational& c, bool first) {
  std::string s;
  Rational mag = abs(c);
  if (c < 0)
    s = first ? "-" : " - ";
  else if (!first)
    s = " + ";
  if (m.empty()) return s + rational_str(mag);
  if (mag != 1) s += rational_str(mag) + "*";
  return s + mono_str(m);
}

}  // namespace

std::string poly_str(const Poly& p) {
  if (p.empty()) return "0";
  std::string s;
  bool first = true;
  for (const auto& [m, c] : p) {
    s += term_str(m, c, first);
    first = false;
  }
  return s;
}

Expr make_expr(RatFunc r) { return Expr(std::make_shared<const RatFunc>(std::move(r))); }
Expr poly_expr(const Poly& p) { return make_expr(rf_from_poly(p)); }

}  // namespace detail

using namespace detail;

// ---------------------------------------------------------------------------

SymbolKind symbol_kind(std::string_view name) {
  if (name == "x" || name == "y" || name == "t") return SymbolKind::independent_coordinate;
  if (name == "u") return SymbolKind::dependent_variable;
  if (name == "v1" || name == "v2" || name == "v3") return SymbolKind::jet_variable;
  if (name.size() == 3 && name[0] == 'w' && name[1] >= '1' && name[1] <= '3' && name[2] >= name[1] &&
      name[2] <= '3')
    return SymbolKind::jet_variable;
  if (name == "eps") return SymbolKind::group_parameter;
  if (name == "f" || name == "g" || name == "h") return SymbolKind::free_function_slot;
  return SymbolKind::parameter;
}

std::string second_jet_name(int i, int j) {
  if (i > j) std::swap(i, j);
  return "w" + std::to_string(i + 1) + std::to_string(j + 1);
}

Expr::Expr() : rep_(std::make_shared<const RatFunc>()) {}
Expr::Expr(long value) : Expr(Rational(value)) {}
Expr::Expr(const Rational& value) : rep_(std::make_shared<const RatFunc>(rf_from_poly(poly_constant(value)))) {}
Expr::Expr(std::shared_ptr<const detail::RatFunc> rep) : rep_(std::move(rep)) {}

Expr Expr::symbol(std::string name) { return poly_expr(poly_atom(intern_symbol(name))); }

Expr Expr::function(std::string name, std::vector<Expr> args, std::vector<int> orders) {
  return poly_expr(poly_atom(intern_function(name, std::move(args), std::move(orders))));
}

Expr operator+(const Expr& a, const Expr& b) { return make_expr(rf_add(a.rep(), b.rep())); }
Expr operator-(const Expr& a, const Expr& b) { return make_expr(rf_add(a.rep(), rf_neg(b.rep()))); }
Expr operator*(const Expr& a, const Expr& b) { return make_expr(rf_mul(a.rep(), b.rep())); }
Expr operator/(const Expr& a, const Expr& b) { return make_expr(rf_mul(a.rep(), rf_inv(b.rep()))); }
Expr operator-(const Expr& a) { return make_expr(rf_neg(a.rep())); }

Expr pow(const Expr& base, int exponent) {
  if (exponent < 0) return pow(make_expr(rf_inv(base.rep())), -exponent);
  const RatFunc& r = base.rep();
  RatFunc out;
  out.num = poly_pow(r.num, exponent);
  if (!out.num.empty())
    for (const auto& [d, k] : r.den) out.den.emplace(d, k * exponent);
  return make_expr(std::move(out));
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.rep_ == b.rep_ || (a.rep().num == b.rep().num && a.rep().den == b.rep().den)) return true;
  // Denominator factorizations are not unique; fall back to the difference.
  return (a - b).is_zero();
}

bool Expr::is_zero() const { return rep().num.empty(); }

bool Expr::is_constant() const {
  const auto& n = rep().num;
  return rep().den.empty() && (n.empty() || (n.size() == 1 && n.begin()->first.empty()));
}

std::optional<Rational> Expr::constant_value() const {
  if (!is_constant()) return std::nullopt;
  return rep().num.empty() ? Rational(0) : rep().num.begin()->second;
}

const AtomNode& Expr::single_atom() const {
  if (kind() != Kind::symbol && kind() != Kind::function)
    throw std::logic_error("expression is not a single atom: " + str());
  return *rep().num.begin()->first.front().first;
}

Expr::Kind Expr::kind() const {
  const RatFunc& r = rep();
  if (!r.den.empty()) {
    bool lone = r.num.size() == 1 && r.num.begin()->first.empty() && r.num.begin()->second == 1 &&
                r.den.size() == 1;
    return lone ? Kind::power : Kind::product;
  }
  if (r.num.empty()) return Kind::constant;
  if (r.num.size() > 1) return Kind::sum;
  const auto& [m, c] = *r.num.begin();
  if (m.empty()) return Kind::constant;
  if (c != 1 || m.size() > 1) return Kind::product;
  if (m.front().second != 1) return Kind::power;
  return m.front().first->is_function ? Kind::function : Kind::symbol;
}

std::vector<Expr> Expr::operands() const {
  const RatFunc& r = rep();
  std::vector<Expr> out;
  switch (kind()) {
    case Kind::sum:
      for (const auto& [m, c] : r.num) {
        Poly p;
        p.emplace(m, c);
        out.push_back(poly_expr(p));
      }
      return out;
    case Kind::product: {
      if (r.den.empty()) {
        const auto& [m, c] = *r.num.begin();
        if (c != 1) out.emplace_back(c);
        for (const auto& [atom, e] : m) out.push_back(poly_expr(poly_atom(atom, e)));
        return out;
      }
      bool unit = r.num.size() == 1 && r.num.begin()->first.empty() && r.num.begin()->second == 1;
      if (!unit) out.push_back(poly_expr(r.num));
      for (const auto& [d, k] : r.den) {
        RatFunc f;
        f.num = poly_constant(1);
        f.den.emplace(d, k);
        out.push_back(make_expr(std::move(f)));
      }
      return out;
    }
    default:
      return out;
  }
}

Expr Expr::base() const {
  if (kind() != Kind::power) throw std::logic_error("not a power: " + str());
  const RatFunc& r = rep();
  if (!r.den.empty()) return poly_expr(r.den.begin()->first);
  return poly_expr(poly_atom(r.num.begin()->first.front().first));
}

int Expr::exponent() const {
  if (kind() != Kind::power) throw std::logic_error("not a power: " + str());
  const RatFunc& r = rep();
  if (!r.den.empty()) return -r.den.begin()->second;
  return r.num.begin()->first.front().second;
}

const std::string& Expr::name() const { return single_atom().name; }
std::vector<Expr> Expr::arguments() const { return single_atom().args; }
std::vector<int> Expr::orders() const { return single_atom().orders; }

Expr Expr::numerator() const { return poly_expr(rep().num); }

Expr Expr::denominator() const {
  Poly p = poly_constant(1);
  for (const auto& [d, k] : rep().den) p = poly_mul(p, poly_pow(d, k));
  return poly_expr(p);
}

std::string Expr::str() const {
  const RatFunc& r = rep();
  if (r.den.empty()) return poly_str(r.num);
  std::string s;
  if (r.num.size() == 1) {
    const auto& [m, c] = *r.num.begin();
    s = term_str(m, c, true);
  } else {
    s = "(" + poly_str(r.num) + ")";
  }
  std::vector<std::string> parts;
  for (const auto& [d, k] : r.den) {
    bool simple = d.size() == 1;
    std::string f = simple ? poly_str(d) : "(" + poly_str(d) + ")";
    if (k != 1) f += "^" + std::to_string(k);
    parts.push_back(f);
  }
  if (parts.size() == 1 && (r.den.begin()->second == 1 || r.den.begin()->first.size() > 1))
    return s + "/" + parts.front();
  std::string den;
  for (std::size_t i = 0; i < parts.size(); ++i) den += (i ? "*" : "") + parts[i];
  return s + "/(" + den + ")";
}

std::ostream& operator<<(std::ostream& os, const Expr& e) { return os << e.str(); }

Expr sym(std::string_view name) { return Expr::symbol(std::string(name)); }
Expr jet(int axis) { return Expr::symbol(std::string(kJet[axis])); }
Expr base_coord(int axis) { return Expr::symbol(std::string(kBase[axis])); }
Expr jet2(int i, int j) { return Expr::symbol(second_jet_name(i, j)); }

// --- differentiation -------------------------------------------------------

namespace {

Expr atom_partial(Atom a, Atom s) {
  if (!a->is_function) return a == s ? Expr(1) : Expr(0);
  Expr out;
  for (std::size_t k = 0; k < a->args.size(); ++k) {
    Expr darg = partial(a->args[k], s->name);
    if (darg.is_zero()) continue;
    std::vector<int> orders = a->orders;
    ++orders[k];
    out += Expr::function(a->name, a->args, orders) * darg;
  }
  return out;
}

Expr poly_partial(const Poly& p, Atom s, std::map<Atom, Expr>& cache) {
  // Group by differentiated atom: sum_a (dp/da) * (da/ds).
  std::map<Atom, Poly> by_atom;
  for (const auto& [m, c] : p) {
    for (std::size_t i = 0; i < m.size(); ++i) {
      Atom a = m[i].first;
      auto it = cache.find(a);
      if (it == cache.end()) it = cache.emplace(a, atom_partial(a, s)).first;
      if (it->second.is_zero()) continue;
      Monomial dm = m;
      int e = dm[i].second;
      if (e == 1)
        dm.erase(dm.begin() + static_cast<long>(i));
      else
        --dm[i].second;
      accumulate(by_atom[a], dm, c * e);
    }
  }
  Poly poly_part;
  Expr rest;
  for (auto& [a, dp] : by_atom) {
    const Expr& da = cache.at(a);
    if (da.rep().den.empty()) {
      poly_part = poly_add(poly_part, poly_mul(dp, da.rep().num));
    } else {
      rest += poly_expr(dp) * da;
    }
  }
  return poly_expr(poly_part) + rest;
}

}  // namespace

Expr partial(const Expr& e, const Expr& symbol) {
  if (symbol.kind() != Expr::Kind::symbol)
    throw std::invalid_argument("partial: not a symbol: " + symbol.str());
  return partial(e, symbol.name());
}

Expr partial(const Expr& e, std::string_view symbol_name) {
  Atom s = intern_symbol(std::string(symbol_name));
  const RatFunc& r = e.rep();
  std::map<Atom, Expr> cache;
  Expr dnum = poly_partial(r.num, s, cache);
  if (r.den.empty()) return dnum;
  Expr num = poly_expr(r.num);
  Expr acc = dnum;
  for (const auto& [d, k] : r.den) {
    Expr dd = poly_partial(d, s, cache);
    if (dd.is_zero()) continue;
    acc -= Expr(static_cast<long>(k)) * num * dd / poly_expr(d);
  }
  // Multiply by the factored inverse rather than dividing by the expanded product.
  return acc * make_expr(RatFunc{poly_constant(1), r.den});
}

Expr partial(const Expr& e, std::string_view symbol_name, int order) {
  Expr out = e;
  for (int i = 0; i < order; ++i) out = partial(out, symbol_name);
  return out;
}

Expr frozen_total_derivative(const Expr& e, int axis) {
  return partial(e, kBase[axis]) + jet(axis) * partial(e, "u");
}

Expr total_derivative(const Expr& e, int axis) {
  for (const auto& s : free_symbols(e))
    if (symbol_kind(s) == SymbolKind::jet_variable)
      throw JetDependenceError("total_derivative: expression depends on jet variable " +
                               display_name(s) + ": " + e.str());
  return frozen_total_derivative(e, axis);
}

Expr jet_total_derivative(const Expr& e, int axis) {
  Expr out = frozen_total_derivative(e, axis);
  for (int j = 0; j < 3; ++j) out += jet2(axis, j) * partial(e, kJet[j]);
  return out;
}

// --- substitution ----------------------------------------------------------

namespace {

using AtomMap = std::function<std::optional<Expr>(Atom)>;

Expr map_atoms(const Expr& e, const AtomMap& fn, std::map<Atom, std::optional<Expr>>& cache);

std::optional<Expr> map_atom(Atom a, const AtomMap& fn, std::map<Atom, std::optional<Expr>>& cache) {
  auto it = cache.find(a);
  if (it != cache.end()) return it->second;
  std::optional<Expr> out;
  Atom target = a;
  if (a->is_function) {
    std::vector<Expr> args;
    bool changed = false;
    for (const auto& arg : a->args) {
      args.push_back(map_atoms(arg, fn, cache));
      changed = changed || !(args.back() == arg);
    }
    if (changed) target = intern_function(a->name, args, a->orders);
    out = fn(target);
    if (!out && changed) out = poly_expr(poly_atom(target));
  } else {
    out = fn(a);
  }
  cache.emplace(a, out);
  return out;
}

Expr map_poly(const Poly& p, const AtomMap& fn, std::map<Atom, std::optional<Expr>>& cache,
              bool& changed) {
  Poly poly_acc;
  Expr acc;
  for (const auto& [m, c] : p) {
    Monomial kept;
    Expr factor(c);
    bool term_changed = false;
    for (const auto& [atom, e] : m) {
      auto mapped = map_atom(atom, fn, cache);
      if (mapped) {
        term_changed = true;
        factor *= pow(*mapped, e);
      } else {
        kept.emplace_back(atom, e);
      }
    }
    if (!term_changed) {
      accumulate(poly_acc, m, c);
      continue;
    }
    changed = true;
    Poly kp;
    kp.emplace(kept, Rational(1));
    if (factor.rep().den.empty())
      poly_acc = poly_add(poly_acc, poly_mul(kp, factor.rep().num));
    else
      acc += poly_expr(kp) * factor;
  }
  return poly_expr(poly_acc) + acc;
}

Expr map_atoms(const Expr& e, const AtomMap& fn, std::map<Atom, std::optional<Expr>>& cache) {
  const RatFunc& r = e.rep();
  bool changed = false;
  Expr num = map_poly(r.num, fn, cache, changed);
  if (r.den.empty()) return changed ? num : e;
  Expr den(1);
  for (const auto& [d, k] : r.den) den *= pow(map_poly(d, fn, cache, changed), k);
  if (!changed) return e;
  return num / den;
}

}  // namespace

Expr substitute(const Expr& e, const std::map<std::string, Expr>& replacements) {
  if (replacements.empty()) return e;
  std::map<Atom, std::optional<Expr>> cache;
  AtomMap fn = [&](Atom a) -> std::optional<Expr> {
    if (a->is_function) return std::nullopt;
    auto it = replacements.find(a->name);
    if (it == replacements.end()) return std::nullopt;
    return it->second;
  };
  return map_atoms(e, fn, cache);
}

Expr substitute_function(const Expr& e, const std::string& name, const std::vector<std::string>& params,
                         const Expr& body) {
  std::map<Atom, std::optional<Expr>> cache;
  std::map<std::vector<int>, Expr> derivs;
  AtomMap fn = [&](Atom a) -> std::optional<Expr> {
    if (!a->is_function || a->name != name) return std::nullopt;
    if (a->args.size() != params.size())
      throw std::invalid_argument("substitute_function: arity mismatch for " + name);
    auto it = derivs.find(a->orders);
    if (it == derivs.end()) {
      Expr d = body;
      for (std::size_t k = 0; k < params.size(); ++k) d = partial(d, params[k], a->orders[k]);
      it = derivs.emplace(a->orders, d).first;
    }
    std::map<std::string, Expr> bind;
    for (std::size_t k = 0; k < params.size(); ++k) bind.emplace(params[k], a->args[k]);
    return substitute(it->second, bind);
  };
  return map_atoms(e, fn, cache);
}

// --- inspection --------------------------------------------------------------

bool depends_on(const Expr& e, std::string_view symbol_name) {
  bool found = false;
  for_each_atom(e.rep(), [&](Atom a) {
    if (!a->is_function && a->name == symbol_name) found = true;
  });
  return found;
}

std::vector<std::string> free_symbols(const Expr& e) {
  std::vector<std::string> out;
  for_each_atom(e.rep(), [&](Atom a) {
    if (!a->is_function) out.push_back(a->name);
  });
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::string> function_names(const Expr& e) {
  std::vector<std::string> out;
  for_each_atom(e.rep(), [&](Atom a) {
    if (a->is_function) out.push_back(a->name);
  });
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::map<std::vector<int>, Expr> coefficients(const Expr& e, const std::vector<std::string>& vars) {
  std::vector<Atom> atoms;
  for (const auto& v : vars) atoms.push_back(intern_symbol(v));
  const RatFunc& r = e.rep();
  Expr den = e.denominator();
  for (const auto& v : vars)
    if (depends_on(den, v)) throw std::invalid_argument("coefficients: " + v + " occurs in a denominator");
  std::map<std::vector<int>, Poly> groups;
  for (const auto& [m, c] : r.num) {
    std::vector<int> exps(vars.size(), 0);
    Monomial rest;
    for (const auto& [atom, ex] : m) {
      auto it = std::find(atoms.begin(), atoms.end(), atom);
      if (it != atoms.end()) {
        exps[static_cast<std::size_t>(it - atoms.begin())] = ex;
      } else {
        if (atom->is_function)
          for (const auto& arg : atom->args)
            for (const auto& v : vars)
              if (depends_on(arg, v))
                throw std::invalid_argument("coefficients: " + v + " occurs inside " + atom_str(atom));
        rest.emplace_back(atom, ex);
      }
    }
    accumulate(groups[exps], rest, c);
  }
  std::map<std::vector<int>, Expr> out;
  for (auto& [k, p] : groups)
    if (!p.empty()) out.emplace(k, poly_expr(p) / den);
  return out;
}

}  // namespace eqwave
