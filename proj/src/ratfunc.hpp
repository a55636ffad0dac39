#pragma once

// Internal representation behind eqwave::Expr.

#include "eqwave/expr.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace eqwave::detail {

struct AtomNode {
  bool is_function = false;
  std::string name;
  std::vector<Expr> args;
  std::vector<int> orders;
  std::string key;  // total order: symbols before functions, then name, orders, args
};

// Atoms are interned and never freed; pointer equality is atom equality.
using Atom = const AtomNode*;

Atom intern_symbol(const std::string& name);
Atom intern_function(const std::string& name, std::vector<Expr> args, std::vector<int> orders);

inline bool atom_less(Atom a, Atom b) { return a != b && a->key < b->key; }

// Sorted by atom key, exponents > 0.
using Monomial = std::vector<std::pair<Atom, int>>;

// Pure lexicographic monomial order (earlier atoms most significant).
struct MonoLess {
  bool operator()(const Monomial& a, const Monomial& b) const;
};

using Poly = std::map<Monomial, Rational, MonoLess>;

struct PolyLess {
  bool operator()(const Poly& a, const Poly& b) const;
};

// num / prod(den_i ^ k_i). Denominator factors are non-constant polynomials
// with no monomial content other than a lone atom, scaled so the smallest
// term has coefficient 1. Factors dividing the numerator are cancelled.
struct RatFunc {
  Poly num;
  std::map<Poly, int, PolyLess> den;
};

Monomial mono_mul(const Monomial& a, const Monomial& b);
Poly poly_constant(const Rational& c);
Poly poly_atom(Atom a, int exponent = 1);
Poly poly_add(const Poly& a, const Poly& b, const Rational& scale_b = 1);
Poly poly_mul(const Poly& a, const Poly& b);
Poly poly_pow(const Poly& a, int n);
Poly poly_scale(const Poly& a, const Rational& c);
std::optional<Poly> poly_divide_exact(const Poly& p, const Poly& d);

RatFunc rf_from_poly(Poly p);
RatFunc rf_add(const RatFunc& a, const RatFunc& b);
RatFunc rf_mul(const RatFunc& a, const RatFunc& b);
RatFunc rf_inv(const RatFunc& a);
RatFunc rf_neg(const RatFunc& a);

std::string atom_str(Atom a);
std::string poly_str(const Poly& p);
std::string display_name(const std::string& symbol);

Expr make_expr(RatFunc r);
Expr poly_expr(const Poly& p);

// Visit every atom, including those nested in function arguments.
template <class F>
void for_each_atom(const RatFunc& r, F&& f);

}  // namespace eqwave::detail

namespace eqwave::detail {

template <class F>
void for_each_atom_poly(const Poly& p, F& f) {
  for (const auto& [mono, c] : p) {
    for (const auto& [atom, e] : mono) {
      f(atom);
      for (const auto& arg : atom->args) for_each_atom(arg.rep(), f);
    }
  }
}

template <class F>
void for_each_atom(const RatFunc& r, F&& f) {
  for_each_atom_poly(r.num, f);
  for (const auto& [d, k] : r.den) for_each_atom_poly(d, f);
}

}  // namespace eqwave::detail
