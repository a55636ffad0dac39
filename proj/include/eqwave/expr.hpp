#pragma once

// Immutable symbolic expressions over jet coordinates, parameters and opaque
// arbitrary functions. Every Expr is held in rational normal form: a
// polynomial numerator over exact rationals divided by a product of
// canonical denominator factors. Two Exprs compare equal iff their
// difference is zero as a rational function.

#include <gmpxx.h>

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace eqwave {

using Rational = mpq_class;

namespace detail {
struct RatFunc;
struct AtomNode;
}  // namespace detail

enum class SymbolKind {
  independent_coordinate,  // x, y, t
  dependent_variable,      // u
  jet_variable,            // v1, v2, v3 (u_x, u_y, u_t) and second jets
  group_parameter,         // eps
  free_function_slot,      // f, g, h
  parameter,               // anything else (extended-manifold coordinates, ...)
};

SymbolKind symbol_kind(std::string_view name);

// Canonical jet symbol names. Printing maps them to u_x, u_y, u_t, u_xx, ...
inline constexpr std::string_view kJet[3] = {"v1", "v2", "v3"};
inline constexpr std::string_view kBase[3] = {"x", "y", "t"};
// Second jets w_ij = u_{x^i x^j}, i <= j.
std::string second_jet_name(int i, int j);

class Expr {
 public:
  enum class Kind { constant, symbol, function, sum, product, power };

  Expr();  // zero
  Expr(long value);
  Expr(const Rational& value);

  static Expr symbol(std::string name);
  // Opaque function application name(args) with derivative multi-index
  // `orders` (one entry per argument; empty means no derivative).
  static Expr function(std::string name, std::vector<Expr> args,
                       std::vector<int> orders = {});

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  Expr& operator+=(const Expr& o) { return *this = *this + o; }
  Expr& operator-=(const Expr& o) { return *this = *this - o; }
  Expr& operator*=(const Expr& o) { return *this = *this * o; }
  friend Expr pow(const Expr& base, int exponent);

  friend bool operator==(const Expr& a, const Expr& b);
  friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }

  bool is_zero() const;
  bool is_constant() const;
  std::optional<Rational> constant_value() const;

  // Tree view of the canonical form.
  Kind kind() const;
  std::vector<Expr> operands() const;  // sum / product terms
  Expr base() const;                   // power only
  int exponent() const;                // power only
  const std::string& name() const;     // symbol / function only
  std::vector<Expr> arguments() const;  // function only
  std::vector<int> orders() const;      // function only

  // Numerator and denominator of the normal form.
  Expr numerator() const;
  Expr denominator() const;

  std::string str() const;

  const detail::RatFunc& rep() const { return *rep_; }
  explicit Expr(std::shared_ptr<const detail::RatFunc> rep);

 private:
  std::shared_ptr<const detail::RatFunc> rep_;
  const detail::AtomNode& single_atom() const;
};

std::ostream& operator<<(std::ostream& os, const Expr& e);

// Convenience constructors for the reserved coordinates.
Expr sym(std::string_view name);
Expr jet(int axis);       // 0,1,2 -> v1,v2,v3
Expr base_coord(int axis);  // 0,1,2 -> x,y,t
Expr jet2(int i, int j);

// Canonical form is maintained by construction; normalize exists for callers
// that want the operation spelled out.
inline Expr normalize(const Expr& e) { return e; }

Expr partial(const Expr& e, std::string_view symbol_name);
Expr partial(const Expr& e, const Expr& symbol);
Expr partial(const Expr& e, std::string_view symbol_name, int order);

class JetDependenceError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// D_{x^i} = d/dx^i + v_i d/du on functions of (x, y, t, u).
// Throws JetDependenceError if e contains jet variables.
Expr total_derivative(const Expr& e, int axis);
// Same operator applied with jets held frozen as parameters.
Expr frozen_total_derivative(const Expr& e, int axis);
// Second-order total derivative D_i on functions of (x,y,t,u,v1,v2,v3):
// d/dx^i + v_i d/du + sum_j u_{ij} d/dv_j.
Expr jet_total_derivative(const Expr& e, int axis);

// Simultaneous substitution of symbols.
Expr substitute(const Expr& e, const std::map<std::string, Expr>& replacements);
// Replace every application of `name` (and its formal derivatives) by `body`,
// a function of `params`.
Expr substitute_function(const Expr& e, const std::string& name,
                         const std::vector<std::string>& params, const Expr& body);

// Symbol and function-name dependence.
bool depends_on(const Expr& e, std::string_view symbol_name);
std::vector<std::string> free_symbols(const Expr& e);
std::vector<std::string> function_names(const Expr& e);

// Coefficients of e viewed as a polynomial in the listed symbols (each key is
// the exponent vector). Symbols must not occur in denominators or inside
// function arguments.
std::map<std::vector<int>, Expr> coefficients(const Expr& e,
                                              const std::vector<std::string>& vars);

}  // namespace eqwave
