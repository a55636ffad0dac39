#pragma once

// Numeric evaluation of expressions.

#include <functional>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "eqwave/expr.hpp"

namespace eqwave {

// Values of a bound arbitrary function and its partial derivatives:
// callback(args, orders) returns d^{|orders|} F / d args^orders at args.
using FunctionCallback = std::function<double(std::span<const double>, std::span<const int>)>;

// Raised when a denominator vanishes (|value| below kSingularThreshold) or a
// function returns a non-finite value.
class DomainError : public std::runtime_error {
 public:
  DomainError(const std::string& what, std::string subexpression)
      : std::runtime_error(what), subexpression_(std::move(subexpression)) {}
  const std::string& subexpression() const { return subexpression_; }

 private:
  std::string subexpression_;
};

class UnboundError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kSingularThreshold = 1e-12;

struct Binding {
  std::map<std::string, double> values;
  std::map<std::string, FunctionCallback> functions;

  Binding& set(const std::string& name, double v) {
    values[name] = v;
    return *this;
  }
  Binding& set_function(const std::string& name, FunctionCallback f) {
    functions[name] = std::move(f);
    return *this;
  }
};

// One-argument function from its value and first two derivatives.
FunctionCallback unary_function(std::function<double(double)> f0, std::function<double(double)> f1,
                                std::function<double(double)> f2);

// Function given by a symbolic body in `params`; all derivative orders are
// supported (derivatives are taken symbolically and cached).
FunctionCallback expression_function(std::vector<std::string> params, Expr body);

// Compiled form of an expression. Symbols listed in `slots` are read from the
// argument span at call time; every other symbol must be bound in `binding`.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  CompiledExpr(const Expr& e, const std::vector<std::string>& slots, const Binding& binding);

  double operator()(std::span<const double> slot_values) const;

 struct Impl;

 private:
  std::shared_ptr<const Impl> impl_;
};

double eval(const Expr& e, const Binding& binding);

}  // namespace eqwave
