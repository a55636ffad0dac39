#pragma once

// Text grammar for expressions:
//
//   expr   := term (('+' | '-') term)*
//   term   := factor (('*' | '/') factor)*
//   factor := '-' factor | base ('^' '-'? integer)?
//   base   := number | ident | ident "'"* '(' expr (',' expr)* ')'
//           | ident '[' integer (',' integer)* ']' '(' expr (',' expr)* ')'
//           | '(' expr ')'
//
// Reserved identifiers: x y t u u_x u_y u_t eps, the second jets
// u_xx u_xy u_xt u_yy u_yt u_tt, and the slots f g h. Numbers may carry a
// decimal point and are read exactly.

#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

#include "eqwave/expr.hpp"

namespace eqwave {

class ParseError : public std::invalid_argument {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::invalid_argument(what + " at position " + std::to_string(position)), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class UnknownSymbolError : public ParseError {
 public:
  UnknownSymbolError(const std::string& name, std::size_t position)
      : ParseError("unknown symbol '" + name + "'", position), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

struct ParseOptions {
  std::set<std::string> extra_symbols;  // accepted in addition to the reserved set
  bool allow_any_symbol = false;
};

Expr parse(std::string_view text, const ParseOptions& options = {});

}  // namespace eqwave
