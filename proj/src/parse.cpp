#include "eqwave/parse.hpp"

#include <cctype>
#include <map>
#include <vector>

namespace eqwave {

namespace {

const std::map<std::string, std::string>& reserved() {
  static const std::map<std::string, std::string> names = {
      {"x", "x"},       {"y", "y"},       {"t", "t"},       {"u", "u"},       {"eps", "eps"},
      {"u_x", "v1"},    {"u_y", "v2"},    {"u_t", "v3"},    {"v1", "v1"},     {"v2", "v2"},
      {"v3", "v3"},     {"u_xx", "w11"},  {"u_xy", "w12"},  {"u_xt", "w13"},  {"u_yy", "w22"},
      {"u_yt", "w23"},  {"u_tt", "w33"},  {"f", "f"},       {"g", "g"},       {"h", "h"}};
  return names;
}

class Parser {
 public:
  Parser(std::string_view text, const ParseOptions& options) : text_(text), options_(options) {}

  Expr run() {
    skip();
    if (at_end()) throw ParseError("empty expression", pos_);
    Expr e = expr();
    skip();
    if (!at_end()) throw ParseError(std::string("unexpected '") + text_[pos_] + "'", pos_);
    return e;
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }
  void skip() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) {
      if (at_end()) throw ParseError(std::string("expected '") + c + "' but input ended", pos_);
      throw ParseError(std::string("expected '") + c + "'", pos_);
    }
  }

  Expr expr() {
    Expr e = term();
    for (;;) {
      if (accept('+'))
        e = e + term();
      else if (accept('-'))
        e = e - term();
      else
        return e;
    }
  }

  Expr term() {
    Expr e = factor();
    for (;;) {
      if (accept('*')) {
        e = e * factor();
      } else if (accept('/')) {
        std::size_t at = pos_;
        Expr d = factor();
        if (d.is_zero()) throw ParseError("division by zero", at);
        e = e / d;
      } else {
        return e;
      }
    }
  }

  Expr factor() {
    if (accept('-')) return -factor();
    Expr b = base();
    if (accept('^')) {
      bool neg = accept('-');
      skip();
      std::size_t at = pos_;
      long n = integer();
      if (neg && b.is_zero()) throw ParseError("zero raised to a negative power", at);
      return pow(b, static_cast<int>(neg ? -n : n));
    }
    return b;
  }

  long integer() {
    skip();
    std::size_t start = pos_;
    while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    if (start == pos_) throw ParseError("expected integer", pos_);
    return std::stol(std::string(text_.substr(start, pos_ - start)));
  }

  Expr number() {
    std::size_t start = pos_;
    while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    std::string digits(text_.substr(start, pos_ - start));
    std::string frac;
    if (peek() == '.') {
      ++pos_;
      std::size_t fs = pos_;
      while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
      frac = std::string(text_.substr(fs, pos_ - fs));
    }
    if (digits.empty() && frac.empty()) throw ParseError("malformed number", start);
    Rational value(digits.empty() ? "0" : digits + frac, 10);
    Rational scale(1);
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    value /= scale;
    value.canonicalize();
    return Expr(value);
  }

  Expr base() {
    skip();
    if (at_end()) throw ParseError("unexpected end of input", pos_);
    char c = peek();
    if (c == '(') {
      ++pos_;
      Expr e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    throw ParseError(std::string("unexpected '") + c + "'", pos_);
  }

  Expr identifier() {
    std::size_t start = pos_;
    while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_') ++pos_;
    std::string name(text_.substr(start, pos_ - start));
    std::vector<int> orders;
    int primes = 0;
    while (peek() == '\'') {
      ++pos_;
      ++primes;
    }
    bool bracket = false;
    if (primes == 0 && peek() == '[') {
      bracket = true;
      ++pos_;
      orders.push_back(static_cast<int>(integer()));
      while (accept(',')) orders.push_back(static_cast<int>(integer()));
      expect(']');
    }
    skip();
    if (peek() == '(' ) {
      ++pos_;
      std::vector<Expr> args{expr()};
      while (accept(',')) args.push_back(expr());
      expect(')');
      if (primes > 0) {
        if (args.size() != 1) throw ParseError("primes are only allowed on one-argument functions", start);
        orders = {primes};
      }
      if (bracket && orders.size() != args.size())
        throw ParseError("derivative multi-index does not match the number of arguments", start);
      return Expr::function(name, std::move(args), std::move(orders));
    }
    if (primes > 0 || bracket) throw ParseError("expected '(' after function name", pos_);
    auto it = reserved().find(name);
    if (it != reserved().end()) return Expr::symbol(it->second);
    if (options_.allow_any_symbol || options_.extra_symbols.count(name)) return Expr::symbol(name);
    throw UnknownSymbolError(name, start);
  }

  std::string_view text_;
  const ParseOptions& options_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view text, const ParseOptions& options) { return Parser(text, options).run(); }

}  // namespace eqwave
