#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "eqwave/eval.hpp"
#include "eqwave/expr.hpp"
#include "eqwave/parse.hpp"

using namespace eqwave;

namespace {

Expr P(std::string_view s) { return parse(s, ParseOptions{{}, true}); }

FunctionCallback square() {
  return unary_function([](double u) { return u * u; }, [](double u) { return 2 * u; },
                        [](double) { return 2.0; });
}

// Random expressions over a few symbols and opaque functions.
class ExprGen {
 public:
  explicit ExprGen(unsigned seed) : rng_(seed) {}

  Expr leaf() {
    static const char* names[] = {"x", "y", "t", "u", "v1", "v2", "v3", "eps"};
    switch (pick(5)) {
      case 0:
        return Expr(static_cast<long>(pick(7)) - 3);
      case 1:
        return Expr::function("m", {sym("u")});
      case 2:
        return Expr::function("m", {sym("u")}, {1});
      case 3:
        return Expr::function("p", {sym("x") + sym("y")});
      default:
        return sym(names[pick(8)]);
    }
  }

  Expr expr(int depth) {
    if (depth == 0) return leaf();
    Expr a = expr(depth - 1);
    Expr b = expr(depth - 1);
    switch (pick(5)) {
      case 0:
        return a + b;
      case 1:
        return a - b;
      case 2:
        return a * b;
      case 3:
        return b.is_zero() ? a : a / (b * b + 2);
      default:
        return pow(a, 2) + b;
    }
  }

  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

 private:
  std::mt19937 rng_;
};

Binding random_binding(ExprGen& gen) {
  Binding b;
  for (const char* n : {"x", "y", "t", "u", "v1", "v2", "v3", "eps"}) b.set(n, gen.uniform(-1, 1));
  b.set_function("m", expression_function({"s"}, P("s^3/3 + s/(2 + s^2)")));
  b.set_function("p", expression_function({"s"}, P("1/(3 + s^2) - s")));
  return b;
}

}  // namespace

TEST(Parse, JetSymbols) {
  Expr e = parse("u_t");
  EXPECT_EQ(e.kind(), Expr::Kind::symbol);
  EXPECT_EQ(e.name(), "v3");
  EXPECT_EQ(parse("u_x").name(), "v1");
  EXPECT_EQ(parse("u_y").name(), "v2");
}

TEST(Parse, SquareNormalizesToPower) {
  Expr e = parse("u_x*u_x");
  ASSERT_EQ(e.kind(), Expr::Kind::power);
  EXPECT_EQ(e.base(), jet(0));
  EXPECT_EQ(e.exponent(), 2);
}

TEST(Parse, JetMapOfFirstFamily) {
  Expr e = parse("u_x/(1 - eps*m'(u)*u_x)");
  ASSERT_EQ(e.kind(), Expr::Kind::product);
  auto ops = e.operands();
  ASSERT_EQ(ops.size(), 2u);
  EXPECT_EQ(ops[0], jet(0));
  ASSERT_EQ(ops[1].kind(), Expr::Kind::power);
  EXPECT_EQ(ops[1].exponent(), -1);
  EXPECT_EQ(ops[1].base(), 1 - sym("eps") * Expr::function("m", {sym("u")}, {1}) * jet(0));
  EXPECT_EQ(ops[1].base().kind(), Expr::Kind::sum);
}

TEST(Parse, FunctionDerivativeNotation) {
  Expr m1 = parse("m'(u)");
  EXPECT_EQ(m1.kind(), Expr::Kind::function);
  EXPECT_EQ(m1.orders(), std::vector<int>{1});
  EXPECT_EQ(parse("m''(u)"), partial(parse("m(u)"), "u", 2));
  EXPECT_EQ(parse("m[1,0](u, y)"), partial(parse("m(u, y)"), "u"));
  EXPECT_EQ(parse("m[2](u)"), parse("m''(u)"));
}

TEST(Parse, Errors) {
  try {
    parse("x + * y");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 4u);
  }
  EXPECT_THROW(parse("x + q"), UnknownSymbolError);
  EXPECT_THROW(parse(""), ParseError);
  EXPECT_THROW(parse("(x + y"), ParseError);
  EXPECT_THROW(parse("m'(u, y)"), ParseError);
  EXPECT_THROW(parse("x/0"), ParseError);
  EXPECT_NO_THROW(parse("x + q", ParseOptions{{"q"}, false}));
}

TEST(Parse, DecimalNumbersAreExact) {
  EXPECT_EQ(parse("0.25*x"), parse("x/4"));
  EXPECT_EQ(parse("1.5"), Expr(Rational(3, 2)));
}

TEST(Partial, Examples) {
  EXPECT_EQ(partial(parse("u_x^2"), "v1"), parse("2*u_x"));
  EXPECT_EQ(partial(parse("m(u)"), "u"), parse("m'(u)"));
  EXPECT_EQ(partial(parse("x*u_x + m(u)*u_t"), "u"), parse("m'(u)*u_t"));
}

TEST(Partial, ChainRuleThroughArguments) {
  EXPECT_EQ(partial(parse("m(u*x)"), "x"), parse("u*m'(u*x)"));
  EXPECT_EQ(partial(parse("m(u, y)"), "y"), parse("m[0,1](u, y)"));
  EXPECT_EQ(partial(P("1/(1 - q)"), "q"), P("1/(1 - q)^2"));
}

TEST(TotalDerivative, Examples) {
  EXPECT_EQ(total_derivative(sym("u"), 0), jet(0));
  Expr eta = parse("eta(x, y, t, u)");
  EXPECT_EQ(total_derivative(eta, 0), parse("eta[1,0,0,0](x, y, t, u) + eta[0,0,0,1](x, y, t, u)*u_x"));
  EXPECT_EQ(total_derivative(parse("x*u"), 2), parse("x*u_t"));
  EXPECT_THROW(total_derivative(parse("u_x"), 0), JetDependenceError);
}

TEST(Substitute, Examples) {
  EXPECT_EQ(substitute(parse("u_x + u_y"), {{"v2", Expr(0)}}), jet(0));
  EXPECT_EQ(substitute(parse("f"), {{"f", jet(0)}}), jet(0));
  EXPECT_EQ(substitute(parse("x"), {{"x", parse("x - eps*m(u)")}}), parse("x - eps*m(u)"));
  // Simultaneous, not sequential.
  EXPECT_EQ(substitute(parse("x + 2*y"), {{"x", sym("y")}, {"y", sym("x")}}), parse("y + 2*x"));
  // Inside function arguments.
  EXPECT_EQ(substitute(parse("m(u)"), {{"u", parse("u + x")}}), parse("m(u + x)"));
}

TEST(Substitute, FunctionBody) {
  Expr e = parse("eps*m'(u)*u_x + m(u)");
  EXPECT_EQ(substitute_function(e, "m", {"s"}, P("s^2")), parse("2*eps*u*u_x + u^2"));
  Expr two = parse("m[1,0](u, y)");
  EXPECT_EQ(substitute_function(two, "m", {"a", "b"}, P("a*b")), sym("y"));
}

TEST(Normalize, Examples) {
  EXPECT_TRUE((P("u_x/(1 - q)") - P("u_x*(1 - q)^-1")).is_zero());
  EXPECT_EQ(P("(1 - q)*u_x/(1 - q)"), jet(0));
  EXPECT_EQ(P("(x^2 - y^2)/(x - y)"), P("x + y"));
  EXPECT_EQ(P("(q - 1)/(1 - q)"), Expr(-1));
  EXPECT_EQ(P("x/(x*y)"), P("1/y"));
}

TEST(Normalize, TransformedFluxOfFirstFamily) {
  // Printed form versus the same map expanded over one denominator.
  Expr printed = parse("f - eps*m'(u)*(g*u_y - u_t^2)/(1 - eps*m'(u)*u_x)");
  Expr expanded = parse("((1 - eps*m'(u)*u_x)*f - eps*m'(u)*g*u_y + eps*m'(u)*u_t^2)/(1 - eps*m'(u)*u_x)");
  EXPECT_TRUE((printed - expanded).is_zero());

  // Independent numeric oracle: evaluate both closed forms directly.
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int i = 0; i < 100; ++i) {
    double f = U(rng), g = U(rng), v1 = U(rng) * 0.5, v2 = U(rng) * 0.5, v3 = U(rng) * 0.5, u = U(rng);
    double eps = 0.01 + 0.29 * (U(rng) + 1) / 2;
    double mp = 2 * u;
    double D = 1 - eps * mp * v1;
    double direct = f - eps * mp * (g * v2 - v3 * v3) / D;
    Binding b;
    b.values = {{"f", f}, {"g", g}, {"v1", v1}, {"v2", v2}, {"v3", v3}, {"u", u}, {"eps", eps}};
    b.set_function("m", square());
    EXPECT_NEAR(eval(printed, b), direct, 1e-12);
    EXPECT_NEAR(eval(expanded, b), direct, 1e-12);
  }
}

TEST(Eval, Examples) {
  Binding b;
  b.values = {{"v1", 0.5}, {"u", 3.0}, {"eps", 0.1}};
  b.set_function("m", square());
  // Hand evaluation: 0.5 / (1 - 0.1*6*0.5).
  EXPECT_NEAR(eval(parse("u_x/(1 - eps*m'(u)*u_x)"), b), 0.5 / 0.7, 1e-15);
  EXPECT_DOUBLE_EQ(eval(parse("x + y"), Binding{{{"x", 1.0}, {"y", 2.0}}, {}}), 3.0);
  try {
    eval(P("1/(1 - q)"), Binding{{{"q", 1.0}}, {}});
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(e.subexpression().find("q"), std::string::npos);
  }
  EXPECT_THROW(eval(parse("x + y"), Binding{{{"x", 1.0}}, {}}), UnboundError);
}

TEST(Inspect, CoefficientsAndDependence) {
  Expr e = parse("a(x)*u_x^2 + b(x)*u_x + c(x)");
  auto cs = coefficients(e, {"v1"});
  ASSERT_EQ(cs.size(), 3u);
  EXPECT_EQ(cs.at({2}), parse("a(x)"));
  EXPECT_EQ(cs.at({0}), parse("c(x)"));
  EXPECT_TRUE(depends_on(parse("m(u + x)"), "x"));
  EXPECT_FALSE(depends_on(parse("u_t - u_t + u_x"), "v3"));
}

// --- properties ------------------------------------------------------------

TEST(Property, CanonicalForm) {
  ExprGen gen(11);
  for (int i = 0; i < 60; ++i) {
    Expr a = gen.expr(2), b = gen.expr(2), c = gen.expr(2);
    EXPECT_EQ((a + b) * c, a * c + b * c);
    Expr d = b * b + 1;
    EXPECT_EQ(a / d + c, (a + c * d) / d);
    EXPECT_EQ(pow(d, 3) / d, d * d);
    EXPECT_EQ(a - a, Expr(0));
  }
}

TEST(Property, PartialIsLinear) {
  ExprGen gen(12);
  for (int i = 0; i < 60; ++i) {
    Expr a = gen.expr(2), b = gen.expr(3);
    for (const char* s : {"x", "u", "v1"}) EXPECT_EQ(partial(a + b, s), partial(a, s) + partial(b, s));
  }
}

TEST(Property, DerivativeMatchesCentralDifference) {
  ExprGen gen(13);
  const double h = 1e-4;
  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    Expr e = gen.expr(3);
    Binding b = random_binding(gen);
    const char* names[] = {"x", "u", "v1", "eps"};
    const char* s = names[gen.pick(4)];
    try {
      Binding lo = b, hi = b;
      hi.values[s] += h;
      lo.values[s] -= h;
      double fd = (eval(e, hi) - eval(e, lo)) / (2 * h);
      double exact = eval(partial(e, s), b);
      double scale = std::max({1.0, std::abs(eval(e, b)), std::abs(exact)});
      EXPECT_LE(std::abs(fd - exact), 10 * h * h * scale * 100) << e << " d/d" << s;
      ++checked;
    } catch (const DomainError&) {
    }
  }
  EXPECT_GT(checked, 150);
}

TEST(Property, PrintParseRoundTrip) {
  ExprGen gen(14);
  for (int i = 0; i < 100; ++i) {
    Expr e = gen.expr(3);
    EXPECT_EQ(parse(e.str()), e) << e;
  }
}
