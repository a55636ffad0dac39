#include <gtest/gtest.h>

#include <cmath>

#include "eqwave/family.hpp"
#include "eqwave/parse.hpp"

using namespace eqwave;

namespace {

FamilyMember member(const char* f, const char* g, const char* h) {
  return make_member(parse(f), parse(g), parse(h));
}

std::set<std::string> S(std::initializer_list<const char*> xs) { return {xs.begin(), xs.end()}; }

}  // namespace

TEST(Signature, Examples) {
  auto s = signature(member("u_x", "0", "0"));
  EXPECT_EQ(s.deps[0], S({"v1"}));
  EXPECT_TRUE(s.deps[1].empty());
  EXPECT_TRUE(s.g_is_zero);
  EXPECT_TRUE(s.h_is_zero);
  EXPECT_FALSE(s.f_is_zero);

  EXPECT_EQ(signature(member("u_x + u_t - u_t", "0", "0")).deps[0], S({"v1"}));

  s = signature(member("u*u_x", "u_y", "u_t"));
  EXPECT_EQ(s.deps[0], S({"u", "v1"}));
  EXPECT_EQ(s.deps[1], S({"v2"}));
  EXPECT_EQ(s.deps[2], S({"v3"}));
  EXPECT_EQ(format_signature(s), "f:{u,u_x}; g:{u_y}; h:{u_t}");
}

TEST(Signature, FunctionArguments) {
  auto s = signature(member("m(u*x)*u_x", "p(y)", "0"));
  EXPECT_EQ(s.deps[0], S({"x", "u", "v1"}));
  EXPECT_EQ(s.deps[1], S({"y"}));
}

TEST(Signature, InvariantUnderRewriting) {
  FamilyMember a = member("(u_x^2 - u_t^2)/(u_x - u_t)", "x*u_y/x", "h0(t)*(1 + u)/(1 + u)");
  FamilyMember b = member("u_x + u_t", "u_y", "h0(t)");
  EXPECT_EQ(signature(a), signature(b));
  EXPECT_EQ(signature(a), signature(parse_member(format_member(a))));
}

TEST(IsLinear, Examples) {
  EXPECT_TRUE(is_linear(member("u_x", "u_y", "u")));
  EXPECT_FALSE(is_linear(member("(u_x + eps*m'(u)*u_t^2)/(1 + eps*m'(u)*u_x)", "0", "0")));
  EXPECT_TRUE(is_linear(member("x*u_x + t*u", "y*u_y", "0")));
  EXPECT_FALSE(is_linear(member("u*u_x", "u_y", "0")));
  EXPECT_FALSE(is_linear(member("u_x", "u_y", "u_x*u_y")));
}

TEST(Member, ParseAndFormat) {
  FamilyMember m = parse_member("# test\nf = u_x\n\nh=u\n");
  EXPECT_EQ(m.f, jet(0));
  EXPECT_TRUE(m.g.is_zero());
  EXPECT_EQ(m.h, sym("u"));
  EXPECT_TRUE(m.degenerate());
  EXPECT_FALSE(member("u_x", "u_y", "0").degenerate());
  FamilyMember r = parse_member(format_member(m));
  EXPECT_EQ(r.f, m.f);
  EXPECT_EQ(r.h, m.h);
  EXPECT_THROW(parse_member("f=u_x\nf=u_y"), MemberError);
  EXPECT_THROW(parse_member("k=u_x"), MemberError);
  EXPECT_THROW(parse_member("f=u_x +"), MemberError);
  EXPECT_THROW(member("u_xx", "0", "0"), MemberError);
  EXPECT_THROW(member("f", "0", "0"), MemberError);
}

TEST(Balance, Components) {
  FamilyMember m = member("u*u_x", "u_y", "x");
  BalanceForm b = balance_form(m);
  EXPECT_EQ(b.sigma1, m.f);
  EXPECT_EQ(b.sigma2, m.g);
  EXPECT_EQ(b.sigma3, -jet(2));
  EXPECT_EQ(b.sigma, m.h);
}

TEST(Residual, Examples) {
  FamilyMember m = member("u_x", "0", "0");
  auto travelling = [](double x, double, double t) { return x + t; };
  EXPECT_NEAR(residual(m, travelling, {0.3, -0.2, 0.1}, 1e-3), 0.0, 1e-9);
  auto quadratic = [](double, double, double t) { return t * t; };
  EXPECT_NEAR(residual(m, quadratic, {0.3, -0.2, 0.1}, 1e-3), -2.0, 1e-6);
}

TEST(Residual, UsesBoundFunctions) {
  FamilyMember m = member("m(u)*u_x", "0", "0");
  Binding b;
  b.set_function("m", unary_function([](double) { return 1.0; }, [](double) { return 0.0; },
                                     [](double) { return 0.0; }));
  auto wave = [](double x, double, double t) { return std::sin(x - t); };
  EXPECT_NEAR(residual(m, wave, {0.4, 0.0, 0.2}, 1e-3, b), 0.0, 1e-6);
  EXPECT_THROW(residual(m, wave, {0.4, 0.0, 0.2}, 1e-3), UnboundError);
}

// Superposition: linear homogeneous members give a residual linear in u.
TEST(Property, LinearSuperposition) {
  FamilyMember m = member("x*u_x + t*u", "(1 + y^2)*u_y - u_t", "x*u + u_y");
  ASSERT_TRUE(is_linear(m));
  auto u1 = [](double x, double y, double t) { return std::sin(x + 2 * y) * std::exp(0.3 * t); };
  auto u2 = [](double x, double y, double t) { return x * x * y - t * std::cos(x); };
  auto sum = [&](double x, double y, double t) { return u1(x, y, t) + u2(x, y, t); };
  for (auto p : {std::array<double, 3>{0.1, 0.2, 0.3}, {-0.5, 0.7, 0.0}, {0.9, -0.1, -0.4}}) {
    double r1 = residual(m, u1, p, 1e-3), r2 = residual(m, u2, p, 1e-3), r = residual(m, sum, p, 1e-3);
    EXPECT_NEAR(r, r1 + r2, 1e-8 * (1 + std::abs(r)));
  }
}

// Halving the step reduces the error against the exact limit by about 4x.
TEST(Property, ResidualSecondOrder) {
  FamilyMember m = member("u*u_x", "u_y^2/2", "x*u");
  auto u = [](double x, double y, double t) { return std::sin(x) + std::cos(y) * std::exp(t); };
  for (auto p : {std::array<double, 3>{0.3, 0.2, 0.1}, {-0.6, 0.5, 0.4}}) {
    double x = p[0], y = p[1], t = p[2];
    double uu = u(x, y, t);
    // f_x + g_y + h - u_tt by hand.
    double exact = std::cos(x) * std::cos(x) - uu * std::sin(x) +
                   std::sin(y) * std::exp(t) * std::cos(y) * std::exp(t) + x * uu - std::cos(y) * std::exp(t);
    double e1 = std::abs(residual(m, u, p, 2e-2) - exact);
    double e2 = std::abs(residual(m, u, p, 1e-2) - exact);
    double ratio = e1 / e2;
    EXPECT_GE(ratio, 3.0);
    EXPECT_LE(ratio, 5.0);
  }
}
