#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "eqwave/eval.hpp"
#include "eqwave/generators.hpp"
#include "eqwave/parse.hpp"

using namespace eqwave;

namespace {

Expr P(std::string_view s) { return parse(s, ParseOptions{{}, true}); }
Expr d(const Expr& e, const char* s) { return partial(e, s); }
Expr v(int i) { return jet(i - 1); }

// φ¹, φ² of (x, y), φ³ of t, everything else generic.
FreeData restricted_xy() {
  FreeData fd = FreeData::generic();
  fd.phi[0] = P("phi1(x, y)");
  fd.phi[1] = P("phi2(x, y)");
  fd.phi[2] = P("phi3(t)");
  return fd;
}

}  // namespace

TEST(Build, ZeroField) {
  GeneratorSet gs = build_general(FreeData::zero());
  for (const auto& [k, e] : generator_entries(gs)) EXPECT_TRUE(e.is_zero()) << k;
  GeneratorSet solved = solve_wave_determining(gs);
  for (const auto& [k, e] : generator_entries(solved)) EXPECT_TRUE(e.is_zero()) << k;
  EXPECT_TRUE(compute_H(solved).is_zero());
  AdditionalComponents c = additional_components(solved);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) {
      EXPECT_TRUE(c.S_lower[i][j].is_zero());
      EXPECT_TRUE(c.S_upper[i][j].is_zero());
    }
  EXPECT_TRUE(c.calT.is_zero());
  EXPECT_TRUE(c.T_upper[2].is_zero());
}

TEST(Build, ZetaFromEta) {
  FreeData fd;
  fd.eta = P("eta(x, y, t, u)");
  GeneratorSet gs = build_general(fd);
  EXPECT_EQ(gs.zeta[0], d(fd.eta, "x") + d(fd.eta, "u") * v(1));
}

TEST(Build, GenericPhi3LeavesResidual) {
  FreeData fd;
  fd.phi[2] = P("phi3(x, y, t, u)");
  Expr r = wave_determining_residual(build_general(fd));
  ASSERT_FALSE(r.is_zero());
  // Hand expansion: ζ₃ + μ³ = 2φ³_t v3 + φ³_u v3² - (D_x φ³) f - (D_y φ³) g.
  Expr p3 = fd.phi[2];
  auto cs = coefficients(r, {"v1", "v2", "v3"});
  EXPECT_EQ(cs.at({0, 0, 2}), d(p3, "u"));
  EXPECT_EQ(cs.at({0, 0, 1}), 2 * d(p3, "t"));
  EXPECT_EQ(cs.at({1, 0, 0}), -d(p3, "u") * sym("f"));
  EXPECT_EQ(cs.count({1, 0, 1}), 0u);
}

TEST(Build, RejectsBadArguments) {
  FreeData fd;
  fd.phi[0] = P("u_x");
  EXPECT_THROW(build_general(fd), FreeDataError);
  fd = FreeData{};
  fd.lambda = P("lambda(x, t)");
  EXPECT_THROW(build_general(fd), FreeDataError);
  fd = FreeData{};
  fd.alpha[0][1] = P("a(x)");
  EXPECT_THROW(build_general(fd), FreeDataError);
}

TEST(Solve, GenericData) {
  GeneratorSet gs = solve_wave_determining(build_general(FreeData::generic()));
  for (const char* s : {"x", "y", "u"}) EXPECT_TRUE(d(gs.xi[2], s).is_zero());
  EXPECT_TRUE(wave_determining_residual(gs).is_zero());
  EXPECT_EQ(gs.data.w, P("alpha33(x,y,t,u) + 2*phi3'(t) + eta[0,0,0,1](x,y,t,u)"));
  EXPECT_EQ(gs.data.alpha[0][2], P("phi1[0,0,1,0](x,y,t,u)"));
  EXPECT_EQ(gs.data.alpha[2][1], -P("phi2[0,0,1,0](x,y,t,u)"));
  EXPECT_EQ(gs.data.beta[2], -P("eta[0,0,1,0](x,y,t,u)"));
}

TEST(Solve, FirstFamilyFlow) {
  FreeData fd;
  fd.phi[0] = -P("m(u)");
  GeneratorSet gs = solve_wave_determining(build_general(fd));
  EXPECT_EQ(gs.zeta[2], -P("m'(u)*u_t*u_x"));
  EXPECT_EQ(gs.mu[2], P("m'(u)*u_t*u_x"));
}

TEST(Solve, ReportsFailingConstraint) {
  FreeData fd;
  fd.phi[0] = P("t*x");
  fd.alpha[0][2] = Expr(1);
  fd.alpha[2][0] = Expr(-1);
  try {
    solve_wave_determining(build_general(fd));
    FAIL();
  } catch (const FreeDataError& e) {
    EXPECT_NE(std::string(e.what()).find("alpha13"), std::string::npos);
  }
  fd = FreeData{};
  fd.phi[2] = P("x*t");
  EXPECT_THROW(solve_wave_determining(build_general(fd)), FreeDataError);
  fd = FreeData{};
  fd.eta = P("u^2");
  EXPECT_THROW(solve_wave_determining(build_general(fd)), FreeDataError);
  EXPECT_NO_THROW(solve_wave_determining(build_general(fd), true));
}

// The explicit most-general block, typed in with φ for the block's ξ.
TEST(Solve, MatchesExplicitBlock) {
  GeneratorSet gs = solve_wave_determining(build_general(FreeData::generic()));
  Expr e = P("eta(x,y,t,u)"), p1 = P("phi1(x,y,t,u)"), p2 = P("phi2(x,y,t,u)"), p3 = P("phi3(t)");
  Expr a11 = P("alpha11(x,y,t,u)"), a22 = P("alpha22(x,y,t,u)"), a33 = P("alpha33(x,y,t,u)");
  Expr a12 = P("alpha12(x,y,t,u)"), b1 = P("beta1(x,y,t,u)"), b2 = P("beta2(x,y,t,u)");
  Expr f = sym("f"), g = sym("g");
  EXPECT_EQ(gs.xi[0], -p1);
  EXPECT_EQ(gs.xi[2], -p3);
  EXPECT_EQ(gs.zeta[0], d(e, "x") + d(e, "u") * v(1) + (d(p1, "x") + d(p1, "u") * v(1)) * v(1) +
                            (d(p2, "x") + d(p2, "u") * v(1)) * v(2));
  EXPECT_EQ(gs.zeta[1], d(e, "y") + d(e, "u") * v(2) + (d(p1, "y") + d(p1, "u") * v(2)) * v(1) +
                            (d(p2, "y") + d(p2, "u") * v(2)) * v(2));
  EXPECT_EQ(gs.zeta[2], d(e, "t") + d(e, "u") * v(3) + (d(p1, "t") + d(p1, "u") * v(3)) * v(1) +
                            (d(p2, "t") + d(p2, "u") * v(3)) * v(2) + d(p3, "t") * v(3));
  EXPECT_EQ(gs.mu[0], (d(e, "u") + a33 + 2 * d(p3, "t") + d(p2, "u") * v(2) - d(p1, "x")) * f -
                          (d(p1, "y") + d(p1, "u") * v(2)) * g + a11 * v(1) + a12 * v(2) +
                          (2 * d(p1, "t") + d(p1, "u") * v(3)) * v(3) + b1);
  EXPECT_EQ(gs.mu[1], (d(e, "u") + a33 + 2 * d(p3, "t") + d(p1, "u") * v(1) - d(p2, "y")) * g -
                          (d(p2, "x") + d(p2, "u") * v(1)) * f - a12 * v(1) + a22 * v(2) +
                          (2 * d(p2, "t") + d(p2, "u") * v(3)) * v(3) + b2);
}

TEST(ComputeH, ZeroHDisplay) {
  // With h = 0 the h-component is the divergence of (μ¹, μ², -ζ₃).
  GeneratorSet gs = solve_wave_determining(build_general(restricted_xy()));
  Expr H = substitute(gs.H, {{"h", Expr(0)}});
  Expr display = d(gs.mu[0], "x") + d(gs.mu[0], "u") * v(1) + d(gs.mu[1], "y") + d(gs.mu[1], "u") * v(2) -
                 d(gs.zeta[2], "t") - d(gs.zeta[2], "u") * v(3);
  EXPECT_EQ(H, -display);
}

TEST(ComputeH, GammaOnlyNumeric) {
  FreeData fd;
  fd.eta = P("gamma(x, y, t)");
  GeneratorSet gs = solve_wave_determining(build_general(fd), true);
  // Oracle: bind γ = sin(x y) e^{t} + t^3 x and difference twice in t.
  auto gamma = [](double x, double y, double t) { return std::sin(x * y) * std::exp(t) + t * t * t * x; };
  Binding b;
  b.set_function("gamma", [&](std::span<const double> a, std::span<const int> o) {
    double x = a[0], y = a[1], t = a[2];
    int ox = o.empty() ? 0 : o[0], oy = o.empty() ? 0 : o[1], ot = o.empty() ? 0 : o[2];
    if (ox == 0 && oy == 0 && ot == 0) return gamma(x, y, t);
    if (ox == 0 && oy == 0 && ot == 1) return std::sin(x * y) * std::exp(t) + 3 * t * t * x;
    if (ox == 0 && oy == 0 && ot == 2) return std::sin(x * y) * std::exp(t) + 6 * t * x;
    throw std::invalid_argument("unexpected derivative");
  });
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int i = 0; i < 20; ++i) {
    double x = U(rng), y = U(rng), t = U(rng), hs = 1e-3;
    b.values = {{"x", x}, {"y", y}, {"t", t}, {"u", U(rng)}, {"v1", U(rng)}, {"v2", U(rng)}, {"v3", U(rng)},
                {"f", U(rng)}, {"g", U(rng)}, {"h", U(rng)}};
    double fd2 = (gamma(x, y, t + hs) - 2 * gamma(x, y, t) + gamma(x, y, t - hs)) / (hs * hs);
    EXPECT_NEAR(eval(gs.H, b), fd2, 1e-5);
  }
}

TEST(Additional, S13Display) {
  GeneratorSet gs = solve_wave_determining(build_general(FreeData::generic()));
  AdditionalComponents c = additional_components(gs);
  const Expr& F1 = c.F[0];
  Expr paper = 2 * d(F1, "v3") + d(F1, "g") * sym("s23") + d(F1, "h") * sym("t3");
  EXPECT_EQ(substitute(c.S_upper[0][2], {{"s13", Expr(0)}}), substitute(paper, {{"s13", Expr(0)}}));
  // F¹ is the stated combination.
  Expr F = -sym("s1_1") * gs.xi[0] - sym("s1_2") * gs.xi[1] - sym("s1_3") * gs.xi[2] - sym("sigma1") * gs.eta -
           sym("s11") * gs.zeta[0] - sym("s12") * gs.zeta[1] - sym("s13") * gs.zeta[2] + gs.mu[0];
  EXPECT_EQ(F1, F);
}

TEST(Additional, T3ReducesToZetaCondition) {
  GeneratorSet gs = solve_wave_determining(build_general(restricted_xy()), true);
  AdditionalComponents c = additional_components(gs);
  Expr T3 = substitute(c.T_upper[2], {{"s13", Expr(0)}, {"s23", Expr(0)}, {"t3", Expr(0)}});
  const Expr& z = gs.zeta[2];
  Expr expected = 2 * (d(d(z, "t"), "v3") + d(d(z, "u"), "v3") * v(3) + d(z, "u"));
  EXPECT_EQ(T3, expected);
}

TEST(Additional, LinearInExtendedCoordinates) {
  GeneratorSet gs = solve_wave_determining(build_general(FreeData::generic()));
  AdditionalComponents c = additional_components(gs);
  std::vector<std::string> ext = {"sigma1", "sigma2", "tau"};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) {
      ext.push_back(s_lower_name(i, j));
      ext.push_back(s_upper_name(i, j));
    }
  for (int j = 0; j < 3; ++j) {
    ext.push_back(t_lower_name(j));
    ext.push_back(t_upper_name(j));
  }
  std::vector<Expr> comps = {c.calS[0], c.calS[1], c.calT};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) comps.insert(comps.end(), {c.S_lower[i][j], c.S_upper[i][j]});
  for (int j = 0; j < 3; ++j) comps.insert(comps.end(), {c.T_lower[j], c.T_upper[j]});
  for (const auto& e : comps)
    for (const auto& a : ext)
      for (const auto& b : ext) ASSERT_TRUE(d(d(e, a.c_str()), b.c_str()).is_zero()) << a << " " << b;
}

// --- properties ------------------------------------------------------------

namespace {

// Random admissible free data: small polynomials in the coordinates with
// opaque-function coefficients.
FreeData random_free_data(std::mt19937& rng) {
  std::uniform_int_distribution<int> coef(-2, 2), pick(0, 5);
  const char* vars[] = {"x", "y", "t", "u"};
  int counter = 0;
  auto poly = [&](bool t_only) {
    Expr e;
    for (int k = 0; k < 3; ++k) {
      Expr term(static_cast<long>(coef(rng)));
      for (int l = 0; l < 2; ++l) {
        int c = pick(rng);
        if (c < 4)
          term *= t_only ? sym("t") : sym(vars[c]);
        else if (c == 4)
          term *= t_only ? P("q" + std::to_string(counter++) + "(t)")
                         : P("q" + std::to_string(counter++) + "(x, y, t, u)");
      }
      e += term;
    }
    return e;
  };
  FreeData fd;
  fd.phi = {poly(false), poly(false), poly(true)};
  fd.eta = poly(false);
  for (int i = 0; i < 3; ++i) fd.alpha[i][i] = poly(false);
  fd.set_alpha(0, 1, poly(false));
  fd.beta[0] = poly(false);
  fd.beta[1] = poly(false);
  return fd;
}

}  // namespace

TEST(Property, DeterminingIdentity) {
  std::mt19937 rng(21);
  for (int i = 0; i < 25; ++i) {
    GeneratorSet gs = solve_wave_determining(build_general(random_free_data(rng)), true);
    EXPECT_TRUE(wave_determining_residual(gs).is_zero());
    EXPECT_TRUE(d(gs.xi[2], "x").is_zero() && d(gs.xi[2], "u").is_zero());
  }
}

TEST(Property, ZetaJetCoefficients) {
  std::mt19937 rng(22);
  for (int n = 0; n < 10; ++n) {
    GeneratorSet gs = solve_wave_determining(build_general(random_free_data(rng)), true);
    const FreeData& fd = gs.data;
    for (int i = 0; i < 3; ++i) {
      auto cs = coefficients(gs.zeta[i], {"v1", "v2", "v3"});
      const char* xi = kBase[i].data();
      // ζ_i = η_i + Σ_j φ^j_i v_j + v_i (η_u + Σ_j φ^j_u v_j).
      for (auto& [k, c] : cs) {
        int deg = k[0] + k[1] + k[2];
        ASSERT_LE(deg, 2);
        if (deg == 0) EXPECT_EQ(c, d(fd.eta, xi));
      }
      for (int j = 0; j < 3; ++j) {
        std::vector<int> one(3, 0);
        one[j] = 1;
        Expr expected = d(fd.phi[j], xi) + (i == j ? d(fd.eta, "u") : Expr());
        Expr got = cs.count(one) ? cs.at(one) : Expr();
        EXPECT_EQ(got, expected);
      }
    }
  }
}

TEST(Property, MuAffineInSlots) {
  std::mt19937 rng(23);
  for (int n = 0; n < 10; ++n) {
    GeneratorSet gs = solve_wave_determining(build_general(random_free_data(rng)), true);
    for (int i = 0; i < 2; ++i)
      for (const char* a : {"f", "g"})
        for (const char* b : {"f", "g"}) EXPECT_TRUE(d(d(gs.mu[i], a), b).is_zero());
    // With φ free of u, μ is affine in the jets as well.
    FreeData fd = gs.data;
    for (auto& p : fd.phi) p = substitute(p, {{"u", Expr(0)}});
    GeneratorSet flat = solve_wave_determining(build_general(fd), true);
    for (int i = 0; i < 2; ++i)
      for (const char* a : {"f", "g", "v1", "v2", "v3"})
        for (const char* b : {"f", "g", "v1", "v2", "v3"}) EXPECT_TRUE(d(d(flat.mu[i], a), b).is_zero());
  }
}

TEST(Property, AlphaAntisymmetry) {
  std::mt19937 rng(24);
  for (int n = 0; n < 10; ++n) {
    FreeData fd = random_free_data(rng);
    GeneratorSet a = solve_wave_determining(build_general(fd), true);
    FreeData swapped = fd;
    swapped.set_alpha(1, 0, fd.alpha[0][1]);  // α¹² ↔ α²¹
    GeneratorSet b = solve_wave_determining(build_general(swapped), true);
    EXPECT_EQ(b.mu[0] - a.mu[0], -2 * fd.alpha[0][1] * v(2));
    EXPECT_EQ(b.mu[1] - a.mu[1], -2 * fd.alpha[1][0] * v(1));
  }
}
