#include "eqwave/transport.hpp"

#include <cmath>
#include <limits>

namespace eqwave {

namespace {

using Unary = double (*)(double);

FunctionCallback cyclic(std::array<Unary, 4> derivs) {
  return [derivs](std::span<const double> args, std::span<const int> orders) {
    if (args.size() != 1) throw std::invalid_argument("elementary function called with wrong arity");
    int k = orders.empty() ? 0 : orders[0];
    return derivs[k % 4](args[0]);
  };
}

FunctionCallback polynomial(std::vector<double> coeffs) {
  return [coeffs](std::span<const double> args, std::span<const int> orders) {
    if (args.size() != 1) throw std::invalid_argument("elementary function called with wrong arity");
    int k = orders.empty() ? 0 : orders[0];
    double s = 0, p = 1;
    for (std::size_t n = k; n < coeffs.size(); ++n) {
      double c = coeffs[n];
      for (std::size_t j = n; j > n - k; --j) c *= double(j);
      s += c * p;
      p *= args[0];
    }
    return s;
  };
}

}  // namespace

FunctionCallback elementary(const std::string& name) {
  if (name == "sin")
    return cyclic({[](double a) { return std::sin(a); }, [](double a) { return std::cos(a); },
                   [](double a) { return -std::sin(a); }, [](double a) { return -std::cos(a); }});
  if (name == "cos")
    return cyclic({[](double a) { return std::cos(a); }, [](double a) { return -std::sin(a); },
                   [](double a) { return -std::cos(a); }, [](double a) { return std::sin(a); }});
  if (name == "exp")
    return [](std::span<const double> args, std::span<const int>) { return std::exp(args[0]); };
  if (name == "square") return polynomial({0, 0, 1});
  if (name == "identity") return polynomial({0, 1});
  if (name == "zero") return polynomial({});
  throw std::invalid_argument("unknown elementary function '" + name + "'");
}

LinearSolution dalembert(FunctionCallback psi, FunctionCallback phi) {
  LinearSolution s;
  Expr x = sym("x"), y = sym("y"), t = sym("t");
  s.u = Expr::function("psi", {y}) * (t - x) + Expr::function("phi", {y}) * (t + x);
  s.member = make_member(jet(0), Expr(0), Expr(0));
  s.functions.set_function("psi", std::move(psi)).set_function("phi", std::move(phi));
  return s;
}

ImplicitSolution transport_solution(const LinearSolution& sol, const PointTransformation& pt, double eps,
                                    const Binding& functions) {
  if (pt.base[3] != sym("u")) throw std::invalid_argument("transport needs a map with u unchanged");
  PointTransformation inv = pt.at(-sym(kEps));
  std::map<std::string, Expr> back;
  for (int i = 0; i < 3; ++i) back[std::string(kBase[i])] = inv.base[i];
  ImplicitSolution imp;
  imp.relation = sym("u") - substitute(sol.u, back);
  imp.explicit_at_zero = sol.u;
  imp.transform = pt.family;
  imp.extension = pt.family != "4.1" && pt.family != "identity";
  imp.eps = eps;
  imp.binding = functions;
  for (const auto& [k, f] : sol.functions.functions) imp.binding.functions[k] = f;
  for (const auto& [k, v] : sol.functions.values) imp.binding.values[k] = v;
  imp.binding.set(kEps, eps);
  const std::vector<std::string> slots = {"x", "y", "t", "u"};
  imp.F = CompiledExpr(imp.relation, slots, imp.binding);
  imp.F_u = CompiledExpr(partial(imp.relation, "u"), slots, imp.binding);
  imp.U0 = CompiledExpr(sol.u, slots, imp.binding);
  return imp;
}

NewtonResult newton_solve(const ImplicitSolution& imp, std::array<double, 3> p, double guess, double tol,
                          int max_iter) {
  if (!(tol > 0)) throw std::invalid_argument("newton_solve: tol must be positive");
  std::array<double, 4> s = {p[0], p[1], p[2], guess};
  auto step = [&]() {
    double d = imp.F_u(s);
    if (!(std::abs(d) >= kSingularThreshold)) throw BranchError("degenerate branch: |dF/du| below threshold");
    return imp.F(s) / d;
  };
  NewtonResult r;
  double f = std::abs(imp.F(s));
  while (f > tol) {
    if (r.iterations == max_iter)
      throw NewtonError("no convergence after " + std::to_string(max_iter) + " iterations (|F| = " +
                        std::to_string(f) + ")");
    s[3] -= step();
    f = std::abs(imp.F(s));
    if (!std::isfinite(f)) throw NewtonError("iterate left the finite range");
    ++r.iterations;
  }
  // Polish: the tolerance alone leaves noise that the stencil divides by h^2.
  std::array<double, 4> polished = s;
  polished[3] -= step();
  double fp = std::abs(imp.F(polished));
  if (fp <= f) {
    s = polished;
    f = fp;
  }
  r.u = s[3];
  r.final_abs_f = f;
  return r;
}

GridReport certify(const ImplicitSolution& imp, const FamilyMember& target, const CertifyOptions& opt) {
  GridReport rep;
  rep.grid = opt.grid;
  rep.h_step = opt.h_step;
  const int n = opt.grid.n;
  const double dx = n > 1 ? (opt.grid.hi - opt.grid.lo) / (n - 1) : 0;
  auto coord = [&](int i) { return opt.grid.lo + i * dx; };
  rep.values.assign(std::size_t(n) * n * n, std::numeric_limits<double>::quiet_NaN());
  long total_iterations = 0;
  auto solve = [&](std::array<double, 3> p, double guess) {
    NewtonResult r = newton_solve(imp, p, guess, opt.tol, opt.max_iter);
    ++rep.newton.solves;
    total_iterations += r.iterations;
    rep.newton.max_iterations = std::max(rep.newton.max_iterations, r.iterations);
    rep.newton.max_abs_f = std::max(rep.newton.max_abs_f, r.final_abs_f);
    return r.u;
  };

  // Warm-started sweep, x fastest.
  double guess = imp.U0(std::array<double, 4>{coord(0), coord(0), coord(0), 0});
  bool have_guess = true;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        std::array<double, 3> p = {coord(i), coord(j), coord(k)};
        std::size_t idx = (std::size_t(k) * n + j) * n + i;
        if (!have_guess) guess = imp.U0(std::array<double, 4>{p[0], p[1], p[2], 0});
        try {
          guess = rep.values[idx] = solve(p, guess);
          have_guess = true;
        } catch (const std::exception& e) {
          rep.rejected.push_back({p, e.what()});
          have_guess = false;
        }
      }

  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        std::size_t idx = (std::size_t(k) * n + j) * n + i;
        double center = rep.values[idx];
        if (std::isnan(center)) continue;
        std::array<double, 3> p = {coord(i), coord(j), coord(k)};
        ScalarField u = [&](double x, double y, double t) { return solve({x, y, t}, center); };
        try {
          double r = residual(target, u, p, opt.h_step, imp.binding);
          if (!std::isfinite(r)) throw DomainError("non-finite residual", "");
          rep.max_residual = std::max(rep.max_residual, std::abs(r));
        } catch (const std::exception& e) {
          rep.rejected.push_back({p, std::string("stencil: ") + e.what()});
          rep.values[idx] = std::numeric_limits<double>::quiet_NaN();
        }
      }
  rep.newton.mean_iterations = rep.newton.solves ? double(total_iterations) / rep.newton.solves : 0;
  return rep;
}

}  // namespace eqwave
