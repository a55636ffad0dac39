#pragma once

// Carrying exact solutions of a linear member across a finite
// transformation: the implicit relation of the transported solution, its
// pointwise Newton solution and a finite-difference certificate against the
// transformed member.

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "eqwave/eval.hpp"
#include "eqwave/family.hpp"
#include "eqwave/transform.hpp"

namespace eqwave {

// sin, cos, exp, square, identity, zero: one-argument callbacks with every
// derivative order. Throws std::invalid_argument for other names.
FunctionCallback elementary(const std::string& name);

struct LinearSolution {
  Expr u;              // in x, y, t
  FamilyMember member; // the linear member it solves
  Binding functions;
};

// u = psi(y)(t - x) + phi(y)(t + x), a solution of u_tt = u_xx
// (member f = u_x, g = h = 0).
LinearSolution dalembert(FunctionCallback psi, FunctionCallback phi);

struct ImplicitSolution {
  Expr relation;  // F(x, y, t, u) = 0 in the barred variables
  Expr explicit_at_zero;  // the linear solution, also the eps = 0 root
  std::string transform;
  bool extension = false;  // transported through a family other than 4.1
  double eps = 0;
  Binding binding;  // functions plus eps
  CompiledExpr F, F_u, U0;
};

// Substitutes the inverse base map (eps -> -eps) into the linear solution:
// F = u - U(x(x̄, ū), y(ȳ, ū), t̄). Requires ū = u.
ImplicitSolution transport_solution(const LinearSolution& sol, const PointTransformation& pt, double eps,
                                    const Binding& functions = {});

class NewtonError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
// |∂F/∂ū| below kSingularThreshold at an iterate.
class BranchError : public NewtonError {
 public:
  using NewtonError::NewtonError;
};

struct NewtonResult {
  double u = 0;
  int iterations = 0;  // steps to reach tol, not counting the polishing step
  double final_abs_f = 0;
};

// Iterates until |F| <= tol, then takes one more step if it does not
// increase |F|.
NewtonResult newton_solve(const ImplicitSolution& imp, std::array<double, 3> point, double guess, double tol = 1e-12,
                          int max_iter = 20);

struct GridSpec {
  int n = 21;
  double lo = -1, hi = 1;
};

struct RejectedPoint {
  std::array<double, 3> point;
  std::string reason;
};

struct NewtonStats {
  long solves = 0;
  int max_iterations = 0;
  double mean_iterations = 0;
  double max_abs_f = 0;
};

struct GridReport {
  GridSpec grid;
  double h_step = 0;
  std::vector<double> values;  // ū at grid points (x fastest), NaN where rejected
  double max_residual = 0;
  NewtonStats newton;
  std::vector<RejectedPoint> rejected;
};

struct CertifyOptions {
  GridSpec grid;
  double h_step = 1e-3;
  double tol = 1e-12;
  int max_iter = 20;
};

// Solves ū on the grid with a lexicographic warm-started sweep (seeded by
// the eps = 0 value), then evaluates residual(target, ū, point, h_step) at
// every accepted point; stencil solves start from the point's ū.
GridReport certify(const ImplicitSolution& imp, const FamilyMember& target, const CertifyOptions& opt);

}  // namespace eqwave
