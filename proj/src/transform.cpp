#include "eqwave/transform.hpp"

#include <cmath>
#include <map>
#include <random>

namespace eqwave {

namespace {

Expr eps() { return sym(kEps); }
Expr X(int i) { return base_coord(i); }
Expr V(int i) { return jet(i); }
Expr U() { return sym("u"); }

Expr fn(const char* name, std::vector<const char*> args) {
  std::vector<Expr> a;
  for (auto s : args) a.push_back(sym(s));
  return Expr::function(name, std::move(a));
}

using Subs = std::map<std::string, Expr>;

PointTransformation substituted(const PointTransformation& pt, const Subs& s) {
  PointTransformation out = pt;
  for (auto& e : out.base) e = substitute(e, s);
  for (auto& e : out.jets) e = substitute(e, s);
  for (auto& e : out.fluxes) e = substitute(e, s);
  for (auto& e : out.denominators) e = substitute(e, s);
  return out;
}

Expr det3(const std::array<std::array<Expr, 3>, 3>& a) {
  return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
         a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
}

std::vector<std::string> point_slots() {
  std::vector<std::string> s(kLieState.begin(), kLieState.end());
  s.push_back(kEps);
  return s;
}

}  // namespace

PointTransformation PointTransformation::at(const Expr& e) const { return substituted(*this, {{kEps, e}}); }

bool PointTransformation::valid(const Binding& point, double threshold) const {
  for (const auto& d : denominators) {
    try {
      if (std::abs(eval(d, point)) <= threshold) return false;
    } catch (const DomainError&) {
      return false;
    }
  }
  return true;
}

PointTransformation make_identity() {
  PointTransformation pt;
  pt.family = "identity";
  pt.base = {X(0), X(1), X(2), U()};
  pt.jets = {V(0), V(1), V(2)};
  pt.fluxes = {slot_f(), slot_g(), slot_h()};
  pt.generator = FreeData::zero();
  return pt;
}

PointTransformation make_transform_4_1(std::optional<Expr> m_in) {
  Expr m = m_in.value_or(fn("m", {"u"}));
  Expr mp = partial(m, "u");
  Expr den = 1 - eps() * mp * V(0);
  PointTransformation pt = make_identity();
  pt.family = "4.1";
  pt.base[0] = X(0) - eps() * m;
  for (int i = 0; i < 3; ++i) pt.jets[i] = V(i) / den;
  pt.fluxes = {slot_f() - eps() * mp * (slot_g() * V(1) - pow(V(2), 2)) / den, slot_g() / den, slot_h() / den};
  pt.denominators = {den};
  pt.generator.phi[0] = m;
  return pt;
}

PointTransformation make_transform_4_2(std::optional<Expr> m_in, std::optional<Expr> p_in) {
  Expr m = m_in.value_or(fn("m", {"u"}));
  Expr p = p_in.value_or(fn("p", {"u"}));
  Expr mp = partial(m, "u"), pp = partial(p, "u");
  Expr den = 1 - eps() * (mp * V(0) + pp * V(1));
  PointTransformation pt = make_identity();
  pt.family = "4.2";
  pt.base[0] = X(0) - eps() * m;
  pt.base[1] = X(1) - eps() * p;
  for (int i = 0; i < 3; ++i) pt.jets[i] = V(i) / den;
  Expr v3sq = pow(V(2), 2);
  pt.fluxes = {((1 - eps() * mp * V(0)) * slot_f() - eps() * mp * (V(1) * slot_g() - v3sq)) / den,
               ((1 - eps() * pp * V(1)) * slot_g() - eps() * pp * (V(0) * slot_f() - v3sq)) / den, slot_h() / den};
  pt.denominators = {den};
  pt.generator.phi[0] = m;
  pt.generator.phi[1] = p;
  return pt;
}

PointTransformation make_transform_4_3(std::optional<Expr> m_in) {
  Expr m = m_in.value_or(fn("m", {"u", "y"}));
  Expr mu = partial(m, "u"), my = partial(m, "y");
  Expr den = 1 - eps() * mu * V(0);
  PointTransformation pt = make_identity();
  pt.family = "4.3";
  pt.base[0] = X(0) - eps() * m;
  pt.jets = {V(0) / den, (V(1) + eps() * my * V(0)) / den, V(2) / den};
  pt.fluxes = {slot_f() - eps() * ((my + mu * V(1)) * slot_g() - mu * pow(V(2), 2)) / den, slot_g() / den,
               slot_h() / den};
  pt.denominators = {den};
  pt.generator.phi[0] = m;
  return pt;
}

PointTransformation make_transform_4_4(std::optional<Expr> m_in) {
  Expr m = m_in.value_or(fn("m", {"u", "x"}));
  Expr mu = partial(m, "u"), mx = partial(m, "x");
  Expr den = 1 - eps() * mu * V(1);
  PointTransformation pt = make_identity();
  pt.family = "4.4";
  pt.base[1] = X(1) - eps() * m;
  pt.jets = {(V(0) + eps() * mx * V(1)) / den, V(1) / den, V(2) / den};
  pt.fluxes = {slot_f() / den, slot_g() - eps() * ((mx + mu * V(0)) * slot_f() - mu * pow(V(2), 2)) / den,
               slot_h() / den};
  pt.denominators = {den};
  pt.generator.phi[1] = m;
  return pt;
}

PointTransformation make_transform(const std::string& family, std::optional<Expr> m, std::optional<Expr> p) {
  if (family == "4.1") return make_transform_4_1(m);
  if (family == "4.2") return make_transform_4_2(m, p);
  if (family == "4.3") return make_transform_4_3(m);
  if (family == "4.4") return make_transform_4_4(m);
  throw std::invalid_argument("unknown transformation family '" + family + "' (expected 4.1, 4.2, 4.3 or 4.4)");
}

PointTransformation printed_transform(const std::string& family) {
  PointTransformation pt = make_transform(family);
  if (family == "4.3") {
    Expr m = fn("m", {"u", "y"});
    Expr mu = partial(m, "u"), my = partial(m, "y");
    Expr den = 1 - eps() * mu * V(0);
    pt.jets[1] = V(1) / den;
    pt.fluxes[0] = slot_f() - eps() * ((my + mu * V(1)) * slot_g() + mu * pow(V(2), 2)) / den;
  } else if (family == "4.4") {
    Expr m = fn("m", {"u", "x"});
    Expr mu = partial(m, "u"), mx = partial(m, "x");
    Expr den = 1 - eps() * mu * V(1);
    pt.fluxes[1] = slot_g() - eps() * ((mx + mu * V(0)) * slot_f() + mu * pow(V(2), 2)) / den;
  }
  pt.family += " (printed)";
  return pt;
}

PointTransformation compose(const PointTransformation& first, const PointTransformation& second) {
  Subs s;
  for (int i = 0; i < 3; ++i) {
    s[std::string(kBase[i])] = first.base[i];
    s[std::string(kJet[i])] = first.jets[i];
  }
  s["u"] = first.base[3];
  s["f"] = first.fluxes[0];
  s["g"] = first.fluxes[1];
  s["h"] = first.fluxes[2];
  PointTransformation out = substituted(second, s);
  out.family = first.family + " then " + second.family;
  out.denominators.insert(out.denominators.begin(), first.denominators.begin(), first.denominators.end());
  return out;
}

LieSystem LieSystem::from(const GeneratorSet& gs, Binding functions) {
  LieSystem sys;
  for (int i = 0; i < 3; ++i) {
    sys.rhs[i] = gs.xi[i];
    sys.rhs[4 + i] = gs.zeta[i];
  }
  sys.rhs[3] = gs.eta;
  sys.rhs[7] = gs.mu[0];
  sys.rhs[8] = gs.mu[1];
  sys.rhs[9] = gs.H;
  sys.functions = std::move(functions);
  return sys;
}

LieState integrate_lie(const LieSystem& sys, const LieState& start, double eps_value, int steps) {
  if (steps <= 0) throw std::invalid_argument("integrate_lie needs a positive step count");
  const std::vector<std::string> slots(kLieState.begin(), kLieState.end());
  std::array<CompiledExpr, 10> rhs;
  for (int k = 0; k < 10; ++k) rhs[k] = CompiledExpr(sys.rhs[k], slots, sys.functions);
  const double dt = eps_value / steps;
  double reached = 0;
  auto F = [&](const LieState& s) {
    LieState d;
    for (int k = 0; k < 10; ++k) {
      try {
        d[k] = rhs[k](s);
      } catch (const DomainError& e) {
        throw SingularFlowError(std::string("flow hit a singularity: ") + e.what(), reached);
      }
      if (!std::isfinite(d[k])) throw SingularFlowError("flow is not finite", reached);
    }
    return d;
  };
  auto axpy = [](const LieState& a, double h, const LieState& b) {
    LieState r;
    for (int k = 0; k < 10; ++k) r[k] = a[k] + h * b[k];
    return r;
  };
  LieState s = start;
  for (int n = 0; n < steps; ++n) {
    LieState k1 = F(s);
    LieState k2 = F(axpy(s, dt / 2, k1));
    LieState k3 = F(axpy(s, dt / 2, k2));
    LieState k4 = F(axpy(s, dt, k3));
    for (int k = 0; k < 10; ++k) s[k] += dt / 6 * (k1[k] + 2 * k2[k] + 2 * k3[k] + k4[k]);
    reached = (n + 1) * dt;
  }
  return s;
}

LieState apply(const PointTransformation& pt, const LieState& s, double eps_value, const Binding& functions) {
  const auto slots = point_slots();
  std::vector<double> in(s.begin(), s.end());
  in.push_back(eps_value);
  Binding point = functions;
  for (std::size_t k = 0; k < slots.size(); ++k) point.set(slots[k], in[k]);
  for (const auto& d : pt.denominators)
    if (std::abs(eval(d, point)) <= kSingularThreshold)
      throw DomainError("point lies on the singular locus of " + pt.family, d.str());
  LieState out;
  for (int k = 0; k < 4; ++k) out[k] = CompiledExpr(pt.base[k], slots, functions)(in);
  for (int k = 0; k < 3; ++k) out[4 + k] = CompiledExpr(pt.jets[k], slots, functions)(in);
  for (int k = 0; k < 3; ++k) out[7 + k] = CompiledExpr(pt.fluxes[k], slots, functions)(in);
  return out;
}

std::array<std::array<Expr, 3>, 3> base_jacobian(const PointTransformation& pt) {
  std::array<std::array<Expr, 3>, 3> a;
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k) a[j][k] = frozen_total_derivative(pt.base[j], k);
  return a;
}

Expr jacobian_determinant(const PointTransformation& pt) { return det3(base_jacobian(pt)); }

JetMapCheck induced_jet_map(const PointTransformation& pt) {
  auto a = base_jacobian(pt);
  std::array<std::array<Expr, 3>, 3> m;
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k) m[k][j] = a[j][k];
  std::array<Expr, 3> b;
  for (int k = 0; k < 3; ++k) b[k] = frozen_total_derivative(pt.base[3], k);
  Expr d = det3(m);
  JetMapCheck c;
  for (int j = 0; j < 3; ++j) {
    auto mj = m;
    for (int k = 0; k < 3; ++k) mj[k][j] = b[k];
    c.recomputed[j] = det3(mj) / d;
    c.residual[j] = pt.jets[j] - c.recomputed[j];
  }
  return c;
}

bool FluxMapCheck::ok() const {
  for (const auto& r : residual)
    if (!r.is_zero()) return false;
  return true;
}

FluxMapCheck induced_flux_map(const PointTransformation& pt) {
  auto a = base_jacobian(pt);
  Expr J = det3(a);
  const std::array<Expr, 3> sigma = {slot_f(), slot_g(), -V(2)};
  FluxMapCheck c;
  for (int i = 0; i < 3; ++i) {
    Expr s;
    for (int j = 0; j < 3; ++j) s += a[i][j] * sigma[j];
    c.recomputed[i] = s / J;
  }
  c.recomputed[3] = slot_h() / J;
  c.residual = {pt.fluxes[0] - c.recomputed[0], pt.fluxes[1] - c.recomputed[1], -pt.jets[2] - c.recomputed[2],
                pt.fluxes[2] - c.recomputed[3]};
  return c;
}

FamilyMember transform_member(const FamilyMember& m, const PointTransformation& pt) {
  const Subs slots = {{"f", m.f}, {"g", m.g}, {"h", m.h}};
  PointTransformation inv = pt.at(-eps());
  Subs back;
  for (int i = 0; i < 3; ++i) {
    back[std::string(kBase[i])] = inv.base[i];
    back[std::string(kJet[i])] = inv.jets[i];
  }
  back["u"] = inv.base[3];
  std::array<Expr, 3> out;
  for (int k = 0; k < 3; ++k) out[k] = substitute(substitute(pt.fluxes[k], slots), back);
  return make_member(out[0], out[1], out[2]);
}

Expr equation_residual(const FamilyMember& m) {
  return jet_total_derivative(m.f, 0) + jet_total_derivative(m.g, 1) + m.h - jet2(2, 2);
}

InvarianceReport verify_invariance(const FamilyMember& m, const PointTransformation& pt, const SamplingOptions& opt) {
  FamilyMember tm = transform_member(m, pt);
  Expr R = equation_residual(m);
  Expr Rbar = equation_residual(tm);
  auto a = base_jacobian(pt);
  Expr J = det3(a);

  // Barred second jets: D̄_j = sum_k (A^{-1})_{kj} D_k.
  std::array<std::array<Expr, 3>, 3> inv;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      int r1 = (c + 1) % 3, r2 = (c + 2) % 3, c1 = (r + 1) % 3, c2 = (r + 2) % 3;
      inv[r][c] = (a[r1][c1] * a[r2][c2] - a[r1][c2] * a[r2][c1]) / J;
    }
  std::vector<std::string> wnames;
  std::vector<Expr> wbar;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      Expr w;
      for (int k = 0; k < 3; ++k) w += inv[k][j] * jet_total_derivative(pt.jets[i], k);
      wnames.push_back(second_jet_name(i, j));
      wbar.push_back(w);
    }

  std::vector<std::string> slots = {"x", "y", "t", "u", "v1", "v2", "v3"};
  slots.insert(slots.end(), wnames.begin(), wnames.end());
  slots.push_back(kEps);
  const Binding& fb = opt.functions;
  CompiledExpr cR(R, slots, fb), cRbar(Rbar, slots, fb), cJ(J, slots, fb);
  std::vector<CompiledExpr> cmap;
  for (int k = 0; k < 4; ++k) cmap.emplace_back(pt.base[k], slots, fb);
  for (int k = 0; k < 3; ++k) cmap.emplace_back(pt.jets[k], slots, fb);
  for (const auto& w : wbar) cmap.emplace_back(w, slots, fb);
  std::vector<CompiledExpr> cden;
  for (const auto& d : pt.denominators) cden.emplace_back(d, slots, fb);
  // Denominators of the transformed member, at the barred point.
  for (const Expr* e : {&tm.f, &tm.g, &tm.h}) {
    Expr d = e->denominator();
    if (!d.is_constant()) cden.emplace_back(d, slots, fb);
  }
  const std::size_t n_map_den = pt.denominators.size();

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> base_d(-1, 1), jet_d(-0.5, 0.5), eps_d(0.01, 0.3);
  InvarianceReport rep;
  const int max_attempts = 100 * std::max(opt.samples, 1);
  for (int attempt = 0; rep.samples < opt.samples && attempt < max_attempts; ++attempt) {
    std::vector<double> p(slots.size());
    for (int k = 0; k < 4; ++k) p[k] = base_d(rng);
    for (std::size_t k = 4; k + 1 < p.size(); ++k) p[k] = jet_d(rng);
    p.back() = opt.eps ? *opt.eps : eps_d(rng);
    try {
      bool ok = true;
      for (std::size_t k = 0; k < n_map_den && ok; ++k) ok = std::abs(cden[k](p)) >= opt.min_denominator;
      if (!ok) {
        ++rep.singular_rejections;
        continue;
      }
      std::vector<double> pb(slots.size());
      for (std::size_t k = 0; k < cmap.size(); ++k) pb[k] = cmap[k](p);
      pb.back() = p.back();
      for (std::size_t k = n_map_den; k < cden.size() && ok; ++k) ok = std::abs(cden[k](pb)) >= opt.min_denominator;
      if (!ok) {
        ++rep.singular_rejections;
        continue;
      }
      double dev = std::abs(cRbar(pb) - cR(p) / cJ(p));
      rep.max_deviation = std::max(rep.max_deviation, dev);
      ++rep.samples;
    } catch (const DomainError&) {
      ++rep.singular_rejections;
    }
  }
  return rep;
}

}  // namespace eqwave
