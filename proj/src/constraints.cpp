#include "eqwave/constraints.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "eqwave/parse.hpp"

namespace eqwave {

namespace {

Expr P(const std::string& s) { return parse(s); }

// Generic data with the named slots overridden.
FreeData data(const std::map<std::string, std::string>& slots) {
  FreeData fd = FreeData::generic();
  for (const auto& [k, text] : slots) {
    Expr e = P(text);
    if (k == "phi1") fd.phi[0] = e;
    else if (k == "phi2") fd.phi[1] = e;
    else if (k == "phi3") fd.phi[2] = e;
    else if (k == "eta") fd.eta = e;
    else if (k == "alpha11") fd.alpha[0][0] = e;
    else if (k == "alpha22") fd.alpha[1][1] = e;
    else if (k == "alpha33") fd.alpha[2][2] = e;
    else if (k == "alpha12") fd.set_alpha(0, 1, e);
    else if (k == "beta1") fd.beta[0] = e;
    else if (k == "beta2") fd.beta[1] = e;
    else if (k == "lambda") fd.lambda = e;
    else if (k == "gamma") fd.gamma = e;
    else throw std::logic_error("unknown free-data slot " + k);
  }
  return fd;
}

Probe replace(std::string what, std::string slot, std::string text) {
  return Probe{std::move(what), [slot, text](FreeData& fd) {
                 FreeData d = data({{slot, text}});
                 if (slot == "phi1") fd.phi[0] = d.phi[0];
                 else if (slot == "phi2") fd.phi[1] = d.phi[1];
                 else throw std::logic_error("probe slot " + slot);
               }};
}

Probe quadratic_eta() {
  return Probe{"eta gains a u^2 k(x,y) term", [](FreeData& fd) { fd.eta += P("u^2*k(x,y)"); }};
}

// Shared pieces of the h = 0 solutions: α¹¹_xx + α²²_yy = φ³'''/2 and the
// matching β terms, with R, K, G arbitrary.
const char* kAlpha11 = "x^2*P3'''(t)/4 + R[0,2,0](x,y,t)";
const char* kAlpha22 = "-R[2,0,0](x,y,t)";
const char* kBeta1Core = "-(x*P3'''(t)/2 + R[1,2,0](x,y,t))*u + G[0,0,2](x,y,t)";
const char* kGamma = "G[1,0,0](x,y,t)";

std::string cat(std::initializer_list<std::string> parts) {
  std::string s;
  for (const auto& p : parts) s += p;
  return s;
}

CatalogRow mirrored(const CatalogRow& base, std::string id, std::array<std::string, 3> members, Shapes shapes,
                    std::vector<std::string> witnesses) {
  CatalogRow r;
  r.id = std::move(id);
  r.members = std::move(members);
  r.spec = mirror(base.spec);
  r.shapes = std::move(shapes);
  r.verdict = base.verdict;
  r.witnesses = std::move(witnesses);
  auto inst = base.instantiate;
  r.instantiate = [inst] { return mirror(inst()); };
  for (const auto& p : base.probes) {
    auto modify = p.modify;
    r.probes.push_back(Probe{p.description + " (mirrored)", [modify](FreeData& fd) {
                               fd = mirror(fd);
                               modify(fd);
                               fd = mirror(fd);
                             }});
  }
  return r;
}

std::vector<CatalogRow> build_catalog() {
  const std::string full = "(x,y,t,u,u_x,u_y,u_t)";
  std::vector<CatalogRow> rows;

  CatalogRow r3;
  r3.id = "3";
  r3.members = {"f" + full, "g" + full, "h" + full};
  r3.shapes = {"xi1(x,y,t,u)", "xi2(x,y,t,u)", "xi3(t)", "eta(x,y,t,u)"};
  r3.verdict = Verdict::linearizable;
  r3.witnesses = {"xi1_u != 0", "xi2_u != 0", "eta_uu != 0"};
  r3.instantiate = [] { return FreeData::generic(); };

  CatalogRow r31;
  r31.id = "3.1";
  r31.members = {"f(x,y,t,u,u_x,u_y)", "g" + full, "h" + full};
  r31.spec.vanishing = {"s13"};
  r31.shapes = {"xi1(x)", "xi2(x,y,t,u)", "xi3(t)", "eta(x,y,t,u)"};
  r31.verdict = Verdict::linearizable;
  r31.witnesses = {"xi2_u != 0", "eta_uu != 0"};
  r31.instantiate = [] { return data({{"phi1", "phi1(x)"}}); };
  r31.probes = {replace("xi1 depends on y", "phi1", "phi1(x,y)"), replace("xi1 depends on t", "phi1", "phi1(x,t)"),
                replace("xi1 depends on u", "phi1", "phi1(x,u)")};

  CatalogRow r31m = mirrored(r31, "3.1*", {"f" + full, "g(x,y,t,u,u_x,u_y)", "h" + full},
                             {"xi1(x,y,t,u)", "xi2(y)", "xi3(t)", "eta(x,y,t,u)"}, {"xi1_u != 0", "eta_uu != 0"});

  CatalogRow r32;
  r32.id = "3.2";
  r32.members = {"f(x,y,t,u,u_x,u_y)", "g(x,y,t,u,u_x,u_y)", "h" + full};
  r32.spec.vanishing = {"s13", "s23"};
  r32.shapes = {"xi1(x,y)", "xi2(x,y)", "xi3(t)", "eta(x,y,t,u)"};
  r32.verdict = Verdict::linearizable;
  r32.witnesses = {"eta_uu != 0"};
  r32.instantiate = [] { return data({{"phi1", "phi1(x,y)"}, {"phi2", "phi2(x,y)"}}); };
  r32.probes = {replace("xi1 depends on t", "phi1", "phi1(x,y,t)"),
                replace("xi2 depends on u", "phi2", "phi2(x,y,u)")};

  CatalogRow r311;
  r311.id = "3.1.1";
  r311.members = {"f(x,y,t,u,u_x,u_y)", "g" + full, "0"};
  r311.spec.vanishing = {"s13", "h"};
  r311.shapes = {"xi1(x)", "xi2(x,y,t,u)", "xi3(t)",
                 "eta = int(xi2_y du) + (xi1_x - xi3_t/2 - lambda(x,y))*u + gamma(x,y,t)"};
  r311.verdict = Verdict::linearizable;
  r311.witnesses = {"xi2_u != 0"};
  r311.discrepancies = {
      "the derivation writes int(xi2 du) for the u^2 part of eta; int(xi2_y du), as in the row shape, is "
      "what the h-component requires"};
  r311.instantiate = [] {
    return data({{"phi1", "P1(x)"},
                 {"phi2", "c(y,t)*u + d(x,y,t)"},
                 {"phi3", "P3(t)"},
                 {"eta", cat({"c[1,0](y,t)*u^2/2 + (d[0,1,0](x,y,t) - P3'(t)/2 + lambda(x,y))*u + ", kGamma})},
                 {"alpha33", "P1'(x) + a(t) - 3*P3'(t)/2 - lambda(x,y)"},
                 {"alpha11", kAlpha11},
                 {"alpha22", kAlpha22},
                 {"alpha12", "Q[0,0,0,1](x,y,t,u)"},
                 {"beta1", cat({"Q[0,1,0,0](x,y,t,u) + ", kBeta1Core})},
                 {"beta2", "c[0,2](y,t)*u^2/2 + d[0,0,2](x,y,t)*u - Q[1,0,0,0](x,y,t,u) + R[2,1,0](x,y,t)*u"},
                 {"lambda", "lambda(x,y)"},
                 {"gamma", kGamma}});
  };
  r311.probes = {Probe{"eta loses the int(xi2_y du) term", [](FreeData& fd) { fd.eta -= P("c[1,0](y,t)*u^2/2"); }},
                 replace("xi1 depends on y", "phi1", "P1(x,y)")};

  CatalogRow r311m =
      mirrored(r311, "3.1.1*", {"f" + full, "g(x,y,t,u,u_x,u_y)", "0"},
               {"xi1(x,y,t,u)", "xi2(y)", "xi3(t)",
                "eta = int(xi1_x du) + (xi2_y - xi3_t/2 - lambda(x,y))*u + gamma(x,y,t)"},
               {"xi1_u != 0"});

  CatalogRow r321;
  r321.id = "3.2.1";
  r321.members = {"f(x,y,t,u,u_x,u_y)", "g(x,y,t,u,u_x,u_y)", "0"};
  r321.spec.vanishing = {"s13", "s23", "h"};
  r321.shapes = {"xi1(x,y)", "xi2(x,y)", "xi3(t)", "eta = (xi1_x + xi2_y - xi3_t/2 + lambda(x,y))*u + gamma(x,y,t)"};
  r321.verdict = Verdict::not_linearizable;
  r321.instantiate = [] {
    return data({{"phi1", "P1(x,y)"},
                 {"phi2", "P2(x,y)"},
                 {"phi3", "P3(t)"},
                 {"eta", cat({"(lambda(x,y) - P3'(t)/2)*u + ", kGamma})},
                 {"alpha33", "P1[1,0](x,y) + P2[0,1](x,y) - lambda(x,y) - 3*P3'(t)/2 + a(t)"},
                 {"alpha11", kAlpha11},
                 {"alpha22", kAlpha22},
                 {"alpha12", "Q[0,0,0,1](x,y,t,u)"},
                 {"beta1", cat({"Q[0,1,0,0](x,y,t,u) + ", kBeta1Core})},
                 {"beta2", "-Q[1,0,0,0](x,y,t,u) + R[2,1,0](x,y,t)*u"},
                 {"lambda", "lambda(x,y)"},
                 {"gamma", kGamma}});
  };
  r321.probes = {quadratic_eta(), replace("xi1 depends on u", "phi1", "P1(x,y,u)")};

  CatalogRow r312;
  r312.id = "3.1.2";
  r312.members = {"f(x,y,t,u,u_x)", "g" + full, "h" + full};
  r312.spec.vanishing = {"s12", "s13"};
  r312.shapes = {"xi1(x)", "xi2(y,t)", "xi3(t)", "eta(x,y,t,u)"};
  r312.verdict = Verdict::linearizable;
  r312.witnesses = {"eta_uu != 0"};
  r312.instantiate = [] { return data({{"phi1", "phi1(x)"}, {"phi2", "phi2(y,t)"}, {"alpha12", "0"}}); };
  r312.probes = {replace("xi2 depends on x", "phi2", "phi2(x,y,t)"),
                 replace("xi2 depends on u", "phi2", "phi2(y,t,u)")};

  CatalogRow r313;
  r313.id = "3.1.3";
  r313.members = {"f(x,y,t,u,u_x)", "g" + full, "0"};
  r313.spec.vanishing = {"s12", "s13", "h"};
  r313.shapes = {"xi1(x)", "xi2(y,t)", "xi3(t)", "eta = (xi2_y - xi3_t/2 + lambda(x,y))*u + gamma(x,y,t)"};
  r313.verdict = Verdict::not_linearizable;
  r313.instantiate = [] {
    return data({{"phi1", "P1(x)"},
                 {"phi2", "P2(y,t)"},
                 {"phi3", "P3(t)"},
                 {"eta", cat({"(P2[1,0](y,t) - P3'(t)/2 + lambda(x,y))*u + ", kGamma})},
                 {"alpha33", "P1'(x) + a(t) - 3*P3'(t)/2 - lambda(x,y)"},
                 {"alpha11", kAlpha11},
                 {"alpha22", kAlpha22},
                 {"alpha12", "0"},
                 {"beta1", cat({kBeta1Core, " + K[0,1,0](x,y,t)"})},
                 {"beta2", "(P2[0,2](y,t) + R[2,1,0](x,y,t))*u - K[1,0,0](x,y,t)"},
                 {"lambda", "lambda(x,y)"},
                 {"gamma", kGamma}});
  };
  r313.probes = {quadratic_eta()};

  CatalogRow t10;
  t10.id = "T10";
  t10.members = {"f(x,y,t,u,u_x,u_t)", "g(x,y,t,u,u_y)", "h" + full};
  t10.spec.vanishing = {"s12", "s21", "s23"};
  t10.shapes = {"xi1(x,t)", "xi2(y)", "xi3(t)", "eta(x,y,t,u)"};
  t10.verdict = Verdict::linearizable;
  t10.witnesses = {"eta_uu != 0"};
  t10.instantiate = [] { return data({{"phi1", "phi1(x,t)"}, {"phi2", "phi2(y)"}, {"alpha12", "0"}}); };
  t10.probes = {replace("xi2 depends on t", "phi2", "phi2(y,t)"), replace("xi1 depends on y", "phi1", "phi1(x,y,t)")};

  CatalogRow t11;
  t11.id = "T11";
  t11.members = {"f(x,y,t,u,u_x)", "g(x,y,t,u,u_y)", "0"};
  t11.spec.vanishing = {"s12", "s13", "s21", "s23", "h"};
  t11.shapes = {"xi1(x)", "xi2(y)", "xi3(t)", "eta = (xi1_x - xi3_t/2 + lambda(x,y))*u + gamma(x,y,t)"};
  t11.verdict = Verdict::not_linearizable;
  t11.discrepancies = {"row prints xi1(x,t); S13 = 0 forces xi1_t = 0 (f is free of u_t), so xi1(x) is encoded"};
  t11.instantiate = [] {
    return data({{"phi1", "P1(x)"},
                 {"phi2", "P2(y)"},
                 {"phi3", "P3(t)"},
                 {"eta", cat({"(lambda(x,y) - P3'(t)/2)*u + ", kGamma})},
                 {"alpha33", "P1'(x) + P2'(y) - lambda(x,y) - 3*P3'(t)/2 + a(t)"},
                 {"alpha11", kAlpha11},
                 {"alpha22", kAlpha22},
                 {"alpha12", "0"},
                 {"beta1", cat({kBeta1Core, " + K[0,1,0](x,y,t)"})},
                 {"beta2", "R[2,1,0](x,y,t)*u - K[1,0,0](x,y,t)"},
                 {"lambda", "lambda(x,y)"},
                 {"gamma", kGamma}});
  };
  t11.probes = {quadratic_eta(), replace("xi1 depends on t, as printed in the row", "phi1", "P1(x,t)")};

  CatalogRow r322;
  r322.id = "3.2.2";
  r322.members = {"f(x,y,t,u,u_x,u_y)", "g(x,y,t,u,u_x,u_y)", "h(x,y,t,u,u_x,u_y)"};
  r322.spec.vanishing = {"s13", "s23", "t3"};
  r322.shapes = {"xi1(x,y)", "xi2(x,y)", "xi3(t)", "eta = (lambda(x,y) - xi3_t/2)*u + gamma(x,y,t)"};
  r322.verdict = Verdict::not_linearizable;
  r322.discrepancies = {"row prints xi1(x,t); the derivation gives xi1(x,y), which is encoded"};
  r322.instantiate = [] {
    return data({{"phi1", "phi1(x,y)"},
                 {"phi2", "phi2(x,y)"},
                 {"phi3", "phi3(t)"},
                 {"eta", "(lambda(x,y) - phi3'(t)/2)*u + gamma(x,y,t)"}});
  };
  r322.probes = {quadratic_eta(), replace("xi1 depends on t, as printed in the row", "phi1", "phi1(x,t)")};

  rows = {r3, r31, r31m, r32, r311, r311m, r321, r312, r313, t10, t11, r322};
  return rows;
}

std::map<std::string, Expr> zero_map(const CaseSpec& spec) {
  std::map<std::string, Expr> z;
  for (const auto& s : spec.closure()) z[s] = Expr();
  if (spec.vanishing.count("h"))
    for (const char* s : {"t_1", "t_2", "t_3", "tau"}) z[s] = Expr();
  return z;
}

Expr component(const std::string& name, const AdditionalComponents& c, const GeneratorSet& gs) {
  if (name == "H") return gs.H;
  int j = name.back() - '1';
  if (name[0] == 'S') return c.S_upper[name[1] - '1'][j];
  return c.T_upper[j];
}

std::string swap_xy_index(const std::string& s) {
  // s1j <-> s2j' and tj <-> tj' with 1 <-> 2 on every index.
  std::string out = s;
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i] == '1') out[i] = '2';
    else if (out[i] == '2') out[i] = '1';
  }
  return out;
}

std::set<std::string> row_key(const CatalogRow& r) { return r.spec.closure(); }

}  // namespace

std::vector<std::string> CaseSpec::implied_components() const {
  std::vector<std::string> out;
  for (const auto& v : vanishing) {
    if (v == "h")
      out.push_back("H");
    else if (v[0] == 's')
      out.push_back("S" + v.substr(1));
    else if (v[0] == 't')
      out.push_back("T" + v.substr(1));
    else
      throw std::invalid_argument("unknown vanishing coordinate " + v);
  }
  return out;
}

std::set<std::string> CaseSpec::closure() const {
  std::set<std::string> out = vanishing;
  if (out.count("h")) out.insert({"t1", "t2", "t3"});
  return out;
}

std::vector<Residual> constraint_residuals(const CaseSpec& spec, const GeneratorSet& gs) {
  std::vector<Residual> out;
  if (spec.vanishing.empty()) return out;
  AdditionalComponents c = additional_components(gs);
  auto zeros = zero_map(spec);
  for (const auto& name : spec.implied_components()) {
    Expr r = substitute(component(name, c, gs), zeros);
    if (!r.is_zero()) out.push_back({name, r});
  }
  return out;
}

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::linearizable:
      return "L<=>N";
    case Verdict::not_linearizable:
      return "L/N<=>L/N";
    default:
      return "UNCOVERED";
  }
}

FreeData mirror(const FreeData& fd) {
  const std::map<std::string, Expr> swap = {{"x", sym("y")}, {"y", sym("x")}, {"v1", jet(1)}, {"v2", jet(0)}};
  auto m = [&](const Expr& e) { return substitute(e, swap); };
  FreeData out;
  out.phi = {m(fd.phi[1]), m(fd.phi[0]), m(fd.phi[2])};
  out.eta = m(fd.eta);
  out.w = m(fd.w);
  out.alpha[0][0] = m(fd.alpha[1][1]);
  out.alpha[1][1] = m(fd.alpha[0][0]);
  out.alpha[2][2] = m(fd.alpha[2][2]);
  out.set_alpha(0, 1, m(fd.alpha[1][0]));
  out.set_alpha(0, 2, m(fd.alpha[1][2]));
  out.set_alpha(1, 2, m(fd.alpha[0][2]));
  out.beta = {m(fd.beta[1]), m(fd.beta[0]), m(fd.beta[2])};
  out.lambda = m(fd.lambda);
  out.gamma = m(fd.gamma);
  return out;
}

CaseSpec mirror(const CaseSpec& spec) {
  CaseSpec out;
  for (const auto& v : spec.vanishing) out.vanishing.insert(v == "h" ? v : swap_xy_index(v));
  return out;
}

const std::vector<CatalogRow>& catalog() {
  static const std::vector<CatalogRow> rows = build_catalog();
  return rows;
}

const CatalogRow& catalog_row(const std::string& id) {
  for (const auto& r : catalog())
    if (r.id == id) return r;
  throw std::out_of_range("no catalog row " + id);
}

CaseReport verify_case(const std::string& id) {
  const CatalogRow& row = catalog_row(id);
  CaseReport rep;
  rep.id = id;
  GeneratorSet gs = solve_wave_determining(build_general(row.instantiate()), true);
  rep.residuals = constraint_residuals(row.spec, gs);

  // Claimed argument lists, read from the shape text "xi1(x,y)".
  auto claimed = [](const std::string& shape) {
    std::set<std::string> args;
    auto open = shape.find('(');
    if (open == std::string::npos || shape.compare(0, 4, "eta ") == 0) return args;
    std::string inner = shape.substr(open + 1, shape.find(')') - open - 1);
    std::size_t pos = 0;
    while (pos <= inner.size()) {
      auto comma = inner.find(',', pos);
      if (comma == std::string::npos) comma = inner.size();
      args.insert(inner.substr(pos, comma - pos));
      pos = comma + 1;
    }
    return args;
  };
  rep.shapes_ok = true;
  const std::string* shape_text[3] = {&row.shapes.xi1, &row.shapes.xi2, &row.shapes.xi3};
  for (int i = 0; i < 3; ++i) {
    auto args = claimed(*shape_text[i]);
    for (const char* c : {"x", "y", "t", "u"})
      if (!args.count(c) && depends_on(gs.xi[i], c)) {
        rep.shapes_ok = false;
        rep.notes.push_back("xi" + std::to_string(i + 1) + " depends on " + c + " outside its claimed shape");
      }
  }

  Expr eta_uu = partial(gs.eta, "u", 2);
  rep.nonlinear_in_u = !partial(gs.xi[0], "u").is_zero() || !partial(gs.xi[1], "u").is_zero() || !eta_uu.is_zero();
  rep.verdict_consistent = rep.nonlinear_in_u == (row.verdict == Verdict::linearizable);
  if (row.verdict == Verdict::not_linearizable && !eta_uu.is_zero()) rep.notes.push_back("eta is not affine in u");

  for (const auto& probe : row.probes) {
    FreeData fd = row.instantiate();
    probe.modify(fd);
    GeneratorSet probed = solve_wave_determining(build_general(fd), true);
    if (constraint_residuals(row.spec, probed).empty()) rep.probe_failures.push_back(probe.description);
  }
  return rep;
}

CaseSpec case_spec(const DependencySignature& sig) {
  CaseSpec spec;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j)
      if (!sig.depends(i, kJet[j])) spec.vanishing.insert("s" + std::to_string(i + 1) + std::to_string(j + 1));
  if (sig.h_is_zero) {
    spec.vanishing.insert("h");
  } else {
    for (int j = 0; j < 3; ++j)
      if (!sig.depends(2, kJet[j])) spec.vanishing.insert("t" + std::to_string(j + 1));
  }
  return spec;
}

ClassificationResult classify(const DependencySignature& sig) {
  ClassificationResult res;
  res.signature = sig;
  std::set<std::string> V = case_spec(sig).closure();

  for (int i = 0; i < 3; ++i)
    for (const char* c : {"x", "y", "t", "u"})
      if (!sig.depends(i, c) && !(i == 2 && sig.h_is_zero)) {
        res.notes.push_back("restrictions on x, y, t, u dependence are not used by the case rows");
        i = 3;
        break;
      }
  if (sig.f_is_zero || sig.g_is_zero) res.notes.push_back("f or g vanishes identically (degenerate member)");

  const CatalogRow* match = nullptr;
  for (const auto& r : catalog())
    if (row_key(r) == V) {
      match = &r;
      res.exact = true;
      break;
    }
  if (!match) {
    // A subclass of a not-linearizable class stays not linearizable: its
    // extra vanishing components only add constraints.
    std::size_t best = 0;
    for (const auto& r : catalog()) {
      if (r.verdict != Verdict::not_linearizable) continue;
      auto key = row_key(r);
      if (std::includes(V.begin(), V.end(), key.begin(), key.end()) && (!match || key.size() > best)) {
        match = &r;
        best = key.size();
      }
    }
    if (match) res.notes.push_back("verdict inherited from row " + match->id + " (member is a subclass)");
  }
  if (!match) {
    std::vector<std::pair<std::size_t, std::string>> dist;
    for (const auto& r : catalog()) {
      auto key = row_key(r);
      std::vector<std::string> diff;
      std::set_symmetric_difference(V.begin(), V.end(), key.begin(), key.end(), std::back_inserter(diff));
      dist.emplace_back(diff.size(), r.id);
    }
    std::stable_sort(dist.begin(), dist.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [d, id] : dist)
      if (d == dist.front().first) res.nearest.push_back(id);
    return res;
  }
  res.row_id = match->id;
  res.shapes = match->shapes;
  res.verdict = match->verdict;
  if (res.exact) res.witness = match->witnesses;
  res.discrepancies = match->discrepancies;
  return res;
}

}  // namespace eqwave
