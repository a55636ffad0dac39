#include "cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "eqwave/constraints.hpp"
#include "eqwave/parse.hpp"
#include "eqwave/transform.hpp"
#include "eqwave/transport.hpp"

namespace eqwave::cli {

namespace {

using nlohmann::json;

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MemberArgs {
  std::optional<std::string> f, g, h, file;

  void add(CLI::App* app) {
    app->add_option("-f,--f", f, "flux f (inline expression)");
    app->add_option("-g,--g", g, "flux g (inline expression)");
    app->add_option("-h,--h", h, "source h (inline expression)");
    app->add_option("--member", file, "member file with f=, g=, h= lines");
  }

  FamilyMember get() const {
    if (file) {
      if (f || g || h) throw InputError("give either --member or --f/--g/--h, not both");
      std::ifstream in(*file);
      if (!in) throw InputError("cannot read member file " + *file);
      std::stringstream ss;
      ss << in.rdbuf();
      return parse_member(ss.str());
    }
    if (!f && !g && !h) throw InputError("empty member: give --f, --g, --h or --member");
    auto field = [](const std::optional<std::string>& s, const char* name) {
      try {
        return s ? parse(*s) : Expr(0);
      } catch (const ParseError& e) {
        throw InputError(std::string(name) + ": " + e.what());
      }
    };
    return make_member(field(f, "f"), field(g, "g"), field(h, "h"));
  }
};

struct TransformArgs {
  std::string family = "4.1";
  std::optional<std::string> m, p, spec;
  std::optional<double> eps;

  void add(CLI::App* app, bool with_eps = true) {
    app->add_option("--family", family, "transformation family")->check(CLI::IsMember({"4.1", "4.2", "4.3", "4.4"}));
    app->add_option("--m", m, "m as an expression (in u; u,y for 4.3; u,x for 4.4)");
    app->add_option("--p", p, "p(u) for family 4.2");
    app->add_option("--spec", spec, "transform spec JSON {family, functions {m, p}, eps}");
    if (with_eps) app->add_option("--eps", eps, "group parameter");
  }

  void load_spec() {
    if (!spec) return;
    std::ifstream in(*spec);
    if (!in) throw InputError("cannot read transform spec " + *spec);
    json j;
    try {
      j = json::parse(in);
      family = j.at("family").get<std::string>();
      if (j.contains("functions")) {
        const auto& fns = j["functions"];
        if (fns.contains("m")) m = fns["m"].get<std::string>();
        if (fns.contains("p")) p = fns["p"].get<std::string>();
      }
      if (j.contains("eps")) eps = j["eps"].get<double>();
    } catch (const json::exception& e) {
      throw InputError("transform spec: " + std::string(e.what()));
    }
  }

  PointTransformation get(bool require_functions) {
    load_spec();
    auto parsed = [&](const std::optional<std::string>& s, const char* name,
                      std::set<std::string> allowed) -> std::optional<Expr> {
      if (!s) {
        if (require_functions && (std::string(name) == "m" || family == "4.2"))
          throw InputError(std::string("--") + name + " is required for numeric work");
        return std::nullopt;
      }
      Expr e;
      try {
        e = parse(*s);
      } catch (const ParseError& err) {
        throw InputError(std::string(name) + ": " + err.what());
      }
      for (const auto& v : free_symbols(e))
        if (!allowed.count(v)) throw InputError(std::string(name) + " may not depend on " + v + " in family " + family);
      if (!function_names(e).empty() && require_functions)
        throw InputError(std::string(name) + " must be explicit (no opaque functions) for numeric work");
      return e;
    };
    std::set<std::string> args = {"u"};
    if (family == "4.3") args.insert("y");
    if (family == "4.4") args.insert("x");
    if (p && family != "4.2") throw InputError("--p only applies to family 4.2");
    try {
      return make_transform(family, parsed(m, "m", args), parsed(p, "p", {"u"}));
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what());
    }
  }
};

json member_json(const FamilyMember& m) { return {{"f", m.f.str()}, {"g", m.g.str()}, {"h", m.h.str()}}; }

json shapes_json(const Shapes& s) { return {{"xi1", s.xi1}, {"xi2", s.xi2}, {"xi3", s.xi3}, {"eta", s.eta}}; }

void emit(std::ostream& out, bool as_json, const json& j, const std::string& text) {
  if (as_json)
    out << j.dump(2) << "\n";
  else
    out << text;
}

int cmd_classify(const MemberArgs& ma, bool as_json, std::ostream& out) {
  FamilyMember m = ma.get();
  ClassificationResult r = classify(signature(m));
  json j = {{"member", member_json(m)},
            {"signature", format_signature(r.signature)},
            {"row", r.row_id},
            {"exact", r.exact},
            {"verdict", verdict_name(r.verdict)},
            {"witness", r.witness},
            {"discrepancies", r.discrepancies},
            {"nearest", r.nearest},
            {"notes", r.notes}};
  if (!r.row_id.empty()) j["shapes"] = shapes_json(r.shapes);
  std::ostringstream t;
  t << "signature: " << format_signature(r.signature) << "\n";
  if (r.row_id.empty()) {
    t << "verdict: UNCOVERED\nnearest rows:";
    for (const auto& n : r.nearest) t << " " << n;
    t << "\n";
  } else {
    t << "row: " << r.row_id << (r.exact ? "" : " (inherited)") << "\nverdict: " << verdict_name(r.verdict) << "\n";
    t << "shapes: " << r.shapes.xi1 << "; " << r.shapes.xi2 << "; " << r.shapes.xi3 << "; " << r.shapes.eta << "\n";
    for (const auto& w : r.witness) t << "witness: " << w << "\n";
    for (const auto& d : r.discrepancies) t << "discrepancy: " << d << "\n";
  }
  if (r.verdict == Verdict::not_linearizable && is_linear(m))
    r.notes.push_back(
        "linear member: the transformations of this class keep it linear; the 4.1 map (m(u) nonconstant) "
        "carries f = u_x to a member whose f depends on u_t, outside this class");
  j["notes"] = r.notes;
  for (const auto& n : r.notes) t << "note: " << n << "\n";
  emit(out, as_json, j, t.str());
  return ok;
}

int cmd_generators(const std::optional<std::string>& row, bool as_json, std::ostream& out) {
  FreeData fd = FreeData::generic();
  if (row) {
    try {
      fd = catalog_row(*row).instantiate();
    } catch (const std::out_of_range& e) {
      throw InputError(e.what());
    }
  }
  GeneratorSet gs = solve_wave_determining(build_general(fd), row.has_value());
  json j = json::object();
  for (const auto& [k, v] : generator_entries(gs)) j[k] = v.str();
  emit(out, as_json, {{"case", row.value_or("general")}, {"generators", j}}, format_generators(gs));
  return ok;
}

int cmd_transform(const MemberArgs& ma, TransformArgs ta, bool as_json, std::ostream& out) {
  PointTransformation pt = ta.get(false);
  std::optional<FamilyMember> member;
  if (ma.f || ma.g || ma.h || ma.file) member = ma.get();
  std::optional<FamilyMember> carried;
  if (member) carried = transform_member(*member, pt);
  if (ta.eps) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.15g", *ta.eps);
    std::map<std::string, Expr> at = {{kEps, parse(buf)}};
    pt = pt.at(at[kEps]);
    if (carried)
      carried = make_member(substitute(carried->f, at), substitute(carried->g, at), substitute(carried->h, at));
  }
  JetMapCheck jc = induced_jet_map(pt);
  FluxMapCheck fc = induced_flux_map(pt);
  const char* names[] = {"x", "y", "t", "u", "u_x", "u_y", "u_t", "f", "g", "h"};
  json maps = json::object();
  std::ostringstream t;
  t << "family " << pt.family << "\n";
  std::vector<Expr> all(pt.base.begin(), pt.base.end());
  all.insert(all.end(), pt.jets.begin(), pt.jets.end());
  all.insert(all.end(), pt.fluxes.begin(), pt.fluxes.end());
  for (int k = 0; k < 10; ++k) {
    maps[names[k]] = all[k].str();
    t << names[k] << "bar = " << all[k].str() << "\n";
  }
  t << "chain rule: " << (jc.ok() ? "ok" : "MISMATCH") << "\nbalance law: " << (fc.ok() ? "ok" : "MISMATCH") << "\n";
  json j = {{"family", pt.family}, {"maps", maps}, {"chain_rule_ok", jc.ok()}, {"balance_law_ok", fc.ok()}};
  if (ta.eps) j["eps"] = *ta.eps;
  if (member) {
    const FamilyMember& tm = *carried;
    j["member"] = member_json(*member);
    j["transformed"] = member_json(tm);
    j["transformed_is_linear"] = is_linear(tm);
    t << "transformed member (barred variables):\n" << format_member(tm);
  }
  emit(out, as_json, j, t.str());
  return jc.ok() && fc.ok() ? ok : verification_failure;
}

int cmd_verify(const MemberArgs& ma, TransformArgs ta, int samples, std::uint64_t seed, double tol, bool as_json,
               std::ostream& out) {
  FamilyMember m = ma.get();
  PointTransformation pt = ta.get(true);
  SamplingOptions opt;
  opt.samples = samples;
  opt.seed = seed;
  opt.eps = ta.eps;
  InvarianceReport r;
  try {
    r = verify_invariance(m, pt, opt);
  } catch (const UnboundError& e) {
    throw InputError(std::string("member must be explicit for sampling: ") + e.what());
  }
  bool pass = r.samples == samples && r.max_deviation <= tol;
  json j = {{"max_deviation", r.max_deviation}, {"samples", r.samples}, {"singular_rejections", r.singular_rejections}};
  std::ostringstream t;
  t << "family " << pt.family << ": max deviation " << r.max_deviation << " over " << r.samples << " samples ("
    << r.singular_rejections << " singular rejections) -> " << (pass ? "PASS" : "FAIL") << "\n";
  emit(out, as_json, j, t.str());
  return pass ? ok : verification_failure;
}

FunctionCallback scalar_function(const std::string& text, const char* param) {
  try {
    return elementary(text);
  } catch (const std::invalid_argument&) {
  }
  Expr e;
  try {
    e = parse(text, ParseOptions{{param}, false});
  } catch (const ParseError& err) {
    throw InputError(std::string(param) + "-function: " + err.what());
  }
  return expression_function({param}, e);
}

int cmd_transport(TransformArgs ta, const std::string& psi, const std::string& phi, int grid, double h_step,
                  double tol, double max_residual, bool as_json, std::ostream& out) {
  if (!ta.m && !ta.spec) ta.m = "u^2";
  if (!ta.eps && !ta.spec) ta.eps = 0.05;
  PointTransformation pt = ta.get(true);
  if (!ta.eps) throw InputError("--eps is required");
  if (grid < 2) throw InputError("--grid must be at least 2");
  LinearSolution sol = dalembert(scalar_function(psi, "y"), scalar_function(phi, "y"));
  ImplicitSolution imp = transport_solution(sol, pt, *ta.eps);
  FamilyMember target = transform_member(sol.member, pt);
  CertifyOptions opt;
  opt.grid.n = grid;
  opt.h_step = h_step;
  opt.tol = tol;
  GridReport r = certify(imp, target, opt);
  json rejected = json::array();
  for (const auto& p : r.rejected) rejected.push_back({{"point", p.point}, {"reason", p.reason}});
  json j = {{"member", member_json(target)},
            {"transform", {{"family", pt.family}, {"extension", imp.extension}, {"psi", psi}, {"phi", phi}}},
            {"grid", {{"n", grid}, {"lo", opt.grid.lo}, {"hi", opt.grid.hi}, {"h_step", h_step}}},
            {"eps", *ta.eps},
            {"max_residual", r.max_residual},
            {"newton_stats",
             {{"solves", r.newton.solves},
              {"max_iterations", r.newton.max_iterations},
              {"mean_iterations", r.newton.mean_iterations},
              {"max_abs_F", r.newton.max_abs_f}}},
            {"rejected", rejected}};
  bool pass = r.rejected.empty() && r.max_residual <= max_residual;
  std::ostringstream t;
  t << "family " << pt.family << (imp.extension ? " (extension beyond the worked example)" : "") << ", eps " << *ta.eps
    << ", grid " << grid << "^3, h " << h_step << "\n"
    << "max residual " << r.max_residual << ", Newton max iterations " << r.newton.max_iterations << ", rejected "
    << r.rejected.size() << " -> " << (pass ? "PASS" : "FAIL") << "\n";
  emit(out, as_json, j, t.str());
  return pass ? ok : verification_failure;
}

int cmd_case_check(const std::optional<std::string>& row, bool as_json, std::ostream& out) {
  std::vector<std::string> ids;
  if (row) {
    try {
      ids.push_back(catalog_row(*row).id);
    } catch (const std::out_of_range& e) {
      throw InputError(e.what());
    }
  } else {
    for (const auto& r : catalog()) ids.push_back(r.id);
  }
  json arr = json::array();
  std::ostringstream t;
  bool all = true;
  for (const auto& id : ids) {
    CaseReport r = verify_case(id);
    json res = json::array();
    for (const auto& x : r.residuals) res.push_back({{"component", x.component}, {"value", x.value.str()}});
    arr.push_back({{"id", id},
                   {"passed", r.passed()},
                   {"residuals", res},
                   {"shapes_ok", r.shapes_ok},
                   {"verdict_consistent", r.verdict_consistent},
                   {"probe_failures", r.probe_failures},
                   {"notes", r.notes}});
    t << id << ": " << (r.passed() ? "PASS" : "FAIL") << "\n";
    for (const auto& x : r.residuals) t << "  " << x.component << " = " << x.value.str() << "\n";
    for (const auto& p : r.probe_failures) t << "  probe did not break a constraint: " << p << "\n";
    all = all && r.passed();
  }
  emit(out, as_json, {{"cases", arr}}, t.str());
  return all ? ok : verification_failure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"equivalence transformations of the wave family u_tt = f_x + g_y + h", "eqwave"};
  app.set_help_flag("--help", "print help");
  app.require_subcommand(1);
  bool as_json = false;
  app.add_flag("--json", as_json, "JSON output");

  MemberArgs ma;
  TransformArgs ta;
  std::optional<std::string> row;
  int samples = 100, grid = 21;
  std::uint64_t seed = 1;
  double tol = 1e-9, h_step = 1e-3, newton_tol = 1e-12, max_residual = 1e-5;
  std::string psi = "sin", phi = "cos";

  auto* classify_cmd = app.add_subcommand("classify", "classify a member against the case rows");
  ma.add(classify_cmd);
  auto* gen_cmd = app.add_subcommand("generators", "solved generator set, general or for a case row");
  gen_cmd->add_option("--case", row, "case row id");
  auto* tr_cmd = app.add_subcommand("transform", "finite transformation maps and the carried member");
  ma.add(tr_cmd);
  ta.add(tr_cmd);
  auto* ver_cmd = app.add_subcommand("verify", "sample the invariance of the equation under a transformation");
  ma.add(ver_cmd);
  ta.add(ver_cmd);
  ver_cmd->add_option("--samples", samples)->check(CLI::PositiveNumber);
  ver_cmd->add_option("--seed", seed);
  ver_cmd->add_option("--tol", tol, "deviation tolerance");
  auto* tp_cmd = app.add_subcommand("transport", "transport the d'Alembert solution and certify it");
  ta.add(tp_cmd);
  tp_cmd->add_option("--psi", psi, "psi(y): sin, cos, exp, square, identity, zero or an expression in y");
  tp_cmd->add_option("--phi", phi, "phi(y), as --psi");
  tp_cmd->add_option("--grid", grid, "points per axis on [-1,1]");
  tp_cmd->add_option("--h-step", h_step, "finite-difference step for the residual")->check(CLI::PositiveNumber);
  tp_cmd->add_option("--tol", newton_tol, "Newton tolerance")->check(CLI::PositiveNumber);
  tp_cmd->add_option("--max-residual", max_residual, "largest accepted residual");
  auto* cc_cmd = app.add_subcommand("case-check", "verify case rows symbolically");
  cc_cmd->add_option("--case", row, "case row id (default: all)");
  for (auto* c : {classify_cmd, gen_cmd, tr_cmd, ver_cmd, tp_cmd, cc_cmd}) c->add_flag("--json", as_json, "JSON output");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return input_error;
  }

  try {
    if (*classify_cmd) return cmd_classify(ma, as_json, out);
    if (*gen_cmd) return cmd_generators(row, as_json, out);
    if (*tr_cmd) return cmd_transform(ma, ta, as_json, out);
    if (*ver_cmd) return cmd_verify(ma, ta, samples, seed, tol, as_json, out);
    if (*tp_cmd) return cmd_transport(ta, psi, phi, grid, h_step, newton_tol, max_residual, as_json, out);
    if (*cc_cmd) return cmd_case_check(row, as_json, out);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return input_error;
  } catch (const ParseError& e) {
    err << "input error: " << e.what() << "\n";
    return input_error;
  } catch (const MemberError& e) {
    err << "input error: " << e.what() << "\n";
    return input_error;
  } catch (const FreeDataError& e) {
    err << "input error: " << e.what() << "\n";
    return input_error;
  } catch (const std::exception& e) {
    err << "verification failure: " << e.what() << "\n";
    return verification_failure;
  }
  return input_error;
}

}  // namespace eqwave::cli
