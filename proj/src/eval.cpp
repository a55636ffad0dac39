#include "eqwave/eval.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "ratfunc.hpp"

namespace eqwave {

using namespace detail;

struct CompiledExpr::Impl {
  struct Atom {
    int slot = -1;
    double value = 0.0;
    bool is_function = false;
    FunctionCallback fn;
    std::vector<int> orders;
    std::vector<CompiledExpr> args;
    std::string label;
  };
  struct Term {
    double coef;
    std::vector<std::pair<int, int>> factors;
  };
  struct Poly {
    std::vector<Term> terms;
    std::string label;
  };

  std::vector<Atom> atoms;
  Poly num;
  std::vector<std::pair<Poly, int>> den;

  static double ipow(double v, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= v;
    return r;
  }

  static double eval_poly(const Poly& p, const std::vector<double>& atom_values) {
    double s = 0.0;
    for (const auto& term : p.terms) {
      double v = term.coef;
      for (const auto& [idx, e] : term.factors) v *= ipow(atom_values[static_cast<std::size_t>(idx)], e);
      s += v;
    }
    return s;
  }
};

namespace {

class Compiler {
 public:
  Compiler(const std::vector<std::string>& slots, const Binding& binding, CompiledExpr::Impl& impl)
      : slots_(slots), binding_(binding), impl_(impl) {}

  CompiledExpr::Impl::Poly poly(const detail::Poly& p) {
    CompiledExpr::Impl::Poly out;
    out.label = poly_str(p);
    for (const auto& [m, c] : p) {
      CompiledExpr::Impl::Term t{c.get_d(), {}};
      for (const auto& [atom, e] : m) t.factors.emplace_back(index(atom), e);
      out.terms.push_back(std::move(t));
    }
    return out;
  }

 private:
  int index(detail::Atom a) {
    auto it = indices_.find(a);
    if (it != indices_.end()) return it->second;
    CompiledExpr::Impl::Atom ca;
    ca.label = atom_str(a);
    if (a->is_function) {
      auto fit = binding_.functions.find(a->name);
      if (fit == binding_.functions.end()) throw UnboundError("unbound function: " + a->name);
      ca.is_function = true;
      ca.fn = fit->second;
      ca.orders = a->orders;
      for (const auto& arg : a->args) ca.args.emplace_back(arg, slots_, binding_);
    } else {
      auto sit = std::find(slots_.begin(), slots_.end(), a->name);
      if (sit != slots_.end()) {
        ca.slot = static_cast<int>(sit - slots_.begin());
      } else {
        auto vit = binding_.values.find(a->name);
        if (vit == binding_.values.end()) throw UnboundError("unbound symbol: " + display_name(a->name));
        ca.value = vit->second;
      }
    }
    impl_.atoms.push_back(std::move(ca));
    int idx = static_cast<int>(impl_.atoms.size()) - 1;
    indices_.emplace(a, idx);
    return idx;
  }

  const std::vector<std::string>& slots_;
  const Binding& binding_;
  CompiledExpr::Impl& impl_;
  std::map<detail::Atom, int> indices_;
};

}  // namespace

CompiledExpr::CompiledExpr(const Expr& e, const std::vector<std::string>& slots, const Binding& binding) {
  auto impl = std::make_shared<Impl>();
  Compiler c(slots, binding, *impl);
  impl->num = c.poly(e.rep().num);
  for (const auto& [d, k] : e.rep().den) impl->den.emplace_back(c.poly(d), k);
  impl_ = std::move(impl);
}

double CompiledExpr::operator()(std::span<const double> slot_values) const {
  const Impl& impl = *impl_;
  std::vector<double> values(impl.atoms.size());
  std::vector<double> args;
  for (std::size_t i = 0; i < impl.atoms.size(); ++i) {
    const auto& a = impl.atoms[i];
    if (a.is_function) {
      args.clear();
      for (const auto& arg : a.args) args.push_back(arg(slot_values));
      double v = a.fn(args, a.orders);
      if (!std::isfinite(v)) throw DomainError("non-finite function value", a.label);
      values[i] = v;
    } else if (a.slot >= 0) {
      values[i] = slot_values[static_cast<std::size_t>(a.slot)];
    } else {
      values[i] = a.value;
    }
  }
  double num = Impl::eval_poly(impl.num, values);
  double den = 1.0;
  for (const auto& [p, k] : impl.den) {
    double d = Impl::eval_poly(p, values);
    if (!(std::abs(d) >= kSingularThreshold)) throw DomainError("singular denominator", p.label);
    den *= Impl::ipow(d, k);
  }
  double out = num / den;
  if (!std::isfinite(out)) throw DomainError("non-finite value", impl.num.label);
  return out;
}

double eval(const Expr& e, const Binding& binding) { return CompiledExpr(e, {}, binding)({}); }

FunctionCallback unary_function(std::function<double(double)> f0, std::function<double(double)> f1,
                                std::function<double(double)> f2) {
  return [f0 = std::move(f0), f1 = std::move(f1), f2 = std::move(f2)](std::span<const double> args,
                                                                      std::span<const int> orders) {
    if (args.size() != 1) throw std::invalid_argument("unary function called with wrong arity");
    switch (orders.empty() ? 0 : orders[0]) {
      case 0:
        return f0(args[0]);
      case 1:
        return f1(args[0]);
      case 2:
        return f2(args[0]);
      default:
        throw std::invalid_argument("unary function: derivative order above 2 not supplied");
    }
  };
}

FunctionCallback expression_function(std::vector<std::string> params, Expr body) {
  struct State {
    std::vector<std::string> params;
    Expr body;
    std::mutex mutex;
    std::map<std::vector<int>, CompiledExpr> cache;
  };
  auto state = std::make_shared<State>();
  state->params = std::move(params);
  state->body = std::move(body);
  return [state](std::span<const double> args, std::span<const int> orders) {
    std::vector<int> key(orders.begin(), orders.end());
    key.resize(state->params.size(), 0);
    CompiledExpr compiled;
    {
      std::lock_guard lock(state->mutex);
      auto it = state->cache.find(key);
      if (it == state->cache.end()) {
        Expr d = state->body;
        for (std::size_t k = 0; k < key.size(); ++k) d = partial(d, state->params[k], key[k]);
        it = state->cache.emplace(key, CompiledExpr(d, state->params, Binding{})).first;
      }
      compiled = it->second;
    }
    return compiled(args);
  };
}

}  // namespace eqwave
