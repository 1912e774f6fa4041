#include "stmcheck/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <set>
#include <string>

#include "stmcheck/pretty.hpp"
#include "stmcheck/transform.hpp"
#include "stmcheck/typecheck.hpp"

namespace stmcheck {

namespace {

// ---- value enumeration -------------------------------------------------

struct Enumerator {
  const Program& prog;
  const OracleConfig& cfg;
  ConstructorTable table;

  explicit Enumerator(const Program& p, const OracleConfig& c)
      : prog(p), cfg(c), table(p.ctors()) {}

  // Emits the bounded space of t in a deterministic small-first order.
  // Returns true when the space was emitted in full (no truncation).
  bool systematic(const Type& t, int budget, size_t limit, std::vector<ExprPtr>& out) {
    if (budget <= 0) return false;
    auto room = [&]() { return out.size() < limit; };
    switch (t.kind()) {
      case Type::Kind::Int:
        for (int k = 0; k <= cfg.int_window; ++k) {
          if (!room()) return false;
          out.push_back(intlit(k));
          if (k > 0) {
            if (!room()) return false;
            out.push_back(intlit(-k));
          }
        }
        return true;
      case Type::Kind::Bool:
        if (!room()) return false;
        out.push_back(false_con());
        if (!room()) return false;
        out.push_back(true_con());
        return true;
      case Type::Kind::Unit:
        if (!room()) return false;
        out.push_back(unit_con());
        return true;
      case Type::Kind::List: {
        if (!room()) return false;
        out.push_back(nil_con());
        std::vector<ExprPtr> heads, tails;
        bool hc = systematic(t.elem(), budget - 1, limit, heads);
        bool tc = systematic(t, budget - 1, limit, tails);
        bool complete = hc && tc;
        for (const auto& tail : tails) {
          for (const auto& head : heads) {
            if (!room()) return false;
            out.push_back(cons(head, tail));
          }
        }
        return complete;
      }
      case Type::Kind::Tuple: {
        std::vector<std::vector<ExprPtr>> parts(t.args().size());
        bool complete = true;
        for (size_t i = 0; i < t.args().size(); ++i)
          complete = systematic(t.args()[i], budget - 1, limit, parts[i]) && complete;
        for (const auto& p : parts)
          if (p.empty()) return false;
        std::vector<size_t> ix(parts.size(), 0);
        while (true) {
          if (!room()) return false;
          std::vector<ExprPtr> elems;
          elems.reserve(parts.size());
          for (size_t i = 0; i < parts.size(); ++i) elems.push_back(parts[i][ix[i]]);
          out.push_back(tuple(std::move(elems)));
          size_t i = parts.size();
          while (i-- > 0) {
            if (++ix[i] < parts[i].size()) break;
            ix[i] = 0;
            if (i == 0) return complete;
          }
        }
      }
      case Type::Kind::Fun: {
        // A few shapes worth trying; function spaces are never exhaustive.
        if (t.from() == t.to()) {
          if (!room()) return false;
          out.push_back(lam("u", var("u")));
        }
        if (t.from().is(Type::Kind::Int) && t.to().is(Type::Kind::Int)) {
          if (!room()) return false;
          out.push_back(lam("u", prim(PrimTag::Add, {var("u"), intlit(1)})));
          if (!room()) return false;
          out.push_back(lam("u", prim(PrimTag::Sub, {var("u"), intlit(1)})));
        }
        std::vector<ExprPtr> results;
        systematic(t.to(), budget - 1, limit, results);
        for (const auto& r : results) {
          if (!room()) return false;
          out.push_back(lam("u", r));
        }
        return false;
      }
      case Type::Kind::Data: {
        if (!table.has_datatype(t.data_name())) return false;
        bool complete = true;
        for (const auto& ctor : table.of_datatype(t.data_name())) {
          if (ctor.arity == 0) {
            if (!room()) return false;
            out.push_back(con(ctor.name));
            continue;
          }
          if (!ctor.fields_known || (int)ctor.fields.size() != ctor.arity) {
            complete = false;
            continue;
          }
          std::vector<std::vector<ExprPtr>> parts(ctor.fields.size());
          for (size_t i = 0; i < ctor.fields.size(); ++i)
            complete = systematic(ctor.fields[i], budget - 1, limit, parts[i]) && complete;
          bool empty = false;
          for (const auto& p : parts) empty = empty || p.empty();
          if (empty) {
            complete = false;
            continue;
          }
          std::vector<size_t> ix(parts.size(), 0);
          bool rolled = false;
          while (!rolled) {
            if (!room()) return false;
            std::vector<ExprPtr> args;
            args.reserve(parts.size());
            for (size_t i = 0; i < parts.size(); ++i) args.push_back(parts[i][ix[i]]);
            out.push_back(con(ctor.name, std::move(args)));
            size_t i = parts.size();
            rolled = true;
            while (i-- > 0) {
              if (++ix[i] < parts[i].size()) { rolled = false; break; }
              ix[i] = 0;
            }
          }
        }
        return complete;
      }
      default:
        return false;  // Stm, TVar, Bottom: no pure values to draw
    }
  }

  ExprPtr random_value(const Type& t, std::mt19937_64& rng, int depth) {
    switch (t.kind()) {
      case Type::Kind::Int: {
        std::uniform_int_distribution<int> d(-50, 50);
        return intlit(d(rng));
      }
      case Type::Kind::Bool:
        return (rng() & 1) ? true_con() : false_con();
      case Type::Kind::Unit:
        return unit_con();
      case Type::Kind::List: {
        std::uniform_int_distribution<int> len(0, depth > 0 ? 4 : 0);
        int n = len(rng);
        ExprPtr acc = nil_con();
        for (int i = 0; i < n; ++i)
          acc = cons(random_value(t.elem(), rng, depth - 1), acc);
        return acc;
      }
      case Type::Kind::Tuple: {
        std::vector<ExprPtr> elems;
        elems.reserve(t.args().size());
        for (const auto& a : t.args()) elems.push_back(random_value(a, rng, depth - 1));
        return tuple(std::move(elems));
      }
      case Type::Kind::Fun:
        if (t.from() == t.to() && (rng() & 1)) return lam("u", var("u"));
        return lam("u", random_value(t.to(), rng, depth - 1));
      case Type::Kind::Data: {
        if (!table.has_datatype(t.data_name())) return unit_con();
        const auto& ctors = table.of_datatype(t.data_name());
        std::vector<const CtorInfo*> pool;
        for (const auto& c : ctors)
          if (depth > 0 || c.arity == 0) pool.push_back(&c);
        if (pool.empty())
          for (const auto& c : ctors) pool.push_back(&c);
        std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);
        const CtorInfo* c = pool[pick(rng)];
        std::vector<ExprPtr> args;
        for (int i = 0; i < c->arity; ++i) {
          Type ft = c->fields_known && i < (int)c->fields.size() ? c->fields[i]
                                                                 : Type::integer();
          args.push_back(random_value(ft, rng, depth - 1));
        }
        return con(c->name, std::move(args));
      }
      default:
        return unit_con();
    }
  }
};

}  // namespace

std::vector<ExprPtr> enumerate_values(const Type& t, const Program& prog,
                                      const OracleConfig& cfg, size_t limit,
                                      bool* exhaustive) {
  Enumerator en(prog, cfg);
  std::vector<ExprPtr> out;
  bool complete = en.systematic(t, cfg.size_bound, limit, out);
  if (exhaustive) *exhaustive = complete;
  if (!complete && out.size() < limit) {
    std::mt19937_64 rng(cfg.seed ^ (std::hash<std::string>{}(t.to_string()) | 1));
    std::set<std::string> seen;
    for (const auto& v : out) seen.insert(pretty_expr(v));
    size_t attempts = 0;
    while (out.size() < limit && attempts < 4 * limit) {
      ++attempts;
      ExprPtr v = en.random_value(t, rng, cfg.size_bound);
      if (seen.insert(pretty_expr(v)).second) out.push_back(v);
    }
  }
  return out;
}

// ---- contract satisfaction ----------------------------------------------

namespace {

int quantifier_depth(const ContractPtr& c) {
  if (const auto* d = c->as<Contract::DepFun>())
    return 1 + quantifier_depth(d->codomain);
  if (const auto* t = c->as<Contract::Tuple>()) {
    int m = 0;
    for (const auto& e : t->elems) m = std::max(m, quantifier_depth(e));
    return m;
  }
  if (const auto* s = c->as<Contract::StmOp>())
    return 1 + std::max(quantifier_depth(s->post), quantifier_depth(s->result));
  return 0;
}

struct Oracle {
  const Program& prog;
  const FunMap& funs;
  const OracleConfig& cfg;
  int samples_left;
  size_t level_cap;

  Oracle(const Program& p, const FunMap& f, const OracleConfig& c, int root_depth)
      : prog(p), funs(f), cfg(c), samples_left(c.samples) {
    int d = std::max(1, root_depth);
    level_cap = (size_t)std::max(
        4.0, std::round(std::pow((double)std::max(1, c.samples), 1.0 / d)));
  }

  static SatVerdict holds(bool exhaustive) {
    SatVerdict v;
    v.kind = SatVerdict::Kind::Holds;
    v.exhaustive = exhaustive;
    return v;
  }
  SatVerdict violated(std::string reason,
                      std::vector<std::pair<std::string, ExprPtr>> bind = {}) const {
    SatVerdict v;
    v.kind = SatVerdict::Kind::Violated;
    v.reason = std::move(reason);
    v.witness_bindings = std::move(bind);
    v.witness = render(v.witness_bindings);
    return v;
  }
  static SatVerdict inconclusive(std::string reason) {
    SatVerdict v;
    v.kind = SatVerdict::Kind::Inconclusive;
    v.reason = std::move(reason);
    return v;
  }
  // Witness parts can be derived expressions; show their values when they
  // settle within a small budget.
  ExprPtr display(const ExprPtr& e) const {
    EvalOutcome out = force_deep(e, Env{}, funs, 2000);
    return out.converged() ? out.value : e;
  }
  std::string render(const std::vector<std::pair<std::string, ExprPtr>>& bs) const {
    std::string s;
    for (const auto& [n, e] : bs) {
      if (!s.empty()) s += ", ";
      s += n + " = " + pretty_expr(display(e));
    }
    return s;
  }
  SatVerdict prefix(std::pair<std::string, ExprPtr> bind, SatVerdict inner) const {
    inner.witness_bindings.insert(inner.witness_bindings.begin(), std::move(bind));
    inner.witness = render(inner.witness_bindings);
    return inner;
  }

  // Candidates of type t accepted by contract c, plus coverage accounting.
  std::vector<ExprPtr> domain(const ContractPtr& c, const Type& t, bool* exhaustive) {
    bool space_done = false;
    std::vector<ExprPtr> raw = enumerate_values(t, prog, cfg, level_cap, &space_done);
    std::vector<ExprPtr> picked;
    bool covered = space_done;
    for (const auto& v : raw) {
      SatVerdict s = check(v, c, t);
      if (s.violated()) continue;  // correctly outside the domain
      if (s.holds()) {
        picked.push_back(v);
        covered = covered && s.exhaustive;
      } else {
        covered = false;  // could not certify membership either way
      }
    }
    *exhaustive = covered;
    return picked;
  }

  SatVerdict check(const ExprPtr& e, const ContractPtr& c, const Type& ty) {
    if (const auto* s = c->as<Contract::StmOp>()) return check_stm(e, *s, ty);
    if (!is_pure(e)) return violated("impure expression against a pure contract");
    if (c->is<Contract::Any>()) return holds(true);
    if (const auto* p = c->as<Contract::Pred>()) return check_pred(e, *p, ty);
    if (const auto* d = c->as<Contract::DepFun>()) return check_depfun(e, *d, ty);
    if (const auto* t = c->as<Contract::Tuple>()) return check_tuple(e, *t, ty);
    return inconclusive("unhandled contract form");
  }

  SatVerdict check_pred(const ExprPtr& e, const Contract::Pred& p, const Type& ty) {
    Env empty;
    EvalOutcome probe = force_deep(e, empty, funs, cfg.eval_fuel);
    if (probe.crashed()) return violated("the expression itself crashes");
    if (probe.unreachable()) return holds(true);
    bool definite = probe.converged();
    if (ty.is(Type::Kind::Fun)) {
      // Crash-freedom probe for function values: feed generated arguments.
      definite = false;
      std::vector<ExprPtr> args = enumerate_values(ty.from(), prog, cfg, 8);
      for (const auto& a : args) {
        EvalOutcome r = force_deep(app(e, a), empty, funs, cfg.eval_fuel);
        if (r.crashed())
          return violated("crashes when applied", {{"argument", a}});
      }
    }
    EvalOutcome r = eval(substitute(p.pred, p.var, e), empty, funs, cfg.eval_fuel);
    switch (r.kind) {
      case EvalOutcome::Kind::Converged: {
        const auto* con = r.value->as<Expr::Con>();
        if (con && con->name == "True") return holds(definite);
        if (con && con->name == "False") return violated("predicate is False");
        return inconclusive("predicate did not return a boolean");
      }
      case EvalOutcome::Kind::Crashed:
        return violated("predicate crashes");
      case EvalOutcome::Kind::Unreachable:
        return holds(true);
      case EvalOutcome::Kind::FuelExhausted:
        return holds(false);  // divergence satisfies the contract
    }
    return inconclusive("unreachable");
  }

  SatVerdict check_depfun(const ExprPtr& e, const Contract::DepFun& d, const Type& ty) {
    if (!ty.is(Type::Kind::Fun)) {
      Env empty;
      EvalOutcome probe = eval(e, empty, funs, cfg.eval_fuel);
      if (probe.crashed()) return violated("the expression itself crashes");
      if (probe.unreachable()) return holds(true);
      return inconclusive("function contract against a non-function type");
    }
    bool dom_exhaustive = false;
    std::vector<ExprPtr> values = domain(d.domain, ty.from(), &dom_exhaustive);
    if (values.empty())
      return dom_exhaustive ? holds(true)
                            : inconclusive("no domain inhabitants within bounds");
    bool all_exhaustive = dom_exhaustive;
    for (const auto& v : values) {
      if (samples_left-- <= 0)
        return inconclusive("sampling budget exhausted");
      SatVerdict inner =
          check(app(e, v), contract_substitute(d.codomain, d.var, v), ty.to());
      if (inner.violated()) return prefix({d.var, v}, std::move(inner));
      all_exhaustive = all_exhaustive && inner.exhaustive;
    }
    if (all_exhaustive) return holds(true);
    return inconclusive("all samples passed without covering the space");
  }

  SatVerdict check_tuple(const ExprPtr& e, const Contract::Tuple& t, const Type& ty) {
    Env empty;
    EvalOutcome r = eval(e, empty, funs, cfg.eval_fuel);
    if (r.crashed()) return violated("the expression itself crashes");
    if (r.unreachable()) return holds(true);
    if (r.out_of_fuel()) return holds(false);
    const auto* con = r.value->as<Expr::Con>();
    if (t.elems.size() == 1)
      return check(e, t.elems[0], ty);
    if (!con || con->args.size() != t.elems.size())
      return inconclusive("tuple contract against a non-tuple value");
    bool all_exhaustive = true;
    for (size_t i = 0; i < t.elems.size(); ++i) {
      Type comp = ty.is(Type::Kind::Tuple) && ty.args().size() == t.elems.size()
                      ? ty.args()[i]
                      : Type::bottom();
      SatVerdict inner = check(con->args[i], t.elems[i], comp);
      if (inner.violated())
        return prefix({"component " + std::to_string(i + 1), con->args[i]},
                      std::move(inner));
      all_exhaustive = all_exhaustive && inner.exhaustive;
    }
    return holds(all_exhaustive);
  }

  SatVerdict check_stm(const ExprPtr& e, const Contract::StmOp& c, const Type& ty) {
    Type env_ty = prog.tvar_tuple_type();
    Type result_ty = ty.is_stm() ? ty.result() : Type::bottom();
    std::vector<ExprPtr> variants = gamma_expand(e, 256);
    bool dom_exhaustive = false;
    std::vector<ExprPtr> envs = domain(c.pre, env_ty, &dom_exhaustive);
    if (envs.empty())
      return dom_exhaustive ? holds(true)
                            : inconclusive("no pre-states within bounds");
    bool all_exhaustive = dom_exhaustive;
    for (size_t vi = 0; vi < variants.size(); ++vi) {
      for (const auto& env_expr : envs) {
        if (samples_left-- <= 0)
          return inconclusive("sampling budget exhausted");
        Env sigma = tuple_env(env_expr, prog.tvars);
        auto bindings = [&](const Env& st) {
          std::vector<std::pair<std::string, ExprPtr>> bs;
          for (const auto& [name, val] : st.slots()) bs.push_back({name, val});
          return bs;
        };
        std::string vtag =
            variants.size() > 1 ? " (alternative " + std::to_string(vi + 1) + ")" : "";
        EvalOutcome r = eval(variants[vi], sigma, funs, cfg.eval_fuel);
        if (r.crashed())
          return violated("the transaction crashes" + vtag, bindings(sigma));
        if (r.unreachable()) continue;  // retried; never commits
        if (r.out_of_fuel()) {
          all_exhaustive = false;
          continue;
        }
        const auto* retv = r.value->as<Expr::Return>();
        if (!retv) return inconclusive("transaction stopped on a non-return value");
        SatVerdict res = check(retv->value,
                               contract_substitute(c.result, c.var, env_expr),
                               result_ty);
        if (res.violated())
          return prefix({"pre-state", env_expr},
                        violated("result: " + res.reason + vtag, bindings(sigma)));
        ExprPtr post_state = env_tuple(r.env);
        SatVerdict post = check(post_state,
                                contract_substitute(c.post, c.var, env_expr), env_ty);
        if (post.violated()) {
          SatVerdict v = violated("post-state: " + post.reason + vtag, bindings(sigma));
          v.witness_bindings.push_back({"post-state", post_state});
          v.witness = render(v.witness_bindings);
          return v;
        }
        all_exhaustive = all_exhaustive && res.exhaustive && post.exhaustive;
      }
    }
    if (all_exhaustive) return holds(true);
    return inconclusive("all samples passed without covering the space");
  }
};

}  // namespace

SatVerdict satisfies_oracle(const ExprPtr& e, const ContractPtr& c, const Type& ty,
                            const Program& prog, const FunMap& funs,
                            const OracleConfig& cfg) {
  Oracle o(prog, funs, cfg, quantifier_depth(c));
  return o.check(e, c, ty);
}

ExprPtr generate_inhabitant(const ContractPtr& c, const Type& t, const Program& prog,
                            const FunMap& funs, const OracleConfig& cfg) {
  size_t limit = std::max<size_t>(32, (size_t)cfg.samples);
  std::vector<ExprPtr> values = enumerate_values(t, prog, cfg, limit);
  for (const auto& v : values) {
    Oracle o(prog, funs, cfg, quantifier_depth(c));
    SatVerdict s = o.check(v, c, t);
    if (s.holds()) return v;
  }
  return nullptr;
}

}  // namespace stmcheck
