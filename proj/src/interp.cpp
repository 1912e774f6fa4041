#include "stmcheck/interp.hpp"

#include <algorithm>
#include <variant>

#include "stmcheck/pretty.hpp"

namespace stmcheck {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

Env Env::from_decls(const std::vector<TVarDecl>& decls) {
  Env env;
  for (const auto& d : decls) {
    if (!d.init) throw EvalError("TVar " + d.name + " has no initial value");
    env.slots_.emplace_back(d.name, d.init);
  }
  return env;
}

bool Env::has(const std::string& name) const {
  for (const auto& [n, v] : slots_)
    if (n == name) return true;
  return false;
}

const ExprPtr& Env::lookup(const std::string& name) const {
  for (const auto& [n, v] : slots_)
    if (n == name) return v;
  throw EvalError("unknown TVar: " + name);
}

Env Env::set(const std::string& name, ExprPtr value) const {
  Env out = *this;
  for (auto& [n, v] : out.slots_) {
    if (n == name) {
      v = std::move(value);
      return out;
    }
  }
  out.slots_.emplace_back(name, std::move(value));
  return out;
}

bool env_equal(const Env& a, const Env& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a.slots()[i].first != b.slots()[i].first) return false;
    if (!expr_equal(a.slots()[i].second, b.slots()[i].second)) return false;
  }
  return true;
}

FunMap function_map(const Program& p) {
  FunMap m;
  for (const auto& f : p.functions)
    if (f.body) m[f.name] = f.body;
  return m;
}

bool is_value(const ExprPtr& e) {
  return e->is<Expr::Con>() || e->is<Expr::IntLit>() || e->is<Expr::Lam>() ||
         e->is<Expr::Exc>() || e->is<Expr::Return>();
}

namespace {

StepResult delta(const Expr::Prim& n, const ExprPtr& e, const Env& env) {
  auto stuckf = [&](const char* why) { return StepResult::stuck(why, e, env); };
  auto boolcon = [](bool b) { return b ? true_con() : false_con(); };
  auto int_of = [](const ExprPtr& a, long long* out) {
    const auto* i = a->as<Expr::IntLit>();
    if (i) *out = i->value;
    return i != nullptr;
  };
  auto bool_of = [](const ExprPtr& a, bool* out) {
    const auto* c = a->as<Expr::Con>();
    if (!c || !c->args.empty()) return false;
    if (c->name == "True") { *out = true; return true; }
    if (c->name == "False") { *out = false; return true; }
    return false;
  };

  switch (n.op) {
    case PrimTag::Add:
    case PrimTag::Sub:
    case PrimTag::Mul: {
      long long a = 0, b = 0;
      if (!int_of(n.args[0], &a) || !int_of(n.args[1], &b))
        return stuckf("arithmetic on non-integer");
      long long r = n.op == PrimTag::Add ? a + b : n.op == PrimTag::Sub ? a - b : a * b;
      return StepResult::stepped(intlit(r), env, "DELTA");
    }
    case PrimTag::Gt:
    case PrimTag::Ge:
    case PrimTag::Lt:
    case PrimTag::Le: {
      long long a = 0, b = 0;
      if (!int_of(n.args[0], &a) || !int_of(n.args[1], &b))
        return stuckf("comparison on non-integer");
      bool r = n.op == PrimTag::Gt   ? a > b
               : n.op == PrimTag::Ge ? a >= b
               : n.op == PrimTag::Lt ? a < b
                                     : a <= b;
      return StepResult::stepped(boolcon(r), env, "DELTA");
    }
    case PrimTag::And:
    case PrimTag::Or: {
      bool a = false, b = false;
      if (!bool_of(n.args[0], &a) || !bool_of(n.args[1], &b))
        return stuckf("boolean operator on non-boolean");
      return StepResult::stepped(boolcon(n.op == PrimTag::And ? (a && b) : (a || b)), env,
                                 "DELTA");
    }
    case PrimTag::Not: {
      bool a = false;
      if (!bool_of(n.args[0], &a)) return stuckf("not on non-boolean");
      return StepResult::stepped(boolcon(!a), env, "DELTA");
    }
    case PrimTag::Eq: {
      const ExprPtr& x = n.args[0];
      const ExprPtr& y = n.args[1];
      long long a = 0, b = 0;
      if (int_of(x, &a) && int_of(y, &b))
        return StepResult::stepped(boolcon(a == b), env, "DELTA");
      const auto* cx = x->as<Expr::Con>();
      const auto* cy = y->as<Expr::Con>();
      if (cx && cy) {
        if (cx->name != cy->name)
          return StepResult::stepped(false_con(), env, "DELTA");
        // Same constructor: compare fields pairwise.
        ExprPtr acc = true_con();
        for (size_t i = cx->args.size(); i-- > 0;) {
          ExprPtr field = prim(PrimTag::Eq, {cx->args[i], cy->args[i]});
          acc = acc->is<Expr::Con>() && acc->as<Expr::Con>()->name == "True"
                    ? field
                    : prim(PrimTag::And, {field, acc});
        }
        return StepResult::stepped(acc, env, "DELTA");
      }
      return stuckf("equality on incomparable values");
    }
  }
  return stuckf("unknown primitive");
}

}  // namespace

StepResult step(const ExprPtr& e, const Env& env, const FunMap& funs) {
  if (is_value(e)) return StepResult::value(e, env);
  return std::visit(
      overloaded{
          [&](const Expr::Var& n) {
            return StepResult::stuck("unbound variable " + n.name, e, env);
          },
          [&](const Expr::FunRef& n) {
            auto it = funs.find(n.name);
            if (it == funs.end())
              return StepResult::stuck("unknown function " + n.name, e, env);
            return StepResult::stepped(it->second, env, "CALL");
          },
          [&](const Expr::App& n) {
            if (const auto* l = n.fn->as<Expr::Lam>())
              return StepResult::stepped(substitute(l->body, l->param, n.arg), env, "APP");
            if (n.fn->is<Expr::Exc>()) return StepResult::stepped(n.fn, env, "EXC");
            if (is_value(n.fn))
              return StepResult::stuck("application of a non-function", e, env);
            StepResult inner = step(n.fn, env, funs);
            if (inner.kind != StepResult::Kind::Stepped) return inner;
            return StepResult::stepped(rebuild(*e, Expr::App{inner.expr, n.arg}), inner.env,
                                       inner.rule);
          },
          [&](const Expr::Case& n) {
            if (const auto* c = n.scrutinee->as<Expr::Con>()) {
              for (const auto& alt : n.alts) {
                if (alt.con != c->name) continue;
                if (alt.binders.size() != c->args.size())
                  return StepResult::stuck("pattern arity mismatch", e, env);
                std::map<std::string, ExprPtr> s;
                for (size_t i = 0; i < alt.binders.size(); ++i)
                  s[alt.binders[i]] = c->args[i];
                return StepResult::stepped(substitute_parallel(alt.body, s), env, "CASE");
              }
              return StepResult::stuck("no alternative matches " + c->name, e, env);
            }
            if (n.scrutinee->is<Expr::Exc>())
              return StepResult::stepped(n.scrutinee, env, "EXC");
            if (is_value(n.scrutinee))
              return StepResult::stuck("case on a non-constructor value", e, env);
            StepResult inner = step(n.scrutinee, env, funs);
            if (inner.kind != StepResult::Kind::Stepped) return inner;
            return StepResult::stepped(rebuild(*e, Expr::Case{inner.expr, n.alts}), inner.env,
                                       inner.rule);
          },
          [&](const Expr::Bind& n) {
            if (const auto* r = n.left->as<Expr::Return>())
              return StepResult::stepped(app(n.right, r->value), env, "BIND");
            if (n.left->is<Expr::Exc>()) return StepResult::stepped(n.left, env, "EXC");
            if (is_value(n.left))
              return StepResult::stuck(">>= on a non-STM value", e, env);
            StepResult inner = step(n.left, env, funs);
            if (inner.kind != StepResult::Kind::Stepped) return inner;
            return StepResult::stepped(rebuild(*e, Expr::Bind{inner.expr, n.right}), inner.env,
                                       inner.rule);
          },
          [&](const Expr::ReadTVar& n) {
            if (!env.has(n.tvar))
              return StepResult::stuck("unknown TVar " + n.tvar, e, env);
            return StepResult::stepped(ret(env.lookup(n.tvar)), env, "READ");
          },
          [&](const Expr::WriteTVar& n) {
            if (!env.has(n.tvar))
              return StepResult::stuck("unknown TVar " + n.tvar, e, env);
            if (!is_pure(n.value))
              return StepResult::stuck("writeTVar payload is not pure", e, env);
            return StepResult::stepped(ret(unit_con()), env.set(n.tvar, n.value), "WRITE");
          },
          [&](const Expr::Prim& n) {
            for (size_t i = 0; i < n.args.size(); ++i) {
              if (n.args[i]->is<Expr::Exc>())
                return StepResult::stepped(n.args[i], env, "EXC");
              if (!is_value(n.args[i])) {
                StepResult inner = step(n.args[i], env, funs);
                if (inner.kind != StepResult::Kind::Stepped) return inner;
                Expr::Prim out = n;
                out.args[i] = inner.expr;
                return StepResult::stepped(rebuild(*e, std::move(out)), inner.env, inner.rule);
              }
            }
            return delta(n, e, env);
          },
          [&](const Expr::OrElse&) {
            return StepResult::stuck("orElse has no reduction rule; expand alternatives first",
                                     e, env);
          },
          [&](const Expr::Retry&) {
            // A retrying transaction never commits; treat it as unreachable.
            return StepResult::stepped(unr(), env, "RETRY");
          },
          [&](const Expr::Do&) {
            return StepResult::stuck("surface do-block in evaluation", e, env);
          },
          [&](const Expr::Let&) {
            return StepResult::stuck("surface let in evaluation", e, env);
          },
          [&](const auto&) {
            return StepResult::stuck("no rule applies", e, env);
          },
      },
      e->node);
}

EvalOutcome eval(const ExprPtr& e, const Env& env, const FunMap& funs, int fuel,
                 StepTrace* trace) {
  ExprPtr cur = e;
  Env cur_env = env;
  for (int i = 0; i < fuel; ++i) {
    StepResult r = step(cur, cur_env, funs);
    switch (r.kind) {
      case StepResult::Kind::Value: {
        EvalOutcome out;
        out.value = r.expr;
        out.env = r.env;
        if (const auto* x = r.expr->as<Expr::Exc>())
          out.kind = x->kind == ExcKind::Bad ? EvalOutcome::Kind::Crashed
                                             : EvalOutcome::Kind::Unreachable;
        else
          out.kind = EvalOutcome::Kind::Converged;
        return out;
      }
      case StepResult::Kind::Stuck: {
        EvalOutcome out;
        out.kind = EvalOutcome::Kind::FuelExhausted;
        out.value = r.expr;
        out.env = r.env;
        out.note = "stuck: " + r.reason;
        return out;
      }
      case StepResult::Kind::Stepped:
        if (trace) trace->emplace_back(r.rule, expr_size(r.expr));
        cur = r.expr;
        cur_env = r.env;
        break;
    }
  }
  EvalOutcome out;
  out.kind = EvalOutcome::Kind::FuelExhausted;
  out.value = cur;
  out.env = cur_env;
  return out;
}

namespace {

EvalOutcome force_rec(const ExprPtr& e, const Env& env, const FunMap& funs, int& fuel) {
  EvalOutcome whnf = eval(e, env, funs, fuel);
  if (whnf.kind != EvalOutcome::Kind::Converged) return whnf;
  fuel = std::max(0, fuel - 1);
  if (const auto* c = whnf.value->as<Expr::Con>()) {
    std::vector<ExprPtr> args;
    args.reserve(c->args.size());
    for (const auto& a : c->args) {
      EvalOutcome sub = force_rec(a, whnf.env, funs, fuel);
      if (sub.kind != EvalOutcome::Kind::Converged) return sub;
      args.push_back(sub.value);
    }
    EvalOutcome out = whnf;
    out.value = con(c->name, std::move(args));
    return out;
  }
  if (const auto* r = whnf.value->as<Expr::Return>()) {
    EvalOutcome sub = force_rec(r->value, whnf.env, funs, fuel);
    if (sub.kind != EvalOutcome::Kind::Converged) return sub;
    EvalOutcome out = whnf;
    out.value = ret(sub.value);
    return out;
  }
  return whnf;
}

}  // namespace

EvalOutcome force_deep(const ExprPtr& e, const Env& env, const FunMap& funs, int fuel) {
  int budget = fuel;
  return force_rec(e, env, funs, budget);
}

ExprPtr env_tuple(const Env& env) {
  if (env.size() == 0) return unit_con();
  std::vector<ExprPtr> elems;
  elems.reserve(env.size());
  for (const auto& [n, v] : env.slots()) elems.push_back(v);
  return tuple(std::move(elems));
}

Env tuple_env(const ExprPtr& e, const std::vector<TVarDecl>& decls) {
  Env env;
  if (decls.empty()) {
    const auto* c = e->as<Expr::Con>();
    if (!c || c->name != "()")
      throw EvalError("expected () for a program without TVars");
    return env;
  }
  if (decls.size() == 1) {
    if (!is_pure(e)) throw EvalError("stored TVar content must be pure");
    return env.set(decls[0].name, e);
  }
  const auto* c = e->as<Expr::Con>();
  size_t arity = 0;
  if (!c || !is_tuple_con_name(c->name, &arity) || arity != decls.size())
    throw EvalError("expected a literal tuple of arity " + std::to_string(decls.size()));
  for (size_t i = 0; i < decls.size(); ++i) {
    if (!is_pure(c->args[i])) throw EvalError("stored TVar content must be pure");
    env = env.set(decls[i].name, c->args[i]);
  }
  return env;
}

}  // namespace stmcheck
