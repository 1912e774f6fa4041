#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "stmcheck/arith.hpp"
#include "stmcheck/checker.hpp"
#include "stmcheck/pretty.hpp"

namespace stmcheck {

const char* verdict_name(VerdictKind k) {
  switch (k) {
    case VerdictKind::Safe: return "Safe";
    case VerdictKind::Unsafe: return "Unsafe";
    case VerdictKind::Unknown: return "Unknown";
  }
  return "Unknown";
}

// ---- contract wrapping -----------------------------------------------------

namespace {

ExprPtr wrap(const ExprPtr& e, const ContractPtr& c, bool ensure) {
  if (c->is<Contract::Any>()) return e;
  if (const auto* p = c->as<Contract::Pred>()) {
    ExprPtr cond = substitute(p->pred, p->var, e);
    return case_of(cond, {CaseAlt{"True", {}, e},
                          CaseAlt{"False", {}, ensure ? bad() : unr()}});
  }
  if (const auto* d = c->as<Contract::DepFun>()) {
    std::string v = fresh_name("v");
    ExprPtr arg = wrap(var(v), d->domain, !ensure);
    ContractPtr cod = contract_substitute(d->codomain, d->var, arg);
    return lam(v, wrap(app(e, arg), cod, ensure));
  }
  if (const auto* t = c->as<Contract::Tuple>()) {
    if (t->elems.empty()) return e;
    if (t->elems.size() == 1) return wrap(e, t->elems[0], ensure);
    std::vector<std::string> names;
    names.reserve(t->elems.size());
    for (size_t i = 0; i < t->elems.size(); ++i) names.push_back(fresh_name("w"));
    std::vector<ExprPtr> parts;
    parts.reserve(names.size());
    for (size_t i = 0; i < names.size(); ++i)
      parts.push_back(wrap(var(names[i]), t->elems[i], ensure));
    return case_of(e, {CaseAlt{tuple_con_name(names.size()), names, tuple(parts)}});
  }
  throw CheckError("cannot wrap against an STM contract; transform it first");
}

}  // namespace

ExprPtr wrap_ensure(const ExprPtr& e, const ContractPtr& c) { return wrap(e, c, true); }
ExprPtr wrap_assume(const ExprPtr& e, const ContractPtr& c) { return wrap(e, c, false); }

// ---- BAD bookkeeping -------------------------------------------------------

bool has_bad(const ExprPtr& e) {
  if (const auto* x = e->as<Expr::Exc>()) return x->kind == ExcKind::Bad;
  bool found = false;
  map_children(e, [&](const ExprPtr& c) {
    if (!found && has_bad(c)) found = true;
    return c;
  });
  return found;
}

namespace {

void collect_bad(const ExprPtr& e, std::vector<std::string>& path,
                 std::vector<BadSite>& out) {
  if (const auto* x = e->as<Expr::Exc>()) {
    if (x->kind == ExcKind::Bad) out.push_back(BadSite{path});
    return;
  }
  if (const auto* c = e->as<Expr::Case>()) {
    collect_bad(c->scrutinee, path, out);
    for (const auto& alt : c->alts) {
      std::string step = pretty_expr(c->scrutinee);
      if (alt.con == "True" || alt.con == "False") {
        step += " is " + alt.con;
      } else {
        step += " matches " + alt.con;
        for (const auto& b : alt.binders) step += " " + b;
      }
      path.push_back(step);
      collect_bad(alt.body, path, out);
      path.pop_back();
    }
    return;
  }
  map_children(e, [&](const ExprPtr& k) {
    collect_bad(k, path, out);
    return k;
  });
}

}  // namespace

std::vector<BadSite> bad_sites(const ExprPtr& e) {
  std::vector<BadSite> out;
  std::vector<std::string> path;
  collect_bad(e, path, out);
  return out;
}

// ---- simplification --------------------------------------------------------

namespace {

// Converges to a value under every closing substitution: no applications,
// no cases, no exceptions. Justifies reordering and discarding.
bool total_safe(const ExprPtr& e) {
  if (e->is<Expr::Var>() || e->is<Expr::IntLit>() || e->is<Expr::Lam>() ||
      e->is<Expr::FunRef>())
    return true;
  if (const auto* c = e->as<Expr::Con>()) {
    (void)c;
    return true;  // constructors are WHNF regardless of their fields
  }
  if (const auto* p = e->as<Expr::Prim>()) {
    for (const auto& a : p->args)
      if (!total_safe(a)) return false;
    return true;
  }
  return false;
}

// Closed first-order literal (ints and fully literal constructor trees).
bool deep_literal(const ExprPtr& e) {
  if (e->is<Expr::IntLit>()) return true;
  if (const auto* c = e->as<Expr::Con>()) {
    for (const auto& a : c->args)
      if (!deep_literal(a)) return false;
    return true;
  }
  return false;
}

bool literal_equal(const ExprPtr& a, const ExprPtr& b) {
  const auto* ia = a->as<Expr::IntLit>();
  const auto* ib = b->as<Expr::IntLit>();
  if (ia || ib) return ia && ib && ia->value == ib->value;
  const auto* ca = a->as<Expr::Con>();
  const auto* cb = b->as<Expr::Con>();
  if (!ca || !cb || ca->name != cb->name || ca->args.size() != cb->args.size())
    return false;
  for (size_t i = 0; i < ca->args.size(); ++i)
    if (!literal_equal(ca->args[i], cb->args[i])) return false;
  return true;
}

bool bool_literal(const ExprPtr& e, bool* out) {
  const auto* c = e->as<Expr::Con>();
  if (!c || !c->args.empty()) return false;
  if (c->name == "True") { *out = true; return true; }
  if (c->name == "False") { *out = false; return true; }
  return false;
}

bool is_unr(const ExprPtr& e) {
  const auto* x = e->as<Expr::Exc>();
  return x && x->kind == ExcKind::Unr;
}

// Renames the alternative's binders to fresh names when `clash` holds for
// any of them, keeping the body consistent.
CaseAlt freshen_alt(const CaseAlt& alt,
                    const std::function<bool(const std::string&)>& clash) {
  bool hit = false;
  for (const auto& b : alt.binders)
    if (clash(b)) { hit = true; break; }
  if (!hit) return alt;
  CaseAlt out;
  out.con = alt.con;
  std::map<std::string, ExprPtr> sub;
  for (const auto& b : alt.binders) {
    std::string nb = clash(b) ? fresh_name(b) : b;
    out.binders.push_back(nb);
    if (nb != b) sub[b] = var(nb);
  }
  out.body = sub.empty() ? alt.body : substitute_parallel(alt.body, sub);
  return out;
}

void collect_refs(const ExprPtr& e, std::set<std::string>& out) {
  if (const auto* r = e->as<Expr::FunRef>()) {
    out.insert(r->name);
    return;
  }
  map_children(e, [&](const ExprPtr& c) {
    collect_refs(c, out);
    return c;
  });
}

// Names on a call cycle among the inlinable definitions.
std::set<std::string> recursive_names(const FunMap& defs) {
  std::map<std::string, std::set<std::string>> edges;
  for (const auto& [name, body] : defs) collect_refs(body, edges[name]);
  std::set<std::string> out;
  for (const auto& [start, _] : defs) {
    std::set<std::string> seen;
    std::vector<std::string> work(edges[start].begin(), edges[start].end());
    while (!work.empty()) {
      std::string g = work.back();
      work.pop_back();
      if (!defs.count(g) || !seen.insert(g).second) continue;
      if (g == start) {
        out.insert(start);
        break;
      }
      for (const auto& h : edges[g]) work.push_back(h);
    }
  }
  return out;
}

class Simplifier {
 public:
  Simplifier(const CheckConfig& cfg, const FunMap& defs)
      : cfg_(cfg), defs_(defs), recursive_(recursive_names(defs)), fuel_(cfg.fuel) {}

  ExprPtr run(const ExprPtr& e) {
    PathCondition pc(cfg_.arith);
    return go(e, pc, {});
  }

 private:
  const CheckConfig& cfg_;
  const FunMap& defs_;
  std::set<std::string> recursive_;
  int fuel_;

  using Budget = std::map<std::string, int>;

  bool spend() {
    if (fuel_ <= 0) return false;
    --fuel_;
    return true;
  }

  ExprPtr go(const ExprPtr& e, const PathCondition& pc, const Budget& inls) {
    if (const auto* n = e->as<Expr::App>()) return go_app(e, *n, pc, inls);
    if (const auto* n = e->as<Expr::Case>()) return go_case(e, *n, pc, inls);
    if (const auto* n = e->as<Expr::Prim>()) return go_prim(e, *n, pc, inls);
    if (const auto* n = e->as<Expr::Lam>()) return go_lam(e, *n, pc, inls);
    if (const auto* n = e->as<Expr::FunRef>()) {
      // Zero-parameter definitions fold like constants; function values
      // stay by name and are inlined at application heads instead.
      auto it = defs_.find(n->name);
      if (it != defs_.end() && !it->second->is<Expr::Lam>() &&
          budget_left(inls, n->name) && spend()) {
        return go(it->second, pc, bump(inls, n->name));
      }
      return e;
    }
    if (e->is<Expr::Var>() || e->is<Expr::IntLit>() || e->is<Expr::Exc>() ||
        e->is<Expr::Retry>())
      return e;
    // STM nodes and anything else: simplify children in place.
    return map_children(e, [&](const ExprPtr& c) { return go(c, pc, inls); });
  }

  bool budget_left(const Budget& inls, const std::string& f) const {
    auto it = inls.find(f);
    int used = it == inls.end() ? 0 : it->second;
    return used < cfg_.inline_depth;
  }

  // Whether an application of `name` to `arg` may be unfolded here. A deep
  // literal argument always may: the unfolding mirrors evaluation and fuel
  // bounds it. Recursive definitions otherwise unfold only when the
  // argument's constructor shape is known, so each unfolding feeds a case
  // reduction instead of growing speculatively.
  bool may_inline(const std::string& name, const ExprPtr& arg,
                  const PathCondition& pc, const Budget& inls) const {
    if (deep_literal(arg)) return true;
    if (!budget_left(inls, name)) return false;
    if (!recursive_.count(name)) return true;
    if (arg->is<Expr::Con>() || arg->is<Expr::IntLit>()) return true;
    return pc.constructor_of(arg).has_value();
  }

  static Budget bump(const Budget& inls, const std::string& f) {
    Budget out = inls;
    out[f] += 1;
    return out;
  }

  ExprPtr go_app(const ExprPtr& e, const Expr::App& n, const PathCondition& pc,
                 const Budget& inls) {
    ExprPtr f = go(n.fn, pc, inls);
    if (f->is<Expr::Exc>()) {
      if (!spend()) return rebuild(*e, Expr::App{f, n.arg});
      return f;
    }
    if (const auto* l = f->as<Expr::Lam>()) {
      if (!spend()) return rebuild(*e, Expr::App{f, n.arg});
      return go(substitute(l->body, l->param, n.arg), pc, inls);
    }
    if (const auto* c = f->as<Expr::Case>()) {
      // (case s of {p -> b}) a  =>  case s of {p -> b a}
      if (!spend()) return rebuild(*e, Expr::App{f, n.arg});
      std::vector<CaseAlt> alts;
      alts.reserve(c->alts.size());
      for (const auto& alt : c->alts) {
        CaseAlt a2 = freshen_alt(
            alt, [&](const std::string& b) { return occurs_free(n.arg, b); });
        a2.body = app(a2.body, n.arg);
        alts.push_back(std::move(a2));
      }
      return go(rebuild(*e, Expr::Case{c->scrutinee, std::move(alts)}), pc, inls);
    }
    if (const auto* r = f->as<Expr::FunRef>()) {
      auto it = defs_.find(r->name);
      if (it != defs_.end() && may_inline(r->name, n.arg, pc, inls)) {
        if (!spend()) return rebuild(*e, Expr::App{f, n.arg});
        Budget next = deep_literal(n.arg) ? inls : bump(inls, r->name);
        return go(rebuild(*e, Expr::App{it->second, n.arg}), pc, std::move(next));
      }
    }
    ExprPtr arg = go(n.arg, pc, inls);
    if (f == n.fn && arg == n.arg) return e;
    return rebuild(*e, Expr::App{f, arg});
  }

  ExprPtr go_lam(const ExprPtr& e, const Expr::Lam& n, const PathCondition& pc,
                 const Budget& inls) {
    std::string param = n.param;
    ExprPtr body = n.body;
    if (pc.mentions(param)) {
      param = fresh_name(n.param);
      body = substitute(body, n.param, var(param));
    }
    ExprPtr body2 = go(body, pc, inls);
    if (param == n.param && body2 == n.body) return e;
    return rebuild(*e, Expr::Lam{param, body2});
  }

  ExprPtr go_prim(const ExprPtr& e, const Expr::Prim& n, const PathCondition& pc,
                  const Budget& inls) {
    std::vector<ExprPtr> args;
    args.reserve(n.args.size());
    bool changed = false;
    for (const auto& a : n.args) {
      ExprPtr a2 = go(a, pc, inls);
      changed = changed || a2 != a;
      args.push_back(a2);
    }
    auto current = [&]() {
      return changed ? rebuild(*e, Expr::Prim{n.op, args}) : e;
    };
    // An exception in an argument is the whole result once every argument
    // to its left is known to reach a value.
    bool prefix_safe = true;
    for (size_t k = 0; k < args.size(); ++k) {
      if (args[k]->is<Expr::Exc>() && prefix_safe) {
        if (!spend()) return current();
        return args[k];
      }
      prefix_safe = prefix_safe && total_safe(args[k]);
    }
    // Float a case out of an argument position.
    prefix_safe = true;
    for (size_t k = 0; k < args.size(); ++k) {
      const auto* c = args[k]->as<Expr::Case>();
      if (c && prefix_safe) {
        if (!spend()) return current();
        std::vector<CaseAlt> alts;
        alts.reserve(c->alts.size());
        for (const auto& alt : c->alts) {
          CaseAlt a2 = freshen_alt(alt, [&](const std::string& b) {
            for (size_t j = 0; j < args.size(); ++j)
              if (j != k && occurs_free(args[j], b)) return true;
            return false;
          });
          std::vector<ExprPtr> inner = args;
          inner[k] = a2.body;
          a2.body = rebuild(*e, Expr::Prim{n.op, std::move(inner)});
          alts.push_back(std::move(a2));
        }
        return go(case_of(c->scrutinee, std::move(alts)), pc, inls);
      }
      prefix_safe = prefix_safe && total_safe(args[k]);
    }
    // Constant folding, mirroring evaluation exactly.
    const auto* i0 = args.size() > 0 ? args[0]->as<Expr::IntLit>() : nullptr;
    const auto* i1 = args.size() > 1 ? args[1]->as<Expr::IntLit>() : nullptr;
    switch (n.op) {
      case PrimTag::Add:
      case PrimTag::Sub:
      case PrimTag::Mul:
        if (i0 && i1) {
          if (!spend()) return current();
          long long r = n.op == PrimTag::Add   ? i0->value + i1->value
                        : n.op == PrimTag::Sub ? i0->value - i1->value
                                               : i0->value * i1->value;
          return intlit(r);
        }
        break;
      case PrimTag::Gt:
      case PrimTag::Ge:
      case PrimTag::Lt:
      case PrimTag::Le:
        if (i0 && i1) {
          if (!spend()) return current();
          bool r = n.op == PrimTag::Gt   ? i0->value > i1->value
                   : n.op == PrimTag::Ge ? i0->value >= i1->value
                   : n.op == PrimTag::Lt ? i0->value < i1->value
                                         : i0->value <= i1->value;
          return r ? true_con() : false_con();
        }
        break;
      case PrimTag::Eq:
        if (deep_literal(args[0]) && deep_literal(args[1])) {
          if (!spend()) return current();
          return literal_equal(args[0], args[1]) ? true_con() : false_con();
        }
        break;
      case PrimTag::Not: {
        bool b = false;
        if (bool_literal(args[0], &b)) {
          if (!spend()) return current();
          return b ? false_con() : true_con();
        }
        break;
      }
      case PrimTag::And:
      case PrimTag::Or: {
        bool b0 = false, b1 = false;
        bool l0 = bool_literal(args[0], &b0);
        bool l1 = bool_literal(args[1], &b1);
        if (l0 && l1) {
          if (!spend()) return current();
          bool r = n.op == PrimTag::And ? (b0 && b1) : (b0 || b1);
          return r ? true_con() : false_con();
        }
        // Identity element on either side; the other operand keeps its
        // own crash and divergence behaviour.
        bool keep_other = (n.op == PrimTag::And && ((l0 && b0) || (l1 && b1))) ||
                          (n.op == PrimTag::Or && ((l0 && !b0) || (l1 && !b1)));
        if (keep_other) {
          if (!spend()) return current();
          return l0 ? args[1] : args[0];
        }
        break;
      }
      default:
        break;
    }
    return current();
  }

  ExprPtr go_case(const ExprPtr& e, const Expr::Case& n, const PathCondition& pc,
                  const Budget& inls) {
    ExprPtr s = go(n.scrutinee, pc, inls);
    auto current = [&]() {
      return s == n.scrutinee ? e : rebuild(*e, Expr::Case{s, n.alts});
    };
    if (s->is<Expr::Exc>()) {
      if (!spend()) return current();
      return s;
    }
    if (const auto* con = s->as<Expr::Con>()) {
      for (const auto& alt : n.alts) {
        if (alt.con != con->name) continue;
        if (alt.binders.size() != con->args.size()) break;
        if (!spend()) return current();
        std::map<std::string, ExprPtr> sub;
        for (size_t i = 0; i < alt.binders.size(); ++i)
          sub[alt.binders[i]] = con->args[i];
        return go(substitute_parallel(alt.body, sub), pc, inls);
      }
      return current();  // ill-typed scrutinee; leave it
    }
    if (const auto* inner = s->as<Expr::Case>()) {
      // case (case s' of {p -> b}) of alts  =>  case s' of {p -> case b of alts}
      if (!spend()) return current();
      std::set<std::string> outer_free;
      for (const auto& alt : n.alts)
        for (const auto& v : free_vars(alt.body)) {
          bool bound = false;
          for (const auto& b : alt.binders) bound = bound || b == v;
          if (!bound) outer_free.insert(v);
        }
      std::vector<CaseAlt> alts;
      alts.reserve(inner->alts.size());
      for (const auto& alt : inner->alts) {
        CaseAlt a2 = freshen_alt(alt, [&](const std::string& b) {
          return outer_free.count(b) != 0;
        });
        a2.body = rebuild(*e, Expr::Case{a2.body, n.alts});
        alts.push_back(std::move(a2));
      }
      return go(case_of(inner->scrutinee, std::move(alts)), pc, inls);
    }
    // Shape known from the path condition: pick the branch. The facts
    // guarantee the scrutinee reaches this constructor, so selection keeps
    // the original behaviour.
    if (auto cf = pc.constructor_of(s)) {
      for (const auto& alt : n.alts) {
        if (alt.con != cf->con || alt.binders.size() != cf->args.size()) continue;
        if (!spend()) return current();
        std::map<std::string, ExprPtr> sub;
        for (size_t i = 0; i < alt.binders.size(); ++i)
          sub[alt.binders[i]] = cf->args[i];
        return go(substitute_parallel(alt.body, sub), pc, inls);
      }
    }
    std::vector<CaseAlt> alts = n.alts;
    bool changed = s != n.scrutinee;
    bool two_bool = alts.size() == 2 &&
                    ((alts[0].con == "True" && alts[1].con == "False") ||
                     (alts[0].con == "False" && alts[1].con == "True"));
    if (two_bool) {
      Tri d = pc.decide(s);
      if (d != Tri::Unknown) {
        bool live = d == Tri::True;
        size_t live_ix = alts[0].con == (live ? "True" : "False") ? 0 : 1;
        if (total_safe(s)) {
          // The scrutinee always reaches a value, so take the branch.
          if (!spend()) return current();
          return go(alts[live_ix].body, pc, inls);
        }
        // The scrutinee may crash or diverge on its own; keep it and only
        // mark the impossible branch.
        size_t dead_ix = 1 - live_ix;
        if (!is_unr(alts[dead_ix].body) && spend()) {
          alts[dead_ix].body = unr();
          changed = true;
        }
      }
    }
    for (auto& alt : alts) {
      CaseAlt a2 = freshen_alt(alt, [&](const std::string& b) {
        return pc.mentions(b) || occurs_free(s, b);
      });
      PathCondition pc2 = pc;
      if (a2.binders.empty() && (a2.con == "True" || a2.con == "False")) {
        pc2.assume_bool(s, a2.con == "True");
      } else {
        std::vector<ExprPtr> binder_vars;
        binder_vars.reserve(a2.binders.size());
        for (const auto& b : a2.binders) binder_vars.push_back(var(b));
        pc2.assume_pattern(s, a2.con, binder_vars);
      }
      ExprPtr body2;
      if (pc2.inconsistent() && !is_unr(a2.body) && spend()) {
        body2 = unr();
      } else {
        body2 = go(a2.body, pc2, inls);
      }
      if (body2 != alt.body || a2.binders != alt.binders) {
        changed = true;
        alt.binders = a2.binders;
        alt.body = body2;
      }
    }
    if (!changed) return e;
    return rebuild(*e, Expr::Case{s, std::move(alts)});
  }
};

}  // namespace

ExprPtr simplify(const ExprPtr& e, const CheckConfig& cfg, const FunMap& defs) {
  Simplifier s(cfg, defs);
  return s.run(e);
}

}  // namespace stmcheck
