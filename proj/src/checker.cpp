#include "stmcheck/checker.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

#include "stmcheck/oracle.hpp"
#include "stmcheck/pretty.hpp"
#include "stmcheck/transform.hpp"

namespace stmcheck {

namespace {

void collect_funrefs(const ExprPtr& e, std::vector<std::string>& order,
                     std::set<std::string>& seen) {
  if (const auto* r = e->as<Expr::FunRef>()) {
    if (seen.insert(r->name).second) order.push_back(r->name);
    return;
  }
  map_children(e, [&](const ExprPtr& c) {
    collect_funrefs(c, order, seen);
    return c;
  });
}

std::vector<std::string> funrefs_in_order(const ExprPtr& e) {
  std::vector<std::string> order;
  std::set<std::string> seen;
  collect_funrefs(e, order, seen);
  return order;
}

// Every function body transformed to its pure form, for inlining on the
// transformed side.
FunMap transformed_defs(const Program& p) {
  FunMap out;
  std::vector<std::string> names = p.tvar_names();
  for (const auto& f : p.functions)
    if (f.body) out[f.name] = t_expr(f.body, names);
  return out;
}

// Functions whose bodies can raise BAD themselves, directly or through a
// callee. A residual reference to one of these blocks a Safe verdict.
std::set<std::string> risky_functions(const Program& p) {
  std::set<std::string> risky;
  std::map<std::string, std::vector<std::string>> calls;
  for (const auto& f : p.functions) {
    if (!f.body) continue;
    if (has_bad(f.body)) risky.insert(f.name);
    calls[f.name] = funrefs_in_order(f.body);
  }
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& [name, cs] : calls) {
      if (risky.count(name)) continue;
      for (const auto& g : cs)
        if (risky.count(g)) {
          risky.insert(name);
          grew = true;
          break;
        }
    }
  }
  return risky;
}

bool mentions_risky(const ExprPtr& e, const std::set<std::string>& risky) {
  for (const auto& name : funrefs_in_order(e))
    if (risky.count(name)) return true;
  return false;
}

Type pure_pair_type(const Type& payload, const Type& env_ty) {
  return Type::tuple({payload, env_ty});
}

OracleConfig oracle_config(const CheckConfig& cfg) {
  OracleConfig oc;
  oc.samples = cfg.samples;
  oc.seed = cfg.seed;
  return oc;
}

std::string describe(const SatVerdict& sv) {
  if (sv.witness.empty()) return sv.reason;
  if (sv.reason.empty()) return sv.witness;
  return sv.witness + "; " + sv.reason;
}

}  // namespace

Verdict check_transaction(const TransactionDef& tx, const CheckedProgram& prog,
                          const CheckConfig& cfg) {
  const Program& p = prog.program;
  if (!p.invariant) throw CheckError("no invariant declared");
  ContractPtr inv_c = invariant_to_contract(*p.invariant, p);
  std::vector<ExprPtr> variants = gamma_expand(tx.body, cfg.gamma_cap);
  FunMap tdefs = transformed_defs(p);
  std::set<std::string> risky = risky_functions(p);
  std::vector<std::string> names = p.tvar_names();
  Type env_ty = p.tvar_tuple_type();

  Verdict out;
  out.kind = VerdictKind::Safe;
  out.variants = (int)variants.size();

  for (const ExprPtr& variant : variants) {
    auto [closed, contract] = close_transaction(variant, tx.free_vars, inv_c);
    ExprPtr pure_e = t_expr(closed, names);
    ContractPtr pure_c = t_contract(contract);
    ExprPtr wrapped = wrap_ensure(pure_e, pure_c);
    ExprPtr simplified = simplify(wrapped, cfg, tdefs);
    if (!has_bad(simplified) && !mentions_risky(simplified, risky)) continue;

    if (out.kind == VerdictKind::Safe) {
      out.kind = VerdictKind::Unknown;
      out.residual = simplified;
      out.bad_sites = bad_sites(simplified);
    }
    if (!cfg.witness_search) continue;

    Type ety = Type::fun(env_ty, pure_pair_type(prog.transaction_results.at(tx.name), env_ty));
    const std::vector<Type>& params = prog.transaction_params.at(tx.name);
    for (size_t i = params.size(); i-- > 0;) ety = Type::fun(params[i], ety);
    SatVerdict sv = satisfies_oracle(pure_e, pure_c, ety, p, tdefs, oracle_config(cfg));
    if (sv.violated()) {
      out.kind = VerdictKind::Unsafe;
      out.witness = describe(sv);
      out.residual = simplified;
      out.bad_sites = bad_sites(simplified);
      return out;
    }
  }
  return out;
}

std::vector<PureVariant> purify_transaction(const TransactionDef& tx,
                                            const CheckedProgram& prog,
                                            const CheckConfig& cfg) {
  const Program& p = prog.program;
  if (!p.invariant) throw CheckError("no invariant declared");
  ContractPtr inv_c = invariant_to_contract(*p.invariant, p);
  std::vector<ExprPtr> variants = gamma_expand(tx.body, cfg.gamma_cap);
  FunMap tdefs = transformed_defs(p);
  std::vector<std::string> names = p.tvar_names();

  std::vector<PureVariant> out;
  for (const ExprPtr& variant : variants) {
    auto [closed, contract] = close_transaction(variant, tx.free_vars, inv_c);
    PureVariant pv;
    pv.expr = simplify(t_expr(closed, names), cfg, tdefs);
    pv.contract = t_contract(contract);
    out.push_back(std::move(pv));
  }
  return out;
}

Verdict modular_check_function(const std::string& name, const CheckedProgram& prog,
                               const CheckConfig& cfg) {
  const Program& p = prog.program;
  const FunctionDef* f = p.find_function(name);
  if (!f || !f->body) throw CheckError("unknown function " + name);
  if (!f->contract)
    throw CheckError("function " + name + " carries no contract to check");
  if (!f->signature) throw CheckError("function " + name + " has no signature");

  std::vector<std::string> names = p.tvar_names();
  Type env_ty = p.tvar_tuple_type();

  // Contract-carrying callees (the function itself included, for recursion)
  // become constrained lambda parameters. Contract-free callees are inlined
  // by the simplifier.
  std::vector<std::string> abstracted;
  for (const auto& g : funrefs_in_order(f->body)) {
    const FunctionDef* gd = p.find_function(g);
    if (gd && gd->contract) abstracted.push_back(g);
  }
  std::map<std::string, ExprPtr> replacement;
  std::vector<std::pair<std::string, const FunctionDef*>> params;
  for (const auto& g : abstracted) {
    bool clash = occurs_free(f->body, g);
    std::string pname = clash ? fresh_name(g) : g;
    replacement[g] = var(pname);
    params.push_back({pname, p.find_function(g)});
  }

  std::function<ExprPtr(const ExprPtr&)> swap_refs = [&](const ExprPtr& e) -> ExprPtr {
    if (const auto* r = e->as<Expr::FunRef>()) {
      auto it = replacement.find(r->name);
      if (it == replacement.end()) return e;
      ExprPtr v = it->second;
      if (e->type) v = with_type(v, *e->type);
      return v;
    }
    return map_children(e, swap_refs);
  };

  ExprPtr goal = swap_refs(f->body);
  for (size_t i = params.size(); i-- > 0;) goal = lam(params[i].first, goal);

  ContractPtr goal_c = t_contract(f->contract);
  for (size_t i = params.size(); i-- > 0;)
    goal_c = depfun_contract(params[i].first, t_contract(params[i].second->contract),
                             goal_c);

  ExprPtr pure_goal = t_expr(goal, names);
  ExprPtr wrapped = wrap_ensure(pure_goal, goal_c);

  FunMap tdefs = transformed_defs(p);
  FunMap inlinable;
  std::set<std::string> abstracted_set(abstracted.begin(), abstracted.end());
  for (const auto& [g, body] : tdefs)
    if (!abstracted_set.count(g) && g != name) inlinable[g] = body;

  std::set<std::string> risky = risky_functions(p);
  ExprPtr simplified = simplify(wrapped, cfg, inlinable);

  Verdict out;
  out.variants = 1;
  if (!has_bad(simplified) && !mentions_risky(simplified, risky)) {
    out.kind = VerdictKind::Safe;
    return out;
  }
  out.kind = VerdictKind::Unknown;
  out.residual = simplified;
  out.bad_sites = bad_sites(simplified);
  if (!cfg.witness_search) return out;

  // Hunt counterexamples with the real callees in place; a hit there is a
  // genuine violation of the function's own contract.
  SatVerdict sv = satisfies_oracle(t_expr(f->body, names), t_contract(f->contract),
                                   t_type(*f->signature, env_ty), p, tdefs,
                                   oracle_config(cfg));
  if (sv.violated()) {
    out.kind = VerdictKind::Unsafe;
    out.witness = describe(sv);
  }
  return out;
}

}  // namespace stmcheck
