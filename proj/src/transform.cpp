#include "stmcheck/transform.hpp"

#include <algorithm>
#include <set>
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

bool stm_typed(const ExprPtr& e) { return e->type && e->type->is_stm(); }

}  // namespace

ExprPtr erase_types(const ExprPtr& e) {
  ExprPtr m = map_children(e, [](const ExprPtr& c) { return erase_types(c); });
  if (m == e && !e->type) return e;
  auto out = std::make_shared<Expr>(*m);
  out->type.reset();
  return out;
}

// ---- expression transformation ---------------------------------------------

namespace {

struct PurifyCtx {
  const std::vector<std::string>& tvars;

  // The environment tuple as an expression over the binder names.
  ExprPtr env_expr() const {
    std::vector<ExprPtr> vs;
    vs.reserve(tvars.size());
    for (const auto& t : tvars) vs.push_back(var(t));
    return tuple(std::move(vs));
  }

  ExprPtr close(ExprPtr body) const { return lam_tuple(tvars, std::move(body)); }

  size_t index_of(const std::string& name) const {
    for (size_t i = 0; i < tvars.size(); ++i)
      if (tvars[i] == name) return i;
    throw TransformError("unknown TVar " + name +
                         "; TVar-typed parameters must be specialized first");
  }
};

ExprPtr purify(const ExprPtr& e, const PurifyCtx& cx) {
  return std::visit(
      overloaded{
          [&](const Expr::Var& n) -> ExprPtr {
            if (!stm_typed(e)) return e;
            return cx.close(app(var(n.name), cx.env_expr()));
          },
          [&](const Expr::FunRef& n) -> ExprPtr {
            if (!stm_typed(e)) return e;
            return cx.close(app(funref(n.name), cx.env_expr()));
          },
          [&](const Expr::IntLit&) -> ExprPtr { return e; },
          [&](const Expr::Exc&) -> ExprPtr { return e; },
          [&](const Expr::Retry&) -> ExprPtr { return unr(); },
          [&](const Expr::ReadTVar& n) -> ExprPtr {
            size_t k = cx.index_of(n.tvar);
            (void)k;
            return cx.close(tuple({var(n.tvar), cx.env_expr()}));
          },
          [&](const Expr::WriteTVar& n) -> ExprPtr {
            size_t k = cx.index_of(n.tvar);
            std::vector<ExprPtr> slots;
            slots.reserve(cx.tvars.size());
            for (const auto& t : cx.tvars) slots.push_back(var(t));
            slots[k] = purify(n.value, cx);
            return cx.close(tuple({unit_con(), tuple(std::move(slots))}));
          },
          [&](const Expr::Bind& n) -> ExprPtr {
            ExprPtr first = app(purify(n.left, cx), cx.env_expr());
            std::string a = fresh_name("a");
            std::string b = fresh_name("b");
            ExprPtr fst = lam_tuple({a, b}, var(a));
            a = fresh_name("a");
            b = fresh_name("b");
            ExprPtr snd = lam_tuple({a, b}, var(b));
            ExprPtr body =
                apps(purify(n.right, cx), {app(fst, first), app(snd, first)});
            return cx.close(body);
          },
          [&](const Expr::Return& n) -> ExprPtr {
            return cx.close(tuple({purify(n.value, cx), cx.env_expr()}));
          },
          [&](const Expr::App& n) -> ExprPtr {
            ExprPtr fn = purify(n.fn, cx);
            ExprPtr arg = purify(n.arg, cx);
            if (!stm_typed(e)) {
              if (fn == n.fn && arg == n.arg) return e;
              return app(fn, arg);
            }
            return cx.close(app(app(fn, arg), cx.env_expr()));
          },
          [&](const Expr::Lam& n) -> ExprPtr {
            ExprPtr body = purify(n.body, cx);
            if (body == n.body) return e;
            return lam(n.param, body);
          },
          [&](const Expr::Case& n) -> ExprPtr {
            ExprPtr scrut = purify(n.scrutinee, cx);
            std::vector<CaseAlt> alts;
            alts.reserve(n.alts.size());
            bool changed = scrut != n.scrutinee;
            for (const auto& alt : n.alts) {
              ExprPtr body = purify(alt.body, cx);
              changed |= body != alt.body;
              alts.push_back(CaseAlt{alt.con, alt.binders, body});
            }
            ExprPtr inner =
                changed ? case_of(scrut, std::move(alts)) : ExprPtr(e);
            if (!stm_typed(e)) return inner;
            return cx.close(app(inner, cx.env_expr()));
          },
          [&](const Expr::Con& n) -> ExprPtr {
            bool changed = false;
            std::vector<ExprPtr> args;
            args.reserve(n.args.size());
            for (const auto& a : n.args) {
              ExprPtr a2 = purify(a, cx);
              changed |= a2 != a;
              args.push_back(a2);
            }
            if (!changed) return e;
            return con(n.name, std::move(args));
          },
          [&](const Expr::Prim& n) -> ExprPtr {
            bool changed = false;
            std::vector<ExprPtr> args;
            args.reserve(n.args.size());
            for (const auto& a : n.args) {
              ExprPtr a2 = purify(a, cx);
              changed |= a2 != a;
              args.push_back(a2);
            }
            if (!changed) return e;
            return prim(n.op, std::move(args));
          },
          [&](const Expr::OrElse&) -> ExprPtr {
            throw TransformError(
                "orElse must be expanded into alternatives before purification");
          },
          [&](const Expr::Do&) -> ExprPtr {
            throw TransformError("internal: do-block reached purification");
          },
          [&](const Expr::Let&) -> ExprPtr {
            throw TransformError("internal: let reached purification");
          },
      },
      e->node);
}

}  // namespace

ExprPtr t_expr(const ExprPtr& e, const std::vector<std::string>& tvars) {
  PurifyCtx cx{tvars};
  return erase_types(purify(e, cx));
}

// ---- contract transformation ------------------------------------------------

ContractPtr t_contract(const ContractPtr& c) {
  return std::visit(
      overloaded{
          [&](const Contract::Pred&) -> ContractPtr { return c; },
          [&](const Contract::Any&) -> ContractPtr { return c; },
          [&](const Contract::DepFun& n) -> ContractPtr {
            ContractPtr dom = t_contract(n.domain);
            ContractPtr cod = t_contract(n.codomain);
            if (dom == n.domain && cod == n.codomain) return c;
            return depfun_contract(n.var, dom, cod);
          },
          [&](const Contract::Tuple& n) -> ContractPtr {
            bool changed = false;
            std::vector<ContractPtr> elems;
            elems.reserve(n.elems.size());
            for (const auto& el : n.elems) {
              ContractPtr el2 = t_contract(el);
              changed |= el2 != el;
              elems.push_back(el2);
            }
            if (!changed) return c;
            return tuple_contract(std::move(elems));
          },
          [&](const Contract::StmOp& n) -> ContractPtr {
            return depfun_contract(
                n.var, t_contract(n.pre),
                tuple_contract({t_contract(n.result), t_contract(n.post)}));
          },
      },
      c->node);
}

Type t_type(const Type& t, const Type& env_type) {
  switch (t.kind()) {
    case Type::Kind::Stm:
      return Type::fun(env_type,
                       Type::tuple({t_type(t.result(), env_type), env_type}));
    case Type::Kind::List:
      return Type::list(t_type(t.elem(), env_type));
    case Type::Kind::Tuple: {
      std::vector<Type> args;
      args.reserve(t.args().size());
      for (const Type& a : t.args()) args.push_back(t_type(a, env_type));
      return Type::tuple(std::move(args));
    }
    case Type::Kind::Fun:
      return Type::fun(t_type(t.from(), env_type), t_type(t.to(), env_type));
    case Type::Kind::TVar:
      return Type::tvar(t_type(t.content(), env_type));
    default:
      return t;
  }
}

// ---- orElse expansion --------------------------------------------------------

namespace {

void push_unique(std::vector<ExprPtr>& out, const ExprPtr& e) {
  for (const auto& x : out)
    if (expr_equal(x, e)) return;
  out.push_back(e);
}

std::vector<ExprPtr> gamma_walk(const ExprPtr& e, size_t cap);

// Cartesian product over the children's variants, left child major.
std::vector<ExprPtr> gamma_product(
    const ExprPtr& e, const std::vector<ExprPtr>& children,
    const std::function<ExprPtr(const std::vector<ExprPtr>&)>& rebuild_fn,
    size_t cap) {
  std::vector<std::vector<ExprPtr>> vv;
  vv.reserve(children.size());
  size_t total = 1;
  bool all_same = true;
  for (const auto& c : children) {
    vv.push_back(gamma_walk(c, cap));
    total *= vv.back().size();
    if (total > cap)
      throw TransformError("orElse expansion exceeded the variant cap (" +
                           std::to_string(cap) + ")");
    all_same = all_same && vv.back().size() == 1 && vv.back()[0] == c;
  }
  if (all_same) return {e};
  std::vector<size_t> idx(children.size(), 0);
  std::vector<ExprPtr> out;
  for (size_t n = 0; n < total; ++n) {
    std::vector<ExprPtr> combo;
    combo.reserve(children.size());
    for (size_t i = 0; i < children.size(); ++i) combo.push_back(vv[i][idx[i]]);
    out.push_back(rebuild_fn(combo));
    for (size_t i = children.size(); i-- > 0;) {
      if (++idx[i] < vv[i].size()) break;
      idx[i] = 0;
    }
  }
  return out;
}

std::vector<ExprPtr> gamma_walk(const ExprPtr& e, size_t cap) {
  return std::visit(
      overloaded{
          [&](const Expr::OrElse& n) -> std::vector<ExprPtr> {
            std::vector<ExprPtr> out;
            for (const auto& v : gamma_walk(n.left, cap)) push_unique(out, v);
            for (const auto& v : gamma_walk(n.right, cap)) push_unique(out, v);
            if (out.size() > cap)
              throw TransformError("orElse expansion exceeded the variant cap (" +
                                   std::to_string(cap) + ")");
            return out;
          },
          [&](const Expr::Con& n) -> std::vector<ExprPtr> {
            return gamma_product(e, n.args,
                                 [&](const std::vector<ExprPtr>& cs) {
                                   return rebuild(*e, Expr::Con{n.name, cs});
                                 },
                                 cap);
          },
          [&](const Expr::Lam& n) -> std::vector<ExprPtr> {
            return gamma_product(e, {n.body},
                                 [&](const std::vector<ExprPtr>& cs) {
                                   return rebuild(*e, Expr::Lam{n.param, cs[0]});
                                 },
                                 cap);
          },
          [&](const Expr::App& n) -> std::vector<ExprPtr> {
            return gamma_product(e, {n.fn, n.arg},
                                 [&](const std::vector<ExprPtr>& cs) {
                                   return rebuild(*e, Expr::App{cs[0], cs[1]});
                                 },
                                 cap);
          },
          [&](const Expr::Case& n) -> std::vector<ExprPtr> {
            std::vector<ExprPtr> children{n.scrutinee};
            for (const auto& alt : n.alts) children.push_back(alt.body);
            return gamma_product(e, children,
                                 [&](const std::vector<ExprPtr>& cs) {
                                   std::vector<CaseAlt> alts;
                                   alts.reserve(n.alts.size());
                                   for (size_t i = 0; i < n.alts.size(); ++i)
                                     alts.push_back(CaseAlt{n.alts[i].con,
                                                            n.alts[i].binders,
                                                            cs[i + 1]});
                                   return rebuild(*e,
                                                  Expr::Case{cs[0], std::move(alts)});
                                 },
                                 cap);
          },
          [&](const Expr::Prim& n) -> std::vector<ExprPtr> {
            return gamma_product(e, n.args,
                                 [&](const std::vector<ExprPtr>& cs) {
                                   return rebuild(*e, Expr::Prim{n.op, cs});
                                 },
                                 cap);
          },
          [&](const Expr::WriteTVar& n) -> std::vector<ExprPtr> {
            return gamma_product(
                e, {n.value},
                [&](const std::vector<ExprPtr>& cs) {
                  return rebuild(*e, Expr::WriteTVar{n.tvar, cs[0]});
                },
                cap);
          },
          [&](const Expr::Bind& n) -> std::vector<ExprPtr> {
            return gamma_product(e, {n.left, n.right},
                                 [&](const std::vector<ExprPtr>& cs) {
                                   return rebuild(*e, Expr::Bind{cs[0], cs[1]});
                                 },
                                 cap);
          },
          [&](const Expr::Return& n) -> std::vector<ExprPtr> {
            return gamma_product(e, {n.value},
                                 [&](const std::vector<ExprPtr>& cs) {
                                   return rebuild(*e, Expr::Return{cs[0]});
                                 },
                                 cap);
          },
          [&](const Expr::Do&) -> std::vector<ExprPtr> {
            throw TransformError("internal: do-block reached orElse expansion");
          },
          [&](const Expr::Let&) -> std::vector<ExprPtr> {
            throw TransformError("internal: let reached orElse expansion");
          },
          [&](const auto&) -> std::vector<ExprPtr> { return {e}; },
      },
      e->node);
}

}  // namespace

std::vector<ExprPtr> gamma_expand(const ExprPtr& e, size_t cap) {
  std::vector<ExprPtr> out;
  for (const auto& v : gamma_walk(e, cap)) push_unique(out, v);
  return out;
}

// ---- transactional invariant -------------------------------------------------

namespace {

bool has_funref(const ExprPtr& e) {
  if (e->is<Expr::FunRef>()) return true;
  bool found = false;
  map_children(e, [&](const ExprPtr& c) {
    if (!found && has_funref(c)) found = true;
    return c;
  });
  return found;
}

}  // namespace

ContractPtr invariant_to_contract(const std::string& inv, const Program& p) {
  const FunctionDef* f = p.find_function(inv);
  if (!f || !f->body)
    throw TransformError("invariant function " + inv + " is not defined");
  std::vector<std::string> names = p.tvar_names();

  std::string binder = names.size() == 1 ? names[0] : fresh_name("v");
  ExprPtr pred;
  if (const auto* l = f->body->as<Expr::Lam>()) {
    ExprPtr inlined = substitute(l->body, l->param, var(binder));
    if (!has_funref(inlined)) pred = erase_types(inlined);
  }
  if (!pred) {
    if (names.size() == 1) {
      pred = app(funref(inv), var(binder));
    } else {
      std::vector<ExprPtr> vs;
      for (const auto& t : names) vs.push_back(var(t));
      pred = case_of(var(binder),
                     {CaseAlt{tuple_con_name(names.size()), names,
                              app(funref(inv), tuple(std::move(vs)))}});
    }
  }
  ContractPtr c = pred_contract(binder, pred);
  return stm_contract(fresh_name("env"), c, c, any_contract());
}

std::pair<ExprPtr, ContractPtr> close_transaction(
    const ExprPtr& body,
    const std::vector<std::pair<std::string, ContractPtr>>& free_contracts,
    const ContractPtr& stm_c) {
  std::vector<std::string> fv = free_vars(body);
  std::vector<std::string> declared;
  declared.reserve(free_contracts.size());
  for (const auto& [name, c] : free_contracts) declared.push_back(name);
  if (fv != declared)
    throw TransformError(
        "free variables of the transaction do not match its parameter list");

  ExprPtr closed = body;
  ContractPtr contract = stm_c;
  for (auto it = free_contracts.rbegin(); it != free_contracts.rend(); ++it) {
    if (!it->second)
      throw TransformError("missing contract for free variable " + it->first);
    closed = lam(it->first, closed);
    contract = depfun_contract(it->first, it->second, contract);
  }
  return {closed, contract};
}

// ---- TVar-argument specialization ---------------------------------------------

namespace {

std::vector<Type> arrow_spine(const Type& t, Type* result) {
  std::vector<Type> params;
  Type cur = t;
  while (cur.is(Type::Kind::Fun)) {
    params.push_back(cur.from());
    cur = cur.to();
  }
  if (result) *result = cur;
  return params;
}

std::vector<size_t> tvar_positions(const Type& sig) {
  std::vector<size_t> pos;
  std::vector<Type> params = arrow_spine(sig, nullptr);
  for (size_t i = 0; i < params.size(); ++i)
    if (params[i].is(Type::Kind::TVar)) pos.push_back(i);
  return pos;
}

// Renames every reference to the TVar-typed binder `from`, respecting
// shadowing by inner binders of the same name.
ExprPtr rename_tvar_refs(const ExprPtr& e, const std::string& from,
                         const std::string& to) {
  auto rec = [&](const ExprPtr& c) { return rename_tvar_refs(c, from, to); };
  return std::visit(
      overloaded{
          [&](const Expr::Var& n) -> ExprPtr {
            if (n.name != from) return e;
            return rebuild(*e, Expr::Var{to});
          },
          [&](const Expr::Lam& n) -> ExprPtr {
            if (n.param == from) return e;
            ExprPtr body = rec(n.body);
            if (body == n.body) return e;
            return rebuild(*e, Expr::Lam{n.param, body});
          },
          [&](const Expr::Case& n) -> ExprPtr {
            ExprPtr scrut = rec(n.scrutinee);
            bool changed = scrut != n.scrutinee;
            std::vector<CaseAlt> alts;
            alts.reserve(n.alts.size());
            for (const auto& alt : n.alts) {
              bool shadowed = std::find(alt.binders.begin(), alt.binders.end(),
                                        from) != alt.binders.end();
              ExprPtr body = shadowed ? alt.body : rec(alt.body);
              changed |= body != alt.body;
              alts.push_back(CaseAlt{alt.con, alt.binders, body});
            }
            if (!changed) return e;
            return rebuild(*e, Expr::Case{scrut, std::move(alts)});
          },
          [&](const Expr::ReadTVar& n) -> ExprPtr {
            if (n.tvar != from) return e;
            return rebuild(*e, Expr::ReadTVar{to});
          },
          [&](const Expr::WriteTVar& n) -> ExprPtr {
            ExprPtr value = rec(n.value);
            if (n.tvar != from && value == n.value) return e;
            return rebuild(*e,
                           Expr::WriteTVar{n.tvar == from ? to : n.tvar, value});
          },
          [&](const Expr::Let& n) -> ExprPtr {
            ExprPtr bound = rec(n.bound);
            ExprPtr body = n.var == from ? n.body : rec(n.body);
            if (bound == n.bound && body == n.body) return e;
            return rebuild(*e, Expr::Let{n.var, bound, body});
          },
          [&](const auto&) -> ExprPtr { return map_children(e, rec); },
      },
      e->node);
}

// Drops the lambdas at TVar positions and renames their uses; positions past
// the lambda chain are an error.
ExprPtr specialize_body(const ExprPtr& body, const std::set<size_t>& positions,
                        const std::map<size_t, std::string>& assigned,
                        size_t index, size_t last, const std::string& fname) {
  if (index > last) return body;
  const auto* l = body->as<Expr::Lam>();
  if (!l)
    throw TransformError("function " + fname +
                         " must bind its TVar parameters in the definition head");
  if (positions.count(index)) {
    ExprPtr renamed = rename_tvar_refs(l->body, l->param, assigned.at(index));
    return specialize_body(renamed, positions, assigned, index + 1, last, fname);
  }
  return lam(l->param,
             specialize_body(l->body, positions, assigned, index + 1, last, fname));
}

ContractPtr specialize_param_contract(const ParamContract& pc,
                                      const std::vector<std::string>& assigned,
                                      const Program& p) {
  std::vector<std::string> names = p.tvar_names();
  size_t n = names.size();
  std::vector<std::string> primed;
  primed.reserve(n);
  for (const auto& t : names) primed.push_back(t + "'");

  std::map<std::string, ExprPtr> pre_sub, post_sub;
  for (size_t i = 0; i < pc.placeholders.size(); ++i) {
    pre_sub[pc.placeholders[i].first] = var(assigned[i]);
    post_sub[pc.placeholders[i].first] = var(assigned[i]);
    post_sub[pc.placeholders[i].second] = var(assigned[i] + "'");
  }
  ExprPtr pre = substitute_parallel(pc.pre, pre_sub);
  ExprPtr post = substitute_parallel(pc.post, post_sub);

  std::string env = n == 1 ? names[0] : fresh_name("env");
  ContractPtr pre_c, post_c;
  if (n == 1) {
    pre_c = pred_contract(names[0], pre);
    post_c = pred_contract(primed[0], post);
  } else {
    std::string v = fresh_name("v");
    pre_c = pred_contract(
        v, case_of(var(v), {CaseAlt{tuple_con_name(n), names, pre}}));
    // Pre-state binding outermost: the shape strip_input_binding removes.
    std::string w = fresh_name("w");
    ExprPtr inner = case_of(var(w), {CaseAlt{tuple_con_name(n), primed, post}});
    post_c = pred_contract(
        w, case_of(var(env), {CaseAlt{tuple_con_name(n), names, inner}}));
  }

  ContractPtr result = pc.result ? pc.result : any_contract();
  for (size_t i = 0; i < pc.placeholders.size(); ++i) {
    if (contract_mentions(result, pc.placeholders[i].second))
      throw TransformError(
          "final-state placeholder " + pc.placeholders[i].second +
          " cannot appear in the result contract");
    if (contract_mentions(result, pc.placeholders[i].first)) {
      ExprPtr access =
          n == 1 ? var(env)
                 : case_of(var(env), {CaseAlt{tuple_con_name(n), names,
                                              var(assigned[i])}});
      result = contract_substitute(result, pc.placeholders[i].first, access);
    }
  }
  return stm_contract(env, pre_c, post_c, result);
}

}  // namespace

std::vector<FunctionDef> specialize_tvar_args(const FunctionDef& def,
                                              const Program& p) {
  if (!def.signature) return {def};
  std::vector<size_t> pos = tvar_positions(*def.signature);
  if (pos.empty()) return {def};
  if (def.contract)
    throw TransformError("function " + def.name +
                         " takes TVar parameters; use the TVar contract form");
  if (def.param_contract &&
      def.param_contract->placeholders.size() != pos.size())
    throw TransformError("contract of " + def.name +
                         " must name one placeholder pair per TVar parameter");

  std::vector<Type> params = arrow_spine(*def.signature, nullptr);
  std::vector<std::vector<std::string>> candidates;
  for (size_t i : pos) {
    std::vector<std::string> cands;
    for (const auto& tv : p.tvars)
      if (tv.content == params[i].content()) cands.push_back(tv.name);
    if (cands.empty())
      throw TransformError("no declared TVar has the content type of parameter " +
                           std::to_string(i + 1) + " of " + def.name);
    candidates.push_back(std::move(cands));
  }

  std::set<size_t> posset(pos.begin(), pos.end());
  std::vector<FunctionDef> out;
  std::vector<size_t> idx(pos.size(), 0);
  while (true) {
    std::vector<std::string> assigned;
    assigned.reserve(pos.size());
    for (size_t i = 0; i < pos.size(); ++i) assigned.push_back(candidates[i][idx[i]]);

    FunctionDef spec;
    spec.name = def.name;
    for (const auto& a : assigned) spec.name += "_" + a;
    Type result;
    std::vector<Type> spine = arrow_spine(*def.signature, &result);
    Type sig = result;
    for (size_t i = spine.size(); i-- > 0;)
      if (!posset.count(i)) sig = Type::fun(spine[i], sig);
    spec.signature = sig;
    std::map<size_t, std::string> by_pos;
    for (size_t i = 0; i < pos.size(); ++i) by_pos[pos[i]] = assigned[i];
    spec.body = def.body ? specialize_body(def.body, posset, by_pos, 0,
                                           pos.back(), def.name)
                         : nullptr;
    if (def.param_contract)
      spec.contract = specialize_param_contract(*def.param_contract, assigned, p);
    out.push_back(std::move(spec));

    size_t i = pos.size();
    while (i-- > 0) {
      if (++idx[i] < candidates[i].size()) break;
      idx[i] = 0;
      if (i == 0) return out;
    }
    if (pos.empty()) break;
  }
  return out;
}

namespace {

ExprPtr rewrite_calls(const ExprPtr& e,
                      const std::map<std::string, std::vector<size_t>>& specs,
                      const Program& p) {
  auto rec = [&](const ExprPtr& c) { return rewrite_calls(c, specs, p); };
  if (const auto* a = e->as<Expr::App>()) {
    std::vector<ExprPtr> args;
    ExprPtr head = e;
    while (const auto* ap = head->as<Expr::App>()) {
      args.push_back(ap->arg);
      head = ap->fn;
    }
    std::reverse(args.begin(), args.end());
    if (const auto* fr = head->as<Expr::FunRef>()) {
      auto it = specs.find(fr->name);
      if (it != specs.end()) {
        const std::vector<size_t>& pos = it->second;
        if (args.size() <= pos.back())
          throw TransformError("function " + fr->name +
                               " must be applied to all of its TVar arguments");
        std::set<size_t> posset(pos.begin(), pos.end());
        std::string name = fr->name;
        std::vector<ExprPtr> rest;
        for (size_t i = 0; i < args.size(); ++i) {
          if (posset.count(i)) {
            const auto* v = args[i]->as<Expr::Var>();
            if (!v || !p.find_tvar(v->name))
              throw TransformError("TVar argument " + std::to_string(i + 1) +
                                   " of " + fr->name +
                                   " must be a declared TVar name");
            name += "_" + v->name;
          } else {
            rest.push_back(rec(args[i]));
          }
        }
        return apps(funref(name), rest);
      }
    }
    return rebuild(*e, Expr::App{rec(a->fn), rec(a->arg)});
  }
  if (const auto* fr = e->as<Expr::FunRef>()) {
    if (specs.count(fr->name))
      throw TransformError("function " + fr->name +
                           " takes TVar parameters and must be applied to "
                           "declared TVar names directly");
  }
  return map_children(e, rec);
}

}  // namespace

Program specialize_tvar_params(const Program& p) {
  std::map<std::string, std::vector<size_t>> specs;
  for (const auto& f : p.functions) {
    if (!f.signature) continue;
    std::vector<size_t> pos = tvar_positions(*f.signature);
    if (!pos.empty()) specs[f.name] = pos;
  }
  if (specs.empty()) return p;

  Program out = p;
  out.functions.clear();
  for (const auto& f : p.functions) {
    if (!specs.count(f.name)) {
      out.functions.push_back(f);
      continue;
    }
    for (auto& s : specialize_tvar_args(f, p)) out.functions.push_back(std::move(s));
  }

  std::set<std::string> seen;
  for (const auto& f : out.functions)
    if (!seen.insert(f.name).second)
      throw TransformError("specialization produced a duplicate function name: " +
                           f.name);

  for (auto& f : out.functions)
    if (f.body) f.body = rewrite_calls(f.body, specs, p);
  for (auto& tv : out.tvars)
    if (tv.init) tv.init = rewrite_calls(tv.init, specs, p);
  for (auto& tx : out.transactions) tx.body = rewrite_calls(tx.body, specs, p);
  return out;
}

}  // namespace stmcheck
