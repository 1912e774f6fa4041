#include "stmcheck/typecheck.hpp"

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

bool is_meta(const Type& t) {
  return t.is(Type::Kind::Data) && !t.data_name().empty() && t.data_name()[0] == '?';
}

bool contains_tvar(const Type& t) {
  if (t.is(Type::Kind::TVar)) return true;
  for (const Type& a : t.args())
    if (contains_tvar(a)) return true;
  return false;
}

// TVar types may appear only as (possibly nested) function parameters.
bool tvar_misplaced(const Type& t) {
  if (t.is(Type::Kind::Fun))
    return (!t.from().is(Type::Kind::TVar) && tvar_misplaced(t.from())) ||
           tvar_misplaced(t.to());
  return contains_tvar(t);
}

using Scope = std::map<std::string, Type>;

class Checker {
 public:
  explicit Checker(const Program& p) : prog_(p), ctors_(p.ctors()) {
    for (const auto& f : p.functions) {
      if (!f.signature)
        throw TypeError("function " + f.name + " has no top-level signature");
      signatures_[f.name] = *f.signature;
    }
  }

  Type fresh() { return Type::data("?" + std::to_string(next_meta_++)); }

  // Follows meta bindings at the top of the type.
  Type shallow(Type t) {
    while (is_meta(t)) {
      auto it = meta_.find(t.data_name());
      if (it == meta_.end()) break;
      t = it->second;
    }
    return t;
  }

  Type resolve(const Type& t0) {
    Type t = shallow(t0);
    switch (t.kind()) {
      case Type::Kind::List: return Type::list(resolve(t.elem()));
      case Type::Kind::Tuple: {
        std::vector<Type> args;
        for (const Type& a : t.args()) args.push_back(resolve(a));
        return Type::tuple(std::move(args));
      }
      case Type::Kind::Fun: return Type::fun(resolve(t.from()), resolve(t.to()));
      case Type::Kind::Stm: return Type::stm(resolve(t.result()));
      case Type::Kind::TVar: return Type::tvar(resolve(t.content()));
      default: return t;
    }
  }

  bool fully_resolved(const Type& t) {
    if (is_meta(t)) return false;
    for (const Type& a : t.args())
      if (!fully_resolved(a)) return false;
    return true;
  }

  // Merges two types; Bottom absorbs into the other side without binding.
  Type unify(const Type& a0, const Type& b0, const std::string& what) {
    Type a = shallow(a0);
    Type b = shallow(b0);
    if (a.is_bottom()) return b;
    if (b.is_bottom()) return a;
    if (is_meta(a) && is_meta(b) && a.data_name() == b.data_name()) return a;
    if (is_meta(a)) {
      meta_[a.data_name()] = b;
      return b;
    }
    if (is_meta(b)) {
      meta_[b.data_name()] = a;
      return a;
    }
    if (a.kind() != b.kind())
      throw TypeError("type mismatch in " + what + ": " + resolve(a).to_string() +
                      " vs " + resolve(b).to_string());
    switch (a.kind()) {
      case Type::Kind::Data:
        if (a.data_name() != b.data_name())
          throw TypeError("type mismatch in " + what + ": " + a.data_name() + " vs " +
                          b.data_name());
        return a;
      case Type::Kind::List:
        return Type::list(unify(a.elem(), b.elem(), what));
      case Type::Kind::Tuple: {
        if (a.args().size() != b.args().size())
          throw TypeError("tuple arity mismatch in " + what);
        std::vector<Type> args;
        for (size_t i = 0; i < a.args().size(); ++i)
          args.push_back(unify(a.args()[i], b.args()[i], what));
        return Type::tuple(std::move(args));
      }
      case Type::Kind::Fun:
        return Type::fun(unify(a.from(), b.from(), what), unify(a.to(), b.to(), what));
      case Type::Kind::Stm:
        return Type::stm(unify(a.result(), b.result(), what));
      case Type::Kind::TVar:
        return Type::tvar(unify(a.content(), b.content(), what));
      default:
        return a;
    }
  }

  Type tvar_content(const std::string& name, const Scope& scope) {
    if (const TVarDecl* d = prog_.find_tvar(name)) return d->content;
    auto it = scope.find(name);
    if (it != scope.end()) {
      Type t = shallow(it->second);
      if (t.is(Type::Kind::TVar)) return t.content();
    }
    throw TypeError(name + " is not a TVar");
  }

  // Infers and annotates; `expected` guides checking when present.
  ExprPtr annotate(const ExprPtr& e, Scope& scope, std::optional<Type> expected) {
    auto fail = [&](const std::string& msg) -> void {
      throw TypeError(msg + " in `" + pretty_expr(e) + "`");
    };
    auto finish = [&](ExprPtr out, Type t) {
      if (expected) t = unify(t, *expected, "`" + pretty_expr(e) + "`");
      auto copy = std::make_shared<Expr>(*out);
      copy->type = t;
      return ExprPtr(copy);
    };

    return std::visit(
        overloaded{
            [&](const Expr::Var& n) -> ExprPtr {
              auto it = scope.find(n.name);
              if (it != scope.end()) return finish(e, it->second);
              if (const TVarDecl* d = prog_.find_tvar(n.name))
                return finish(e, Type::tvar(d->content));
              fail("unknown variable " + n.name);
              return e;
            },
            [&](const Expr::IntLit&) -> ExprPtr { return finish(e, Type::integer()); },
            [&](const Expr::FunRef& n) -> ExprPtr {
              auto it = signatures_.find(n.name);
              if (it == signatures_.end()) fail("unknown function " + n.name);
              return finish(e, it->second);
            },
            [&](const Expr::Exc&) -> ExprPtr { return finish(e, Type::bottom()); },
            [&](const Expr::Retry&) -> ExprPtr {
              return finish(e, Type::stm(Type::bottom()));
            },
            [&](const Expr::Con& n) -> ExprPtr {
              if (n.name == "True" || n.name == "False") {
                if (!n.args.empty()) fail("boolean constructors take no arguments");
                return finish(e, Type::boolean());
              }
              if (n.name == "()") {
                if (!n.args.empty()) fail("() takes no arguments");
                return finish(e, Type::unit());
              }
              if (n.name == "[]") {
                if (!n.args.empty()) fail("[] takes no arguments");
                Type elem = fresh();
                if (expected) {
                  Type t = shallow(*expected);
                  if (t.is(Type::Kind::List)) elem = t.elem();
                }
                return finish(e, Type::list(elem));
              }
              if (n.name == ":") {
                if (n.args.size() != 2) fail("(:) takes two arguments");
                Type elem = fresh();
                if (expected) {
                  Type t = shallow(*expected);
                  if (t.is(Type::Kind::List)) elem = t.elem();
                }
                ExprPtr head = annotate(n.args[0], scope, elem);
                elem = shallow(type_of(head));
                ExprPtr tail = annotate(n.args[1], scope, Type::list(elem));
                return finish(rebuild(*e, Expr::Con{n.name, {head, tail}}),
                              Type::list(elem));
              }
              size_t arity = 0;
              if (is_tuple_con_name(n.name, &arity)) {
                if (n.args.size() != arity) fail("tuple constructor arity mismatch");
                std::vector<Type> comps;
                if (expected) {
                  Type t = shallow(*expected);
                  if (t.is(Type::Kind::Tuple) && t.args().size() == arity)
                    comps = t.args();
                }
                std::vector<ExprPtr> args;
                std::vector<Type> types;
                for (size_t i = 0; i < arity; ++i) {
                  std::optional<Type> want;
                  if (!comps.empty()) want = comps[i];
                  ExprPtr a = annotate(n.args[i], scope, want);
                  types.push_back(type_of(a));
                  args.push_back(a);
                }
                return finish(rebuild(*e, Expr::Con{n.name, std::move(args)}),
                              Type::tuple(std::move(types)));
              }
              const CtorInfo* info = ctors_.lookup(n.name);
              if (!info) fail("unknown constructor " + n.name);
              if (static_cast<int>(n.args.size()) != info->arity)
                fail("constructor " + n.name + " expects " +
                     std::to_string(info->arity) + " arguments");
              if (!info->fields_known && info->arity > 0)
                fail("constructor " + n.name + " was declared without field types");
              std::vector<ExprPtr> args;
              for (size_t i = 0; i < n.args.size(); ++i)
                args.push_back(annotate(n.args[i], scope, info->fields[i]));
              return finish(rebuild(*e, Expr::Con{n.name, std::move(args)}),
                            Type::data(info->datatype));
            },
            [&](const Expr::Lam& n) -> ExprPtr {
              Type from = fresh();
              Type to = fresh();
              if (expected) {
                Type t = shallow(*expected);
                if (t.is(Type::Kind::Fun)) {
                  from = t.from();
                  to = t.to();
                } else if (!is_meta(t) && !t.is_bottom()) {
                  fail("a lambda cannot have type " + resolve(t).to_string());
                }
              }
              auto saved = scope.find(n.param) != scope.end()
                               ? std::optional<Type>(scope[n.param])
                               : std::nullopt;
              scope[n.param] = from;
              ExprPtr body = annotate(n.body, scope, to);
              if (saved)
                scope[n.param] = *saved;
              else
                scope.erase(n.param);
              return finish(rebuild(*e, Expr::Lam{n.param, body}),
                            Type::fun(from, type_of(body)));
            },
            [&](const Expr::App& n) -> ExprPtr {
              ExprPtr fn = annotate(n.fn, scope, std::nullopt);
              Type ft = shallow(type_of(fn));
              if (ft.is_bottom()) {
                ExprPtr arg = annotate(n.arg, scope, std::nullopt);
                return finish(rebuild(*e, Expr::App{fn, arg}), Type::bottom());
              }
              if (is_meta(ft)) {
                Type from = fresh();
                Type to = fresh();
                unify(ft, Type::fun(from, to), "`" + pretty_expr(e) + "`");
                ft = Type::fun(from, to);
              }
              if (!ft.is(Type::Kind::Fun))
                fail("applying a value of type " + resolve(ft).to_string());
              ExprPtr arg = annotate(n.arg, scope, ft.from());
              return finish(rebuild(*e, Expr::App{fn, arg}), ft.to());
            },
            [&](const Expr::Case& n) -> ExprPtr {
              ExprPtr scrut = annotate(n.scrutinee, scope, std::nullopt);
              Type st = shallow(type_of(scrut));
              Type result = expected ? *expected : Type(Type::bottom());
              std::vector<CaseAlt> alts;
              alts.reserve(n.alts.size());
              for (const auto& alt : n.alts) {
                std::vector<Type> binder_types;
                if (alt.con == "True" || alt.con == "False") {
                  st = unify(st, Type::boolean(), "case scrutinee");
                } else if (alt.con == "[]" || alt.con == ":") {
                  Type elem = fresh();
                  st = unify(st, Type::list(elem), "case scrutinee");
                  if (alt.con == ":") binder_types = {st.elem(), st};
                } else if (size_t arity = 0; is_tuple_con_name(alt.con, &arity)) {
                  std::vector<Type> comps;
                  for (size_t i = 0; i < arity; ++i) comps.push_back(fresh());
                  st = unify(st, Type::tuple(comps), "case scrutinee");
                  binder_types = shallow(st).args();
                } else if (alt.con == "()") {
                  st = unify(st, Type::unit(), "case scrutinee");
                } else {
                  const CtorInfo* info = ctors_.lookup(alt.con);
                  if (!info) fail("unknown constructor " + alt.con);
                  st = unify(st, Type::data(info->datatype), "case scrutinee");
                  if (!info->fields_known && info->arity > 0)
                    fail("constructor " + alt.con + " was declared without field types");
                  binder_types = info->fields;
                }
                if (binder_types.size() != alt.binders.size())
                  fail("pattern arity mismatch for " + alt.con);
                std::vector<std::pair<std::string, std::optional<Type>>> saved;
                for (size_t i = 0; i < alt.binders.size(); ++i) {
                  auto it = scope.find(alt.binders[i]);
                  saved.emplace_back(alt.binders[i],
                                     it != scope.end() ? std::optional<Type>(it->second)
                                                       : std::nullopt);
                  scope[alt.binders[i]] = binder_types[i];
                }
                ExprPtr body = annotate(alt.body, scope, std::nullopt);
                for (auto it = saved.rbegin(); it != saved.rend(); ++it) {
                  if (it->second)
                    scope[it->first] = *it->second;
                  else
                    scope.erase(it->first);
                }
                result = unify(result, type_of(body), "case alternatives");
                alts.push_back(CaseAlt{alt.con, alt.binders, body});
              }
              // Re-annotate the scrutinee with its sharpened type.
              auto scrut2 = std::make_shared<Expr>(*scrut);
              scrut2->type = st;
              return finish(rebuild(*e, Expr::Case{scrut2, std::move(alts)}), result);
            },
            [&](const Expr::Prim& n) -> ExprPtr {
              auto binary = [&](Type operand, Type res) -> ExprPtr {
                ExprPtr a = annotate(n.args[0], scope, operand);
                ExprPtr b = annotate(n.args[1], scope, operand);
                return finish(rebuild(*e, Expr::Prim{n.op, {a, b}}), res);
              };
              switch (n.op) {
                case PrimTag::Add:
                case PrimTag::Sub:
                case PrimTag::Mul:
                  return binary(Type::integer(), Type::integer());
                case PrimTag::Gt:
                case PrimTag::Ge:
                case PrimTag::Lt:
                case PrimTag::Le:
                  return binary(Type::integer(), Type::boolean());
                case PrimTag::And:
                case PrimTag::Or:
                  return binary(Type::boolean(), Type::boolean());
                case PrimTag::Not: {
                  ExprPtr a = annotate(n.args[0], scope, Type::boolean());
                  return finish(rebuild(*e, Expr::Prim{n.op, {a}}), Type::boolean());
                }
                case PrimTag::Eq: {
                  ExprPtr a = annotate(n.args[0], scope, std::nullopt);
                  ExprPtr b = annotate(n.args[1], scope, type_of(a));
                  Type t = resolve(type_of(b));
                  if (t.is(Type::Kind::Fun) || t.is(Type::Kind::Stm) ||
                      t.is(Type::Kind::TVar))
                    fail("no equality at type " + t.to_string());
                  return finish(rebuild(*e, Expr::Prim{n.op, {a, b}}), Type::boolean());
                }
              }
              fail("unknown primitive");
              return e;
            },
            [&](const Expr::ReadTVar& n) -> ExprPtr {
              return finish(e, Type::stm(tvar_content(n.tvar, scope)));
            },
            [&](const Expr::WriteTVar& n) -> ExprPtr {
              Type content = tvar_content(n.tvar, scope);
              if (!is_pure(n.value)) fail("writeTVar payload must be pure");
              ExprPtr v = annotate(n.value, scope, content);
              return finish(rebuild(*e, Expr::WriteTVar{n.tvar, v}),
                            Type::stm(Type::unit()));
            },
            [&](const Expr::Return& n) -> ExprPtr {
              if (!is_pure(n.value)) fail("return payload must be pure");
              std::optional<Type> want;
              if (expected) {
                Type t = shallow(*expected);
                if (t.is(Type::Kind::Stm)) want = t.result();
              }
              ExprPtr v = annotate(n.value, scope, want);
              return finish(rebuild(*e, Expr::Return{v}), Type::stm(type_of(v)));
            },
            [&](const Expr::Bind& n) -> ExprPtr {
              ExprPtr l = annotate(n.left, scope, std::nullopt);
              Type lt = shallow(type_of(l));
              Type a = Type::bottom();
              if (lt.is(Type::Kind::Stm))
                a = lt.result();
              else if (is_meta(lt))
                a = fresh(), unify(lt, Type::stm(a), "`>>=` left operand");
              else if (!lt.is_bottom())
                fail("`>>=` left operand has type " + resolve(lt).to_string());
              Type b = expected ? *expected : Type::stm(fresh());
              ExprPtr r = annotate(n.right, scope, Type::fun(a, b));
              Type rt = shallow(type_of(r));
              Type res = rt.is(Type::Kind::Fun) ? rt.to() : Type::stm(Type::bottom());
              res = unify(res, Type::stm(fresh()), "`>>=` result");
              return finish(rebuild(*e, Expr::Bind{l, r}), res);
            },
            [&](const Expr::OrElse& n) -> ExprPtr {
              ExprPtr l = annotate(n.left, scope, expected ? expected
                                                           : std::optional<Type>(
                                                                 Type::stm(fresh())));
              ExprPtr r = annotate(n.right, scope, type_of(l));
              Type t = unify(type_of(l), type_of(r), "orElse branches");
              t = unify(t, Type::stm(fresh()), "orElse");
              return finish(rebuild(*e, Expr::OrElse{l, r}), t);
            },
            [&](const Expr::Do&) -> ExprPtr {
              fail("do-block must be desugared before typechecking");
              return e;
            },
            [&](const Expr::Let&) -> ExprPtr {
              fail("let must be desugared before typechecking");
              return e;
            },
        },
        e->node);
  }

  // Rebuilds the tree with all metas resolved; errors on ambiguity.
  ExprPtr resolve_tree(const ExprPtr& e, const std::string& where) {
    ExprPtr out = std::visit(
        overloaded{
            [&](const Expr::Con& n) -> ExprPtr {
              Expr::Con c = n;
              for (auto& a : c.args) a = resolve_tree(a, where);
              return rebuild(*e, std::move(c));
            },
            [&](const Expr::Lam& n) -> ExprPtr {
              return rebuild(*e, Expr::Lam{n.param, resolve_tree(n.body, where)});
            },
            [&](const Expr::App& n) -> ExprPtr {
              return rebuild(*e,
                             Expr::App{resolve_tree(n.fn, where), resolve_tree(n.arg, where)});
            },
            [&](const Expr::Case& n) -> ExprPtr {
              Expr::Case c = n;
              c.scrutinee = resolve_tree(c.scrutinee, where);
              for (auto& alt : c.alts) alt.body = resolve_tree(alt.body, where);
              return rebuild(*e, std::move(c));
            },
            [&](const Expr::Prim& n) -> ExprPtr {
              Expr::Prim p = n;
              for (auto& a : p.args) a = resolve_tree(a, where);
              return rebuild(*e, std::move(p));
            },
            [&](const Expr::WriteTVar& n) -> ExprPtr {
              return rebuild(*e, Expr::WriteTVar{n.tvar, resolve_tree(n.value, where)});
            },
            [&](const Expr::Bind& n) -> ExprPtr {
              return rebuild(*e, Expr::Bind{resolve_tree(n.left, where),
                                            resolve_tree(n.right, where)});
            },
            [&](const Expr::Return& n) -> ExprPtr {
              return rebuild(*e, Expr::Return{resolve_tree(n.value, where)});
            },
            [&](const Expr::OrElse& n) -> ExprPtr {
              return rebuild(*e, Expr::OrElse{resolve_tree(n.left, where),
                                              resolve_tree(n.right, where)});
            },
            [&](const auto&) -> ExprPtr { return e; },
        },
        e->node);
    if (!out->type) throw TypeError("internal: unannotated node in " + where);
    Type t = resolve(*out->type);
    if (!fully_resolved(t))
      throw TypeError("ambiguous type in " + where + " for `" + pretty_expr(out) +
                      "`; add an annotation or use the value");
    if (!(out->is<Expr::Var>() && t.is(Type::Kind::TVar)) && tvar_misplaced(t))
      throw TypeError("TVar used outside read/write/parameter position in " + where +
                      ": `" + pretty_expr(out) + "`");
    auto copy = std::make_shared<Expr>(*out);
    copy->type = t;
    return copy;
  }

  const Program& prog_;
  ConstructorTable ctors_;
  std::map<std::string, Type> signatures_;
  std::map<std::string, Type> meta_;
  int next_meta_ = 0;
};

void validate_pure_type(const Type& t, const std::string& what) {
  if (t.is(Type::Kind::Stm) || t.is(Type::Kind::TVar))
    throw TypeError(what + " must not contain STM or TVar types (" + t.to_string() + ")");
  for (const Type& a : t.args()) validate_pure_type(a, what);
}

// The purification of a transaction binds the TVar names as variables, so
// user binders in STM code may not reuse them.
void reject_tvar_binders(const ExprPtr& e, const std::set<std::string>& tvars,
                         const std::string& where) {
  auto check_name = [&](const std::string& n) {
    if (tvars.count(n))
      throw TypeError(where + ": binder " + n +
                      " reuses the name of a declared TVar");
  };
  if (const auto* l = e->as<Expr::Lam>()) check_name(l->param);
  if (const auto* c = e->as<Expr::Case>())
    for (const auto& alt : c->alts)
      for (const auto& b : alt.binders) check_name(b);
  if (const auto* lt = e->as<Expr::Let>()) check_name(lt->var);
  if (const auto* d = e->as<Expr::Do>())
    for (const auto& s : d->stmts)
      if (s.binder) check_name(*s.binder);
  map_children(e, [&](const ExprPtr& k) {
    reject_tvar_binders(k, tvars, where);
    return k;
  });
}

}  // namespace

Type type_of(const ExprPtr& e) {
  if (!e->type) throw TypeError("expression lacks a type annotation: " + pretty_expr(e));
  return *e->type;
}

bool is_stm_typed(const ExprPtr& e) { return e->type && e->type->is_stm(); }

ExprPtr annotate_expr(const ExprPtr& e, const std::map<std::string, Type>& scope,
                      const Program& p, const std::optional<Type>& expected) {
  Checker ck(p);
  Scope s = scope;
  ExprPtr out = ck.annotate(e, s, expected);
  return ck.resolve_tree(out, "expression");
}

CheckedProgram check_program(const Program& p) {
  // Declaration sanity first.
  for (const auto& tv : p.tvars) {
    validate_pure_type(tv.content, "TVar " + tv.name + " content type");
    if (tv.init && !is_pure(tv.init))
      throw TypeError("initial value of TVar " + tv.name + " must be pure");
  }
  ConstructorTable ctors = p.ctors();
  for (const auto& d : p.datatypes) {
    for (const auto& c : d.ctors) {
      for (const Type& f : c.fields) validate_pure_type(f, "field of constructor " + c.name);
    }
  }

  CheckedProgram out;
  out.program = p;

  std::set<std::string> tvar_names;
  for (const auto& tv : p.tvars) tvar_names.insert(tv.name);

  {
    Checker ck(p);
    for (auto& f : out.program.functions) {
      if (!f.body) continue;
      if (!f.signature)
        throw TypeError("function " + f.name + " lacks a type signature");
      // Purification introduces the TVar names as projection binders around
      // STM operations, so only code containing STM constructs is at risk of
      // capture. Pure helpers (the invariant, list utilities) may bind them.
      if (!is_pure(f.body)) reject_tvar_binders(f.body, tvar_names, "function " + f.name);
      Scope scope;
      ExprPtr body = ck.annotate(f.body, scope, *f.signature);
      f.body = ck.resolve_tree(body, "function " + f.name);
    }
  }

  for (auto& tv : out.program.tvars) {
    if (!tv.init) continue;
    Checker ck(p);
    Scope scope;
    ExprPtr init = ck.annotate(tv.init, scope, tv.content);
    tv.init = ck.resolve_tree(init, "TVar " + tv.name);
  }

  if (p.invariant) {
    const FunctionDef* inv = p.find_function(*p.invariant);
    if (!inv) throw TypeError("invariant function " + *p.invariant + " is not defined");
    Type want = Type::fun(p.tvar_tuple_type(), Type::boolean());
    if (!inv->signature || !(*inv->signature == want))
      throw TypeError("invariant " + *p.invariant + " must have type " + want.to_string());
  }

  for (auto& tx : out.program.transactions) {
    reject_tvar_binders(tx.body, tvar_names, "transaction " + tx.name);
    Checker ck(p);
    Scope scope;
    std::vector<Type> params;
    for (const auto& [name, c] : tx.free_vars) {
      if (tvar_names.count(name))
        throw TypeError("transaction " + tx.name + ": parameter " + name +
                        " reuses the name of a declared TVar");
      Type t = ck.fresh();
      scope[name] = t;
      params.push_back(t);
    }
    ExprPtr body = ck.annotate(tx.body, scope, Type::stm(ck.fresh()));
    body = ck.resolve_tree(body, "transaction " + tx.name);
    tx.body = body;

    std::vector<std::string> fv = free_vars(body);
    std::vector<std::string> declared;
    for (const auto& [name, c] : tx.free_vars) declared.push_back(name);
    if (fv != declared)
      throw TypeError("transaction " + tx.name +
                      " parameters must list exactly its free variables in first-use order");

    std::vector<Type> resolved;
    for (auto& t : params) {
      Type r = ck.resolve(t);
      if (!ck.fully_resolved(r))
        throw TypeError("cannot infer the type of a parameter of transaction " + tx.name);
      resolved.push_back(r);
    }
    out.transaction_params[tx.name] = resolved;
    out.transaction_results[tx.name] = ck.resolve(type_of(body)).result();
  }

  return out;
}

}  // namespace stmcheck
