#include "stmcheck/ast.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <set>

namespace stmcheck {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

ExprPtr mk(Expr::Node node) {
  auto e = std::make_shared<Expr>();
  e->node = std::move(node);
  return e;
}

}  // namespace

const char* prim_name(PrimTag op) {
  switch (op) {
    case PrimTag::Add: return "+";
    case PrimTag::Sub: return "-";
    case PrimTag::Mul: return "*";
    case PrimTag::Eq: return "==";
    case PrimTag::Gt: return ">";
    case PrimTag::Ge: return ">=";
    case PrimTag::Lt: return "<";
    case PrimTag::Le: return "<=";
    case PrimTag::And: return "&&";
    case PrimTag::Or: return "||";
    case PrimTag::Not: return "not";
  }
  return "?";
}

int prim_arity(PrimTag op) { return op == PrimTag::Not ? 1 : 2; }

ExprPtr var(std::string name) { return mk(Expr::Var{std::move(name)}); }
ExprPtr con(std::string name, std::vector<ExprPtr> args) {
  return mk(Expr::Con{std::move(name), std::move(args)});
}
ExprPtr intlit(long long v) { return mk(Expr::IntLit{v}); }
ExprPtr lam(std::string param, ExprPtr body) {
  return mk(Expr::Lam{std::move(param), std::move(body)});
}
ExprPtr exc(ExcKind k) { return mk(Expr::Exc{k}); }
ExprPtr bad() { return exc(ExcKind::Bad); }
ExprPtr unr() { return exc(ExcKind::Unr); }
ExprPtr app(ExprPtr fn, ExprPtr arg) { return mk(Expr::App{std::move(fn), std::move(arg)}); }
ExprPtr apps(ExprPtr fn, const std::vector<ExprPtr>& args) {
  ExprPtr acc = std::move(fn);
  for (const auto& a : args) acc = app(acc, a);
  return acc;
}
ExprPtr funref(std::string name) { return mk(Expr::FunRef{std::move(name)}); }
ExprPtr case_of(ExprPtr scrutinee, std::vector<CaseAlt> alts) {
  return mk(Expr::Case{std::move(scrutinee), std::move(alts)});
}
ExprPtr prim(PrimTag op, std::vector<ExprPtr> args) {
  return mk(Expr::Prim{op, std::move(args)});
}
ExprPtr read_tvar(std::string tvar) { return mk(Expr::ReadTVar{std::move(tvar)}); }
ExprPtr write_tvar(std::string tvar, ExprPtr value) {
  return mk(Expr::WriteTVar{std::move(tvar), std::move(value)});
}
ExprPtr bind(ExprPtr left, ExprPtr right) {
  return mk(Expr::Bind{std::move(left), std::move(right)});
}
ExprPtr ret(ExprPtr value) { return mk(Expr::Return{std::move(value)}); }
ExprPtr or_else(ExprPtr left, ExprPtr right) {
  return mk(Expr::OrElse{std::move(left), std::move(right)});
}
ExprPtr retry() { return mk(Expr::Retry{}); }
ExprPtr do_block(std::vector<DoStmt> stmts) { return mk(Expr::Do{std::move(stmts)}); }
ExprPtr let_in(std::string v, ExprPtr bound, ExprPtr body) {
  return mk(Expr::Let{std::move(v), std::move(bound), std::move(body)});
}
ExprPtr with_type(ExprPtr e, Type t) {
  auto copy = std::make_shared<Expr>(*e);
  copy->type = std::move(t);
  return copy;
}

ExprPtr true_con() { return con("True"); }
ExprPtr false_con() { return con("False"); }
ExprPtr unit_con() { return con("()"); }
ExprPtr nil_con() { return con("[]"); }
ExprPtr cons(ExprPtr head, ExprPtr tail) { return con(":", {std::move(head), std::move(tail)}); }

std::string tuple_con_name(size_t arity) {
  std::string s = "(";
  for (size_t i = 1; i < arity; ++i) s += ',';
  s += ')';
  return s;
}

bool is_tuple_con_name(const std::string& name, size_t* arity) {
  if (name.size() < 3 || name.front() != '(' || name.back() != ')') return false;
  for (size_t i = 1; i + 1 < name.size(); ++i)
    if (name[i] != ',') return false;
  if (arity) *arity = name.size() - 1;
  return true;
}

ExprPtr tuple(std::vector<ExprPtr> elems) {
  if (elems.size() == 1) return elems[0];
  std::string name = tuple_con_name(elems.size());
  return con(std::move(name), std::move(elems));
}

ExprPtr lam_tuple(const std::vector<std::string>& names, ExprPtr body) {
  if (names.size() == 1) return lam(names[0], std::move(body));
  std::string x = fresh_name("s");
  return lam(x, case_of(var(x), {CaseAlt{tuple_con_name(names.size()), names, std::move(body)}}));
}

ExprPtr rebuild(const Expr& original, Expr::Node node) {
  auto e = std::make_shared<Expr>();
  e->node = std::move(node);
  e->type = original.type;
  return e;
}

// ---- constructor table ---------------------------------------------------

ConstructorTable::ConstructorTable() {
  declare("Bool", {CtorInfo{"True", "Bool", 0, {}, true},
                   CtorInfo{"False", "Bool", 0, {}, true}});
  declare("List", {CtorInfo{"[]", "List", 0, {}, false},
                   CtorInfo{":", "List", 2, {}, false}});
  declare("Unit", {CtorInfo{"()", "Unit", 0, {}, true}});
}

void ConstructorTable::declare(const std::string& datatype, std::vector<CtorInfo> ctors) {
  for (auto& c : ctors) {
    c.datatype = datatype;
    if (by_ctor_.count(c.name))
      throw SyntaxError("duplicate constructor: " + c.name);
    by_ctor_[c.name] = c;
  }
  by_datatype_[datatype] = std::move(ctors);
}

const CtorInfo* ConstructorTable::lookup(const std::string& ctor) const {
  auto it = by_ctor_.find(ctor);
  if (it != by_ctor_.end()) return &it->second;
  size_t arity = 0;
  if (is_tuple_con_name(ctor, &arity)) {
    // Tuple datatypes exist per arity; synthesize on first use.
    auto* self = const_cast<ConstructorTable*>(this);
    std::string dt = "Tuple" + std::to_string(arity);
    self->declare(dt, {CtorInfo{ctor, dt, static_cast<int>(arity), {}, false}});
    return &by_ctor_.at(ctor);
  }
  return nullptr;
}

const std::vector<CtorInfo>& ConstructorTable::of_datatype(const std::string& datatype) const {
  static const std::vector<CtorInfo> empty;
  auto it = by_datatype_.find(datatype);
  return it == by_datatype_.end() ? empty : it->second;
}

bool ConstructorTable::has_datatype(const std::string& datatype) const {
  return by_datatype_.count(datatype) > 0;
}

// ---- contracts -------------------------------------------------------------

namespace {
ContractPtr mkc(Contract::Node node) {
  auto c = std::make_shared<Contract>();
  c->node = std::move(node);
  return c;
}
}  // namespace

ContractPtr pred_contract(std::string v, ExprPtr p) {
  return mkc(Contract::Pred{std::move(v), std::move(p)});
}
ContractPtr ok_contract() { return pred_contract("x", true_con()); }
ContractPtr depfun_contract(std::string v, ContractPtr dom, ContractPtr cod) {
  return mkc(Contract::DepFun{std::move(v), std::move(dom), std::move(cod)});
}
ContractPtr tuple_contract(std::vector<ContractPtr> elems) {
  return mkc(Contract::Tuple{std::move(elems)});
}
ContractPtr any_contract() { return mkc(Contract::Any{}); }
ContractPtr stm_contract(std::string v, ContractPtr pre, ContractPtr post, ContractPtr result) {
  return mkc(Contract::StmOp{std::move(v), std::move(pre), std::move(post), std::move(result)});
}

bool is_ok_contract(const Contract& c) {
  const auto* p = c.as<Contract::Pred>();
  return p && p->pred->is<Expr::Con>() && p->pred->as<Expr::Con>()->name == "True";
}

// ---- program ---------------------------------------------------------------

ConstructorTable Program::ctors() const {
  ConstructorTable t;
  for (const auto& d : datatypes) t.declare(d.name, d.ctors);
  return t;
}

const FunctionDef* Program::find_function(const std::string& name) const {
  for (const auto& f : functions)
    if (f.name == name) return &f;
  return nullptr;
}

const TVarDecl* Program::find_tvar(const std::string& name) const {
  for (const auto& t : tvars)
    if (t.name == name) return &t;
  return nullptr;
}

int Program::tvar_index(const std::string& name) const {
  for (size_t i = 0; i < tvars.size(); ++i)
    if (tvars[i].name == name) return static_cast<int>(i);
  return -1;
}

std::vector<std::string> Program::tvar_names() const {
  std::vector<std::string> names;
  names.reserve(tvars.size());
  for (const auto& t : tvars) names.push_back(t.name);
  return names;
}

Type Program::tvar_tuple_type() const {
  if (tvars.size() == 1) return tvars[0].content;
  std::vector<Type> elems;
  elems.reserve(tvars.size());
  for (const auto& t : tvars) elems.push_back(t.content);
  return Type::tuple(std::move(elems));
}

// ---- fresh names -----------------------------------------------------------

namespace {
std::atomic<uint64_t> g_fresh{1};

std::string strip_suffix(const std::string& base) {
  auto pos = base.find('\'');
  return pos == std::string::npos ? base : base.substr(0, pos);
}
}  // namespace

std::string fresh_name(const std::string& base) {
  uint64_t k = g_fresh.fetch_add(1);
  return strip_suffix(base) + "'" + std::to_string(k);
}

void reset_fresh_names(uint64_t next) { g_fresh.store(next); }

// ---- desugar ---------------------------------------------------------------

ExprPtr map_children(const ExprPtr& e, const std::function<ExprPtr(const ExprPtr&)>& fn) {
  bool changed = false;
  auto go = [&](const ExprPtr& c) {
    ExprPtr c2 = fn(c);
    if (c2 != c) changed = true;
    return c2;
  };
  Expr::Node node = std::visit(
      overloaded{
          [&](const Expr::Var& n) -> Expr::Node { return n; },
          [&](const Expr::Con& n) -> Expr::Node {
            Expr::Con out = n;
            for (auto& a : out.args) a = go(a);
            return out;
          },
          [&](const Expr::IntLit& n) -> Expr::Node { return n; },
          [&](const Expr::Lam& n) -> Expr::Node { return Expr::Lam{n.param, go(n.body)}; },
          [&](const Expr::Exc& n) -> Expr::Node { return n; },
          [&](const Expr::App& n) -> Expr::Node { return Expr::App{go(n.fn), go(n.arg)}; },
          [&](const Expr::FunRef& n) -> Expr::Node { return n; },
          [&](const Expr::Case& n) -> Expr::Node {
            Expr::Case out = n;
            out.scrutinee = go(out.scrutinee);
            for (auto& alt : out.alts) alt.body = go(alt.body);
            return out;
          },
          [&](const Expr::Prim& n) -> Expr::Node {
            Expr::Prim out = n;
            for (auto& a : out.args) a = go(a);
            return out;
          },
          [&](const Expr::ReadTVar& n) -> Expr::Node { return n; },
          [&](const Expr::WriteTVar& n) -> Expr::Node {
            return Expr::WriteTVar{n.tvar, go(n.value)};
          },
          [&](const Expr::Bind& n) -> Expr::Node { return Expr::Bind{go(n.left), go(n.right)}; },
          [&](const Expr::Return& n) -> Expr::Node { return Expr::Return{go(n.value)}; },
          [&](const Expr::OrElse& n) -> Expr::Node {
            return Expr::OrElse{go(n.left), go(n.right)};
          },
          [&](const Expr::Retry& n) -> Expr::Node { return n; },
          [&](const Expr::Do& n) -> Expr::Node {
            Expr::Do out = n;
            for (auto& s : out.stmts) s.expr = go(s.expr);
            return out;
          },
          [&](const Expr::Let& n) -> Expr::Node {
            return Expr::Let{n.var, go(n.bound), go(n.body)};
          },
      },
      e->node);
  if (!changed) return e;
  return rebuild(*e, std::move(node));
}

ExprPtr desugar(const ExprPtr& e) {
  ExprPtr done = map_children(e, [](const ExprPtr& c) { return desugar(c); });
  if (const auto* d = done->as<Expr::Do>()) {
    if (d->stmts.empty()) throw SyntaxError("empty do-block");
    if (d->stmts.back().binder)
      throw SyntaxError("do-block ends in a binder statement");
    ExprPtr acc = d->stmts.back().expr;
    for (size_t i = d->stmts.size() - 1; i-- > 0;) {
      const DoStmt& s = d->stmts[i];
      acc = bind(s.expr, lam(s.binder ? *s.binder : "_", acc));
    }
    return acc;
  }
  if (const auto* l = done->as<Expr::Let>()) {
    return app(lam(l->var, l->body), l->bound);
  }
  return done;
}

// ---- complete_cases --------------------------------------------------------

ExprPtr complete_cases(const ExprPtr& e, const ConstructorTable& ctors) {
  ExprPtr done = map_children(e, [&](const ExprPtr& c) { return complete_cases(c, ctors); });
  const auto* cs = done->as<Expr::Case>();
  if (!cs) return done;
  if (cs->alts.empty()) throw SyntaxError("case with no alternatives");

  std::string datatype;
  std::set<std::string> seen;
  for (const auto& alt : cs->alts) {
    const CtorInfo* info = ctors.lookup(alt.con);
    if (!info) throw SyntaxError("unknown constructor in case: " + alt.con);
    if (datatype.empty()) {
      datatype = info->datatype;
    } else if (datatype != info->datatype) {
      throw SyntaxError("case alternatives mix datatypes " + datatype + " and " +
                        info->datatype);
    }
    if (!seen.insert(alt.con).second)
      throw SyntaxError("duplicate case alternative for constructor " + alt.con);
    if (static_cast<int>(alt.binders.size()) != info->arity)
      throw SyntaxError("constructor " + alt.con + " expects " +
                        std::to_string(info->arity) + " binders");
  }

  std::vector<CaseAlt> alts = cs->alts;
  bool added = false;
  for (const CtorInfo& info : ctors.of_datatype(datatype)) {
    if (seen.count(info.name)) continue;
    CaseAlt alt;
    alt.con = info.name;
    for (int i = 0; i < info.arity; ++i) alt.binders.push_back(fresh_name("w"));
    alt.body = bad();
    alts.push_back(std::move(alt));
    added = true;
  }
  if (!added) return done;
  return rebuild(*done, Expr::Case{cs->scrutinee, std::move(alts)});
}

// ---- free variables --------------------------------------------------------

namespace {

void free_vars_walk(const ExprPtr& e, std::vector<std::string>& bound,
                    std::vector<std::string>& out) {
  auto is_bound = [&](const std::string& n) {
    return std::find(bound.begin(), bound.end(), n) != bound.end();
  };
  std::visit(
      overloaded{
          [&](const Expr::Var& n) {
            if (!is_bound(n.name) &&
                std::find(out.begin(), out.end(), n.name) == out.end())
              out.push_back(n.name);
          },
          [&](const Expr::Con& n) {
            for (const auto& a : n.args) free_vars_walk(a, bound, out);
          },
          [&](const Expr::IntLit&) {},
          [&](const Expr::Lam& n) {
            bound.push_back(n.param);
            free_vars_walk(n.body, bound, out);
            bound.pop_back();
          },
          [&](const Expr::Exc&) {},
          [&](const Expr::App& n) {
            free_vars_walk(n.fn, bound, out);
            free_vars_walk(n.arg, bound, out);
          },
          [&](const Expr::FunRef&) {},
          [&](const Expr::Case& n) {
            free_vars_walk(n.scrutinee, bound, out);
            for (const auto& alt : n.alts) {
              for (const auto& b : alt.binders) bound.push_back(b);
              free_vars_walk(alt.body, bound, out);
              bound.resize(bound.size() - alt.binders.size());
            }
          },
          [&](const Expr::Prim& n) {
            for (const auto& a : n.args) free_vars_walk(a, bound, out);
          },
          [&](const Expr::ReadTVar&) {},
          [&](const Expr::WriteTVar& n) { free_vars_walk(n.value, bound, out); },
          [&](const Expr::Bind& n) {
            free_vars_walk(n.left, bound, out);
            free_vars_walk(n.right, bound, out);
          },
          [&](const Expr::Return& n) { free_vars_walk(n.value, bound, out); },
          [&](const Expr::OrElse& n) {
            free_vars_walk(n.left, bound, out);
            free_vars_walk(n.right, bound, out);
          },
          [&](const Expr::Retry&) {},
          [&](const Expr::Do& n) {
            size_t mark = bound.size();
            for (const auto& s : n.stmts) {
              free_vars_walk(s.expr, bound, out);
              if (s.binder) bound.push_back(*s.binder);
            }
            bound.resize(mark);
          },
          [&](const Expr::Let& n) {
            free_vars_walk(n.bound, bound, out);
            bound.push_back(n.var);
            free_vars_walk(n.body, bound, out);
            bound.pop_back();
          },
      },
      e->node);
}

}  // namespace

std::vector<std::string> free_vars(const ExprPtr& e) {
  std::vector<std::string> bound, out;
  free_vars_walk(e, bound, out);
  return out;
}

bool occurs_free(const ExprPtr& e, const std::string& x) {
  auto fv = free_vars(e);
  return std::find(fv.begin(), fv.end(), x) != fv.end();
}

// ---- substitution ----------------------------------------------------------

namespace {

using Subst = std::map<std::string, ExprPtr>;

bool any_value_mentions(const Subst& s, const std::string& name) {
  for (const auto& [k, v] : s)
    if (occurs_free(v, name)) return true;
  return false;
}

ExprPtr subst_walk(const ExprPtr& e, const Subst& s);

// Handles one binder: drops it from the substitution and renames it when it
// would capture a free variable of a substituted value.
std::pair<std::string, ExprPtr> subst_under_binder(const std::string& binder,
                                                   const ExprPtr& body, const Subst& s) {
  Subst inner = s;
  inner.erase(binder);
  if (inner.empty()) return {binder, body};
  if (any_value_mentions(inner, binder)) {
    std::string b2 = fresh_name(binder);
    ExprPtr renamed = subst_walk(body, Subst{{binder, var(b2)}});
    return {b2, subst_walk(renamed, inner)};
  }
  return {binder, subst_walk(body, inner)};
}

ExprPtr subst_walk(const ExprPtr& e, const Subst& s) {
  if (s.empty()) return e;
  return std::visit(
      overloaded{
          [&](const Expr::Var& n) -> ExprPtr {
            auto it = s.find(n.name);
            return it == s.end() ? e : it->second;
          },
          [&](const Expr::Lam& n) -> ExprPtr {
            auto [p, b] = subst_under_binder(n.param, n.body, s);
            if (p == n.param && b == n.body) return e;
            return rebuild(*e, Expr::Lam{p, b});
          },
          [&](const Expr::Case& n) -> ExprPtr {
            bool changed = false;
            ExprPtr scr = subst_walk(n.scrutinee, s);
            changed |= scr != n.scrutinee;
            std::vector<CaseAlt> alts;
            alts.reserve(n.alts.size());
            for (const auto& alt : n.alts) {
              Subst inner = s;
              for (const auto& b : alt.binders) inner.erase(b);
              // Rename any binder that would capture.
              std::vector<std::string> binders = alt.binders;
              ExprPtr body = alt.body;
              if (!inner.empty()) {
                Subst rename;
                for (auto& b : binders) {
                  if (any_value_mentions(inner, b)) {
                    std::string b2 = fresh_name(b);
                    rename[b] = var(b2);
                    b = b2;
                  }
                }
                if (!rename.empty()) body = subst_walk(body, rename);
                body = subst_walk(body, inner);
              }
              changed |= body != alt.body || binders != alt.binders;
              alts.push_back(CaseAlt{alt.con, std::move(binders), std::move(body)});
            }
            if (!changed) return e;
            return rebuild(*e, Expr::Case{scr, std::move(alts)});
          },
          [&](const Expr::Do& n) -> ExprPtr {
            // Substitution is defined on core terms; surface do-blocks only
            // occur pre-desugar where substitution is not used, but handle
            // the scopes anyway.
            Subst cur = s;
            bool changed = false;
            std::vector<DoStmt> stmts;
            for (const auto& st : n.stmts) {
              ExprPtr e2 = subst_walk(st.expr, cur);
              changed |= e2 != st.expr;
              stmts.push_back(DoStmt{st.binder, e2});
              if (st.binder) cur.erase(*st.binder);
            }
            if (!changed) return e;
            return rebuild(*e, Expr::Do{std::move(stmts)});
          },
          [&](const Expr::Let& n) -> ExprPtr {
            ExprPtr bound = subst_walk(n.bound, s);
            auto [v, body] = subst_under_binder(n.var, n.body, s);
            if (bound == n.bound && v == n.var && body == n.body) return e;
            return rebuild(*e, Expr::Let{v, bound, body});
          },
          [&](const auto&) -> ExprPtr {
            return map_children(e, [&](const ExprPtr& c) { return subst_walk(c, s); });
          },
      },
      e->node);
}

}  // namespace

ExprPtr substitute(const ExprPtr& e, const std::string& x, const ExprPtr& r) {
  return subst_walk(e, Subst{{x, r}});
}

ExprPtr substitute_parallel(const ExprPtr& e, const std::map<std::string, ExprPtr>& subst) {
  return subst_walk(e, subst);
}

// ---- purity ----------------------------------------------------------------

bool is_pure(const ExprPtr& e) {
  bool pure = true;
  std::visit(
      overloaded{
          [&](const Expr::ReadTVar&) { pure = false; },
          [&](const Expr::WriteTVar&) { pure = false; },
          [&](const Expr::Bind&) { pure = false; },
          [&](const Expr::Return&) { pure = false; },
          [&](const Expr::OrElse&) { pure = false; },
          [&](const Expr::Retry&) { pure = false; },
          [&](const Expr::Do&) { pure = false; },
          [&](const Expr::Var&) {},
          [&](const Expr::Con& n) {
            for (const auto& a : n.args) pure = pure && is_pure(a);
          },
          [&](const Expr::IntLit&) {},
          [&](const Expr::Lam& n) { pure = is_pure(n.body); },
          [&](const Expr::Exc&) {},
          [&](const Expr::App& n) { pure = is_pure(n.fn) && is_pure(n.arg); },
          [&](const Expr::FunRef&) {},
          [&](const Expr::Case& n) {
            pure = is_pure(n.scrutinee);
            for (const auto& alt : n.alts) pure = pure && is_pure(alt.body);
          },
          [&](const Expr::Prim& n) {
            for (const auto& a : n.args) pure = pure && is_pure(a);
          },
          [&](const Expr::Let& n) { pure = is_pure(n.bound) && is_pure(n.body); },
      },
      e->node);
  return pure;
}

// ---- equality ----------------------------------------------------------------

namespace {

// shared structural/alpha comparison; when names is null the comparison is
// purely structural.
struct NameEnv {
  std::vector<std::pair<std::string, std::string>> pairs;
  void push(const std::string& a, const std::string& b) { pairs.emplace_back(a, b); }
  void pop(size_t n) { pairs.resize(pairs.size() - n); }
  // Returns true when the var names match under the environment.
  bool match(const std::string& a, const std::string& b) const {
    for (auto it = pairs.rbegin(); it != pairs.rend(); ++it) {
      if (it->first == a || it->second == b) return it->first == a && it->second == b;
    }
    return a == b;
  }
};

bool equal_walk(const ExprPtr& a, const ExprPtr& b, NameEnv* names) {
  if (a == b && !names) return true;
  if (a->node.index() != b->node.index()) return false;
  return std::visit(
      overloaded{
          [&](const Expr::Var& x) {
            const auto& y = std::get<Expr::Var>(b->node);
            return names ? names->match(x.name, y.name) : x.name == y.name;
          },
          [&](const Expr::Con& x) {
            const auto& y = std::get<Expr::Con>(b->node);
            if (x.name != y.name || x.args.size() != y.args.size()) return false;
            for (size_t i = 0; i < x.args.size(); ++i)
              if (!equal_walk(x.args[i], y.args[i], names)) return false;
            return true;
          },
          [&](const Expr::IntLit& x) {
            return x.value == std::get<Expr::IntLit>(b->node).value;
          },
          [&](const Expr::Lam& x) {
            const auto& y = std::get<Expr::Lam>(b->node);
            if (!names) return x.param == y.param && equal_walk(x.body, y.body, names);
            names->push(x.param, y.param);
            bool r = equal_walk(x.body, y.body, names);
            names->pop(1);
            return r;
          },
          [&](const Expr::Exc& x) { return x.kind == std::get<Expr::Exc>(b->node).kind; },
          [&](const Expr::App& x) {
            const auto& y = std::get<Expr::App>(b->node);
            return equal_walk(x.fn, y.fn, names) && equal_walk(x.arg, y.arg, names);
          },
          [&](const Expr::FunRef& x) {
            return x.name == std::get<Expr::FunRef>(b->node).name;
          },
          [&](const Expr::Case& x) {
            const auto& y = std::get<Expr::Case>(b->node);
            if (!equal_walk(x.scrutinee, y.scrutinee, names)) return false;
            if (x.alts.size() != y.alts.size()) return false;
            for (size_t i = 0; i < x.alts.size(); ++i) {
              const auto& ax = x.alts[i];
              const auto& ay = y.alts[i];
              if (ax.con != ay.con || ax.binders.size() != ay.binders.size()) return false;
              if (!names) {
                if (ax.binders != ay.binders) return false;
                if (!equal_walk(ax.body, ay.body, names)) return false;
              } else {
                for (size_t j = 0; j < ax.binders.size(); ++j)
                  names->push(ax.binders[j], ay.binders[j]);
                bool r = equal_walk(ax.body, ay.body, names);
                names->pop(ax.binders.size());
                if (!r) return false;
              }
            }
            return true;
          },
          [&](const Expr::Prim& x) {
            const auto& y = std::get<Expr::Prim>(b->node);
            if (x.op != y.op || x.args.size() != y.args.size()) return false;
            for (size_t i = 0; i < x.args.size(); ++i)
              if (!equal_walk(x.args[i], y.args[i], names)) return false;
            return true;
          },
          [&](const Expr::ReadTVar& x) {
            return x.tvar == std::get<Expr::ReadTVar>(b->node).tvar;
          },
          [&](const Expr::WriteTVar& x) {
            const auto& y = std::get<Expr::WriteTVar>(b->node);
            return x.tvar == y.tvar && equal_walk(x.value, y.value, names);
          },
          [&](const Expr::Bind& x) {
            const auto& y = std::get<Expr::Bind>(b->node);
            return equal_walk(x.left, y.left, names) && equal_walk(x.right, y.right, names);
          },
          [&](const Expr::Return& x) {
            return equal_walk(x.value, std::get<Expr::Return>(b->node).value, names);
          },
          [&](const Expr::OrElse& x) {
            const auto& y = std::get<Expr::OrElse>(b->node);
            return equal_walk(x.left, y.left, names) && equal_walk(x.right, y.right, names);
          },
          [&](const Expr::Retry&) { return true; },
          [&](const Expr::Do& x) {
            const auto& y = std::get<Expr::Do>(b->node);
            if (x.stmts.size() != y.stmts.size()) return false;
            size_t pushed = 0;
            bool ok = true;
            for (size_t i = 0; i < x.stmts.size() && ok; ++i) {
              const auto& sx = x.stmts[i];
              const auto& sy = y.stmts[i];
              if (sx.binder.has_value() != sy.binder.has_value()) { ok = false; break; }
              ok = equal_walk(sx.expr, sy.expr, names);
              if (sx.binder) {
                if (!names) {
                  if (*sx.binder != *sy.binder) { ok = false; break; }
                } else {
                  names->push(*sx.binder, *sy.binder);
                  ++pushed;
                }
              }
            }
            if (names) names->pop(pushed);
            return ok;
          },
          [&](const Expr::Let& x) {
            const auto& y = std::get<Expr::Let>(b->node);
            if (!equal_walk(x.bound, y.bound, names)) return false;
            if (!names) return x.var == y.var && equal_walk(x.body, y.body, names);
            names->push(x.var, y.var);
            bool r = equal_walk(x.body, y.body, names);
            names->pop(1);
            return r;
          },
      },
      a->node);
}

}  // namespace

bool expr_equal(const ExprPtr& a, const ExprPtr& b) { return equal_walk(a, b, nullptr); }

bool alpha_equal(const ExprPtr& a, const ExprPtr& b) {
  NameEnv env;
  return equal_walk(a, b, &env);
}

size_t expr_size(const ExprPtr& e) {
  size_t n = 1;
  std::visit(
      overloaded{
          [&](const Expr::Con& x) { for (const auto& a : x.args) n += expr_size(a); },
          [&](const Expr::Lam& x) { n += expr_size(x.body); },
          [&](const Expr::App& x) { n += expr_size(x.fn) + expr_size(x.arg); },
          [&](const Expr::Case& x) {
            n += expr_size(x.scrutinee);
            for (const auto& alt : x.alts) n += expr_size(alt.body);
          },
          [&](const Expr::Prim& x) { for (const auto& a : x.args) n += expr_size(a); },
          [&](const Expr::WriteTVar& x) { n += expr_size(x.value); },
          [&](const Expr::Bind& x) { n += expr_size(x.left) + expr_size(x.right); },
          [&](const Expr::Return& x) { n += expr_size(x.value); },
          [&](const Expr::OrElse& x) { n += expr_size(x.left) + expr_size(x.right); },
          [&](const Expr::Do& x) { for (const auto& s : x.stmts) n += expr_size(s.expr); },
          [&](const Expr::Let& x) { n += expr_size(x.bound) + expr_size(x.body); },
          [&](const auto&) {},
      },
      e->node);
  return n;
}

// ---- contract equality and substitution -------------------------------------

namespace {

bool contract_equal_walk(const ContractPtr& a, const ContractPtr& b, NameEnv* names) {
  if (a->node.index() != b->node.index()) return false;
  return std::visit(
      overloaded{
          [&](const Contract::Pred& x) {
            const auto& y = std::get<Contract::Pred>(b->node);
            if (!names)
              return x.var == y.var && equal_walk(x.pred, y.pred, nullptr);
            names->push(x.var, y.var);
            bool r = equal_walk(x.pred, y.pred, names);
            names->pop(1);
            return r;
          },
          [&](const Contract::DepFun& x) {
            const auto& y = std::get<Contract::DepFun>(b->node);
            if (!contract_equal_walk(x.domain, y.domain, names)) return false;
            if (!names)
              return x.var == y.var && contract_equal_walk(x.codomain, y.codomain, names);
            names->push(x.var, y.var);
            bool r = contract_equal_walk(x.codomain, y.codomain, names);
            names->pop(1);
            return r;
          },
          [&](const Contract::Tuple& x) {
            const auto& y = std::get<Contract::Tuple>(b->node);
            if (x.elems.size() != y.elems.size()) return false;
            for (size_t i = 0; i < x.elems.size(); ++i)
              if (!contract_equal_walk(x.elems[i], y.elems[i], names)) return false;
            return true;
          },
          [&](const Contract::Any&) { return true; },
          [&](const Contract::StmOp& x) {
            const auto& y = std::get<Contract::StmOp>(b->node);
            if (!contract_equal_walk(x.pre, y.pre, names)) return false;
            if (!names) {
              return x.var == y.var && contract_equal_walk(x.post, y.post, names) &&
                     contract_equal_walk(x.result, y.result, names);
            }
            names->push(x.var, y.var);
            bool r = contract_equal_walk(x.post, y.post, names) &&
                     contract_equal_walk(x.result, y.result, names);
            names->pop(1);
            return r;
          },
      },
      a->node);
}

}  // namespace

bool contract_equal(const ContractPtr& a, const ContractPtr& b) {
  return contract_equal_walk(a, b, nullptr);
}

bool contract_alpha_equal(const ContractPtr& a, const ContractPtr& b) {
  NameEnv env;
  return contract_equal_walk(a, b, &env);
}

ContractPtr contract_substitute(const ContractPtr& c, const std::string& x, const ExprPtr& r) {
  return std::visit(
      overloaded{
          [&](const Contract::Pred& n) -> ContractPtr {
            if (n.var == x) return c;
            if (occurs_free(r, n.var)) {
              std::string v2 = fresh_name(n.var);
              ExprPtr p2 = substitute(n.pred, n.var, var(v2));
              return pred_contract(v2, substitute(p2, x, r));
            }
            return pred_contract(n.var, substitute(n.pred, x, r));
          },
          [&](const Contract::DepFun& n) -> ContractPtr {
            ContractPtr dom = contract_substitute(n.domain, x, r);
            if (n.var == x) return depfun_contract(n.var, dom, n.codomain);
            if (occurs_free(r, n.var)) {
              std::string v2 = fresh_name(n.var);
              ContractPtr cod = contract_substitute(n.codomain, n.var, var(v2));
              return depfun_contract(v2, dom, contract_substitute(cod, x, r));
            }
            return depfun_contract(n.var, dom, contract_substitute(n.codomain, x, r));
          },
          [&](const Contract::Tuple& n) -> ContractPtr {
            std::vector<ContractPtr> elems;
            elems.reserve(n.elems.size());
            for (const auto& el : n.elems) elems.push_back(contract_substitute(el, x, r));
            return tuple_contract(std::move(elems));
          },
          [&](const Contract::Any&) -> ContractPtr { return c; },
          [&](const Contract::StmOp& n) -> ContractPtr {
            ContractPtr pre = contract_substitute(n.pre, x, r);
            if (n.var == x) return stm_contract(n.var, pre, n.post, n.result);
            if (occurs_free(r, n.var)) {
              std::string v2 = fresh_name(n.var);
              ContractPtr post = contract_substitute(n.post, n.var, var(v2));
              ContractPtr res = contract_substitute(n.result, n.var, var(v2));
              return stm_contract(v2, pre, contract_substitute(post, x, r),
                                  contract_substitute(res, x, r));
            }
            return stm_contract(n.var, pre, contract_substitute(n.post, x, r),
                                contract_substitute(n.result, x, r));
          },
      },
      c->node);
}

}  // namespace stmcheck
