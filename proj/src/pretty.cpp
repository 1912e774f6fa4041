#include "stmcheck/pretty.hpp"

#include <algorithm>
#include <variant>

namespace stmcheck {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Binding tightness. A node is parenthesized when its own level is below the
// context's requirement.
enum Level {
  kLow = 0,      // lambda, case, do, let bodies
  kBind = 1,     // >>=
  kOrElse = 2,   // `orElse`
  kOr = 3,       // ||
  kAnd = 4,      // &&
  kCompare = 5,  // == > >= < <=
  kCons = 6,     // :
  kAddSub = 7,   // + -
  kMul = 8,      // *
  kApp = 9,      // juxtaposition
  kAtom = 10,
};

int prim_level(PrimTag op) {
  switch (op) {
    case PrimTag::Or: return kOr;
    case PrimTag::And: return kAnd;
    case PrimTag::Eq:
    case PrimTag::Gt:
    case PrimTag::Ge:
    case PrimTag::Lt:
    case PrimTag::Le: return kCompare;
    case PrimTag::Add:
    case PrimTag::Sub: return kAddSub;
    case PrimTag::Mul: return kMul;
    case PrimTag::Not: return kApp;
  }
  return kAtom;
}

std::string wrap(bool parens, std::string s) {
  return parens ? "(" + std::move(s) + ")" : std::move(s);
}

// Detects \x -> case x of { (n1,..,nk) -> body } with x unused in body, the
// form lam_tuple builds; returns the pattern names.
const Expr::Case* tuple_lambda_case(const Expr::Lam& l, std::vector<std::string>* names) {
  const auto* cs = l.body->as<Expr::Case>();
  if (!cs || cs->alts.size() != 1) return nullptr;
  const auto* scr = cs->scrutinee->as<Expr::Var>();
  if (!scr || scr->name != l.param) return nullptr;
  size_t arity = 0;
  if (!is_tuple_con_name(cs->alts[0].con, &arity) || arity < 2) return nullptr;
  if (occurs_free(cs->alts[0].body, l.param)) return nullptr;
  if (names) *names = cs->alts[0].binders;
  return cs;
}

std::string pattern_string(const CaseAlt& alt) {
  size_t arity = 0;
  if (alt.con == ":" && alt.binders.size() == 2)
    return "(" + alt.binders[0] + " : " + alt.binders[1] + ")";
  if (is_tuple_con_name(alt.con, &arity)) {
    std::string s = "(";
    for (size_t i = 0; i < alt.binders.size(); ++i) {
      if (i) s += ", ";
      s += alt.binders[i];
    }
    return s + ")";
  }
  std::string s = alt.con;
  for (const auto& b : alt.binders) s += " " + b;
  return s;
}

std::string pp(const ExprPtr& e, int ctx);

std::string pp_list_or_null(const Expr::Con& n, const ExprPtr& e, int ctx) {
  // Render fully literal lists as [a, b, c].
  std::vector<ExprPtr> elems;
  const Expr* cur = e.get();
  while (true) {
    const auto* c = cur->as<Expr::Con>();
    if (!c) return "";
    if (c->name == "[]" && c->args.empty()) break;
    if (c->name == ":" && c->args.size() == 2) {
      elems.push_back(c->args[0]);
      cur = c->args[1].get();
      continue;
    }
    return "";
  }
  (void)n;
  std::string s = "[";
  for (size_t i = 0; i < elems.size(); ++i) {
    if (i) s += ", ";
    s += pp(elems[i], kLow);
  }
  (void)ctx;
  return s + "]";
}

std::string pp(const ExprPtr& e, int ctx) {
  return std::visit(
      overloaded{
          [&](const Expr::Var& n) { return n.name; },
          [&](const Expr::IntLit& n) {
            std::string s = std::to_string(n.value);
            return n.value < 0 ? wrap(ctx > kLow, std::move(s)) : s;
          },
          [&](const Expr::Con& n) -> std::string {
            if (n.name == ":" && n.args.size() == 2) {
              std::string lit = pp_list_or_null(n, e, ctx);
              if (!lit.empty()) return lit;
              return wrap(ctx > kCons,
                          pp(n.args[0], kCons + 1) + " : " + pp(n.args[1], kCons));
            }
            size_t arity = 0;
            if (is_tuple_con_name(n.name, &arity)) {
              std::string s = "(";
              for (size_t i = 0; i < n.args.size(); ++i) {
                if (i) s += ", ";
                s += pp(n.args[i], kLow);
              }
              return s + ")";
            }
            if (n.name == "[]") return "[]";
            if (n.args.empty()) return n.name;
            std::string s = n.name;
            for (const auto& a : n.args) s += " " + pp(a, kApp + 1);
            return wrap(ctx > kApp, std::move(s));
          },
          [&](const Expr::Lam& n) -> std::string {
            std::vector<std::string> names;
            if (tuple_lambda_case(n, &names)) {
              const auto* cs = n.body->as<Expr::Case>();
              std::string pat = "(";
              for (size_t i = 0; i < names.size(); ++i) {
                if (i) pat += ", ";
                pat += names[i];
              }
              pat += ")";
              return wrap(ctx > kLow, "\\" + pat + " -> " + pp(cs->alts[0].body, kLow));
            }
            return wrap(ctx > kLow, "\\" + n.param + " -> " + pp(n.body, kLow));
          },
          [&](const Expr::Exc& n) -> std::string {
            return n.kind == ExcKind::Bad ? "BAD" : "UNR";
          },
          [&](const Expr::App& n) -> std::string {
            return wrap(ctx > kApp, pp(n.fn, kApp) + " " + pp(n.arg, kApp + 1));
          },
          [&](const Expr::FunRef& n) { return n.name; },
          [&](const Expr::Case& n) -> std::string {
            std::string s = "case " + pp(n.scrutinee, kBind) + " of { ";
            for (size_t i = 0; i < n.alts.size(); ++i) {
              if (i) s += "; ";
              s += pattern_string(n.alts[i]) + " -> " + pp(n.alts[i].body, kLow);
            }
            s += " }";
            return wrap(ctx > kLow, std::move(s));
          },
          [&](const Expr::Prim& n) -> std::string {
            if (n.op == PrimTag::Not)
              return wrap(ctx > kApp, std::string("not ") + pp(n.args[0], kApp + 1));
            int lv = prim_level(n.op);
            bool left_assoc = lv == kAddSub || lv == kMul;
            bool right_assoc = lv == kOr || lv == kAnd || lv == kCons;
            int lctx = left_assoc ? lv : lv + 1;
            int rctx = right_assoc ? lv : lv + 1;
            if (lv == kCompare) { lctx = lv + 1; rctx = lv + 1; }
            return wrap(ctx > lv, pp(n.args[0], lctx) + " " + prim_name(n.op) + " " +
                                      pp(n.args[1], rctx));
          },
          [&](const Expr::ReadTVar& n) -> std::string {
            return wrap(ctx > kApp, "readTVar " + n.tvar);
          },
          [&](const Expr::WriteTVar& n) -> std::string {
            return wrap(ctx > kApp, "writeTVar " + n.tvar + " " + pp(n.value, kApp + 1));
          },
          [&](const Expr::Bind& n) -> std::string {
            return wrap(ctx > kBind,
                        pp(n.left, kBind + 1) + " >>= " + pp(n.right, kBind + 1));
          },
          [&](const Expr::Return& n) -> std::string {
            return wrap(ctx > kApp, "return " + pp(n.value, kApp + 1));
          },
          [&](const Expr::OrElse& n) -> std::string {
            return wrap(ctx > kOrElse, pp(n.left, kOrElse + 1) + " `orElse` " +
                                           pp(n.right, kOrElse + 1));
          },
          [&](const Expr::Retry&) -> std::string { return "retry"; },
          [&](const Expr::Do& n) -> std::string {
            std::string s = "do { ";
            for (size_t i = 0; i < n.stmts.size(); ++i) {
              if (i) s += "; ";
              if (n.stmts[i].binder) s += *n.stmts[i].binder + " <- ";
              s += pp(n.stmts[i].expr, kLow);
            }
            return wrap(ctx > kLow, s + " }");
          },
          [&](const Expr::Let& n) -> std::string {
            return wrap(ctx > kLow, "let " + n.var + " = " + pp(n.bound, kLow) + " in " +
                                        pp(n.body, kLow));
          },
      },
      e->node);
}

}  // namespace

std::string pretty_expr(const ExprPtr& e) { return pp(e, kLow); }

std::string pretty_expr_do(const ExprPtr& e) {
  // Collect a >>= chain with lambda continuations.
  std::vector<DoStmt> stmts;
  ExprPtr cur = e;
  while (const auto* b = cur->as<Expr::Bind>()) {
    const auto* l = b->right->as<Expr::Lam>();
    if (!l) break;
    bool used = occurs_free(l->body, l->param);
    stmts.push_back(DoStmt{used ? std::optional<std::string>(l->param) : std::nullopt,
                           b->left});
    cur = l->body;
  }
  if (stmts.empty()) return pretty_expr(e);
  std::string s = "do { ";
  for (const auto& st : stmts) {
    if (st.binder) s += *st.binder + " <- ";
    s += pp(st.expr, kLow) + "; ";
  }
  return s + pp(cur, kLow) + " }";
}

bool contract_mentions(const ContractPtr& c, const std::string& name) {
  return std::visit(
      overloaded{
          [&](const Contract::Pred& n) {
            return n.var != name && occurs_free(n.pred, name);
          },
          [&](const Contract::DepFun& n) {
            if (contract_mentions(n.domain, name)) return true;
            return n.var != name && contract_mentions(n.codomain, name);
          },
          [&](const Contract::Tuple& n) {
            return std::any_of(n.elems.begin(), n.elems.end(), [&](const ContractPtr& el) {
              return contract_mentions(el, name);
            });
          },
          [&](const Contract::Any&) { return false; },
          [&](const Contract::StmOp& n) {
            if (contract_mentions(n.pre, name)) return true;
            return n.var != name && (contract_mentions(n.post, name) ||
                                     contract_mentions(n.result, name));
          },
      },
      c->node);
}

namespace {

// {x | p} or {(a,b) | p} when the predicate is the tuple-pattern sugar form.
std::string pretty_pred(const Contract::Pred& p) {
  if (const auto* cs = p.pred->as<Expr::Case>()) {
    size_t arity = 0;
    const auto* scrut = cs->scrutinee->as<Expr::Var>();
    if (scrut && scrut->name == p.var && cs->alts.size() == 1 &&
        is_tuple_con_name(cs->alts[0].con, &arity) &&
        !occurs_free(cs->alts[0].body, p.var)) {
      std::string s = "{(";
      for (size_t i = 0; i < cs->alts[0].binders.size(); ++i) {
        if (i) s += ", ";
        s += cs->alts[0].binders[i];
      }
      return s + ") | " + pretty_expr(cs->alts[0].body) + "}";
    }
  }
  return "{" + p.var + " | " + pretty_expr(p.pred) + "}";
}

// Strips the `case v of { (ns...) -> p }` wrapper that binds the STM input
// tuple inside post/result predicates, if every mention of v has that shape.
ContractPtr strip_input_binding(const ContractPtr& c, const std::string& v, bool* ok);

ExprPtr strip_pred_binding(const ExprPtr& p, const std::string& v, bool* ok) {
  if (const auto* cs = p->as<Expr::Case>()) {
    const auto* scrut = cs->scrutinee->as<Expr::Var>();
    size_t arity = 0;
    if (scrut && scrut->name == v && cs->alts.size() == 1 &&
        is_tuple_con_name(cs->alts[0].con, &arity)) {
      ExprPtr body = cs->alts[0].body;
      if (!occurs_free(body, v)) return body;
    }
  }
  if (occurs_free(p, v)) *ok = false;
  return p;
}

ContractPtr strip_input_binding(const ContractPtr& c, const std::string& v, bool* ok) {
  return std::visit(
      overloaded{
          [&](const Contract::Pred& n) -> ContractPtr {
            if (n.var == v) return c;
            return pred_contract(n.var, strip_pred_binding(n.pred, v, ok));
          },
          [&](const Contract::DepFun& n) -> ContractPtr {
            ContractPtr dom = strip_input_binding(n.domain, v, ok);
            ContractPtr cod = n.var == v ? n.codomain : strip_input_binding(n.codomain, v, ok);
            return depfun_contract(n.var, dom, cod);
          },
          [&](const Contract::Tuple& n) -> ContractPtr {
            std::vector<ContractPtr> elems;
            for (const auto& el : n.elems) elems.push_back(strip_input_binding(el, v, ok));
            return tuple_contract(std::move(elems));
          },
          [&](const Contract::Any&) -> ContractPtr { return c; },
          [&](const Contract::StmOp& n) -> ContractPtr {
            ContractPtr pre = strip_input_binding(n.pre, v, ok);
            if (n.var == v) return stm_contract(n.var, pre, n.post, n.result);
            return stm_contract(n.var, pre, strip_input_binding(n.post, v, ok),
                                strip_input_binding(n.result, v, ok));
          },
      },
      c->node);
}

std::string pc(const ContractPtr& c, bool arrow_operand) {
  return std::visit(
      overloaded{
          [&](const Contract::Pred& n) -> std::string {
            if (is_ok_contract(*c)) return "Ok";
            return pretty_pred(n);
          },
          [&](const Contract::DepFun& n) -> std::string {
            std::string dom = pc(n.domain, true);
            std::string cod = pc(n.codomain, false);
            std::string s = contract_mentions(n.codomain, n.var)
                                ? n.var + ":" + dom + " -> " + cod
                                : dom + " -> " + cod;
            return arrow_operand ? "(" + s + ")" : s;
          },
          [&](const Contract::Tuple& n) -> std::string {
            std::string s = "(";
            for (size_t i = 0; i < n.elems.size(); ++i) {
              if (i) s += ", ";
              s += pc(n.elems[i], false);
            }
            return s + ")";
          },
          [&](const Contract::Any&) -> std::string { return "Any"; },
          [&](const Contract::StmOp& n) -> std::string {
            // A pre of the shape {v | p} with v the tuple name shows its
            // binder, so post/result may mention v directly.
            if (const auto* pr = n.pre->as<Contract::Pred>()) {
              const auto* cs = pr->pred->as<Expr::Case>();
              const auto* scrut = cs ? cs->scrutinee->as<Expr::Var>() : nullptr;
              bool tuple_sugar = scrut && scrut->name == pr->var &&
                                 cs->alts.size() == 1 &&
                                 is_tuple_con_name(cs->alts[0].con) &&
                                 !occurs_free(cs->alts[0].body, pr->var);
              if (pr->var == n.var && !tuple_sugar)
                return "|| " + pc(n.pre, false) + " <> " + pc(n.post, false) +
                       " || " + pc(n.result, true);
            }
            bool strippable = true;
            ContractPtr post = strip_input_binding(n.post, n.var, &strippable);
            ContractPtr result = strip_input_binding(n.result, n.var, &strippable);
            std::string s;
            if (strippable) {
              s = "|| " + pc(n.pre, false) + " <> " + pc(post, false) + " || " +
                  pc(result, true);
            } else {
              s = "|| " + n.var + ":" + pc(n.pre, false) + " <> " + pc(n.post, false) +
                  " || " + pc(n.result, true);
            }
            return s;
          },
      },
      c->node);
}

}  // namespace

std::string pretty_contract(const ContractPtr& c) { return pc(c, false); }

std::string pretty_type(const Type& t) { return t.to_string(); }

}  // namespace stmcheck
