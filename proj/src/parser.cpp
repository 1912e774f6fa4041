#include "stmcheck/parser.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <optional>
#include <set>
#include <utility>
#include <variant>
#include <vector>

namespace stmcheck {

ParseError::ParseError(const std::string& msg, int line, int col)
    : SyntaxError(msg + " at line " + std::to_string(line) + ", column " +
                  std::to_string(col)),
      line_(line),
      col_(col) {}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

enum class Tok { LIdent, UIdent, Int, Sym, Newline, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  long long value = 0;
  size_t offset = 0;
  int line = 1;
  int col = 1;
};

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

// Longest first so maximal munch falls out of the scan order.
const char* const kSymbols[] = {">>=", "::", "->", "<-", "<>", "==", ">=",
                                "<=",  "&&", "||", "=",  ">",  "<",  ":",
                                "+",   "-",  "*",  "(",  ")",  "{",  "}",
                                "[",   "]",  ",",  ";",  "|",  "\\", "`",
                                "."};

const std::set<std::string> kReserved = {
    "tvar", "data",  "invariant", "contract", "transaction", "case",
    "of",   "do",    "let",       "in",       "return",      "retry",
    "readTVar", "writeTVar", "not", "orElse"};

// Newlines are tokens only at bracket depth 0; a declaration ends there.
std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  size_t i = 0;
  int line = 1, col = 1;
  int depth = 0;
  while (i < src.size()) {
    char c = src[i];
    if (c == '\r') {
      ++i;
      ++col;
      continue;
    }
    if (c == '\n') {
      if (depth == 0 && !out.empty() && out.back().kind != Tok::Newline)
        out.push_back(Token{Tok::Newline, "\n", 0, i, line, col});
      ++i;
      ++line;
      col = 1;
      continue;
    }
    if (c == ' ' || c == '\t') {
      ++i;
      ++col;
      continue;
    }
    if (c == '-' && i + 1 < src.size() && src[i + 1] == '-') {
      while (i < src.size() && src[i] != '\n') {
        ++i;
        ++col;
      }
      continue;
    }
    size_t off = i;
    int l = line, cl = col;
    if (static_cast<unsigned char>(c) == 0xCE && i + 1 < src.size() &&
        static_cast<unsigned char>(src[i + 1]) == 0xBB) {
      out.push_back(Token{Tok::Sym, "\\", 0, off, l, cl});
      i += 2;
      ++col;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      std::string digits = src.substr(i, j - i);
      long long v = 0;
      try {
        v = std::stoll(digits);
      } catch (const std::exception&) {
        throw ParseError("integer literal out of range", l, cl);
      }
      out.push_back(Token{Tok::Int, std::move(digits), v, off, l, cl});
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i + 1;
      while (j < src.size() && ident_char(src[j])) ++j;
      std::string name = src.substr(i, j - i);
      Tok k = std::isupper(static_cast<unsigned char>(c)) ? Tok::UIdent : Tok::LIdent;
      out.push_back(Token{k, std::move(name), 0, off, l, cl});
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    bool matched = false;
    for (const char* s : kSymbols) {
      size_t n = std::strlen(s);
      if (src.compare(i, n, s) == 0) {
        out.push_back(Token{Tok::Sym, s, 0, off, l, cl});
        if (*s == '(' || *s == '[' || *s == '{') ++depth;
        if ((*s == ')' || *s == ']' || *s == '}') && depth > 0) --depth;
        i += n;
        col += static_cast<int>(n);
        matched = true;
        break;
      }
    }
    if (!matched)
      throw ParseError(std::string("unexpected character '") + c + "'", line, col);
  }
  out.push_back(Token{Tok::End, "", 0, src.size(), line, col});
  return out;
}

// Rewrites free variables that name declared functions into function
// references. Binders shadow.
ExprPtr resolve_funs(const ExprPtr& e, const std::set<std::string>& funs,
                     const std::set<std::string>& bound) {
  auto rec = [&](const ExprPtr& c) { return resolve_funs(c, funs, bound); };
  return std::visit(
      overloaded{
          [&](const Expr::Var& n) -> ExprPtr {
            if (funs.count(n.name) && !bound.count(n.name)) return funref(n.name);
            return e;
          },
          [&](const Expr::Lam& n) -> ExprPtr {
            std::set<std::string> b = bound;
            b.insert(n.param);
            ExprPtr body = resolve_funs(n.body, funs, b);
            return body == n.body ? e : rebuild(*e, Expr::Lam{n.param, body});
          },
          [&](const Expr::Case& n) -> ExprPtr {
            ExprPtr s = rec(n.scrutinee);
            bool changed = s != n.scrutinee;
            std::vector<CaseAlt> alts = n.alts;
            for (auto& a : alts) {
              std::set<std::string> b = bound;
              for (const auto& x : a.binders) b.insert(x);
              ExprPtr body = resolve_funs(a.body, funs, b);
              if (body != a.body) {
                a.body = body;
                changed = true;
              }
            }
            if (!changed) return e;
            return rebuild(*e, Expr::Case{s, std::move(alts)});
          },
          [&](const Expr::Let& n) -> ExprPtr {
            ExprPtr bnd = rec(n.bound);
            std::set<std::string> b = bound;
            b.insert(n.var);
            ExprPtr body = resolve_funs(n.body, funs, b);
            if (bnd == n.bound && body == n.body) return e;
            return rebuild(*e, Expr::Let{n.var, bnd, body});
          },
          [&](const Expr::Do& n) -> ExprPtr {
            std::set<std::string> b = bound;
            std::vector<DoStmt> stmts = n.stmts;
            bool changed = false;
            for (auto& st : stmts) {
              ExprPtr ex = resolve_funs(st.expr, funs, b);
              if (ex != st.expr) {
                st.expr = ex;
                changed = true;
              }
              if (st.binder) b.insert(*st.binder);
            }
            if (!changed) return e;
            return rebuild(*e, Expr::Do{std::move(stmts)});
          },
          [&](const auto&) -> ExprPtr { return map_children(e, rec); },
      },
      e->node);
}

ContractPtr resolve_contract_funs(const ContractPtr& c, const std::set<std::string>& funs,
                                  std::set<std::string> bound) {
  return std::visit(
      overloaded{
          [&](const Contract::Pred& n) -> ContractPtr {
            std::set<std::string> b = bound;
            b.insert(n.var);
            return pred_contract(n.var, resolve_funs(n.pred, funs, b));
          },
          [&](const Contract::DepFun& n) -> ContractPtr {
            ContractPtr dom = resolve_contract_funs(n.domain, funs, bound);
            std::set<std::string> b = bound;
            b.insert(n.var);
            return depfun_contract(n.var, dom, resolve_contract_funs(n.codomain, funs, b));
          },
          [&](const Contract::Tuple& n) -> ContractPtr {
            std::vector<ContractPtr> elems;
            for (const auto& el : n.elems)
              elems.push_back(resolve_contract_funs(el, funs, bound));
            return tuple_contract(std::move(elems));
          },
          [&](const Contract::Any&) -> ContractPtr { return c; },
          [&](const Contract::StmOp& n) -> ContractPtr {
            ContractPtr pre = resolve_contract_funs(n.pre, funs, bound);
            std::set<std::string> b = bound;
            b.insert(n.var);
            return stm_contract(n.var, pre, resolve_contract_funs(n.post, funs, b),
                                resolve_contract_funs(n.result, funs, b));
          },
      },
      c->node);
}

// Pred whose predicate is the tuple-pattern sugar built by the parser and
// the pretty printer: case v of { (b1,..,bn) -> body } with v the binder.
bool tuple_pattern_pred(const Contract::Pred& p, std::vector<std::string>* binders) {
  const auto* cs = p.pred->as<Expr::Case>();
  if (!cs || cs->alts.size() != 1) return false;
  const auto* scr = cs->scrutinee->as<Expr::Var>();
  if (!scr || scr->name != p.var) return false;
  size_t arity = 0;
  if (!is_tuple_con_name(cs->alts[0].con, &arity) || arity < 2) return false;
  if (occurs_free(cs->alts[0].body, p.var)) return false;
  if (binders) *binders = cs->alts[0].binders;
  return true;
}

// Binds the pre-state pattern names inside post/result predicates of an STM
// contract: each predicate mentioning one gains a `case v of {(pat)->..}`
// wrapper. `shadowed` holds pattern names rebound by an enclosing binder.
ContractPtr bind_pre_pattern(const ContractPtr& c, const std::string& v,
                             const std::vector<std::string>& pat,
                             std::set<std::string> shadowed) {
  return std::visit(
      overloaded{
          [&](const Contract::Pred& n) -> ContractPtr {
            bool mentions = false;
            for (const auto& name : pat)
              if (name != n.var && !shadowed.count(name) &&
                  occurs_free(n.pred, name))
                mentions = true;
            if (!mentions) return c;
            std::vector<std::string> names = pat;
            for (auto& name : names)
              if (name == n.var || shadowed.count(name)) name = fresh_name(name);
            return pred_contract(
                n.var, case_of(var(v), {CaseAlt{tuple_con_name(pat.size()),
                                                std::move(names), n.pred}}));
          },
          [&](const Contract::DepFun& n) -> ContractPtr {
            ContractPtr dom = bind_pre_pattern(n.domain, v, pat, shadowed);
            std::set<std::string> sh = shadowed;
            sh.insert(n.var);
            return depfun_contract(n.var, dom,
                                   bind_pre_pattern(n.codomain, v, pat, sh));
          },
          [&](const Contract::Tuple& n) -> ContractPtr {
            std::vector<ContractPtr> elems;
            for (const auto& el : n.elems)
              elems.push_back(bind_pre_pattern(el, v, pat, shadowed));
            return tuple_contract(std::move(elems));
          },
          [&](const Contract::Any&) -> ContractPtr { return c; },
          [&](const Contract::StmOp& n) -> ContractPtr {
            ContractPtr pre = bind_pre_pattern(n.pre, v, pat, shadowed);
            std::set<std::string> sh = shadowed;
            sh.insert(n.var);
            return stm_contract(n.var, pre, bind_pre_pattern(n.post, v, pat, sh),
                                bind_pre_pattern(n.result, v, pat, sh));
          },
      },
      c->node);
}

// Parts of a function declaration collected across lines.
struct FunParts {
  std::optional<Type> signature;
  ContractPtr contract;
  std::optional<ParamContract> param_contract;
  ExprPtr body;
  bool defined = false;
  int order = -1;  // position of the defining line
  Token name_tok;
};

class Parser {
 public:
  Parser(std::vector<Token> toks, std::map<const Expr*, size_t>* locs)
      : toks_(std::move(toks)), locs_(locs) {}

  // ---- token helpers -----------------------------------------------------

  const Token& peek(size_t k = 0) const {
    size_t i = pos_ + k;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  Token eat() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
  bool at_sym(const char* s) const {
    return peek().kind == Tok::Sym && peek().text == s;
  }
  bool at_sym(size_t k, const char* s) const {
    return peek(k).kind == Tok::Sym && peek(k).text == s;
  }
  void expect_sym(const char* s) {
    if (!at_sym(s)) fail(std::string("expected '") + s + "'");
    eat();
  }
  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    std::string seen = t.kind == Tok::End ? "end of input"
                       : t.kind == Tok::Newline ? "end of line"
                                                : "'" + t.text + "'";
    throw ParseError(msg + ", found " + seen, t.line, t.col);
  }
  std::string expect_lident(const char* what) {
    if (peek().kind != Tok::LIdent) fail(std::string("expected ") + what);
    if (kReserved.count(peek().text))
      fail("'" + peek().text + "' is a reserved word");
    return eat().text;
  }
  std::string expect_uident(const char* what) {
    if (peek().kind != Tok::UIdent) fail(std::string("expected ") + what);
    return eat().text;
  }
  void expect_decl_end() {
    if (peek().kind == Tok::Newline) {
      eat();
      return;
    }
    if (peek().kind != Tok::End) fail("expected end of declaration");
  }
  bool done() const { return peek().kind == Tok::End; }
  void skip_newlines() {
    while (peek().kind == Tok::Newline) eat();
  }

  ExprPtr at(size_t off, ExprPtr e) {
    if (locs_) (*locs_)[e.get()] = off;
    return e;
  }

  // ---- expressions ---------------------------------------------------------

  ExprPtr parse_expr_top() { return parse_bind(); }

  ExprPtr parse_bind() {
    ExprPtr l = parse_orelse();
    while (at_sym(">>=")) {
      size_t off = eat().offset;
      l = at(off, bind(l, parse_orelse()));
    }
    return l;
  }

  ExprPtr parse_orelse() {
    ExprPtr l = parse_or();
    while (at_sym("`")) {
      size_t off = eat().offset;
      if (peek().kind != Tok::LIdent || peek().text != "orElse")
        fail("only `orElse` can be used as an infix function");
      eat();
      expect_sym("`");
      l = at(off, or_else(l, parse_or()));
    }
    return l;
  }

  ExprPtr parse_or() {
    ExprPtr l = parse_and();
    if (!at_sym("||")) return l;
    size_t off = eat().offset;
    return at(off, prim(PrimTag::Or, {l, parse_or()}));
  }

  ExprPtr parse_and() {
    ExprPtr l = parse_cmp();
    if (!at_sym("&&")) return l;
    size_t off = eat().offset;
    return at(off, prim(PrimTag::And, {l, parse_and()}));
  }

  std::optional<PrimTag> peek_cmp() const {
    if (peek().kind != Tok::Sym) return std::nullopt;
    const std::string& s = peek().text;
    if (s == "==") return PrimTag::Eq;
    if (s == ">") return PrimTag::Gt;
    if (s == ">=") return PrimTag::Ge;
    if (s == "<") return PrimTag::Lt;
    if (s == "<=") return PrimTag::Le;
    return std::nullopt;
  }

  ExprPtr parse_cmp() {
    ExprPtr l = parse_cons();
    auto op = peek_cmp();
    if (!op) return l;
    size_t off = eat().offset;
    ExprPtr r = parse_cons();
    if (peek_cmp()) fail("comparison operators do not chain");
    return at(off, prim(*op, {l, r}));
  }

  ExprPtr parse_cons() {
    ExprPtr l = parse_add();
    if (!at_sym(":")) return l;
    size_t off = eat().offset;
    return at(off, con(":", {l, parse_cons()}));
  }

  ExprPtr parse_add() {
    ExprPtr l = parse_mul();
    while (at_sym("+") || at_sym("-")) {
      PrimTag op = peek().text == "+" ? PrimTag::Add : PrimTag::Sub;
      size_t off = eat().offset;
      l = at(off, prim(op, {l, parse_mul()}));
    }
    return l;
  }

  ExprPtr parse_mul() {
    ExprPtr l = parse_app();
    while (at_sym("*")) {
      size_t off = eat().offset;
      l = at(off, prim(PrimTag::Mul, {l, parse_mul_operand()}));
    }
    return l;
  }

  ExprPtr parse_mul_operand() { return parse_app(); }

  bool starts_atom(const Token& t) const {
    switch (t.kind) {
      case Tok::Int:
        return true;
      case Tok::UIdent:
        return true;
      case Tok::LIdent:
        return !kReserved.count(t.text) || t.text == "retry";
      case Tok::Sym:
        return t.text == "(" || t.text == "[";
      default:
        return false;
    }
  }

  ExprPtr parse_app() {
    const Token& t = peek();
    if (t.kind == Tok::LIdent) {
      if (t.text == "readTVar") {
        size_t off = eat().offset;
        return apply_args(at(off, read_tvar(expect_lident("a TVar name"))));
      }
      if (t.text == "writeTVar") {
        size_t off = eat().offset;
        std::string n = expect_lident("a TVar name");
        return apply_args(at(off, write_tvar(n, parse_atom())));
      }
      if (t.text == "return") {
        size_t off = eat().offset;
        return apply_args(at(off, ret(parse_atom())));
      }
      if (t.text == "not") {
        size_t off = eat().offset;
        return apply_args(at(off, prim(PrimTag::Not, {parse_atom()})));
      }
    }
    if (t.kind == Tok::UIdent && t.text != "BAD" && t.text != "UNR") {
      size_t off = eat().offset;
      std::vector<ExprPtr> args;
      while (starts_atom(peek())) args.push_back(parse_atom());
      return at(off, con(t.text, std::move(args)));
    }
    return apply_args(parse_atom());
  }

  ExprPtr apply_args(ExprPtr head) {
    while (starts_atom(peek())) {
      size_t off = peek().offset;
      head = at(off, app(head, parse_atom()));
    }
    return head;
  }

  ExprPtr parse_atom() {
    const Token& t = peek();
    if (t.kind == Tok::Int) {
      eat();
      return at(t.offset, intlit(t.value));
    }
    if (t.kind == Tok::Sym && t.text == "-" && peek(1).kind == Tok::Int) {
      eat();
      Token n = eat();
      return at(t.offset, intlit(-n.value));
    }
    if (t.kind == Tok::LIdent) {
      if (t.text == "case") return parse_case();
      if (t.text == "do") return parse_do();
      if (t.text == "let") return parse_let();
      if (t.text == "retry") {
        eat();
        return at(t.offset, retry());
      }
      if (kReserved.count(t.text)) fail("unexpected keyword '" + t.text + "'");
      eat();
      return at(t.offset, var(t.text));
    }
    if (t.kind == Tok::UIdent) {
      eat();
      if (t.text == "BAD") return at(t.offset, bad());
      if (t.text == "UNR") return at(t.offset, unr());
      return at(t.offset, con(t.text, {}));
    }
    if (at_sym("\\")) return parse_lambda();
    if (at_sym("(")) return parse_paren();
    if (at_sym("[")) return parse_list();
    fail("expected an expression");
  }

  ExprPtr parse_lambda() {
    size_t off = eat().offset;  // backslash
    struct Param {
      std::vector<std::string> names;
      bool is_tuple;
    };
    std::vector<Param> params;
    while (true) {
      if (peek().kind == Tok::LIdent && !kReserved.count(peek().text)) {
        params.push_back({{eat().text}, false});
        continue;
      }
      if (at_sym("(")) {
        eat();
        std::vector<std::string> names{expect_lident("a binder")};
        while (at_sym(",")) {
          eat();
          names.push_back(expect_lident("a binder"));
        }
        expect_sym(")");
        params.push_back({std::move(names), true});
        continue;
      }
      break;
    }
    if (params.empty()) fail("expected a lambda binder");
    if (at_sym("->") || at_sym("."))
      eat();
    else
      fail("expected '->' after the lambda binders");
    ExprPtr body = parse_expr_top();
    for (size_t i = params.size(); i-- > 0;) {
      if (params[i].is_tuple && params[i].names.size() > 1)
        body = lam_tuple(params[i].names, body);
      else
        body = lam(params[i].names[0], body);
    }
    return at(off, body);
  }

  ExprPtr parse_paren() {
    size_t off = eat().offset;  // '('
    if (at_sym(")")) {
      eat();
      return at(off, unit_con());
    }
    std::vector<ExprPtr> elems{parse_expr_top()};
    while (at_sym(",")) {
      eat();
      elems.push_back(parse_expr_top());
    }
    expect_sym(")");
    if (elems.size() == 1) return elems[0];
    return at(off, tuple(std::move(elems)));
  }

  ExprPtr parse_list() {
    size_t off = eat().offset;  // '['
    if (at_sym("]")) {
      eat();
      return at(off, nil_con());
    }
    std::vector<ExprPtr> elems{parse_expr_top()};
    while (at_sym(",")) {
      eat();
      elems.push_back(parse_expr_top());
    }
    expect_sym("]");
    ExprPtr out = nil_con();
    for (size_t i = elems.size(); i-- > 0;) out = cons(elems[i], out);
    return at(off, out);
  }

  ExprPtr parse_case() {
    size_t off = eat().offset;  // 'case'
    ExprPtr scrutinee = parse_expr_top();
    if (peek().kind != Tok::LIdent || peek().text != "of") fail("expected 'of'");
    eat();
    expect_sym("{");
    std::vector<CaseAlt> alts{parse_alt()};
    while (at_sym(";")) {
      eat();
      alts.push_back(parse_alt());
    }
    expect_sym("}");
    return at(off, case_of(scrutinee, std::move(alts)));
  }

  CaseAlt parse_alt() {
    CaseAlt alt;
    if (at_sym("[") && at_sym(1, "]")) {
      eat();
      eat();
      alt.con = "[]";
    } else if (peek().kind == Tok::LIdent && at_sym(1, ":")) {
      alt.binders.push_back(expect_lident("a binder"));
      eat();
      alt.binders.push_back(expect_lident("a binder"));
      alt.con = ":";
    } else if (at_sym("(")) {
      eat();
      if (at_sym(")")) {
        eat();
        alt.con = "()";
      } else {
        std::vector<std::string> names{expect_lident("a binder")};
        if (at_sym(":")) {
          eat();
          names.push_back(expect_lident("a binder"));
          expect_sym(")");
          alt.con = ":";
          alt.binders = std::move(names);
        } else {
          while (at_sym(",")) {
            eat();
            names.push_back(expect_lident("a binder"));
          }
          expect_sym(")");
          if (names.size() < 2) fail("patterns do not nest");
          alt.con = tuple_con_name(names.size());
          alt.binders = std::move(names);
        }
      }
    } else if (peek().kind == Tok::UIdent) {
      alt.con = eat().text;
      while (peek().kind == Tok::LIdent && !kReserved.count(peek().text))
        alt.binders.push_back(eat().text);
    } else {
      fail("expected a case pattern");
    }
    expect_sym("->");
    alt.body = parse_expr_top();
    return alt;
  }

  ExprPtr parse_do() {
    size_t off = eat().offset;  // 'do'
    expect_sym("{");
    std::vector<DoStmt> stmts;
    while (true) {
      DoStmt st;
      if (peek().kind == Tok::LIdent && !kReserved.count(peek().text) &&
          at_sym(1, "<-")) {
        st.binder = eat().text;
        eat();
      }
      st.expr = parse_expr_top();
      stmts.push_back(std::move(st));
      if (at_sym(";")) {
        eat();
        continue;
      }
      break;
    }
    expect_sym("}");
    return at(off, do_block(std::move(stmts)));
  }

  ExprPtr parse_let() {
    size_t off = eat().offset;  // 'let'
    std::string name = expect_lident("a binder");
    expect_sym("=");
    ExprPtr bound = parse_expr_top();
    if (peek().kind != Tok::LIdent || peek().text != "in") fail("expected 'in'");
    eat();
    return at(off, let_in(name, bound, parse_expr_top()));
  }

  // ---- types ---------------------------------------------------------------

  Type parse_type_top() {
    Type t = parse_type_operand();
    if (at_sym("->")) {
      eat();
      return Type::fun(t, parse_type_top());
    }
    return t;
  }

  Type parse_type_operand() {
    if (peek().kind == Tok::UIdent && peek().text == "STM") {
      eat();
      return Type::stm(parse_type_operand());
    }
    if (peek().kind == Tok::UIdent && peek().text == "TVar") {
      eat();
      return Type::tvar(parse_type_operand());
    }
    return parse_type_atom();
  }

  Type parse_type_atom() {
    const Token& t = peek();
    if (t.kind == Tok::UIdent) {
      eat();
      if (t.text == "Int") return Type::integer();
      if (t.text == "Bool") return Type::boolean();
      if (t.text == "Bot") return Type::bottom();
      if (t.text == "STM" || t.text == "TVar")
        fail("'" + t.text + "' needs an argument; parenthesize the type");
      return Type::data(t.text);
    }
    if (at_sym("[")) {
      eat();
      Type elem = parse_type_top();
      expect_sym("]");
      return Type::list(elem);
    }
    if (at_sym("(")) {
      eat();
      if (at_sym(")")) {
        eat();
        return Type::unit();
      }
      std::vector<Type> elems{parse_type_top()};
      while (at_sym(",")) {
        eat();
        elems.push_back(parse_type_top());
      }
      expect_sym(")");
      if (elems.size() == 1) return elems[0];
      return Type::tuple(std::move(elems));
    }
    fail("expected a type");
  }

  // ---- contracts -------------------------------------------------------------

  ContractPtr parse_contract_top() {
    if (peek().kind == Tok::LIdent && at_sym(1, ":")) {
      std::string v = expect_lident("a binder");
      eat();  // ':'
      ContractPtr dom = parse_contract_operand();
      expect_sym("->");
      return depfun_contract(v, dom, parse_contract_top());
    }
    ContractPtr dom = parse_contract_operand();
    if (at_sym("->")) {
      eat();
      // {x | p} -> c binds x in c, so the codomain may depend on the argument
      // without spelling the binder twice.
      std::string v = fresh_name("v");
      if (const auto* pr = dom->as<Contract::Pred>()) v = pr->var;
      return depfun_contract(v, dom, parse_contract_top());
    }
    return dom;
  }

  ContractPtr parse_contract_operand() {
    if (at_sym("||")) return parse_stm_contract();
    if (at_sym("{")) return parse_pred_contract();
    if (peek().kind == Tok::UIdent && peek().text == "Any") {
      eat();
      return any_contract();
    }
    if (peek().kind == Tok::UIdent && peek().text == "Ok") {
      eat();
      return ok_contract();
    }
    if (at_sym("(")) {
      eat();
      std::vector<ContractPtr> elems{parse_contract_top()};
      while (at_sym(",")) {
        eat();
        elems.push_back(parse_contract_top());
      }
      expect_sym(")");
      if (elems.size() == 1) return elems[0];
      return tuple_contract(std::move(elems));
    }
    fail("expected a contract");
  }

  ContractPtr parse_pred_contract() {
    expect_sym("{");
    if (at_sym("(")) {
      eat();
      std::vector<std::string> names{expect_lident("a binder")};
      while (at_sym(",")) {
        eat();
        names.push_back(expect_lident("a binder"));
      }
      expect_sym(")");
      if (names.size() < 2) fail("predicate tuple patterns need two binders");
      expect_sym("|");
      ExprPtr p = parse_expr_top();
      expect_sym("}");
      std::string w = fresh_name("w");
      return pred_contract(
          w, case_of(var(w),
                     {CaseAlt{tuple_con_name(names.size()), std::move(names), p}}));
    }
    std::string v = expect_lident("a binder");
    expect_sym("|");
    ExprPtr p = parse_expr_top();
    expect_sym("}");
    return pred_contract(v, p);
  }

  // || pre <> post || result, with the optional explicit tuple binder. When
  // the pre contract is a predicate, its binders scope over post and result.
  ContractPtr parse_stm_contract() {
    expect_sym("||");
    std::optional<std::string> explicit_var;
    if (peek().kind == Tok::LIdent && at_sym(1, ":")) {
      explicit_var = expect_lident("a binder");
      eat();  // ':'
    }
    ContractPtr pre = parse_contract_top();
    expect_sym("<>");
    ContractPtr post = parse_contract_top();
    expect_sym("||");
    ContractPtr result = parse_contract_operand();
    if (explicit_var) return stm_contract(*explicit_var, pre, post, result);
    if (const auto* pr = pre->as<Contract::Pred>()) {
      std::vector<std::string> pat;
      if (tuple_pattern_pred(*pr, &pat)) {
        std::string v = fresh_name("v");
        return stm_contract(v, pre, bind_pre_pattern(post, v, pat, {}),
                            bind_pre_pattern(result, v, pat, {}));
      }
      return stm_contract(pr->var, pre, post, result);
    }
    return stm_contract(fresh_name("v"), pre, post, result);
  }

  // TVar[t,t'] -> ... -> | pre <> post | result
  ParamContract parse_param_contract() {
    ParamContract pc;
    while (peek().kind == Tok::UIdent && peek().text == "TVar" && at_sym(1, "[")) {
      eat();
      eat();
      std::string a = expect_lident("a placeholder");
      expect_sym(",");
      std::string b = expect_lident("a placeholder");
      expect_sym("]");
      pc.placeholders.emplace_back(a, b);
      expect_sym("->");
    }
    expect_sym("|");
    pc.pre = parse_expr_top();
    expect_sym("<>");
    pc.post = parse_expr_top();
    expect_sym("|");
    pc.result = parse_contract_top();
    return pc;
  }

  // ---- declarations ----------------------------------------------------------

  std::vector<Token> toks_;
  std::map<const Expr*, size_t>* locs_;
  size_t pos_ = 0;
};

// Whole-file parser: collects declarations, then assembles and normalizes the
// program (function-reference resolution, desugaring, case completion).
class ProgramParser : public Parser {
 public:
  using Parser::Parser;

  Program run() {
    skip_newlines();
    if (done()) fail("no declarations");
    while (!done()) {
      parse_decl();
      skip_newlines();
    }
    return assemble();
  }

 private:
  Program prog_;
  std::map<std::string, FunParts> funs_;
  std::vector<std::string> fun_order_;
  std::map<std::string, Token> decl_names_;
  int next_order_ = 0;

  FunParts& fun_entry(const std::string& name, const Token& tok) {
    auto it = funs_.find(name);
    if (it == funs_.end()) {
      it = funs_.emplace(name, FunParts{}).first;
      it->second.name_tok = tok;
      fun_order_.push_back(name);
    }
    return it->second;
  }

  void claim_name(const std::string& name, const Token& tok, const char* what) {
    auto it = decl_names_.find(name);
    if (it != decl_names_.end())
      throw ParseError("'" + name + "' is already declared", tok.line, tok.col);
    (void)what;
    decl_names_.emplace(name, tok);
  }

  void parse_decl() {
    const Token& t = peek();
    if (t.kind == Tok::LIdent) {
      if (t.text == "tvar") return parse_tvar_decl();
      if (t.text == "data") return parse_data_decl();
      if (t.text == "invariant") return parse_invariant_decl();
      if (t.text == "contract") return parse_contract_decl();
      if (t.text == "transaction") return parse_transaction_decl();
      return parse_function_decl();
    }
    fail("expected a declaration");
  }

  void parse_tvar_decl() {
    eat();
    Token name_tok = peek();
    std::string name = expect_lident("a TVar name");
    claim_name(name, name_tok, "tvar");
    expect_sym("::");
    TVarDecl d;
    d.name = name;
    d.content = parse_type_top();
    if (at_sym("=")) {
      eat();
      d.init = parse_expr_top();
    }
    expect_decl_end();
    prog_.tvars.push_back(std::move(d));
  }

  void parse_data_decl() {
    eat();
    Token name_tok = peek();
    std::string name = expect_uident("a datatype name");
    claim_name(name, name_tok, "data");
    expect_sym("=");
    DataDecl d;
    d.name = name;
    while (true) {
      CtorInfo c;
      c.name = expect_uident("a constructor name");
      c.datatype = name;
      if (peek().kind == Tok::Int) {
        c.arity = static_cast<int>(eat().value);
        c.fields_known = c.arity == 0;
      } else {
        while (starts_type_atom()) c.fields.push_back(parse_type_operand());
        c.arity = static_cast<int>(c.fields.size());
        c.fields_known = true;
      }
      d.ctors.push_back(std::move(c));
      if (at_sym("|")) {
        eat();
        continue;
      }
      break;
    }
    expect_decl_end();
    prog_.datatypes.push_back(std::move(d));
  }

  bool starts_type_atom() const {
    if (peek().kind == Tok::UIdent) return true;
    return at_sym("(") || at_sym("[");
  }

  void parse_invariant_decl() {
    Token kw = eat();
    if (prog_.invariant)
      throw ParseError("a second invariant declaration", kw.line, kw.col);
    prog_.invariant = expect_lident("a function name");
    expect_decl_end();
  }

  void parse_contract_decl() {
    eat();
    Token name_tok = peek();
    std::string name = expect_lident("a function name");
    expect_sym("::");
    FunParts& f = fun_entry(name, name_tok);
    if (f.contract || f.param_contract)
      throw ParseError("function '" + name + "' already has a contract",
                       name_tok.line, name_tok.col);
    if (peek().kind == Tok::UIdent && peek().text == "TVar" && at_sym(1, "["))
      f.param_contract = parse_param_contract();
    else
      f.contract = parse_contract_top();
    expect_decl_end();
  }

  void parse_function_decl() {
    Token name_tok = peek();
    std::string name = expect_lident("a declaration");
    FunParts& f = fun_entry(name, name_tok);
    if (at_sym("::")) {
      eat();
      if (f.signature)
        throw ParseError("function '" + name + "' already has a signature",
                         name_tok.line, name_tok.col);
      f.signature = parse_type_top();
      expect_decl_end();
      return;
    }
    if (f.defined)
      throw ParseError("function '" + name + "' is defined twice", name_tok.line,
                       name_tok.col);
    struct Param {
      std::vector<std::string> names;
      bool is_tuple;
    };
    std::vector<Param> params;
    while (!at_sym("=")) {
      if (peek().kind == Tok::LIdent && !kReserved.count(peek().text)) {
        params.push_back({{eat().text}, false});
        continue;
      }
      if (at_sym("(")) {
        eat();
        std::vector<std::string> names{expect_lident("a binder")};
        while (at_sym(",")) {
          eat();
          names.push_back(expect_lident("a binder"));
        }
        expect_sym(")");
        if (names.size() < 2) fail("parameter patterns need two binders");
        params.push_back({std::move(names), true});
        continue;
      }
      fail("expected a parameter or '='");
    }
    expect_sym("=");
    ExprPtr body = parse_expr_top();
    expect_decl_end();
    for (size_t i = params.size(); i-- > 0;) {
      if (params[i].is_tuple)
        body = lam_tuple(params[i].names, body);
      else
        body = lam(params[i].names[0], body);
    }
    f.defined = true;
    f.body = body;
    f.order = next_order_++;
    claim_name(name, name_tok, "function");
  }

  void parse_transaction_decl() {
    eat();
    Token name_tok = peek();
    std::string name = expect_lident("a transaction name");
    claim_name(name, name_tok, "transaction");
    TransactionDef tx;
    tx.name = name;
    if (at_sym("(")) {
      eat();
      if (!at_sym(")")) {
        while (true) {
          std::string p = expect_lident("a parameter name");
          for (const auto& fv : tx.free_vars)
            if (fv.first == p)
              fail("parameter '" + p + "' is repeated");
          expect_sym("::");
          tx.free_vars.emplace_back(p, parse_contract_top());
          if (at_sym(",")) {
            eat();
            continue;
          }
          break;
        }
      }
      expect_sym(")");
    }
    expect_sym("=");
    tx.body = parse_expr_top();
    expect_decl_end();
    prog_.transactions.push_back(std::move(tx));
  }

  Program assemble() {
    for (const auto& name : fun_order_) {
      const FunParts& f = funs_.at(name);
      if (!f.defined) {
        const char* has = f.signature ? "a signature" : "a contract";
        throw ParseError("function '" + name + "' has " + std::string(has) +
                             " but no definition",
                         f.name_tok.line, f.name_tok.col);
      }
    }
    std::vector<std::string> by_order = fun_order_;
    std::sort(by_order.begin(), by_order.end(), [&](const auto& a, const auto& b) {
      return funs_.at(a).order < funs_.at(b).order;
    });
    std::set<std::string> fun_names(by_order.begin(), by_order.end());
    for (const auto& tv : prog_.tvars)
      if (fun_names.count(tv.name))
        throw SyntaxError("'" + tv.name + "' is declared as both a TVar and a function");

    ConstructorTable ctors = prog_.ctors();
    auto normalize = [&](const ExprPtr& e, const std::set<std::string>& bound) {
      return complete_cases(desugar(resolve_funs(e, fun_names, bound)), ctors);
    };
    auto normalize_contract = [&](const ContractPtr& c) {
      ContractPtr r = resolve_contract_funs(c, fun_names, {});
      return normalize_preds(r, ctors);
    };

    for (const auto& name : by_order) {
      FunParts& f = funs_.at(name);
      FunctionDef def;
      def.name = name;
      def.signature = f.signature;
      def.body = normalize(f.body, {});
      if (f.contract) def.contract = normalize_contract(f.contract);
      if (f.param_contract) {
        ParamContract pc = *f.param_contract;
        std::set<std::string> holders;
        for (const auto& [a, b] : pc.placeholders) {
          holders.insert(a);
          holders.insert(b);
        }
        pc.pre = complete_cases(desugar(resolve_funs(pc.pre, fun_names, holders)), ctors);
        pc.post = complete_cases(desugar(resolve_funs(pc.post, fun_names, holders)), ctors);
        if (pc.result) pc.result = normalize_contract(pc.result);
        def.param_contract = std::move(pc);
      }
      prog_.functions.push_back(std::move(def));
    }

    for (auto& tv : prog_.tvars)
      if (tv.init) tv.init = normalize(tv.init, {});

    for (auto& tx : prog_.transactions) {
      std::set<std::string> params;
      for (auto& [p, c] : tx.free_vars) {
        params.insert(p);
        c = normalize_preds(resolve_contract_funs(c, fun_names, {}), ctors);
      }
      tx.body = normalize(tx.body, params);
    }

    if (prog_.invariant && !funs_.count(*prog_.invariant))
      throw SyntaxError("invariant names an unknown function: " + *prog_.invariant);
    return prog_;
  }

  // desugar/complete_cases over every predicate of a contract.
  ContractPtr normalize_preds(const ContractPtr& c, const ConstructorTable& ctors) {
    return std::visit(
        overloaded{
            [&](const Contract::Pred& n) -> ContractPtr {
              return pred_contract(n.var, complete_cases(desugar(n.pred), ctors));
            },
            [&](const Contract::DepFun& n) -> ContractPtr {
              return depfun_contract(n.var, normalize_preds(n.domain, ctors),
                                     normalize_preds(n.codomain, ctors));
            },
            [&](const Contract::Tuple& n) -> ContractPtr {
              std::vector<ContractPtr> elems;
              for (const auto& el : n.elems) elems.push_back(normalize_preds(el, ctors));
              return tuple_contract(std::move(elems));
            },
            [&](const Contract::Any&) -> ContractPtr { return c; },
            [&](const Contract::StmOp& n) -> ContractPtr {
              return stm_contract(n.var, normalize_preds(n.pre, ctors),
                                  normalize_preds(n.post, ctors),
                                  normalize_preds(n.result, ctors));
            },
        },
        c->node);
  }
};

std::vector<Token> lex_fragment(const std::string& text) {
  std::vector<Token> toks = lex(text);
  std::vector<Token> out;
  for (auto& t : toks)
    if (t.kind != Tok::Newline) out.push_back(std::move(t));
  return out;
}

}  // namespace

SourceUnit parse(const std::string& text, const std::string& path) {
  SourceUnit unit;
  unit.path = path;
  unit.text = text;
  ProgramParser p(lex(text), &unit.locations);
  unit.program = p.run();
  return unit;
}

ExprPtr parse_expr(const std::string& text, const std::set<std::string>& functions) {
  Parser p(lex_fragment(text), nullptr);
  ExprPtr e = p.parse_expr_top();
  if (!p.done()) p.fail("unexpected input after the expression");
  e = resolve_funs(e, functions, {});
  return complete_cases(desugar(e), ConstructorTable());
}

ContractPtr parse_contract(const std::string& text,
                           const std::set<std::string>& functions) {
  Parser p(lex_fragment(text), nullptr);
  ContractPtr c = p.parse_contract_top();
  if (!p.done()) p.fail("unexpected input after the contract");
  return resolve_contract_funs(c, functions, {});
}

Type parse_type(const std::string& text) {
  Parser p(lex_fragment(text), nullptr);
  Type t = p.parse_type_top();
  if (!p.done()) p.fail("unexpected input after the type");
  return t;
}

}  // namespace stmcheck
