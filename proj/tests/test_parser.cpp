#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "stmcheck/parser.hpp"
#include "stmcheck/pretty.hpp"
#include "testutil.hpp"

using namespace stmcheck;
using namespace testutil;

TEST_CASE("split sample parses to the declared shape") {
  SourceUnit u = parse(read_file(sample_path("fig1-split.stm")), "fig1-split.stm");
  const Program& p = u.program;
  REQUIRE(p.tvars.size() == 2);
  CHECK(p.tvars[0].name == "shTab");
  CHECK(p.tvars[0].content == Type::list(Type::integer()));
  CHECK(p.tvars[1].name == "shSum");
  CHECK(p.tvars[1].content == Type::integer());
  REQUIRE(p.invariant.has_value());
  CHECK(*p.invariant == "inv");
  REQUIRE(p.transactions.size() == 2);
  CHECK(p.transactions[0].name == "addTab");
  CHECK(p.transactions[1].name == "addSum");
  REQUIRE(p.transactions[0].free_vars.size() == 1);
  CHECK(p.transactions[0].free_vars[0].first == "n");
  CHECK(is_ok_contract(*p.transactions[0].free_vars[0].second));
  CHECK(p.find_function("sum") != nullptr);
  CHECK(p.find_function("inv") != nullptr);
  CHECK(p.tvar_index("shSum") == 1);
  CHECK(p.tvar_index("nope") == -1);
}

TEST_CASE("combined sample has one transaction calling both helpers") {
  SourceUnit u = parse(read_file(sample_path("fig1-combined.stm")), "fig1-combined.stm");
  REQUIRE(u.program.transactions.size() == 1);
  CHECK(u.program.transactions[0].name == "addBoth");
  CHECK(u.program.find_function("addTab") != nullptr);
  CHECK(u.program.find_function("addSum") != nullptr);
}

TEST_CASE("carriage returns are accepted") {
  std::string lf = read_file(sample_path("counter.stm"));
  std::string crlf;
  for (char c : lf) {
    if (c == '\n') crlf += '\r';
    crlf += c;
  }
  SourceUnit a = parse(lf, "lf");
  SourceUnit b = parse(crlf, "crlf");
  CHECK(a.program.transactions.size() == b.program.transactions.size());
  CHECK(a.program.tvars.size() == b.program.tvars.size());
}

TEST_CASE("empty input is rejected") {
  CHECK_THROWS_WITH_AS(parse("", "empty"), doctest::Contains("no declarations"),
                       ParseError);
  CHECK_THROWS_AS(parse("  \n\n  -- just a comment\n", "blank"), ParseError);
}

TEST_CASE("duplicate declarations are rejected") {
  CHECK_THROWS_WITH_AS(parse("tvar t :: Int = 0\ntvar t :: Int = 1\n", "dup"),
                       doctest::Contains("already declared"), ParseError);
  CHECK_THROWS_WITH_AS(
      parse("f :: Int -> Int\nf x = x\nf y = y\n", "dupf"),
      doctest::Contains("defined twice"), ParseError);
}

TEST_CASE("unknown invariant name is rejected") {
  CHECK_THROWS_WITH_AS(parse("tvar t :: Int = 0\ninvariant missing\n", "inv"),
                       doctest::Contains("unknown function"), SyntaxError);
}

TEST_CASE("errors carry a source position") {
  try {
    parse("tvar t :: Int = 0\ntvar u :: = 3\n", "pos");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.col() > 0);
  }
}

TEST_CASE("operator precedence") {
  ExprPtr e = parse_expr("1 + 2 * 3");
  const auto* add = e->as<Expr::Prim>();
  REQUIRE(add != nullptr);
  CHECK(add->op == PrimTag::Add);
  CHECK(add->args[1]->as<Expr::Prim>()->op == PrimTag::Mul);

  ExprPtr b = parse_expr("a && b || c");
  const auto* orp = b->as<Expr::Prim>();
  REQUIRE(orp != nullptr);
  CHECK(orp->op == PrimTag::Or);
  CHECK(orp->args[0]->as<Expr::Prim>()->op == PrimTag::And);

  ExprPtr c = parse_expr("x + 1 > x");
  CHECK(c->as<Expr::Prim>()->op == PrimTag::Gt);
}

TEST_CASE("atoms and literals") {
  CHECK(parse_expr("(-2)")->as<Expr::IntLit>()->value == -2);
  CHECK(parse_expr("42")->as<Expr::IntLit>()->value == 42);
  CHECK(parse_expr("()")->is<Expr::Con>());
  CHECK(alpha_equal(parse_expr("[1, 2]"), cons(intlit(1), cons(intlit(2), nil_con()))));
  CHECK(alpha_equal(parse_expr("1 : [2]"), parse_expr("[1, 2]")));

  ExprPtr pair = parse_expr("(1, 2)");
  const auto* con2 = pair->as<Expr::Con>();
  REQUIRE(con2 != nullptr);
  CHECK(con2->name == tuple_con_name(2));
  CHECK(con2->args.size() == 2);
  CHECK(parse_expr("(7)")->is<Expr::IntLit>());  // parens, not a 1-tuple

  ExprPtr triple = parse_expr("(1, 2, 3)");
  CHECK(triple->as<Expr::Con>()->name == tuple_con_name(3));
}

TEST_CASE("lambda and application") {
  ExprPtr e = parse_expr("\\x -> x + 1");
  const auto* l = e->as<Expr::Lam>();
  REQUIRE(l != nullptr);
  CHECK(l->param == "x");
  CHECK(alpha_equal(e, lam("y", prim(PrimTag::Add, {var("y"), intlit(1)}))));

  ExprPtr a = parse_expr("f x y", {"f"});
  const auto* outer = a->as<Expr::App>();
  REQUIRE(outer != nullptr);
  CHECK(outer->fn->as<Expr::App>()->fn->is<Expr::FunRef>());
}

TEST_CASE("do blocks desugar to binds") {
  ExprPtr e = parse_expr("do { x <- readTVar t; writeTVar t (x + 1) }");
  const auto* b = e->as<Expr::Bind>();
  REQUIRE(b != nullptr);
  CHECK(b->left->is<Expr::ReadTVar>());
  const auto* k = b->right->as<Expr::Lam>();
  REQUIRE(k != nullptr);
  CHECK(k->body->is<Expr::WriteTVar>());

  // A bare statement binds a throwaway name.
  ExprPtr seq = parse_expr("do { writeTVar t 1; return () }");
  CHECK(seq->is<Expr::Bind>());

  CHECK_THROWS_AS(parse_expr("do { x <- readTVar t }"), SyntaxError);
}

TEST_CASE("let desugars to a redex") {
  ExprPtr e = parse_expr("let x = 1 in x + x");
  const auto* a = e->as<Expr::App>();
  REQUIRE(a != nullptr);
  CHECK(a->fn->is<Expr::Lam>());
  CHECK(a->arg->as<Expr::IntLit>()->value == 1);
}

TEST_CASE("orElse is infix only with backticks") {
  ExprPtr e = parse_expr("retry `orElse` return 1");
  CHECK(e->is<Expr::OrElse>());
  CHECK_THROWS_AS(parse_expr("orElse retry retry"), SyntaxError);
}

TEST_CASE("missing case alternatives are completed with BAD") {
  ExprPtr e = parse_expr("case xs of { [] -> 0 }");
  const auto* c = e->as<Expr::Case>();
  REQUIRE(c != nullptr);
  REQUIRE(c->alts.size() == 2);
  CHECK(c->alts[0].con == "[]");
  CHECK(c->alts[1].con == ":");
  CHECK(c->alts[1].body->is<Expr::Exc>());
  CHECK(c->alts[1].body->as<Expr::Exc>()->kind == ExcKind::Bad);
}

TEST_CASE("exception literals parse") {
  CHECK(parse_expr("BAD")->as<Expr::Exc>()->kind == ExcKind::Bad);
  CHECK(parse_expr("UNR")->as<Expr::Exc>()->kind == ExcKind::Unr);
}

TEST_CASE("contract forms") {
  ContractPtr ok = parse_contract("Ok");
  CHECK(is_ok_contract(*ok));
  CHECK(parse_contract("Any")->is<Contract::Any>());

  ContractPtr p = parse_contract("{x | x > 0}");
  const auto* pr = p->as<Contract::Pred>();
  REQUIRE(pr != nullptr);
  CHECK(pr->var == "x");

  // The predicate binder scopes over the codomain of an arrow.
  ContractPtr f = parse_contract("{x | x > 0} -> {r | r > x}");
  const auto* df = f->as<Contract::DepFun>();
  REQUIRE(df != nullptr);
  CHECK(df->var == "x");
  const auto* cod = df->codomain->as<Contract::Pred>();
  REQUIRE(cod != nullptr);
  CHECK(occurs_free(cod->pred, "x"));

  ContractPtr t = parse_contract("({a | a > 0}, Ok)");
  REQUIRE(t->is<Contract::Tuple>());
  CHECK(t->as<Contract::Tuple>()->elems.size() == 2);

  ContractPtr s = parse_contract("|| {t | t > 0} <> {t | t > 0} || Any");
  const auto* st = s->as<Contract::StmOp>();
  REQUIRE(st != nullptr);
  CHECK(st->pre->is<Contract::Pred>());
  CHECK(st->result->is<Contract::Any>());

  ContractPtr dep = parse_contract("n : Ok -> {r | r > n}");
  const auto* dn = dep->as<Contract::DepFun>();
  REQUIRE(dn != nullptr);
  CHECK(dn->var == "n");
}

TEST_CASE("TVar parameter contracts attach placeholder pairs") {
  SourceUnit u = parse(read_file(sample_path("tvar-param.stm")), "tvar-param.stm");
  const FunctionDef* f = u.program.find_function("f");
  REQUIRE(f != nullptr);
  REQUIRE(f->param_contract.has_value());
  REQUIRE(f->param_contract->placeholders.size() == 1);
  CHECK(f->param_contract->placeholders[0].first == "t");
  CHECK(f->param_contract->placeholders[0].second == "t'");
  CHECK(f->param_contract->result->is<Contract::Any>());
}

TEST_CASE("pretty output parses back to the same term") {
  std::vector<std::string> sources = {
      "\\x -> case x of { [] -> 0; (h : t) -> h + 1 }",
      "(\\x -> x + 1) 5",
      "case b of { True -> (1, [2]); False -> (0, []) }",
      "\\f -> \\x -> f (f x)",
      "readTVar t >>= \\x -> writeTVar t (x + 1)",
      "return (1, (2, 3))",
      "not (a && b) || c",
      "case BAD of { True -> 1; False -> UNR }",
  };
  for (const std::string& s : sources) {
    CAPTURE(s);
    ExprPtr e = parse_expr(s);
    ExprPtr back = parse_expr(pretty_expr(e));
    CHECK(alpha_equal(e, back));
  }
}

TEST_CASE("generated terms survive a pretty parse round trip") {
  Gen g(2026);
  int checked = 0;
  for (int i = 0; i < 300; ++i) {
    ExprPtr e = gen_closed_pure(g, 3, 0.05);
    std::string text = pretty_expr(e);
    CAPTURE(text);
    ExprPtr back = parse_expr(text);
    CHECK(alpha_equal(e, back));
    ++checked;
  }
  CHECK(checked == 300);
}

TEST_CASE("contract pretty output parses back") {
  Gen g(7);
  for (int i = 0; i < 200; ++i) {
    Type t = gen_pure_type(g, 1);
    ContractPtr c = gen_contract(g, t, 2);
    std::string text = pretty_contract(c);
    CAPTURE(text);
    ContractPtr back = parse_contract(text);
    CHECK(contract_alpha_equal(c, back));
  }
}
