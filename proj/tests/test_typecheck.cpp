#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "stmcheck/parser.hpp"
#include "stmcheck/pretty.hpp"
#include "stmcheck/typecheck.hpp"
#include "testutil.hpp"

using namespace stmcheck;
using namespace testutil;

namespace {

CheckedProgram check_text(const std::string& text) {
  return check_program(parse(text, "<test>").program);
}

}  // namespace

TEST_CASE("every node of a checked program is annotated") {
  CheckedProgram cp = check_text(read_file(sample_path("fig1-split.stm")));
  const FunctionDef* sum = cp.program.find_function("sum");
  REQUIRE(sum != nullptr);
  CHECK(type_of(sum->body) == Type::fun(Type::list(Type::integer()), Type::integer()));
  const FunctionDef* inv = cp.program.find_function("inv");
  REQUIRE(inv != nullptr);
  CHECK(type_of(inv->body) ==
        Type::fun(Type::tuple({Type::list(Type::integer()), Type::integer()}),
                  Type::boolean()));
}

TEST_CASE("transactions record parameter and result types") {
  CheckedProgram cp = check_text(read_file(sample_path("fig1-split.stm")));
  REQUIRE(cp.transaction_params.count("addTab") == 1);
  REQUIRE(cp.transaction_params.at("addTab").size() == 1);
  CHECK(cp.transaction_params.at("addTab")[0] == Type::integer());
  CHECK(cp.transaction_results.at("addTab") == Type::unit());
}

TEST_CASE("STM primitives get the standard types") {
  CheckedProgram cp = check_text(
      "tvar t :: Int = 0\n"
      "probe :: STM Int\n"
      "probe = readTVar t >>= \\x -> writeTVar t (x + 1) >>= \\u -> return x\n");
  const FunctionDef* f = cp.program.find_function("probe");
  REQUIRE(f != nullptr);
  CHECK(type_of(f->body) == Type::stm(Type::integer()));
  CHECK(is_stm_typed(f->body));

  const auto* b = f->body->as<Expr::Bind>();
  REQUIRE(b != nullptr);
  CHECK(type_of(b->left) == Type::stm(Type::integer()));
  CHECK_FALSE(is_stm_typed(b->right));  // continuation is a function
}

TEST_CASE("branches may mix STM values with retry") {
  CheckedProgram cp = check_text(
      "tvar t :: Int = 0\n"
      "go :: Bool -> STM Int\n"
      "go b = case b of { True -> readTVar t; False -> retry }\n");
  CHECK(type_of(cp.program.find_function("go")->body) ==
        Type::fun(Type::boolean(), Type::stm(Type::integer())));
}

TEST_CASE("exceptions take their type from context") {
  CheckedProgram cp = check_text(
      "f :: Int -> Int\n"
      "f x = case x > 0 of { True -> x; False -> BAD }\n");
  CHECK(type_of(cp.program.find_function("f")->body) ==
        Type::fun(Type::integer(), Type::integer()));
}

TEST_CASE("impure payloads are rejected") {
  CHECK_THROWS_WITH_AS(check_text("tvar t :: Int = 0\n"
                                  "f :: STM ()\n"
                                  "f = writeTVar t (readTVar t)\n"),
                       doctest::Contains("must be pure"), TypeError);
  CHECK_THROWS_WITH_AS(check_text("tvar t :: Int = 0\n"
                                  "f :: STM (STM Int)\n"
                                  "f = return (readTVar t)\n"),
                       doctest::Contains("must be pure"), TypeError);
}

TEST_CASE("type mismatches are reported") {
  CHECK_THROWS_WITH_AS(check_text("f :: Int -> Int\nf x = x && True\n"),
                       doctest::Contains("type mismatch"), TypeError);
  CHECK_THROWS_AS(check_text("f :: Int\nf = 1 + True\n"), TypeError);
  CHECK_THROWS_AS(check_text("f :: [Int]\nf = 1 : 2\n"), TypeError);
}

TEST_CASE("signatures are mandatory") {
  CHECK_THROWS_WITH_AS(check_text("f = 1\n"), doctest::Contains("signature"),
                       TypeError);
}

TEST_CASE("unknown identifiers are reported") {
  CHECK_THROWS_AS(check_text("f :: Int\nf = mystery\n"), TypeError);
}

TEST_CASE("the invariant must be a predicate over the TVar tuple") {
  CHECK_THROWS_WITH_AS(check_text("tvar t :: Int = 0\n"
                                  "inv :: Int -> Int\n"
                                  "inv t = t\n"
                                  "invariant inv\n"),
                       doctest::Contains("must have type"), TypeError);
  // Correctly typed form passes.
  CheckedProgram cp = check_text(
      "tvar t :: Int = 0\n"
      "inv :: Int -> Bool\n"
      "inv t = t > 0\n"
      "invariant inv\n");
  CHECK(cp.program.invariant.has_value());
}

TEST_CASE("pure helpers may reuse TVar names as binders") {
  // The invariant destructures the TVar tuple with binders named after the
  // TVars themselves; that is fine in pure code.
  CheckedProgram cp = check_text(read_file(sample_path("fig1-split.stm")));
  CHECK(cp.program.find_function("inv") != nullptr);
}

TEST_CASE("STM code may not shadow TVar names") {
  CHECK_THROWS_WITH_AS(check_text("tvar t :: Int = 0\n"
                                  "f :: Int -> STM ()\n"
                                  "f x = (\\t -> writeTVar t x) t\n"),
                       doctest::Contains("binder"), TypeError);
}

TEST_CASE("TVars cannot be stored or returned") {
  CHECK_THROWS_AS(check_text("tvar t :: Int = 0\n"
                             "f :: STM Int\n"
                             "f = return t\n"),
                  TypeError);
}

TEST_CASE("structural equality is typed over non-functions") {
  CheckedProgram cp = check_text(
      "data Msg = Msg Int\n"
      "same :: Msg -> Msg -> Bool\n"
      "same a b = a == b\n");
  CHECK(cp.program.find_function("same") != nullptr);
  CHECK_THROWS_AS(check_text("f :: (Int -> Int) -> Bool\nf g = g == g\n"), TypeError);
}

TEST_CASE("annotate_expr types standalone expressions") {
  Program p;
  ExprPtr e = annotate_expr(parse_expr("\\x -> x + 1"), {}, p,
                            Type::fun(Type::integer(), Type::integer()));
  CHECK(type_of(e) == Type::fun(Type::integer(), Type::integer()));
  const auto* l = e->as<Expr::Lam>();
  REQUIRE(l != nullptr);
  CHECK(type_of(l->body) == Type::integer());

  std::map<std::string, Type> scope{{"y", Type::integer()}};
  ExprPtr open = annotate_expr(parse_expr("y > 0"), scope, p, Type::boolean());
  CHECK(type_of(open) == Type::boolean());

  CHECK_THROWS_AS(annotate_expr(parse_expr("1 + ()"), {}, p, std::nullopt), TypeError);
}

TEST_CASE("generated terms typecheck at their generated type") {
  Program p;
  Gen g(11);
  for (int i = 0; i < 300; ++i) {
    std::vector<ScopeVar> scope;
    Type want = gen_pure_type(g, 1);
    ExprPtr e = gen_pure(g, want, scope, 3, 0.05, GenMode::Checked);
    CAPTURE(pretty_expr(e));
    CHECK_NOTHROW(annotate_expr(e, {}, p, want));
  }
}

TEST_CASE("generated STM operations typecheck") {
  Program p;
  p.tvars = {{"ta", Type::integer(), intlit(0)}, {"tb", Type::integer(), intlit(0)}};
  Gen g(12);
  // Draws whose types cannot be inferred (retry-only branches) are discarded
  // by the helper; everything else must annotate and carry an STM type.
  for (int i = 0; i < 300; ++i) {
    StmSample s = gen_stm_annotated(g, p, 3, StmGenOpts{});
    CAPTURE(pretty_expr(s.raw));
    CHECK(is_stm_typed(s.annotated));
    CHECK(type_of(s.annotated) == Type::stm(s.result));
  }
}
