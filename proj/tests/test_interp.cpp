#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "stmcheck/interp.hpp"
#include "stmcheck/parser.hpp"
#include "stmcheck/pretty.hpp"
#include "testutil.hpp"

using namespace stmcheck;
using namespace testutil;

namespace {

EvalOutcome run(const std::string& src, const Env& env = {}, const FunMap& funs = {}) {
  return eval(parse_expr(src, [&] {
                std::set<std::string> names;
                for (const auto& [n, b] : funs) names.insert(n);
                return names;
              }()),
              env, funs);
}

long long as_int(const EvalOutcome& out) {
  REQUIRE(out.converged());
  const auto* i = out.value->as<Expr::IntLit>();
  REQUIRE(i != nullptr);
  return i->value;
}

}  // namespace

TEST_CASE("arithmetic and comparison") {
  CHECK(as_int(run("2 + 3 * 4")) == 14);
  CHECK(as_int(run("2 - 7")) == -5);
  CHECK(alpha_equal(run("3 > 2").value, true_con()));
  CHECK(alpha_equal(run("3 <= 2").value, false_con()));
  CHECK(alpha_equal(run("not (1 == 2)").value, true_con()));
  CHECK(alpha_equal(run("True && False").value, false_con()));
  CHECK(alpha_equal(run("False || True").value, true_con()));
}

TEST_CASE("equality is structural over data") {
  CHECK(alpha_equal(run("(1, 2) == (1, 2)").value, true_con()));
  CHECK(alpha_equal(run("[1, 2] == [1, 2]").value, true_con()));
  CHECK(alpha_equal(run("[1] == [1, 1]").value, false_con()));
  CHECK(alpha_equal(run("(1, [2]) == (1, [3])").value, false_con()));
}

TEST_CASE("beta reduction and case selection") {
  CHECK(as_int(run("(\\x -> x + 1) 5")) == 6);
  CHECK(as_int(run("case 1 < 2 of { True -> 10; False -> 20 }")) == 10);
  CHECK(as_int(run("case [5] of { [] -> 0; (h : t) -> h }")) == 5);
  CHECK(as_int(run("case (7, 8) of { (a, b) -> a + b }")) == 15);
}

TEST_CASE("exceptions propagate through strict positions") {
  CHECK(run("BAD + 1").crashed());
  CHECK(run("case UNR of { True -> 1; False -> 2 }").unreachable());
  CHECK(run("(\\x -> 1) BAD").converged());  // unused argument is never forced
  CHECK(run("case True of { True -> 3; False -> BAD }").converged());
  CHECK(run("BAD 1").crashed());
}

TEST_CASE("function calls resolve through the map") {
  FunMap funs;
  funs["double"] = parse_expr("\\x -> x + x");
  CHECK(as_int(run("double 4", Env{}, funs)) == 8);

  funs["len"] = parse_expr("\\xs -> case xs of { [] -> 0; (h : t) -> 1 + len t }", {"len"});
  CHECK(as_int(run("len [1, 2, 3]", Env{}, funs)) == 3);
}

TEST_CASE("runaway recursion exhausts fuel") {
  FunMap funs;
  funs["spin"] = parse_expr("\\x -> spin x", {"spin"});
  EvalOutcome out = eval(parse_expr("spin 0", {"spin"}), Env{}, funs, 500);
  CHECK(out.out_of_fuel());
}

TEST_CASE("read and write thread the store") {
  Env env = Env::from_decls({{"t", Type::integer(), intlit(41)}});
  EvalOutcome out = run("readTVar t >>= \\x -> writeTVar t (x + 1) >>= \\u -> return x", env);
  REQUIRE(out.converged());
  const auto* r = out.value->as<Expr::Return>();
  REQUIRE(r != nullptr);
  CHECK(as_int(force_deep(r->value, Env{}, {})) == 41);
  CHECK(as_int(force_deep(out.env.lookup("t"), Env{}, {})) == 42);
}

TEST_CASE("stored expressions stay lazy until read") {
  Env env = Env::from_decls({{"t", Type::integer(), intlit(0)}});
  EvalOutcome out = run("writeTVar t (2 + 3)", env);
  REQUIRE(out.converged());
  CHECK(out.env.lookup("t")->is<Expr::Prim>());  // unevaluated thunk
  EvalOutcome read_back = run("readTVar t", out.env);
  REQUIRE(read_back.converged());
  CHECK(as_int(force_deep(read_back.value->as<Expr::Return>()->value, Env{}, {})) == 5);
}

TEST_CASE("retry never commits") {
  Env env = Env::from_decls({{"t", Type::integer(), intlit(0)}});
  CHECK(run("retry", env).unreachable());
  CHECK(run("readTVar t >>= \\x -> retry", env).unreachable());
}

TEST_CASE("orElse has no direct reduction") {
  Env env = Env::from_decls({{"t", Type::integer(), intlit(0)}});
  ExprPtr e = parse_expr("retry `orElse` return 1");
  StepResult r = step(e, env, {});
  CHECK(r.kind == StepResult::Kind::Stuck);
}

TEST_CASE("step reports the fired rule") {
  Env env = Env::from_decls({{"t", Type::integer(), intlit(9)}});
  StepResult r = step(parse_expr("readTVar t"), env, {});
  REQUIRE(r.kind == StepResult::Kind::Stepped);
  CHECK(std::string(r.rule) == "READ");
  const auto* ret_node = r.expr->as<Expr::Return>();
  REQUIRE(ret_node != nullptr);

  StepResult w = step(parse_expr("writeTVar t 1"), env, {});
  REQUIRE(w.kind == StepResult::Kind::Stepped);
  CHECK(std::string(w.rule) == "WRITE");
  CHECK(as_int(force_deep(w.env.lookup("t"), Env{}, {})) == 1);
}

TEST_CASE("bind sequences left to right") {
  Env env = Env::from_decls({{"t", Type::integer(), intlit(1)}});
  EvalOutcome out =
      run("writeTVar t 5 >>= \\u -> readTVar t >>= \\x -> return (x * 2)", env);
  REQUIRE(out.converged());
  CHECK(as_int(force_deep(out.value->as<Expr::Return>()->value, Env{}, {})) == 10);
}

TEST_CASE("bind propagates crashes from either side") {
  Env env = Env::from_decls({{"t", Type::integer(), intlit(1)}});
  CHECK(run("BAD >>= \\x -> return 1", env).crashed());
  CHECK(run("readTVar t >>= \\x -> BAD", env).crashed());
}

TEST_CASE("force_deep evaluates under constructors and return") {
  EvalOutcome out = force_deep(parse_expr("(1 + 1, [2 + 2])"), Env{}, {});
  REQUIRE(out.converged());
  CHECK(alpha_equal(out.value, parse_expr("(2, [4])")));

  EvalOutcome bad = force_deep(parse_expr("(1, BAD)"), Env{}, {});
  CHECK(bad.crashed());

  EvalOutcome lam_stays = force_deep(parse_expr("\\x -> x + missing"), Env{}, {});
  CHECK(lam_stays.converged());  // lambdas stay opaque
}

TEST_CASE("env tuple round trips through tuple_env") {
  std::vector<TVarDecl> decls = {{"a", Type::integer(), intlit(1)},
                                 {"b", Type::boolean(), true_con()}};
  Env env = Env::from_decls(decls);
  ExprPtr t = env_tuple(env);
  Env back = tuple_env(t, decls);
  CHECK(env_equal(env, back));

  // One TVar collapses to the bare content.
  std::vector<TVarDecl> one = {{"t", Type::integer(), intlit(7)}};
  CHECK(env_tuple(Env::from_decls(one))->is<Expr::IntLit>());
  // None collapses to unit.
  CHECK(alpha_equal(env_tuple(Env{}), unit_con()));
}

TEST_CASE("env updates are persistent") {
  Env a = Env::from_decls({{"t", Type::integer(), intlit(1)}});
  Env b = a.set("t", intlit(2));
  CHECK(as_int(force_deep(a.lookup("t"), Env{}, {})) == 1);
  CHECK(as_int(force_deep(b.lookup("t"), Env{}, {})) == 2);
  CHECK_FALSE(env_equal(a, b));
}

TEST_CASE("values are recognized") {
  CHECK(is_value(parse_expr("5")));
  CHECK(is_value(parse_expr("\\x -> x")));
  CHECK(is_value(parse_expr("(1, 2)")));
  CHECK(is_value(parse_expr("BAD")));
  CHECK(is_value(parse_expr("return 1")));
  CHECK_FALSE(is_value(parse_expr("1 + 1")));
  CHECK_FALSE(is_value(parse_expr("readTVar t")));
}

TEST_CASE("generated pure terms always settle within fuel") {
  Gen g(33);
  for (int i = 0; i < 400; ++i) {
    ExprPtr e = gen_closed_pure(g, 4, 0.08);
    EvalOutcome out = eval(e, Env{}, {});
    CAPTURE(pretty_expr(e));
    CHECK_FALSE(out.out_of_fuel());  // generators build no recursion
  }
}
