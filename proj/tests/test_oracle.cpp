#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>
#include <string>
#include <vector>

#include "stmcheck/ast.hpp"
#include "stmcheck/interp.hpp"
#include "stmcheck/oracle.hpp"
#include "stmcheck/parser.hpp"
#include "stmcheck/pretty.hpp"
#include "stmcheck/types.hpp"
#include "testutil.hpp"

using namespace stmcheck;

namespace {

Program load(const std::string& name) {
  return parse(read_file(sample_path(name)), name).program;
}

SatVerdict run_sat(const Program& prog, const std::string& expr,
                   const std::string& contract, const Type& ty,
                   const OracleConfig& cfg = {}) {
  FunMap funs = function_map(prog);
  return satisfies_oracle(parse_expr(expr, prog.functions), parse_contract(contract),
                          ty, prog, funs, cfg);
}

}  // namespace

TEST_CASE("integer enumeration is zero-centered and covers the window") {
  Program prog = load("counter.stm");
  OracleConfig cfg;
  bool exhaustive = false;
  std::vector<ExprPtr> vals =
      enumerate_values(Type::integer(), prog, cfg, 100, &exhaustive);
  REQUIRE(vals.size() == 7);
  CHECK(exhaustive);
  std::vector<int> expect = {0, 1, -1, 2, -2, 3, -3};
  for (size_t i = 0; i < expect.size(); ++i) {
    const auto* lit = vals[i]->as<Expr::IntLit>();
    REQUIRE(lit != nullptr);
    CHECK(lit->value == expect[i]);
  }
}

TEST_CASE("truncated enumeration reports a partial space") {
  Program prog = load("counter.stm");
  OracleConfig cfg;
  bool exhaustive = true;
  std::vector<ExprPtr> vals =
      enumerate_values(Type::integer(), prog, cfg, 4, &exhaustive);
  CHECK(vals.size() == 4);
  CHECK_FALSE(exhaustive);
  CHECK(pretty_expr(vals[3]) == "2");
}

TEST_CASE("booleans and unit enumerate exhaustively") {
  Program prog = load("counter.stm");
  OracleConfig cfg;
  bool exhaustive = false;
  std::vector<ExprPtr> bools =
      enumerate_values(Type::boolean(), prog, cfg, 10, &exhaustive);
  REQUIRE(bools.size() == 2);
  CHECK(exhaustive);
  CHECK(pretty_expr(bools[0]) == "False");
  CHECK(pretty_expr(bools[1]) == "True");

  std::vector<ExprPtr> units =
      enumerate_values(Type::unit(), prog, cfg, 10, &exhaustive);
  REQUIRE(units.size() == 1);
  CHECK(exhaustive);
  CHECK(pretty_expr(units[0]) == "()");
}

TEST_CASE("list enumeration grows small-first and stays distinct") {
  Program prog = load("counter.stm");
  OracleConfig cfg;
  bool exhaustive = true;
  std::vector<ExprPtr> vals =
      enumerate_values(Type::list(Type::integer()), prog, cfg, 60, &exhaustive);
  REQUIRE(vals.size() == 60);
  CHECK_FALSE(exhaustive);
  CHECK(pretty_expr(vals[0]) == "[]");
  CHECK(pretty_expr(vals[1]) == "[0]");
  CHECK(pretty_expr(vals[2]) == "[1]");
  std::set<std::string> seen;
  for (const auto& v : vals) CHECK(seen.insert(pretty_expr(v)).second);
}

TEST_CASE("tuple enumeration is the finite product") {
  Program prog = load("counter.stm");
  OracleConfig cfg;
  bool exhaustive = false;
  Type ty = Type::tuple({Type::integer(), Type::boolean()});
  std::vector<ExprPtr> vals = enumerate_values(ty, prog, cfg, 100, &exhaustive);
  CHECK(vals.size() == 14);
  CHECK(exhaustive);
  std::set<std::string> seen;
  for (const auto& v : vals) CHECK(seen.insert(pretty_expr(v)).second);
  CHECK(seen.count("(0, False)") == 1);
  CHECK(seen.count("(-3, True)") == 1);
}

TEST_CASE("function spaces are sampled, never exhaustive") {
  Program prog = load("counter.stm");
  OracleConfig cfg;
  bool exhaustive = true;
  Type ty = Type::fun(Type::integer(), Type::integer());
  std::vector<ExprPtr> vals = enumerate_values(ty, prog, cfg, 12, &exhaustive);
  REQUIRE(vals.size() >= 3);
  CHECK_FALSE(exhaustive);

  // The identity comes first, then the unit-step neighbours.
  FunMap funs;
  Env empty;
  EvalOutcome idv = eval(app(vals[0], intlit(9)), empty, funs, kDefaultFuel);
  REQUIRE(idv.converged());
  CHECK(pretty_expr(idv.value) == "9");
  EvalOutcome inc = eval(app(vals[1], intlit(9)), empty, funs, kDefaultFuel);
  REQUIRE(inc.converged());
  CHECK(pretty_expr(inc.value) == "10");
}

TEST_CASE("declared datatypes enumerate through their constructors") {
  Program prog = load("send.stm");
  OracleConfig cfg;
  bool exhaustive = false;
  std::vector<ExprPtr> vals =
      enumerate_values(Type::data("Msg"), prog, cfg, 100, &exhaustive);
  REQUIRE(vals.size() == 7);
  CHECK(exhaustive);
  CHECK(pretty_expr(vals[0]) == "Msg 0");
  CHECK(pretty_expr(vals[2]) == "Msg (-1)");
}

TEST_CASE("enumeration is deterministic across calls") {
  Program prog = load("counter.stm");
  OracleConfig cfg;
  Type ty = Type::list(Type::integer());
  std::vector<ExprPtr> a = enumerate_values(ty, prog, cfg, 80);
  std::vector<ExprPtr> b = enumerate_values(ty, prog, cfg, 80);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) CHECK(expr_equal(a[i], b[i]));
}

TEST_CASE("predicate contracts on closed values") {
  Program prog = load("counter.stm");
  SatVerdict ok = run_sat(prog, "5", "{x | x > 0}", Type::integer());
  CHECK(ok.holds());
  CHECK(ok.exhaustive);

  SatVerdict bad = run_sat(prog, "0 - 1", "{x | x > 0}", Type::integer());
  CHECK(bad.violated());
  CHECK(bad.reason == "predicate is False");

  SatVerdict crash = run_sat(prog, "BAD", "Ok", Type::integer());
  CHECK(crash.violated());
  CHECK(crash.reason == "the expression itself crashes");

  // Any accepts even a crashing expression; unreachable code satisfies all.
  CHECK(run_sat(prog, "BAD", "Any", Type::integer()).holds());
  CHECK(run_sat(prog, "UNR", "{x | False}", Type::integer()).holds());
}

TEST_CASE("divergence satisfies a predicate contract") {
  std::string src =
      "tvar t :: Int = 1\n"
      "spin :: Int -> Int\n"
      "spin x = spin x\n"
      "inv :: Int -> Bool\n"
      "inv t = t > 0\n"
      "invariant inv\n"
      "transaction noop = return ()\n";
  Program prog = parse(src, "spin.stm").program;
  OracleConfig cfg;
  cfg.eval_fuel = 500;
  SatVerdict v = run_sat(prog, "7", "{x | spin x > 0}", Type::integer(), cfg);
  CHECK(v.holds());
  CHECK_FALSE(v.exhaustive);
}

TEST_CASE("impure expressions never satisfy pure contracts") {
  Program prog = load("counter.stm");
  SatVerdict v =
      run_sat(prog, "readTVar t", "Ok", Type::stm(Type::integer()));
  CHECK(v.violated());
  CHECK(v.reason == "impure expression against a pure contract");
}

TEST_CASE("function arguments are probed for crashes") {
  Program prog = load("counter.stm");
  Type ty = Type::fun(Type::integer(), Type::integer());
  SatVerdict v = run_sat(prog, "\\x -> 1 + BAD", "Ok", ty);
  CHECK(v.violated());
  CHECK(v.reason == "crashes when applied");
  CHECK(v.witness == "argument = 0");
}

TEST_CASE("dependent function contracts check sampled domains") {
  Program prog = load("counter.stm");
  Type ty = Type::fun(Type::integer(), Type::integer());
  SatVerdict good = run_sat(prog, "\\x -> x + 1", "{x | x > 0} -> {r | r > x}", ty);
  CHECK(good.holds());
  CHECK(good.exhaustive);

  SatVerdict bad = run_sat(prog, "\\x -> x - 1", "{x | x > 0} -> {r | r > x}", ty);
  CHECK(bad.violated());
  CHECK(bad.witness == "x = 1");
  CHECK(bad.reason == "predicate is False");
}

TEST_CASE("a small sampling budget turns the verdict inconclusive") {
  Program prog = load("counter.stm");
  Type ty = Type::fun(Type::integer(), Type::integer());
  OracleConfig cfg;
  cfg.samples = 3;
  SatVerdict v =
      run_sat(prog, "\\x -> x + 1", "{x | x > 0} -> {r | r > x}", ty, cfg);
  CHECK(v.kind == SatVerdict::Kind::Inconclusive);
  CHECK(v.reason == "all samples passed without covering the space");
}

TEST_CASE("tuple contracts name the violating component") {
  Program prog = load("counter.stm");
  Type ty = Type::tuple({Type::integer(), Type::integer()});
  SatVerdict v =
      run_sat(prog, "(5, 0)", "({a | a > 0}, {b | b > 0})", ty);
  CHECK(v.violated());
  CHECK(v.witness == "component 2 = 0");
}

TEST_CASE("transaction contracts hold on the increment") {
  Program prog = load("counter.stm");
  const TransactionDef* inc = nullptr;
  for (const auto& tx : prog.transactions)
    if (tx.name == "increment") inc = &tx;
  REQUIRE(inc != nullptr);
  FunMap funs = function_map(prog);
  SatVerdict v = satisfies_oracle(inc->body,
                                  parse_contract("|| {t | t > 0} <> {t | t > 0} || Any"),
                                  Type::stm(Type::unit()), prog, funs, {});
  CHECK(v.holds());
  CHECK(v.exhaustive);
}

TEST_CASE("transaction contracts catch the decrement at the boundary") {
  Program prog = load("counter.stm");
  const TransactionDef* dec = nullptr;
  for (const auto& tx : prog.transactions)
    if (tx.name == "decrement") dec = &tx;
  REQUIRE(dec != nullptr);
  FunMap funs = function_map(prog);
  SatVerdict v = satisfies_oracle(dec->body,
                                  parse_contract("|| {t | t > 0} <> {t | t > 0} || Any"),
                                  Type::stm(Type::unit()), prog, funs, {});
  CHECK(v.violated());
  CHECK(v.reason == "post-state: predicate is False");
  CHECK(v.witness == "t = 1, post-state = 0");
}

TEST_CASE("retry commits nothing, so it satisfies any transaction contract") {
  Program prog = load("counter.stm");
  SatVerdict v = run_sat(prog, "retry", "|| Ok <> {t | False} || Any",
                         Type::stm(Type::unit()));
  CHECK(v.holds());
}

TEST_CASE("crashes inside a transaction are violations") {
  Program prog = load("counter.stm");
  SatVerdict v = run_sat(
      prog,
      "readTVar t >>= \\x -> case BAD of { True -> return x; False -> return x }",
      "|| Ok <> Ok || Any", Type::stm(Type::integer()));
  CHECK(v.violated());
  CHECK(v.reason == "the transaction crashes");
}

TEST_CASE("alternatives are tagged in the verdict") {
  Program prog = load("counter.stm");
  SatVerdict v = run_sat(prog, "(writeTVar t 1) `orElse` (writeTVar t 0)",
                         "|| Ok <> {t | t > 0} || Any", Type::stm(Type::unit()));
  CHECK(v.violated());
  CHECK(v.reason == "post-state: predicate is False (alternative 2)");
}

TEST_CASE("transaction sampling budgets are respected") {
  Program prog = load("counter.stm");
  OracleConfig cfg;
  cfg.samples = 1;
  SatVerdict v = run_sat(prog, "readTVar t >>= \\x -> writeTVar t (x + 1)",
                         "|| {t | t > 0} <> {t | t > 0} || Any",
                         Type::stm(Type::unit()), cfg);
  CHECK(v.kind == SatVerdict::Kind::Inconclusive);
  CHECK(v.reason == "sampling budget exhausted");
}

TEST_CASE("oracle verdicts are deterministic") {
  Program prog = load("counter.stm");
  SatVerdict a = run_sat(prog, "\\x -> x - 1", "{x | x > 0} -> {r | r > x}",
                         Type::fun(Type::integer(), Type::integer()));
  SatVerdict b = run_sat(prog, "\\x -> x - 1", "{x | x > 0} -> {r | r > x}",
                         Type::fun(Type::integer(), Type::integer()));
  CHECK(a.kind == b.kind);
  CHECK(a.witness == b.witness);
  CHECK(a.reason == b.reason);
}

TEST_CASE("inhabitant generation walks the enumeration order") {
  Program prog = load("counter.stm");
  FunMap funs = function_map(prog);
  OracleConfig cfg;
  ExprPtr three = generate_inhabitant(parse_contract("{x | x > 2}"),
                                      Type::integer(), prog, funs, cfg);
  REQUIRE(three != nullptr);
  CHECK(pretty_expr(three) == "3");

  ExprPtr zero =
      generate_inhabitant(parse_contract("Ok"), Type::integer(), prog, funs, cfg);
  REQUIRE(zero != nullptr);
  CHECK(pretty_expr(zero) == "0");

  ExprPtr none = generate_inhabitant(parse_contract("{x | x < x}"),
                                     Type::integer(), prog, funs, cfg);
  CHECK(none == nullptr);
}
