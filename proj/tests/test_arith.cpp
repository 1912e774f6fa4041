#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "stmcheck/arith.hpp"
#include "stmcheck/parser.hpp"
#include "testutil.hpp"

using namespace stmcheck;
using namespace testutil;

namespace {

ExprPtr b(const std::string& s) { return parse_expr(s); }

Tri decide(const PathCondition& pc, const std::string& goal) {
  return pc.decide(b(goal));
}

}  // namespace

TEST_CASE("three valued connectives") {
  CHECK(tri_not(Tri::True) == Tri::False);
  CHECK(tri_not(Tri::Unknown) == Tri::Unknown);
  CHECK(tri_and(Tri::True, Tri::True) == Tri::True);
  CHECK(tri_and(Tri::False, Tri::Unknown) == Tri::False);
  CHECK(tri_and(Tri::Unknown, Tri::True) == Tri::Unknown);
  CHECK(tri_or(Tri::False, Tri::False) == Tri::False);
  CHECK(tri_or(Tri::True, Tri::Unknown) == Tri::True);
  CHECK(tri_or(Tri::Unknown, Tri::False) == Tri::Unknown);
}

TEST_CASE("valid goals decide under an empty condition") {
  PathCondition pc;
  CHECK(decide(pc, "x + 1 > x") == Tri::True);
  CHECK(decide(pc, "x > x") == Tri::False);
  CHECK(decide(pc, "x == x") == Tri::True);
  CHECK(decide(pc, "2 + 3 == 5") == Tri::True);
  CHECK(decide(pc, "2 > 3") == Tri::False);
  CHECK(decide(pc, "x > 0") == Tri::Unknown);
  CHECK(decide(pc, "x >= x - 2") == Tri::True);
}

TEST_CASE("integer reasoning is strict, not rational") {
  PathCondition pc;
  pc.assume_bool(b("x > 0"), true);
  CHECK(decide(pc, "x >= 1") == Tri::True);
  CHECK(decide(pc, "x > 1") == Tri::Unknown);
  CHECK(decide(pc, "x < 1") == Tri::False);
  CHECK(decide(pc, "2 * x >= 2") == Tri::True);
}

TEST_CASE("chained bounds combine") {
  PathCondition pc;
  pc.assume_bool(b("x > 0"), true);
  pc.assume_bool(b("y >= x"), true);
  CHECK(decide(pc, "y > 0") == Tri::True);
  CHECK(decide(pc, "y >= 1") == Tri::True);
  CHECK(decide(pc, "x + y >= 2") == Tri::True);
  CHECK(decide(pc, "y < 0") == Tri::False);
}

TEST_CASE("negated assumptions flip the rows") {
  PathCondition pc;
  pc.assume_bool(b("x > 5"), false);
  CHECK(decide(pc, "x <= 5") == Tri::True);
  CHECK(decide(pc, "x > 5") == Tri::False);
  CHECK(decide(pc, "x <= 4") == Tri::Unknown);
}

TEST_CASE("congruence carries facts across compound atoms") {
  PathCondition pc;
  pc.assume_bool(b("sum tab == s"), true);
  CHECK(decide(pc, "n + sum tab == s + n") == Tri::True);
  CHECK(decide(pc, "sum tab == s") == Tri::True);
  CHECK(decide(pc, "sum tab == s + 1") == Tri::False);
  CHECK(decide(pc, "sum tab > s") == Tri::False);
  CHECK(decide(pc, "sum other == s") == Tri::Unknown);
}

TEST_CASE("equalities to literals evaluate mixed goals") {
  PathCondition pc;
  pc.assume_bool(b("x == 3"), true);
  CHECK(decide(pc, "x + 1 == 4") == Tri::True);
  CHECK(decide(pc, "x > 2") == Tri::True);
  CHECK(decide(pc, "x == 4") == Tri::False);
}

TEST_CASE("disequalities refute equality goals") {
  PathCondition pc;
  pc.assume_bool(b("x == 1"), false);
  CHECK(decide(pc, "x == 1") == Tri::False);
  CHECK(decide(pc, "x == 2") == Tri::Unknown);
}

TEST_CASE("contradictory facts make the branch dead") {
  PathCondition pc;
  pc.assume_bool(b("x > 0"), true);
  pc.assume_bool(b("x < 0"), true);
  CHECK(pc.inconsistent());
  CHECK(decide(pc, "1 == 2") == Tri::True);  // unreachable branch proves anything
}

TEST_CASE("constructor facts are tracked per expression") {
  PathCondition pc;
  pc.assume_pattern(b("xs"), ":", {b("h"), b("t")});
  auto fact = pc.constructor_of(b("xs"));
  REQUIRE(fact.has_value());
  CHECK(fact->con == ":");
  REQUIRE(fact->args.size() == 2);
  CHECK(expr_equal(fact->args[0], b("h")));
  CHECK_FALSE(pc.constructor_of(b("ys")).has_value());
}

TEST_CASE("constructor facts feed equalities") {
  PathCondition pc;
  pc.assume_pattern(b("p"), tuple_con_name(2), {b("u"), b("v")});
  pc.assume_bool(b("u == 1"), true);
  CHECK(decide(pc, "u + v == 1 + v") == Tri::True);
}

TEST_CASE("boolean scrutinee facts decide syntactic copies") {
  PathCondition pc;
  pc.assume_bool(b("ready"), true);
  CHECK(decide(pc, "ready") == Tri::True);
  CHECK(decide(pc, "not ready") == Tri::False);
  pc.assume_bool(b("done"), false);
  CHECK(decide(pc, "done") == Tri::False);
  CHECK(decide(pc, "ready && done") == Tri::False);
  CHECK(decide(pc, "ready || done") == Tri::True);
}

TEST_CASE("mentions tracks recorded variables") {
  PathCondition pc;
  pc.assume_bool(b("x + y > 0"), true);
  CHECK(pc.mentions("x"));
  CHECK(pc.mentions("y"));
  CHECK_FALSE(pc.mentions("z"));
}

TEST_CASE("nonlinear goals stay undecided") {
  PathCondition pc;
  CHECK(decide(pc, "x * x >= 0") == Tri::Unknown);
  pc.assume_bool(b("x * y > 0"), true);
  CHECK(decide(pc, "x * y > 0") == Tri::True);  // by congruence on the atom
  CHECK(decide(pc, "y * x > 0") == Tri::Unknown);
}

TEST_CASE("arith can be switched off for shape tests") {
  PathCondition pc(false);
  CHECK(decide(pc, "x + 1 > x") == Tri::Unknown);
  pc.assume_bool(b("flag"), true);
  CHECK(decide(pc, "flag") == Tri::True);  // congruence still answers
  CHECK(decide(pc, "x > x") == Tri::Unknown);
}

TEST_CASE("arith_decide is the module entry point") {
  PathCondition pc;
  pc.assume_bool(b("n >= 0"), true);
  CHECK(arith_decide(b("n + 1 > 0"), pc) == Tri::True);
  CHECK(arith_decide(b("n < 0"), pc) == Tri::False);
  CHECK(arith_decide(b("n == 5"), pc) == Tri::Unknown);
}

TEST_CASE("decisions are stable across repeated queries") {
  PathCondition pc;
  pc.assume_bool(b("a >= b"), true);
  pc.assume_bool(b("b >= c"), true);
  for (int i = 0; i < 5; ++i) {
    CHECK(decide(pc, "a >= c") == Tri::True);
    CHECK(decide(pc, "c > a") == Tri::False);
  }
}
