#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "stmcheck/checker.hpp"
#include "stmcheck/parser.hpp"
#include "stmcheck/pretty.hpp"
#include "stmcheck/transform.hpp"
#include "stmcheck/typecheck.hpp"
#include "testutil.hpp"

using namespace stmcheck;
using namespace testutil;

namespace {

Program one_tvar() {
  Program p;
  p.tvars = {{"t", Type::integer(), intlit(0)}};
  return p;
}

Program two_tvars() {
  Program p;
  p.tvars = {{"a", Type::integer(), intlit(0)}, {"b", Type::integer(), intlit(0)}};
  return p;
}

// Annotate against the program, transform, and simplify the result so the
// administrative cases introduced by the translation are folded away.
ExprPtr transformed(const std::string& src, const Program& p) {
  ExprPtr e = annotate_expr(parse_expr(src), {}, p, std::nullopt);
  ExprPtr t = t_expr(e, p.tvar_names());
  CheckConfig cfg;
  return simplify(t, cfg);
}

}  // namespace

TEST_CASE("reads, writes and returns become state passing lambdas") {
  Program p = one_tvar();
  CHECK(alpha_equal(transformed("readTVar t", p), parse_expr("\\t -> (t, t)")));
  CHECK(alpha_equal(transformed("return 5", p), parse_expr("\\t -> (5, t)")));
  CHECK(alpha_equal(transformed("writeTVar t 7", p), parse_expr("\\t -> ((), 7)")));
}

TEST_CASE("bind threads the environment through both sides") {
  Program p = one_tvar();
  ExprPtr got = transformed("readTVar t >>= \\x -> writeTVar t (x + 1)", p);
  CHECK(alpha_equal(got, parse_expr("\\t -> ((), t + 1)")));
}

TEST_CASE("projection picks the read TVar out of the tuple") {
  Program p = two_tvars();
  ExprPtr got = transformed("readTVar b", p);
  CHECK(alpha_equal(got, parse_expr("\\s -> case s of { (a, b) -> (b, (a, b)) }")));

  ExprPtr wr = transformed("writeTVar a 3", p);
  CHECK(alpha_equal(wr, parse_expr("\\s -> case s of { (a, b) -> ((), (3, b)) }")));
}

TEST_CASE("transformation output is behaviorally faithful") {
  Program p = two_tvars();
  ExprPtr got = transformed("readTVar a >>= \\x -> writeTVar b (x * 2) >>= \\u -> return x", p);
  EvalOutcome out = force_deep(app(got, parse_expr("(21, 0)")), Env{}, {});
  REQUIRE(out.converged());
  CHECK(alpha_equal(out.value, parse_expr("(21, (21, 42))")));
}

TEST_CASE("retry turns into unreachable under a case") {
  Program p = one_tvar();
  // 1 > 0 decides during simplification, selecting the retry branch.
  ExprPtr got = transformed("case 1 > 0 of { True -> retry; False -> return () }", p);
  EvalOutcome out = eval(app(got, intlit(0)), Env{}, {});
  CHECK(out.unreachable());

  ExprPtr other = transformed("case 0 > 1 of { True -> retry; False -> return () }", p);
  CHECK(alpha_equal(other, parse_expr("\\t -> ((), t)")));
}

TEST_CASE("exceptions pass through unchanged") {
  Program p = one_tvar();
  CHECK(t_expr(bad(), p.tvar_names())->as<Expr::Exc>()->kind == ExcKind::Bad);
  CHECK(t_expr(unr(), p.tvar_names())->as<Expr::Exc>()->kind == ExcKind::Unr);
}

TEST_CASE("pure expressions are untouched") {
  Program p = one_tvar();
  Gen g(5);
  for (int i = 0; i < 200; ++i) {
    ExprPtr e = gen_closed_pure(g, 3, 0.05);
    CHECK(expr_equal(t_expr(e, p.tvar_names()), e));
  }
}

TEST_CASE("orElse must be expanded before transforming") {
  Program p = one_tvar();
  ExprPtr e = annotate_expr(parse_expr("retry `orElse` return 1"), {}, p, std::nullopt);
  CHECK_THROWS_AS(t_expr(e, p.tvar_names()), TransformError);
}

TEST_CASE("the result is always pure") {
  Program p = two_tvars();
  Gen g(41);
  for (int i = 0; i < 200; ++i) {
    StmSample s = gen_stm_annotated(g, p, 3, StmGenOpts{});
    CHECK(is_pure(t_expr(s.annotated, p.tvar_names())));
  }
}

TEST_CASE("contract transformation rewrites only the STM form") {
  ContractPtr c = parse_contract("||x : {t | t > 0} <> {u | u >= x}|| {r | r > 0}");
  ContractPtr t = t_contract(c);
  ContractPtr want =
      parse_contract("x : {t | t > 0} -> ({r | r > 0}, {u | u >= x})");
  CHECK(contract_alpha_equal(t, want));

  // Pure connectives recurse without changing shape.
  ContractPtr dep = parse_contract("n : Ok -> ||{t | t > n} <> {u | u > t}|| Any");
  ContractPtr tdep = t_contract(dep);
  const auto* d = tdep->as<Contract::DepFun>();
  REQUIRE(d != nullptr);
  CHECK(d->codomain->is<Contract::DepFun>());  // the STM form became an arrow
}

TEST_CASE("pure contracts are fixed points of the transformation") {
  Gen g(17);
  for (int i = 0; i < 300; ++i) {
    Type ty = gen_pure_type(g, 1);
    ContractPtr c = gen_contract(g, ty, 2);
    CHECK(contract_equal(t_contract(c), c));
  }
}

TEST_CASE("type translation maps STM to environment passing") {
  Type env = Type::tuple({Type::integer(), Type::integer()});
  CHECK(t_type(Type::stm(Type::boolean()), env) ==
        Type::fun(env, Type::tuple({Type::boolean(), env})));
  CHECK(t_type(Type::fun(Type::integer(), Type::stm(Type::unit())), env) ==
        Type::fun(Type::integer(), Type::fun(env, Type::tuple({Type::unit(), env}))));
  CHECK(t_type(Type::integer(), env) == Type::integer());
}

TEST_CASE("gamma expansion enumerates alternative free variants") {
  ExprPtr plain = parse_expr("readTVar t >>= \\x -> return x");
  std::vector<ExprPtr> one = gamma_expand(plain);
  REQUIRE(one.size() == 1);
  CHECK(expr_equal(one[0], plain));

  std::vector<ExprPtr> two = gamma_expand(parse_expr("retry `orElse` return 1"));
  REQUIRE(two.size() == 2);
  CHECK(two[0]->is<Expr::Retry>());
  CHECK(two[1]->is<Expr::Return>());

  std::vector<ExprPtr> three =
      gamma_expand(parse_expr("(return 1 `orElse` return 2) `orElse` return 3"));
  CHECK(three.size() == 3);

  std::vector<ExprPtr> inner =
      gamma_expand(parse_expr("(retry `orElse` return 1) >>= \\x -> return (x + 1)"));
  REQUIRE(inner.size() == 2);
  CHECK(inner[0]->as<Expr::Bind>()->left->is<Expr::Retry>());

  // Identical alternatives collapse.
  CHECK(gamma_expand(parse_expr("return 1 `orElse` return 1")).size() == 1);
}

TEST_CASE("gamma expansion respects the cap") {
  ExprPtr e = parse_expr("return 1 `orElse` return 2");
  for (int i = 0; i < 6; ++i)
    e = or_else(e, or_else(ret(intlit(10 + 2 * i)), ret(intlit(11 + 2 * i))));
  CHECK_THROWS_AS(gamma_expand(e, 8), TransformError);
  CHECK(gamma_expand(e, 64).size() == 14);
}

TEST_CASE("self contained invariants are inlined into the contract") {
  SourceUnit u = parse(read_file(sample_path("counter.stm")), "counter.stm");
  ContractPtr c = invariant_to_contract("inv", u.program);
  const auto* s = c->as<Contract::StmOp>();
  REQUIRE(s != nullptr);
  CHECK(s->result->is<Contract::Any>());
  const auto* pre = s->pre->as<Contract::Pred>();
  REQUIRE(pre != nullptr);
  CHECK(pre->pred->is<Expr::Prim>());  // t > 0, not a call
  const auto* post = s->post->as<Contract::Pred>();
  REQUIRE(post != nullptr);
  CHECK(contract_alpha_equal(s->pre, s->post));
}

TEST_CASE("invariants that call helpers stay as calls") {
  SourceUnit u = parse(read_file(sample_path("fig1-split.stm")), "fig1-split.stm");
  ContractPtr c = invariant_to_contract("inv", u.program);
  const auto* s = c->as<Contract::StmOp>();
  REQUIRE(s != nullptr);
  CHECK(pretty_contract(c).find("inv") != std::string::npos);
}

TEST_CASE("close_transaction folds parameter contracts into arrows") {
  ContractPtr stm = parse_contract("||{t | t > 0} <> {t | t > 0}|| Any");
  ExprPtr body = parse_expr("writeTVar t n");
  auto [closed, contract] =
      close_transaction(body, {{"n", ok_contract()}}, stm);
  const auto* l = closed->as<Expr::Lam>();
  REQUIRE(l != nullptr);
  CHECK(l->param == "n");
  CHECK(l->body->is<Expr::WriteTVar>());
  const auto* d = contract->as<Contract::DepFun>();
  REQUIRE(d != nullptr);
  CHECK(d->var == "n");
  CHECK(is_ok_contract(*d->domain));
  CHECK(d->codomain->is<Contract::StmOp>());

  // No parameters: both sides pass through.
  ExprPtr closed_body = parse_expr("writeTVar t 1");
  auto [c2, k2] = close_transaction(closed_body, {}, stm);
  CHECK(expr_equal(c2, closed_body));
  CHECK(contract_equal(k2, stm));

  // The declared parameters must be exactly the free variables.
  CHECK_THROWS_AS(close_transaction(body, {}, stm), TransformError);
}

TEST_CASE("TVar parameters specialize one definition per TVar") {
  SourceUnit u = parse(read_file(sample_path("tvar-param.stm")), "tvar-param.stm");
  Program sp = specialize_tvar_params(u.program);
  CHECK(sp.find_function("f") == nullptr);
  const FunctionDef* fa = sp.find_function("f_tA");
  const FunctionDef* fb = sp.find_function("f_tB");
  REQUIRE(fa != nullptr);
  REQUIRE(fb != nullptr);

  // The placeholder pair becomes primed copies of the concrete TVar names.
  REQUIRE(fa->contract != nullptr);
  std::string rendered = pretty_contract(fa->contract);
  CHECK(rendered.find("tA") != std::string::npos);
  CHECK(rendered.find("tA'") != std::string::npos);
  CHECK(rendered.find(">= 0") != std::string::npos);
  CHECK(fa->signature.has_value());
  CHECK(*fa->signature == Type::stm(Type::unit()));

  // The body reads and writes the concrete TVar.
  std::string body = pretty_expr(fa->body);
  CHECK(body.find("readTVar tA") != std::string::npos);
  CHECK(body.find("writeTVar tA") != std::string::npos);

  // Call sites are rewritten to the specialized names.
  for (const auto& tx : sp.transactions) {
    if (tx.name == "bumpA") CHECK(pretty_expr(tx.body).find("f_tA") != std::string::npos);
    if (tx.name == "bumpB") CHECK(pretty_expr(tx.body).find("f_tB") != std::string::npos);
  }
}

TEST_CASE("TVar arguments must be declared TVar names") {
  std::string src =
      "tvar tA :: Int = 0\n"
      "f :: TVar Int -> STM ()\n"
      "contract f :: TVar[t,t'] -> | True <> True | Any\n"
      "f x = writeTVar x 1\n"
      "transaction g = f 5\n";
  CHECK_THROWS_AS(specialize_tvar_params(parse(src, "bad-arg").program), TransformError);

  std::string partial =
      "tvar tA :: Int = 0\n"
      "f :: TVar Int -> STM ()\n"
      "contract f :: TVar[t,t'] -> | True <> True | Any\n"
      "f x = writeTVar x 1\n"
      "transaction g = f\n";
  CHECK_THROWS_AS(specialize_tvar_params(parse(partial, "partial").program),
                  TransformError);
}

TEST_CASE("erase_types strips every annotation") {
  Program p = one_tvar();
  ExprPtr e = annotate_expr(parse_expr("readTVar t >>= \\x -> return (x + 1)"), {}, p,
                            std::nullopt);
  REQUIRE(e->type.has_value());
  ExprPtr bare = erase_types(e);
  std::function<bool(const ExprPtr&)> clean = [&](const ExprPtr& x) {
    if (x->type.has_value()) return false;
    bool ok = true;
    map_children(x, [&](const ExprPtr& c) {
      ok = ok && clean(c);
      return c;
    });
    return ok;
  };
  CHECK(clean(bare));
  CHECK(alpha_equal(bare, parse_expr("readTVar t >>= \\x -> return (x + 1)")));
}
