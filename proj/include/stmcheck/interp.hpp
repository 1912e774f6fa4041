#pragma once

#include <map>
#include <string>
#include <vector>

#include "stmcheck/ast.hpp"

namespace stmcheck {

// The transactional store: an ordered total map from TVar name to the pure
// expression it holds. Stored expressions stay unevaluated until read.
class Env {
 public:
  Env() = default;
  static Env from_decls(const std::vector<TVarDecl>& decls);

  bool has(const std::string& name) const;
  const ExprPtr& lookup(const std::string& name) const;  // throws on miss
  Env set(const std::string& name, ExprPtr value) const;

  const std::vector<std::pair<std::string, ExprPtr>>& slots() const { return slots_; }
  size_t size() const { return slots_.size(); }

 private:
  std::vector<std::pair<std::string, ExprPtr>> slots_;
};

bool env_equal(const Env& a, const Env& b);

// Function definitions used by CALL; a plain name -> body map so callers can
// evaluate against original or transformed definitions.
using FunMap = std::map<std::string, ExprPtr>;
FunMap function_map(const Program& p);

struct StepResult {
  enum class Kind { Stepped, Value, Stuck };
  Kind kind = Kind::Stuck;
  ExprPtr expr;
  Env env;
  const char* rule = "";   // which rule fired (Stepped only)
  std::string reason;      // Stuck only

  static StepResult stepped(ExprPtr e, Env env, const char* rule) {
    return {Kind::Stepped, std::move(e), std::move(env), rule, {}};
  }
  static StepResult value(ExprPtr e, Env env) {
    return {Kind::Value, std::move(e), std::move(env), "", {}};
  }
  static StepResult stuck(std::string reason, ExprPtr e, Env env) {
    return {Kind::Stuck, std::move(e), std::move(env), "", std::move(reason)};
  }
};

struct EvalOutcome {
  enum class Kind { Converged, Crashed, Unreachable, FuelExhausted };
  Kind kind = Kind::FuelExhausted;
  ExprPtr value;  // final expression (the value for Converged)
  Env env;
  std::string note;

  bool converged() const { return kind == Kind::Converged; }
  bool crashed() const { return kind == Kind::Crashed; }
  bool unreachable() const { return kind == Kind::Unreachable; }
  bool out_of_fuel() const { return kind == Kind::FuelExhausted; }
};

// Values: constructor applications, integer literals, lambdas, exceptions,
// and return.
bool is_value(const ExprPtr& e);

constexpr int kDefaultFuel = 10000;

using StepTrace = std::vector<std::pair<const char*, size_t>>;

// One deterministic reduction step. Exceptions propagate one context layer
// per step; readTVar/writeTVar leave stored expressions unevaluated.
StepResult step(const ExprPtr& e, const Env& env, const FunMap& funs);

// Iterated step with a fuel bound. Stuck configurations (possible only on
// ill-typed input) report FuelExhausted with a note, since a term that cannot
// reach a value counts as diverging.
EvalOutcome eval(const ExprPtr& e, const Env& env, const FunMap& funs,
                 int fuel = kDefaultFuel, StepTrace* trace = nullptr);

// Deep evaluation of a pure expression: WHNF, then constructor arguments and
// return payloads recursively. Lambdas stay opaque.
EvalOutcome force_deep(const ExprPtr& e, const Env& env, const FunMap& funs,
                       int fuel = kDefaultFuel);

// The store as one expression: the tuple of contents in declaration order
// (one TVar collapses to the bare content, none to ()).
ExprPtr env_tuple(const Env& env);

// Inverse of env_tuple against the declared TVars. The expression must be a
// literal tuple of matching arity (or any pure expression for a single TVar)
// with pure components.
Env tuple_env(const ExprPtr& e, const std::vector<TVarDecl>& decls);

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace stmcheck
