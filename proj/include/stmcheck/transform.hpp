#pragma once

#include <utility>
#include <vector>

#include "stmcheck/ast.hpp"

namespace stmcheck {

struct TransformError : std::runtime_error {
  explicit TransformError(const std::string& msg) : std::runtime_error(msg) {}
};

// Purifies an STM expression into an env-tuple-passing function. `tvars` is
// the program's TVar order. Requires type annotations on STM-typed nodes and
// an orElse-free input; the output carries no annotations.
ExprPtr t_expr(const ExprPtr& e, const std::vector<std::string>& tvars);

// Rewrites an STM operation contract into the function contract matched by
// t_expr output: ||x:c1 <> c2|| c becomes x:c1 -> (c, c2).
ContractPtr t_contract(const ContractPtr& c);

// Type translation for purified expressions: Stm a becomes env -> (a, env).
Type t_type(const Type& t, const Type& env_type);

// All orElse-free variants of e, deduplicated, left alternatives first.
// Throws when more than `cap` variants would be produced.
std::vector<ExprPtr> gamma_expand(const ExprPtr& e, size_t cap = 64);

// The STM contract ||c <> c|| Any where c states that the invariant holds of
// the TVar tuple. Self-contained invariant bodies are inlined into the
// predicate; bodies calling other functions stay as a call.
ContractPtr invariant_to_contract(const std::string& inv, const Program& p);

// Lambda-closes a transaction body over its free variables and arrows the
// given contracts onto the final STM contract.
std::pair<ExprPtr, ContractPtr> close_transaction(
    const ExprPtr& body,
    const std::vector<std::pair<std::string, ContractPtr>>& free_contracts,
    const ContractPtr& stm_contract);

// Per-function specialization of TVar-typed parameters; one definition per
// assignment of declared TVars to parameters. Call sites are not rewritten.
std::vector<FunctionDef> specialize_tvar_args(const FunctionDef& def, const Program& p);

// Whole-program specialization: replaces every TVar-parameterized function by
// its specializations and rewrites all call sites `f t...` to `f_t...`.
Program specialize_tvar_params(const Program& p);

// Structural copy with all type annotations dropped.
ExprPtr erase_types(const ExprPtr& e);

}  // namespace stmcheck
