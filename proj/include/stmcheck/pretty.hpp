#pragma once

#include <string>

#include "stmcheck/ast.hpp"

namespace stmcheck {

// Canonical surface rendering; parse(pretty_expr(e)) is alpha-equal to e for
// core terms.
std::string pretty_expr(const ExprPtr& e);

// Same, but renders top-level >>= chains with lambda continuations as a
// do-block (the form function bodies are written in).
std::string pretty_expr_do(const ExprPtr& e);

std::string pretty_contract(const ContractPtr& c);

std::string pretty_type(const Type& t);

// Whether the contract's predicates mention `name` free.
bool contract_mentions(const ContractPtr& c, const std::string& name);

}  // namespace stmcheck
