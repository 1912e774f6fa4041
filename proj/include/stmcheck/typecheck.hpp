#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stmcheck/ast.hpp"

namespace stmcheck {

class TypeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The typechecked program: every expression node annotated with its type.
struct CheckedProgram {
  Program program;
  // Per transaction: parameter types in declaration order and the result
  // payload type (the a of STM a).
  std::map<std::string, std::vector<Type>> transaction_params;
  std::map<std::string, Type> transaction_results;
};

// Validates declarations, requires a top-level signature per function, checks
// bodies monomorphically (BAD/UNR act as a bottom type), enforces pure
// writeTVar/return payloads, and annotates every node. Throws TypeError.
CheckedProgram check_program(const Program& p);

// Re-annotates a single expression against an optional expected type, with
// the given variables in scope. Used for closed transaction variants and
// transformed definitions.
ExprPtr annotate_expr(const ExprPtr& e, const std::map<std::string, Type>& scope,
                      const Program& p, const std::optional<Type>& expected = {});

// The node's annotated type; throws when the annotation is missing.
Type type_of(const ExprPtr& e);

bool is_stm_typed(const ExprPtr& e);

}  // namespace stmcheck
