#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stmcheck/ast.hpp"
#include "stmcheck/interp.hpp"
#include "stmcheck/typecheck.hpp"

namespace stmcheck {

struct CheckConfig {
  int fuel = 1000;         // simplifier rewrite budget
  int inline_depth = 3;    // inlinings of one function per call chain
  int samples = 200;       // witness-search budget per variant
  std::uint64_t seed = 0;
  std::size_t gamma_cap = 64;
  bool witness_search = true;
  // Off: facts are still recorded but comparison goals are never decided, so
  // guards like x+1 > x survive simplification. Used by shape tests.
  bool arith = true;
};

enum class VerdictKind { Safe, Unsafe, Unknown };

const char* verdict_name(VerdictKind k);

// One undischarged violation point: the branch decisions guarding it.
struct BadSite {
  std::vector<std::string> path;
};

struct Verdict {
  VerdictKind kind = VerdictKind::Unknown;
  int variants = 1;
  std::optional<std::string> witness;  // Unsafe: confirmed inputs, rendered
  ExprPtr residual;                    // not Safe: simplified form, BAD inside
  std::vector<BadSite> bad_sites;
};

class CheckError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Definition side, e ensured to meet c: violations inside e become BAD.
ExprPtr wrap_ensure(const ExprPtr& e, const ContractPtr& c);
// Use side, e assumed to meet c: the same shape with BAD and UNR swapped.
ExprPtr wrap_assume(const ExprPtr& e, const ContractPtr& c);

// Symbolic simplification: beta, case-of-known-constructor, case-of-case,
// exception propagation, branch pruning under the path condition, and
// bounded inlining from defs. Pure input; meaning-preserving output.
ExprPtr simplify(const ExprPtr& e, const CheckConfig& cfg, const FunMap& defs = {});

bool has_bad(const ExprPtr& e);
// All syntactic BADs with the case decisions on the way to each.
std::vector<BadSite> bad_sites(const ExprPtr& e);

// Checks one transaction against the declared invariant, aggregated over the
// orElse variants of the body: Safe iff every variant simplifies BAD-free,
// Unsafe on an interpreter-confirmed witness, Unknown otherwise.
Verdict check_transaction(const TransactionDef& tx, const CheckedProgram& prog,
                          const CheckConfig& cfg = {});

// One orElse-free variant of a transaction in purified form: the simplified
// env-passing term and the contract the transformation pairs with it.
struct PureVariant {
  ExprPtr expr;
  ContractPtr contract;
};

// What the checker sees before wrapping: the body closed over its declared
// parameters, orElse-expanded, transformed, and simplified.
std::vector<PureVariant> purify_transaction(const TransactionDef& tx,
                                            const CheckedProgram& prog,
                                            const CheckConfig& cfg = {});

// Checks a function definition against its own contract, with every
// contract-carrying callee (including recursive calls) abstracted as a
// constrained parameter. Callees without contracts are inlined.
Verdict modular_check_function(const std::string& name, const CheckedProgram& prog,
                               const CheckConfig& cfg = {});

}  // namespace stmcheck
