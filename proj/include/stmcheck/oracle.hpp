#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "stmcheck/ast.hpp"
#include "stmcheck/interp.hpp"

namespace stmcheck {

struct OracleConfig {
  int eval_fuel = kDefaultFuel;  // evaluator budget per sample
  int samples = 200;             // total sampling budget
  std::uint64_t seed = 0;
  int int_window = 3;   // systematic integers in [-w, w], zero-centered
  int size_bound = 4;   // structural budget: lists up to length 3
};

// Testing approximation of contract satisfaction. Holds is definite only
// when the bounded sample space was covered in full; an uncovered space with
// no counterexample stays Inconclusive.
struct SatVerdict {
  enum class Kind { Holds, Violated, Inconclusive };
  Kind kind = Kind::Inconclusive;
  bool exhaustive = false;
  std::string witness;  // Violated: rendered bindings
  std::vector<std::pair<std::string, ExprPtr>> witness_bindings;
  std::string reason;

  bool holds() const { return kind == Kind::Holds; }
  bool violated() const { return kind == Kind::Violated; }
};

// Bounded deterministic value stream for a type: systematic zero-centered
// enumeration first, then seeded random values up to `limit`. `exhaustive`
// reports whether the systematic space fit inside the limit untruncated.
std::vector<ExprPtr> enumerate_values(const Type& t, const Program& prog,
                                      const OracleConfig& cfg, size_t limit,
                                      bool* exhaustive = nullptr);

// First enumerated value of type t accepted by the contract; null when the
// bounded search finds none.
ExprPtr generate_inhabitant(const ContractPtr& c, const Type& t, const Program& prog,
                            const FunMap& funs, const OracleConfig& cfg = {});

// Checks e against c by evaluation. `funs` resolves FunRefs in e, in the
// contract predicates, and in generated arguments; `ty` is e's type and
// drives the samplers. STM expressions are checked per orElse variant.
SatVerdict satisfies_oracle(const ExprPtr& e, const ContractPtr& c, const Type& ty,
                            const Program& prog, const FunMap& funs,
                            const OracleConfig& cfg = {});

}  // namespace stmcheck
