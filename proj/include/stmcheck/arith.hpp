#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "stmcheck/ast.hpp"

namespace stmcheck {

enum class Tri { False = 0, True = 1, Unknown = 2 };

Tri tri_not(Tri t);
Tri tri_and(Tri a, Tri b);
Tri tri_or(Tri a, Tri b);

// Facts collected along one simplification path: boolean scrutinees with
// their branch value and scrutinee-matches-pattern equations. Queries decide
// goals by congruence closure over the equalities plus linear integer
// reasoning; answers are three-valued and sound. In an inconsistent branch
// every goal decides True (the branch is unreachable).
class PathCondition {
 public:
  // linear_arith=false answers from congruence closure only; comparison goals
  // that need inequality reasoning stay Unknown.
  explicit PathCondition(bool linear_arith = true);

  // e evaluated to the given boolean in this branch.
  void assume_bool(const ExprPtr& e, bool value);
  // scrutinee matched K applied to the given argument expressions.
  void assume_pattern(const ExprPtr& scrutinee, const std::string& con,
                      const std::vector<ExprPtr>& args);

  // The recorded facts are mutually unsatisfiable; the branch is dead.
  bool inconsistent() const { return inconsistent_; }

  struct ConFact {
    std::string con;
    std::vector<ExprPtr> args;
  };
  // Constructor shape of e entailed by the facts, if any.
  std::optional<ConFact> constructor_of(const ExprPtr& e) const;

  // Does any recorded fact mention this variable name?
  bool mentions(const std::string& name) const {
    return mentioned_.count(name) != 0;
  }

  Tri decide(const ExprPtr& goal) const;

  struct LinForm {
    std::map<int, long long> coeffs;  // keyed by canonical atom id
    long long constant = 0;
    bool ok = true;  // false when a coefficient overflowed
  };
  // One linear row: sum of coeffs*atoms + constant >= 0.
  using Row = LinForm;

 private:
  struct Node {
    std::string op;
    std::vector<int> kids;
  };

  int intern(const ExprPtr& e) const;
  int find(int i) const;
  void union_ids(int a, int b) const;
  void closure() const;
  void note_mentions(const ExprPtr& e);
  void record_leaf_fact(const ExprPtr& e, bool value);

  LinForm linearize(const ExprPtr& e) const;
  std::optional<long long> class_int_value(int root) const;
  std::vector<Row> fact_rows() const;
  static bool rows_unsat(std::vector<Row> rows);
  bool entails_unsat(std::vector<Row> extra) const;  // facts ∧ extra unsat

  Tri decide_eq(const ExprPtr& a, const ExprPtr& b) const;
  Tri decide_cmp(PrimTag op, const ExprPtr& a, const ExprPtr& b) const;

  mutable std::vector<Node> nodes_;
  mutable std::vector<ExprPtr> reps_;  // first expression seen per id
  mutable std::vector<int> parent_;
  mutable std::map<std::string, int> leaf_ids_;
  mutable std::map<std::string, int> node_ids_;  // creation signature -> id

  std::map<int, ConFact> con_facts_;             // keyed by original id
  mutable std::map<int, std::vector<int>> con_fact_args_;
  struct BoolFact {
    ExprPtr expr;
    bool value;
  };
  std::vector<BoolFact> bool_facts_;
  std::vector<std::pair<int, int>> diseqs_;
  std::set<std::string> mentioned_;
  mutable bool inconsistent_ = false;
  bool linear_ = true;
  int true_id_ = -1;
  int false_id_ = -1;
};

// Three-valued validity of a pure boolean goal under the path condition.
Tri arith_decide(const ExprPtr& goal, const PathCondition& pc);

}  // namespace stmcheck
