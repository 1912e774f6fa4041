#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "stmcheck/types.hpp"

namespace stmcheck {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class ExcKind { Bad, Unr };

enum class PrimTag { Add, Sub, Mul, Eq, Gt, Ge, Lt, Le, And, Or, Not };

const char* prim_name(PrimTag op);
int prim_arity(PrimTag op);

// One flat case alternative: K x1 .. xn -> body. Patterns never nest.
struct CaseAlt {
  std::string con;
  std::vector<std::string> binders;
  ExprPtr body;
};

// Surface do-statement: `x <- e` (binder set) or bare `e`.
struct DoStmt {
  std::optional<std::string> binder;
  ExprPtr expr;
};

// Expressions. Immutable after construction; share freely.
// Do and Let are surface-only and removed by desugar(); OrElse and Retry are
// surface forms that survive until checking eliminates them.
struct Expr {
  struct Var { std::string name; };
  struct Con { std::string name; std::vector<ExprPtr> args; };
  struct IntLit { long long value; };
  struct Lam { std::string param; ExprPtr body; };
  struct Exc { ExcKind kind; };
  struct App { ExprPtr fn; ExprPtr arg; };
  struct FunRef { std::string name; };
  struct Case { ExprPtr scrutinee; std::vector<CaseAlt> alts; };
  struct Prim { PrimTag op; std::vector<ExprPtr> args; };
  struct ReadTVar { std::string tvar; };
  struct WriteTVar { std::string tvar; ExprPtr value; };
  struct Bind { ExprPtr left; ExprPtr right; };
  struct Return { ExprPtr value; };
  struct OrElse { ExprPtr left; ExprPtr right; };
  struct Retry {};
  struct Do { std::vector<DoStmt> stmts; };
  struct Let { std::string var; ExprPtr bound; ExprPtr body; };

  using Node = std::variant<Var, Con, IntLit, Lam, Exc, App, FunRef, Case, Prim,
                            ReadTVar, WriteTVar, Bind, Return, OrElse, Retry, Do, Let>;

  Node node;
  std::optional<Type> type;  // filled in by the typechecker

  template <class T>
  const T* as() const { return std::get_if<T>(&node); }
  template <class T>
  bool is() const { return std::holds_alternative<T>(node); }
};

// ---- builders ----------------------------------------------------------

ExprPtr var(std::string name);
ExprPtr con(std::string name, std::vector<ExprPtr> args = {});
ExprPtr intlit(long long v);
ExprPtr lam(std::string param, ExprPtr body);
ExprPtr exc(ExcKind k);
ExprPtr bad();
ExprPtr unr();
ExprPtr app(ExprPtr fn, ExprPtr arg);
ExprPtr apps(ExprPtr fn, const std::vector<ExprPtr>& args);
ExprPtr funref(std::string name);
ExprPtr case_of(ExprPtr scrutinee, std::vector<CaseAlt> alts);
ExprPtr prim(PrimTag op, std::vector<ExprPtr> args);
ExprPtr read_tvar(std::string tvar);
ExprPtr write_tvar(std::string tvar, ExprPtr value);
ExprPtr bind(ExprPtr left, ExprPtr right);
ExprPtr ret(ExprPtr value);
ExprPtr or_else(ExprPtr left, ExprPtr right);
ExprPtr retry();
ExprPtr do_block(std::vector<DoStmt> stmts);
ExprPtr let_in(std::string v, ExprPtr bound, ExprPtr body);
ExprPtr with_type(ExprPtr e, Type t);

ExprPtr true_con();
ExprPtr false_con();
ExprPtr unit_con();
ExprPtr nil_con();
ExprPtr cons(ExprPtr head, ExprPtr tail);
ExprPtr tuple(std::vector<ExprPtr> elems);  // arity 1 returns the element itself

// Tuple constructor name for a given arity: "(,)", "(,,)", ...
std::string tuple_con_name(size_t arity);
bool is_tuple_con_name(const std::string& name, size_t* arity = nullptr);

// Lambda over a tuple pattern: arity 1 binds the name directly, otherwise
// \x -> case x of { (n1,..,nk) -> body } with x fresh.
ExprPtr lam_tuple(const std::vector<std::string>& names, ExprPtr body);

// ---- constructor signatures --------------------------------------------

struct CtorInfo {
  std::string name;
  std::string datatype;
  int arity = 0;
  // Field types; empty when arity is 0 or the declaration gave only an
  // arity. List/tuple constructors are typed specially by the typechecker.
  std::vector<Type> fields;
  bool fields_known = true;
};

// Lookup for constructors: built-ins (Bool, List, Unit, tuples of any arity)
// plus the program's data declarations.
class ConstructorTable {
 public:
  ConstructorTable();
  void declare(const std::string& datatype, std::vector<CtorInfo> ctors);
  const CtorInfo* lookup(const std::string& ctor) const;
  // All constructors of a datatype in declaration order.
  const std::vector<CtorInfo>& of_datatype(const std::string& datatype) const;
  bool has_datatype(const std::string& datatype) const;

 private:
  std::map<std::string, CtorInfo> by_ctor_;
  std::map<std::string, std::vector<CtorInfo>> by_datatype_;
};

// ---- contracts -----------------------------------------------------------

struct Contract;
using ContractPtr = std::shared_ptr<const Contract>;

// Contracts over pure values plus the STM form. Predicates are pure boolean
// expressions over the binder (and enclosing binders).
struct Contract {
  struct Pred { std::string var; ExprPtr pred; };
  struct DepFun { std::string var; ContractPtr domain; ContractPtr codomain; };
  struct Tuple { std::vector<ContractPtr> elems; };
  struct Any {};
  // STM contract: var names the pre-state TVar tuple inside post and result.
  struct StmOp { std::string var; ContractPtr pre; ContractPtr post; ContractPtr result; };

  using Node = std::variant<Pred, DepFun, Tuple, Any, StmOp>;
  Node node;

  template <class T>
  const T* as() const { return std::get_if<T>(&node); }
  template <class T>
  bool is() const { return std::holds_alternative<T>(node); }
};

ContractPtr pred_contract(std::string v, ExprPtr p);
ContractPtr ok_contract();  // {x | True}
ContractPtr depfun_contract(std::string v, ContractPtr dom, ContractPtr cod);
ContractPtr tuple_contract(std::vector<ContractPtr> elems);
ContractPtr any_contract();
ContractPtr stm_contract(std::string v, ContractPtr pre, ContractPtr post, ContractPtr result);

bool is_ok_contract(const Contract& c);

// ---- program -------------------------------------------------------------

struct TVarDecl {
  std::string name;
  Type content;
  ExprPtr init;  // may be null; must be pure when present
};

// TVar-parameterized STM contract attached to a function with TVar-typed
// parameters, one (initial, final) placeholder pair per such parameter.
struct ParamContract {
  std::vector<std::pair<std::string, std::string>> placeholders;
  ExprPtr pre;   // boolean over initial placeholders
  ExprPtr post;  // boolean over initial and final placeholders
  ContractPtr result;
};

struct FunctionDef {
  std::string name;
  std::optional<Type> signature;
  ContractPtr contract;  // may be null
  std::optional<ParamContract> param_contract;
  ExprPtr body;  // full definition as nested lambdas over the parameters
};

struct TransactionDef {
  std::string name;
  // Free variables of the body in first-occurrence order with their contracts.
  std::vector<std::pair<std::string, ContractPtr>> free_vars;
  ExprPtr body;
};

struct DataDecl {
  std::string name;
  std::vector<CtorInfo> ctors;
};

struct Program {
  std::vector<TVarDecl> tvars;  // declaration order is the canonical order
  std::vector<DataDecl> datatypes;
  std::vector<FunctionDef> functions;
  std::optional<std::string> invariant;
  std::vector<TransactionDef> transactions;

  ConstructorTable ctors() const;
  const FunctionDef* find_function(const std::string& name) const;
  const TVarDecl* find_tvar(const std::string& name) const;
  int tvar_index(const std::string& name) const;  // -1 when absent
  std::vector<std::string> tvar_names() const;
  Type tvar_tuple_type() const;  // 1 TVar collapses to the bare content type
};

// ---- operations ----------------------------------------------------------

class SyntaxError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fresh-name supply: appends 'k with a globally increasing k. reset() exists
// so each driver run and each test starts from a known state.
std::string fresh_name(const std::string& base);
void reset_fresh_names(uint64_t next = 1);

// Eliminates Do and Let nodes, innermost first:
//   let x = e' in e      => (\x -> e) e'
//   do { x <- e; S }     => e >>= \x -> do { S }
//   do { e; S }          => e >>= \_ -> do { S }
//   do { e }             => e
// Errors on empty do-blocks and do-blocks ending in a binder statement.
ExprPtr desugar(const ExprPtr& e);

// Adds the missing alternatives of every case with BAD bodies so each case
// covers all constructors of its scrutinee's datatype, in declaration order.
// Errors when alternatives mix datatypes or repeat a constructor.
ExprPtr complete_cases(const ExprPtr& e, const ConstructorTable& ctors);

// Capture-avoiding substitution e[r/x]; binders are renamed with fresh names
// when they would capture free variables of r.
ExprPtr substitute(const ExprPtr& e, const std::string& x, const ExprPtr& r);
ExprPtr substitute_parallel(const ExprPtr& e, const std::map<std::string, ExprPtr>& subst);

// Free variables in first-occurrence order. TVar names and function names are
// not variables.
std::vector<std::string> free_vars(const ExprPtr& e);
bool occurs_free(const ExprPtr& e, const std::string& x);

// True when no STM construct (readTVar, writeTVar, >>=, return, orElse,
// retry) occurs anywhere in e.
bool is_pure(const ExprPtr& e);

// Structural equality ignoring type annotations.
bool expr_equal(const ExprPtr& a, const ExprPtr& b);
// Equality modulo renaming of bound variables.
bool alpha_equal(const ExprPtr& a, const ExprPtr& b);
bool contract_equal(const ContractPtr& a, const ContractPtr& b);
bool contract_alpha_equal(const ContractPtr& a, const ContractPtr& b);

size_t expr_size(const ExprPtr& e);

// Substitution into contract predicates, capture-avoiding w.r.t. contract
// binders.
ContractPtr contract_substitute(const ContractPtr& c, const std::string& x, const ExprPtr& r);

// Rebuild with every child replaced (type annotation preserved).
ExprPtr rebuild(const Expr& original, Expr::Node node);

// Applies fn to every immediate child; returns the original pointer when no
// child changed. Scoping is the caller's concern.
ExprPtr map_children(const ExprPtr& e, const std::function<ExprPtr(const ExprPtr&)>& fn);

}  // namespace stmcheck
