#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>

#include "stmcheck/ast.hpp"
#include "stmcheck/types.hpp"

namespace stmcheck {

// Syntax error carrying a 1-based source position.
class ParseError : public SyntaxError {
 public:
  ParseError(const std::string& msg, int line, int col);
  int line() const { return line_; }
  int col() const { return col_; }

 private:
  int line_;
  int col_;
};

// A parsed source file. Bodies are desugared and case-completed. `locations`
// maps expression nodes that survived desugaring to byte offsets in `text`.
struct SourceUnit {
  std::string path;
  std::string text;
  Program program;
  std::map<const Expr*, size_t> locations;
};

SourceUnit parse(const std::string& text, const std::string& path = "<input>");

// Single-construct entry points for tests and tooling. `functions` lists the
// names to resolve as function references instead of variables. parse_expr
// output is desugared and completed against the built-in constructors only.
ExprPtr parse_expr(const std::string& text, const std::set<std::string>& functions = {});
ContractPtr parse_contract(const std::string& text,
                           const std::set<std::string>& functions = {});
Type parse_type(const std::string& text);

}  // namespace stmcheck
