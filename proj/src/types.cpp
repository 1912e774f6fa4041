#include "stmcheck/types.hpp"

namespace stmcheck {

namespace {

bool needs_parens_as_arg(const Type& t) {
  switch (t.kind()) {
    case Type::Kind::Fun:
    case Type::Kind::Stm:
    case Type::Kind::TVar:
      return true;
    default:
      return false;
  }
}

}  // namespace

std::string Type::to_string() const {
  switch (kind_) {
    case Kind::Int: return "Int";
    case Kind::Bool: return "Bool";
    case Kind::Unit: return "()";
    case Kind::Bottom: return "Bot";
    case Kind::Data: return name_;
    case Kind::List: return "[" + elem().to_string() + "]";
    case Kind::Tuple: {
      std::string s = "(";
      for (size_t i = 0; i < args_.size(); ++i) {
        if (i) s += ", ";
        s += args_[i].to_string();
      }
      return s + ")";
    }
    case Kind::Fun: {
      std::string lhs = from().to_string();
      if (from().is(Kind::Fun)) lhs = "(" + lhs + ")";
      return lhs + " -> " + to().to_string();
    }
    case Kind::Stm: {
      std::string arg = result().to_string();
      if (needs_parens_as_arg(result())) arg = "(" + arg + ")";
      return "STM " + arg;
    }
    case Kind::TVar: {
      std::string arg = content().to_string();
      if (needs_parens_as_arg(content())) arg = "(" + arg + ")";
      return "TVar " + arg;
    }
  }
  return "?";
}

}  // namespace stmcheck
