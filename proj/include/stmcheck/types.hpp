#pragma once

#include <string>
#include <vector>

namespace stmcheck {

// Monomorphic object-language types. Value-semantic and immutable by
// convention: build once, compare structurally.
//
// Bottom is the type of BAD/UNR standing alone; it unifies with anything.
class Type {
 public:
  enum class Kind { Int, Bool, Unit, List, Tuple, Fun, Stm, TVar, Data, Bottom };

  Type() : kind_(Kind::Bottom) {}

  static Type integer() { return Type(Kind::Int); }
  static Type boolean() { return Type(Kind::Bool); }
  static Type unit() { return Type(Kind::Unit); }
  static Type bottom() { return Type(Kind::Bottom); }
  static Type list(Type elem) { return Type(Kind::List, {std::move(elem)}); }
  static Type tuple(std::vector<Type> elems) { return Type(Kind::Tuple, std::move(elems)); }
  static Type fun(Type from, Type to) { return Type(Kind::Fun, {std::move(from), std::move(to)}); }
  static Type stm(Type result) { return Type(Kind::Stm, {std::move(result)}); }
  static Type tvar(Type content) { return Type(Kind::TVar, {std::move(content)}); }
  static Type data(std::string name) { return Type(Kind::Data, {}, std::move(name)); }

  Kind kind() const { return kind_; }
  const std::string& data_name() const { return name_; }
  const std::vector<Type>& args() const { return args_; }

  const Type& elem() const { return args_[0]; }     // List
  const Type& from() const { return args_[0]; }     // Fun
  const Type& to() const { return args_[1]; }       // Fun
  const Type& result() const { return args_[0]; }   // Stm
  const Type& content() const { return args_[0]; }  // TVar

  bool is(Kind k) const { return kind_ == k; }
  bool is_stm() const { return kind_ == Kind::Stm; }
  bool is_bottom() const { return kind_ == Kind::Bottom; }

  bool operator==(const Type& o) const {
    return kind_ == o.kind_ && name_ == o.name_ && args_ == o.args_;
  }
  bool operator!=(const Type& o) const { return !(*this == o); }

  // True when no Stm or TVar occurs anywhere inside: the type of an
  // expression the interpreter can reduce without a store.
  bool is_pure_type() const {
    if (kind_ == Kind::Stm || kind_ == Kind::TVar) return false;
    for (const Type& a : args_)
      if (!a.is_pure_type()) return false;
    return true;
  }

  std::string to_string() const;

 private:
  explicit Type(Kind k, std::vector<Type> args = {}, std::string name = {})
      : kind_(k), name_(std::move(name)), args_(std::move(args)) {}

  Kind kind_;
  std::string name_;
  std::vector<Type> args_;
};

}  // namespace stmcheck
