#include "stmcheck/arith.hpp"

#include <algorithm>
#include <numeric>
#include <variant>

#include "stmcheck/pretty.hpp"

namespace stmcheck {

Tri tri_not(Tri t) {
  if (t == Tri::True) return Tri::False;
  if (t == Tri::False) return Tri::True;
  return Tri::Unknown;
}

Tri tri_and(Tri a, Tri b) {
  if (a == Tri::False || b == Tri::False) return Tri::False;
  if (a == Tri::True && b == Tri::True) return Tri::True;
  return Tri::Unknown;
}

Tri tri_or(Tri a, Tri b) {
  if (a == Tri::True || b == Tri::True) return Tri::True;
  if (a == Tri::False && b == Tri::False) return Tri::False;
  return Tri::Unknown;
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr long long kCoeffCap = 1000000000000000LL;

bool add_ll(long long a, long long b, long long* out) {
  if (__builtin_add_overflow(a, b, out)) return false;
  return *out < kCoeffCap && *out > -kCoeffCap;
}

bool mul_ll(long long a, long long b, long long* out) {
  if (__builtin_mul_overflow(a, b, out)) return false;
  return *out < kCoeffCap && *out > -kCoeffCap;
}

}  // namespace

PathCondition::PathCondition(bool linear_arith) : linear_(linear_arith) {
  true_id_ = intern(true_con());
  false_id_ = intern(false_con());
}

int PathCondition::find(int i) const {
  while (parent_[i] != i) {
    parent_[i] = parent_[parent_[i]];
    i = parent_[i];
  }
  return i;
}

void PathCondition::union_ids(int a, int b) const {
  a = find(a);
  b = find(b);
  if (a != b) parent_[a] = b;
}

int PathCondition::intern(const ExprPtr& e) const {
  auto fresh = [&](std::string op, std::vector<int> kids) {
    std::string sig = op;
    for (int k : kids) sig += "," + std::to_string(k);
    auto it = node_ids_.find(sig);
    if (it != node_ids_.end()) return it->second;
    int id = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{std::move(op), std::move(kids)});
    reps_.push_back(e);
    parent_.push_back(id);
    node_ids_[sig] = id;
    return id;
  };
  return std::visit(
      overloaded{
          [&](const Expr::Var& n) { return fresh("var:" + n.name, {}); },
          [&](const Expr::FunRef& n) { return fresh("funref:" + n.name, {}); },
          [&](const Expr::IntLit& n) {
            return fresh("int:" + std::to_string(n.value), {});
          },
          [&](const Expr::Con& n) {
            std::vector<int> kids;
            kids.reserve(n.args.size());
            for (const auto& a : n.args) kids.push_back(intern(a));
            return fresh("con:" + n.name, std::move(kids));
          },
          [&](const Expr::Prim& n) {
            std::vector<int> kids;
            kids.reserve(n.args.size());
            for (const auto& a : n.args) kids.push_back(intern(a));
            return fresh(std::string("prim:") + prim_name(n.op), std::move(kids));
          },
          [&](const Expr::App& n) {
            return fresh("app", {intern(n.fn), intern(n.arg)});
          },
          [&](const auto&) {
            // Binders and STM forms are opaque; identical prints share an id.
            return fresh("opaque:" + pretty_expr(e), {});
          },
      },
      e->node);
}

void PathCondition::closure() const {
  if (inconsistent_) return;
  bool changed = true;
  while (changed && !inconsistent_) {
    changed = false;

    // Congruence: nodes with identical op and canonical children coincide.
    std::map<std::string, int> sig;
    for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) {
      if (nodes_[i].kids.empty()) continue;
      std::string s = nodes_[i].op;
      for (int k : nodes_[i].kids) s += "," + std::to_string(find(k));
      auto [it, fresh] = sig.emplace(s, i);
      if (!fresh && find(it->second) != find(i)) {
        union_ids(i, it->second);
        changed = true;
      }
    }

    // Constructor shapes: one constructor per class; same constructor
    // identifies the arguments pairwise.
    std::map<int, std::pair<std::string, std::vector<int>>> shape;
    auto consider = [&](int id, const std::string& con,
                        const std::vector<int>& kids) {
      int r = find(id);
      auto it = shape.find(r);
      if (it == shape.end()) {
        shape.emplace(r, std::make_pair(con, kids));
        return;
      }
      if (it->second.first != con || it->second.second.size() != kids.size()) {
        inconsistent_ = true;
        return;
      }
      for (size_t j = 0; j < kids.size(); ++j) {
        if (find(kids[j]) != find(it->second.second[j])) {
          union_ids(kids[j], it->second.second[j]);
          changed = true;
        }
      }
    };
    for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) {
      if (nodes_[i].op.rfind("con:", 0) == 0)
        consider(i, nodes_[i].op.substr(4), nodes_[i].kids);
    }
    for (const auto& [id, cf] : con_facts_) {
      auto it = con_fact_args_.find(id);
      consider(id, cf.con, it == con_fact_args_.end() ? std::vector<int>{} : it->second);
      if (inconsistent_) return;
    }

    // At most one integer constant per class.
    std::map<int, long long> vals;
    for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) {
      if (nodes_[i].op.rfind("int:", 0) != 0) continue;
      long long v = std::stoll(nodes_[i].op.substr(4));
      auto [it, fresh] = vals.emplace(find(i), v);
      if (!fresh && it->second != v) {
        inconsistent_ = true;
        return;
      }
    }

    for (const auto& [a, b] : diseqs_) {
      if (find(a) == find(b)) {
        inconsistent_ = true;
        return;
      }
    }
  }
}

void PathCondition::note_mentions(const ExprPtr& e) {
  for (const auto& v : free_vars(e)) mentioned_.insert(v);
}

void PathCondition::record_leaf_fact(const ExprPtr& e, bool value) {
  bool_facts_.push_back(BoolFact{e, value});
  union_ids(intern(e), value ? true_id_ : false_id_);
  if (const auto* p = e->as<Expr::Prim>()) {
    if (p->op == PrimTag::Eq) {
      if (value)
        union_ids(intern(p->args[0]), intern(p->args[1]));
      else
        diseqs_.emplace_back(intern(p->args[0]), intern(p->args[1]));
    }
  }
}

void PathCondition::assume_bool(const ExprPtr& e, bool value) {
  if (inconsistent_) return;
  note_mentions(e);
  if (const auto* p = e->as<Expr::Prim>()) {
    switch (p->op) {
      case PrimTag::Not:
        assume_bool(p->args[0], !value);
        return;
      case PrimTag::And:
        if (value) {
          assume_bool(p->args[0], true);
          assume_bool(p->args[1], true);
          return;
        }
        break;
      case PrimTag::Or:
        if (!value) {
          assume_bool(p->args[0], false);
          assume_bool(p->args[1], false);
          return;
        }
        break;
      default:
        break;
    }
  }
  if (const auto* c = e->as<Expr::Con>()) {
    if (c->name == "True" && !value) inconsistent_ = true;
    if (c->name == "False" && value) inconsistent_ = true;
    return;
  }
  record_leaf_fact(e, value);
  closure();
  if (linear_ && !inconsistent_ && rows_unsat(fact_rows())) inconsistent_ = true;
}

void PathCondition::assume_pattern(const ExprPtr& scrutinee,
                                   const std::string& con,
                                   const std::vector<ExprPtr>& args) {
  if (inconsistent_) return;
  note_mentions(scrutinee);
  for (const auto& a : args) note_mentions(a);
  int id = intern(scrutinee);
  std::vector<int> arg_ids;
  arg_ids.reserve(args.size());
  for (const auto& a : args) arg_ids.push_back(intern(a));
  if (args.empty()) {
    // Zero-argument patterns coincide with the literal constructor.
    union_ids(id, intern(stmcheck::con(con, {})));
  }
  auto it = con_facts_.find(id);
  if (it == con_facts_.end()) {
    con_facts_.emplace(id, ConFact{con, args});
    con_fact_args_.emplace(id, std::move(arg_ids));
  } else if (it->second.con != con || con_fact_args_[id].size() != arg_ids.size()) {
    inconsistent_ = true;
    return;
  } else {
    for (size_t i = 0; i < arg_ids.size(); ++i)
      union_ids(arg_ids[i], con_fact_args_[id][i]);
  }
  closure();
  if (linear_ && !inconsistent_ && rows_unsat(fact_rows())) inconsistent_ = true;
}

std::optional<PathCondition::ConFact> PathCondition::constructor_of(
    const ExprPtr& e) const {
  if (inconsistent_) return std::nullopt;
  closure();
  int r = find(intern(e));
  for (const auto& [id, cf] : con_facts_)
    if (find(id) == r) return cf;
  for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) {
    if (find(i) != r || nodes_[i].op.rfind("con:", 0) != 0) continue;
    ConFact cf;
    cf.con = nodes_[i].op.substr(4);
    for (int k : nodes_[i].kids) cf.args.push_back(reps_[k]);
    return cf;
  }
  return std::nullopt;
}

// ---- linear reasoning -------------------------------------------------------

PathCondition::LinForm PathCondition::linearize(const ExprPtr& e) const {
  LinForm out;
  if (const auto* i = e->as<Expr::IntLit>()) {
    out.constant = i->value;
    return out;
  }
  if (const auto* p = e->as<Expr::Prim>()) {
    if (p->op == PrimTag::Add || p->op == PrimTag::Sub) {
      LinForm a = linearize(p->args[0]);
      LinForm b = linearize(p->args[1]);
      long long sgn = p->op == PrimTag::Add ? 1 : -1;
      out = a;
      out.ok = a.ok && b.ok;
      for (const auto& [k, v] : b.coeffs) {
        long long scaled, sum;
        if (!mul_ll(sgn, v, &scaled) || !add_ll(out.coeffs[k], scaled, &sum))
          out.ok = false;
        else
          out.coeffs[k] = sum;
      }
      long long c;
      if (!mul_ll(sgn, b.constant, &c) || !add_ll(out.constant, c, &out.constant))
        out.ok = false;
      for (auto it = out.coeffs.begin(); it != out.coeffs.end();)
        it = it->second == 0 ? out.coeffs.erase(it) : std::next(it);
      return out;
    }
    if (p->op == PrimTag::Mul) {
      LinForm a = linearize(p->args[0]);
      LinForm b = linearize(p->args[1]);
      const LinForm* scalar = a.coeffs.empty() && a.ok ? &a : nullptr;
      const LinForm* other = &b;
      if (!scalar && b.coeffs.empty() && b.ok) {
        scalar = &b;
        other = &a;
      }
      if (scalar && other->ok) {
        for (const auto& [k, v] : other->coeffs) {
          long long scaled;
          if (!mul_ll(v, scalar->constant, &scaled)) {
            out.ok = false;
            break;
          }
          if (scaled != 0) out.coeffs[k] = scaled;
        }
        if (out.ok && !mul_ll(other->constant, scalar->constant, &out.constant))
          out.ok = false;
        if (out.ok) return out;
      }
      out = LinForm{};
    }
  }
  int r = find(intern(e));
  if (auto v = class_int_value(r)) {
    out.constant = *v;
    return out;
  }
  out.coeffs[r] = 1;
  return out;
}

std::optional<long long> PathCondition::class_int_value(int root) const {
  for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) {
    if (find(i) == root && nodes_[i].op.rfind("int:", 0) == 0)
      return std::stoll(nodes_[i].op.substr(4));
  }
  return std::nullopt;
}

namespace {

// a - b + shift >= 0 as a row; nullopt when the forms overflowed.
std::optional<PathCondition::LinForm> diff_row(PathCondition::LinForm a,
                                               const PathCondition::LinForm& b,
                                               long long shift) {
  if (!a.ok || !b.ok) return std::nullopt;
  for (const auto& [k, v] : b.coeffs) {
    long long sum;
    if (!add_ll(a.coeffs[k], -v, &sum)) return std::nullopt;
    a.coeffs[k] = sum;
  }
  long long c;
  if (!add_ll(a.constant, -b.constant, &c)) return std::nullopt;
  if (!add_ll(c, shift, &c)) return std::nullopt;
  a.constant = c;
  for (auto it = a.coeffs.begin(); it != a.coeffs.end();)
    it = it->second == 0 ? a.coeffs.erase(it) : std::next(it);
  return a;
}

void normalize_row(PathCondition::LinForm& r) {
  long long g = std::abs(r.constant);
  for (const auto& [k, v] : r.coeffs) g = std::gcd(g, std::abs(v));
  if (g > 1) {
    // Integer-sound floor division for the constant of a >= 0 row.
    for (auto& [k, v] : r.coeffs) v /= g;
    long long c = r.constant;
    r.constant = c >= 0 ? c / g : -(((-c) + g - 1) / g);
  }
}

}  // namespace

std::vector<PathCondition::Row> PathCondition::fact_rows() const {
  std::vector<Row> rows;
  for (const auto& f : bool_facts_) {
    const auto* p = f.expr->as<Expr::Prim>();
    if (!p || p->args.size() != 2) continue;
    LinForm a = linearize(p->args[0]);
    LinForm b = linearize(p->args[1]);
    auto push = [&](const LinForm& x, const LinForm& y, long long shift) {
      if (auto r = diff_row(x, y, shift)) rows.push_back(*r);
    };
    switch (p->op) {
      case PrimTag::Gt:
        f.value ? push(a, b, -1) : push(b, a, 0);
        break;
      case PrimTag::Ge:
        f.value ? push(a, b, 0) : push(b, a, -1);
        break;
      case PrimTag::Lt:
        f.value ? push(b, a, -1) : push(a, b, 0);
        break;
      case PrimTag::Le:
        f.value ? push(b, a, 0) : push(a, b, -1);
        break;
      case PrimTag::Eq:
        if (f.value) {
          push(a, b, 0);
          push(b, a, 0);
        }
        break;
      default:
        break;
    }
  }
  return rows;
}

bool PathCondition::rows_unsat(std::vector<Row> rows) {
  constexpr size_t kRowCap = 400;
  for (auto& r : rows) normalize_row(r);
  while (true) {
    if (rows.size() > kRowCap) return false;
    int pivot = -1;
    for (const auto& r : rows) {
      if (!r.coeffs.empty()) {
        pivot = r.coeffs.begin()->first;
        break;
      }
    }
    if (pivot < 0) {
      for (const auto& r : rows)
        if (r.constant < 0) return true;
      return false;
    }
    std::vector<Row> pos, neg, rest;
    for (auto& r : rows) {
      auto it = r.coeffs.find(pivot);
      if (it == r.coeffs.end())
        rest.push_back(std::move(r));
      else if (it->second > 0)
        pos.push_back(std::move(r));
      else
        neg.push_back(std::move(r));
    }
    if (pos.empty() || neg.empty()) {
      rows = std::move(rest);
      continue;
    }
    for (const auto& pr : pos) {
      for (const auto& nr : neg) {
        long long pa = pr.coeffs.at(pivot);
        long long nb = -nr.coeffs.at(pivot);
        Row combo;
        bool ok = true;
        auto accumulate = [&](const Row& src, long long scale) {
          for (const auto& [k, v] : src.coeffs) {
            if (k == pivot) continue;
            long long scaled, sum;
            if (!mul_ll(v, scale, &scaled) ||
                !add_ll(combo.coeffs[k], scaled, &sum)) {
              ok = false;
              return;
            }
            combo.coeffs[k] = sum;
          }
          long long scaled, sum;
          if (!mul_ll(src.constant, scale, &scaled) ||
              !add_ll(combo.constant, scaled, &sum)) {
            ok = false;
            return;
          }
          combo.constant = sum;
        };
        accumulate(pr, nb);
        if (ok) accumulate(nr, pa);
        if (!ok) continue;
        for (auto it = combo.coeffs.begin(); it != combo.coeffs.end();)
          it = it->second == 0 ? combo.coeffs.erase(it) : std::next(it);
        normalize_row(combo);
        rest.push_back(std::move(combo));
      }
    }
    rows = std::move(rest);
  }
}

bool PathCondition::entails_unsat(std::vector<Row> extra) const {
  std::vector<Row> rows = fact_rows();
  for (auto& r : extra) rows.push_back(std::move(r));
  return rows_unsat(std::move(rows));
}

// ---- goal deciding -----------------------------------------------------------

Tri PathCondition::decide_cmp(PrimTag op, const ExprPtr& a,
                              const ExprPtr& b) const {
  if (!linear_) return Tri::Unknown;
  LinForm la = linearize(a);
  LinForm lb = linearize(b);
  if (!la.ok || !lb.ok) return Tri::Unknown;
  // Express the goal as lhs - rhs + shift >= 0.
  const LinForm* lhs = &la;
  const LinForm* rhs = &lb;
  long long shift = 0;
  switch (op) {
    case PrimTag::Gt: shift = -1; break;
    case PrimTag::Ge: shift = 0; break;
    case PrimTag::Lt: lhs = &lb; rhs = &la; shift = -1; break;
    case PrimTag::Le: lhs = &lb; rhs = &la; shift = 0; break;
    default: return Tri::Unknown;
  }
  auto goal = diff_row(*lhs, *rhs, shift);
  // Negation of (g >= 0) over integers: -g - 1 >= 0.
  auto neg = diff_row(LinForm{}, *lhs, -shift - 1);
  if (neg) {
    for (const auto& [k, v] : rhs->coeffs) {
      long long sum;
      if (!add_ll(neg->coeffs[k], v, &sum)) {
        neg.reset();
        break;
      }
      neg->coeffs[k] = sum;
    }
    if (neg) {
      long long c;
      if (!add_ll(neg->constant, rhs->constant, &c))
        neg.reset();
      else
        neg->constant = c;
    }
    if (neg)
      for (auto it = neg->coeffs.begin(); it != neg->coeffs.end();)
        it = it->second == 0 ? neg->coeffs.erase(it) : std::next(it);
  }
  if (goal && goal->coeffs.empty()) return goal->constant >= 0 ? Tri::True : Tri::False;
  if (neg && entails_unsat({*neg})) return Tri::True;
  if (goal && entails_unsat({*goal})) return Tri::False;
  return Tri::Unknown;
}

Tri PathCondition::decide_eq(const ExprPtr& a, const ExprPtr& b) const {
  int ia = find(intern(a));
  int ib = find(intern(b));
  if (ia == ib) return Tri::True;
  auto ca = constructor_of(a);
  auto cb = constructor_of(b);
  if (ca && cb && (ca->con != cb->con)) return Tri::False;
  auto va = class_int_value(ia);
  auto vb = class_int_value(ib);
  if (va && vb) return *va == *vb ? Tri::True : Tri::False;
  for (const auto& [x, y] : diseqs_) {
    int fx = find(x), fy = find(y);
    if ((fx == ia && fy == ib) || (fx == ib && fy == ia)) return Tri::False;
  }
  if (!linear_) return Tri::Unknown;
  LinForm la = linearize(a);
  LinForm lb = linearize(b);
  if (la.ok && lb.ok) {
    auto diff = diff_row(la, lb, 0);
    if (diff && diff->coeffs.empty())
      return diff->constant == 0 ? Tri::True : Tri::False;
    auto above = diff_row(la, lb, -1);  // a - b - 1 >= 0  (a > b)
    auto below = diff_row(lb, la, -1);  // b - a - 1 >= 0  (a < b)
    if (above && below && entails_unsat({*above}) && entails_unsat({*below}))
      return Tri::True;
    if (diff) {
      auto diff2 = diff_row(lb, la, 0);
      if (diff2) {
        std::vector<Row> both{*diff, *diff2};
        if (entails_unsat(both)) return Tri::False;
      }
    }
  }
  return Tri::Unknown;
}

Tri PathCondition::decide(const ExprPtr& goal) const {
  if (inconsistent_) return Tri::True;
  closure();
  if (inconsistent_) return Tri::True;
  if (const auto* c = goal->as<Expr::Con>()) {
    if (c->name == "True") return Tri::True;
    if (c->name == "False") return Tri::False;
    return Tri::Unknown;
  }
  if (const auto* p = goal->as<Expr::Prim>()) {
    Tri t = Tri::Unknown;
    switch (p->op) {
      case PrimTag::Not:
        t = tri_not(decide(p->args[0]));
        break;
      case PrimTag::And:
        t = tri_and(decide(p->args[0]), decide(p->args[1]));
        break;
      case PrimTag::Or:
        t = tri_or(decide(p->args[0]), decide(p->args[1]));
        break;
      case PrimTag::Eq:
        t = decide_eq(p->args[0], p->args[1]);
        break;
      case PrimTag::Gt:
      case PrimTag::Ge:
      case PrimTag::Lt:
      case PrimTag::Le:
        t = decide_cmp(p->op, p->args[0], p->args[1]);
        break;
      default:
        break;
    }
    if (t != Tri::Unknown) return t;
  }
  int r = find(intern(goal));
  if (r == find(true_id_)) return Tri::True;
  if (r == find(false_id_)) return Tri::False;
  if (auto cf = constructor_of(goal)) {
    if (cf->con == "True") return Tri::True;
    if (cf->con == "False") return Tri::False;
  }
  return Tri::Unknown;
}

Tri arith_decide(const ExprPtr& goal, const PathCondition& pc) {
  return pc.decide(goal);
}

}  // namespace stmcheck
