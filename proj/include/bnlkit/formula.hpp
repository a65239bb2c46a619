#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace bnlkit {

// Interned name. Used for schema variables and proposition symbols alike.
class Symbol {
 public:
  Symbol() : id_(-1) {}

  static Symbol intern(const std::string& name) {
    auto& t = table();
    std::lock_guard<std::mutex> lock(t.mu);
    auto it = t.ids.find(name);
    if (it != t.ids.end()) return Symbol(it->second);
    int32_t id = static_cast<int32_t>(t.names.size());
    t.names.push_back(name);
    t.ids.emplace(name, id);
    return Symbol(id);
  }

  const std::string& str() const {
    auto& t = table();
    std::lock_guard<std::mutex> lock(t.mu);
    return t.names.at(static_cast<size_t>(id_));
  }

  bool valid() const { return id_ >= 0; }
  int32_t id() const { return id_; }
  bool operator==(const Symbol& o) const { return id_ == o.id_; }
  bool operator!=(const Symbol& o) const { return id_ != o.id_; }
  bool operator<(const Symbol& o) const { return id_ < o.id_; }

 private:
  explicit Symbol(int32_t id) : id_(id) {}
  struct Table {
    std::mutex mu;
    std::vector<std::string> names;
    std::unordered_map<std::string, int32_t> ids;
  };
  static Table& table() {
    static Table t;
    return t;
  }
  int32_t id_;
};

struct SymbolHash {
  size_t operator()(const Symbol& s) const { return static_cast<size_t>(s.id()); }
};

// Immutable formula over {Top, Var, Not, And}. The surface sugar (F, |, ->,
// <->) is rewritten into this core at construction time, so size and depth
// are always measured on the desugared tree.
class Formula {
 public:
  enum class Op : uint8_t { Top, Var, Not, And };

  Formula() = default;

  static Formula top() {
    static Formula t = make(Op::Top, Symbol(), Formula(), Formula());
    return t;
  }
  static Formula var(Symbol s) { return make(Op::Var, s, Formula(), Formula()); }
  static Formula var(const std::string& name) { return var(Symbol::intern(name)); }
  static Formula negate(Formula a) { return make(Op::Not, Symbol(), std::move(a), Formula()); }
  static Formula conj(Formula a, Formula b) { return make(Op::And, Symbol(), std::move(a), std::move(b)); }

  // Sugar.
  static Formula bottom() {
    static Formula b = negate(top());
    return b;
  }
  static Formula disj(Formula a, Formula b) { return negate(conj(negate(a), negate(b))); }
  static Formula implies(Formula a, Formula b) { return disj(negate(std::move(a)), std::move(b)); }
  static Formula iff(Formula a, Formula b) { return conj(implies(a, b), implies(b, a)); }

  bool valid() const { return n_ != nullptr; }
  Op op() const { return n_->op; }
  Symbol var_symbol() const { return n_->var; }
  Formula left() const { return Formula(n_->a); }
  Formula right() const { return Formula(n_->b); }

  bool is_top() const { return valid() && n_->op == Op::Top; }
  bool is_bottom() const { return valid() && n_->op == Op::Not && n_->a->op == Op::Top; }

  // Token count per the size definition: one token per Top, variable
  // occurrence and connective.
  int64_t tokens() const { return n_->tokens; }
  int depth() const { return n_->depth; }
  uint64_t hash() const { return n_->hash; }

  // Structural equality.
  bool equals(const Formula& o) const {
    if (n_ == o.n_) return true;
    if (!n_ || !o.n_) return false;
    if (n_->hash != o.n_->hash || n_->op != o.n_->op) return false;
    switch (n_->op) {
      case Op::Top: return true;
      case Op::Var: return n_->var == o.n_->var;
      case Op::Not: return Formula(n_->a).equals(Formula(o.n_->a));
      case Op::And:
        return Formula(n_->a).equals(Formula(o.n_->a)) && Formula(n_->b).equals(Formula(o.n_->b));
    }
    return false;
  }

  // Direct recursive evaluation; lookup maps a Symbol to its truth value.
  template <typename F>
  bool eval_with(F&& lookup) const {
    switch (n_->op) {
      case Op::Top: return true;
      case Op::Var: return lookup(n_->var);
      case Op::Not: return !Formula(n_->a).eval_with(lookup);
      case Op::And: return Formula(n_->a).eval_with(lookup) && Formula(n_->b).eval_with(lookup);
    }
    return false;
  }

  template <typename F>
  void for_each_var(F&& fn) const {
    switch (n_->op) {
      case Op::Top: return;
      case Op::Var: fn(n_->var); return;
      case Op::Not: Formula(n_->a).for_each_var(fn); return;
      case Op::And:
        Formula(n_->a).for_each_var(fn);
        Formula(n_->b).for_each_var(fn);
        return;
    }
  }

  // Replaces every occurrence of the variables listed in `map` by the mapped
  // formula. Unmapped variables are kept.
  Formula substitute(const std::unordered_map<Symbol, Formula, SymbolHash>& map) const {
    switch (n_->op) {
      case Op::Top: return *this;
      case Op::Var: {
        auto it = map.find(n_->var);
        return it == map.end() ? *this : it->second;
      }
      case Op::Not: return negate(Formula(n_->a).substitute(map));
      case Op::And:
        return conj(Formula(n_->a).substitute(map), Formula(n_->b).substitute(map));
    }
    throw std::logic_error("bad formula op");
  }

  // Folding constructors used by program generators. They perform constant
  // propagation only; user-written formulas are never rewritten.
  static Formula conj_fold(Formula a, Formula b) {
    if (a.is_bottom() || b.is_bottom()) return bottom();
    if (a.is_top()) return b;
    if (b.is_top()) return a;
    return conj(std::move(a), std::move(b));
  }
  static Formula disj_fold(Formula a, Formula b) {
    if (a.is_top() || b.is_top()) return top();
    if (a.is_bottom()) return b;
    if (b.is_bottom()) return a;
    return disj(std::move(a), std::move(b));
  }
  static Formula negate_fold(Formula a) {
    if (a.is_top()) return bottom();
    if (a.is_bottom()) return top();
    if (a.op() == Op::Not) return a.left();
    return negate(std::move(a));
  }
  // Balanced n-ary folds; empty conjunction is Top, empty disjunction Bottom.
  static Formula big_and(std::vector<Formula> xs) { return fold_tree(std::move(xs), true); }
  static Formula big_or(std::vector<Formula> xs) { return fold_tree(std::move(xs), false); }

 private:
  struct Node {
    Op op;
    Symbol var;
    std::shared_ptr<const Node> a, b;
    uint64_t hash;
    int depth;
    int64_t tokens;
  };

  explicit Formula(std::shared_ptr<const Node> n) : n_(std::move(n)) {}

  static Formula make(Op op, Symbol var, Formula a, Formula b) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->var = var;
    n->a = a.n_;
    n->b = b.n_;
    switch (op) {
      case Op::Top:
        n->hash = 0x9e3779b97f4a7c15ull;
        n->depth = 0;
        n->tokens = 1;
        break;
      case Op::Var:
        n->hash = 0xff51afd7ed558ccdull * (static_cast<uint64_t>(var.id()) + 2);
        n->depth = 0;
        n->tokens = 1;
        break;
      case Op::Not:
        n->hash = 0xc4ceb9fe1a85ec53ull ^ (n->a->hash * 31);
        n->depth = n->a->depth + 1;
        n->tokens = n->a->tokens + 1;
        break;
      case Op::And:
        n->hash = 0x2545f4914f6cdd1dull ^ (n->a->hash * 37) ^ (n->b->hash * 41);
        n->depth = std::max(n->a->depth, n->b->depth) + 1;
        n->tokens = n->a->tokens + n->b->tokens + 1;
        break;
    }
    return Formula(std::move(n));
  }

  static Formula fold_tree(std::vector<Formula> xs, bool conjunction) {
    if (xs.empty()) return conjunction ? top() : bottom();
    while (xs.size() > 1) {
      std::vector<Formula> next;
      next.reserve(xs.size() / 2 + 1);
      for (size_t i = 0; i + 1 < xs.size(); i += 2) {
        next.push_back(conjunction ? conj_fold(xs[i], xs[i + 1]) : disj_fold(xs[i], xs[i + 1]));
      }
      if (xs.size() % 2 == 1) next.push_back(xs.back());
      xs = std::move(next);
    }
    return xs[0];
  }

  std::shared_ptr<const Node> n_;
};

}  // namespace bnlkit
