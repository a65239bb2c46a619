#pragma once

#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "bnlkit/program.hpp"
#include "bnlkit/sc.hpp"

namespace bnlkit {

// True iff every iteration body is T, Y, !Y or Y & Z.
inline bool is_fully_open(const BnlProgram& p) {
  for (size_t i = 0; i < p.var_count(); ++i) {
    const Formula& f = p.rule(static_cast<int>(i));
    switch (f.op()) {
      case Formula::Op::Top:
      case Formula::Op::Var: break;
      case Formula::Op::Not:
        if (f.left().op() != Formula::Op::Var) return false;
        break;
      case Formula::Op::And:
        if (f.left().op() != Formula::Op::Var || f.right().op() != Formula::Op::Var) return false;
        break;
    }
  }
  return true;
}

struct FullyOpenResult {
  BnlProgram program;
  long long delay = 1;  // d' + 1
};

namespace detail {

struct OpenBuilder {
  const BnlProgram* src;
  BnlProgram out;
  std::set<Symbol> taken;
  int seq = 0;

  // subformula predicate per distinct non-leaf formula
  std::vector<std::pair<Formula, Symbol>> sub_preds;
  std::unordered_map<uint64_t, std::vector<size_t>> sub_index;
  // delay chains: (symbol, k) -> symbol whose value is `symbol` delayed k rounds
  std::map<std::pair<int32_t, int>, Symbol> delays;

  Symbol fresh(const std::string& base) {
    Symbol s = Symbol::intern(base + std::to_string(seq++));
    while (taken.count(s)) s = Symbol::intern(base + std::to_string(seq++));
    taken.insert(s);
    return s;
  }

  // Returns the predicate holding the value of `f` at cycle offset depth(f),
  // creating the subformula predicates below it as needed. Constants are
  // returned as themselves.
  Formula pred_of(const Formula& f) {
    if (f.op() == Formula::Op::Var) return f;
    if (f.is_top()) {
      if (!top_pred.valid()) {
        top_pred = fresh("XT");
        out.declare(top_pred);
        out.set_terminal(top_pred, true);
        out.set_rule(top_pred, Formula::var(top_pred));
      }
      return Formula::var(top_pred);
    }
    auto& bucket = sub_index[f.hash()];
    for (size_t idx : bucket)
      if (sub_preds[idx].first.equals(f)) return Formula::var(sub_preds[idx].second);
    Symbol s = fresh("X");
    bucket.push_back(sub_preds.size());
    sub_preds.emplace_back(f, s);
    out.declare(s);
    out.set_terminal(s, false);
    if (f.op() == Formula::Op::Not) {
      Formula child = pad(pred_of(f.left()), f.left(), f.depth() - 1);
      out.set_rule(s, Formula::negate(child));
    } else {
      Formula l = pad(pred_of(f.left()), f.left(), f.depth() - 1);
      Formula r = pad(pred_of(f.right()), f.right(), f.depth() - 1);
      out.set_rule(s, Formula::conj(l, r));
    }
    return Formula::var(s);
  }

  // Pads `carrier` (the predicate holding `f`, ready at offset depth(f)) with
  // dummy predicates so the returned predicate is ready at offset `target`.
  // Constant carriers need no padding.
  Formula pad(Formula carrier, const Formula& f, int target) {
    if (top_pred.valid() && carrier.op() == Formula::Op::Var && carrier.var_symbol() == top_pred) return carrier;
    int k = target - f.depth();
    if (k <= 0) return carrier;
    Symbol cur = carrier.var_symbol();
    for (int j = 1; j <= k; ++j) {
      auto key = std::make_pair(cur.id(), 1);
      auto it = delays.find(key);
      if (it != delays.end()) {
        cur = it->second;
        continue;
      }
      Symbol d = fresh("D");
      out.declare(d);
      out.set_terminal(d, false);
      out.set_rule(d, Formula::var(cur));
      delays.emplace(key, d);
      cur = d;
    }
    return Formula::var(cur);
  }

  Symbol top_pred;
};

}  // namespace detail

// Rewrites a program so that every iteration body has one of the four open
// shapes, preserving output sequences with delay factor d'+1. Subformula
// predicates are shared by structure; dummy chains synchronize conjunct
// arrival and head-predicate updates; a one-hot counter gates attention.
inline FullyOpenResult to_fully_open(const BnlProgram& p) {
  int dprime = p.measure().depth;

  detail::OpenBuilder b;
  b.src = &p;
  for (Symbol v : p.variables()) b.taken.insert(v);

  // Original variables first, preserving order, roles and terminal clauses.
  for (size_t i = 0; i < p.var_count(); ++i) {
    b.out.declare(p.variables()[i]);
    if (p.terminal(static_cast<int>(i)).has_value())
      b.out.set_terminal(p.variables()[i], *p.terminal(static_cast<int>(i)));
  }

  if (is_fully_open(p)) {
    // Nothing to open: every rule already lands in one round, so the program
    // is its own image with delay 1 plus the trivial length-1 counter.
    for (size_t i = 0; i < p.var_count(); ++i) b.out.set_rule(p.variables()[i], p.rule(static_cast<int>(i)));
    Symbol t0 = b.fresh("Tc");
    b.out.declare(t0);
    b.out.set_terminal(t0, true);
    b.out.set_rule(t0, Formula::var(t0));
    b.out.set_print(p.print());
    b.out.set_attention(p.attention());
    b.out.finalize();
    return {std::move(b.out), 1};
  }

  std::set<Symbol> attention_preds;
  if (!p.attention().external)
    attention_preds.insert(p.attention().predicates.begin(), p.attention().predicates.end());

  // Counter T_0..T_d'.
  std::vector<Symbol> counter;
  for (int i = 0; i <= dprime; ++i) counter.push_back(b.fresh("Tc"));
  for (int i = 0; i <= dprime; ++i) {
    b.out.declare(counter[static_cast<size_t>(i)]);
    b.out.set_terminal(counter[static_cast<size_t>(i)], i == 0);
    b.out.set_rule(counter[static_cast<size_t>(i)],
                   Formula::var(counter[static_cast<size_t>(i == 0 ? dprime : i - 1)]));
  }

  for (size_t i = 0; i < p.var_count(); ++i) {
    Symbol v = p.variables()[i];
    const Formula& body = p.rule(static_cast<int>(i));
    Formula root = b.pad(b.pred_of(body), body, dprime);
    if (attention_preds.count(v)) {
      // Attention predicates update only on the landing tick, so they stay
      // false mid-cycle and fire exactly when the original would.
      b.out.set_rule(v, Formula::conj(Formula::var(counter[static_cast<size_t>(dprime)]), root));
    } else {
      b.out.set_rule(v, root);
    }
  }

  b.out.set_print(p.print());
  if (p.attention().external)
    b.out.set_attention(AttentionSpec::rounds(RoundMap::affine(dprime + 1, 0, p.attention().map)));
  else
    b.out.set_attention(p.attention());
  b.out.finalize();
  return {std::move(b.out), dprime + 1};
}

}  // namespace bnlkit
