#pragma once

#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "bnlkit/program.hpp"

namespace bnlkit {

// Incremental program construction with stabilization-depth bookkeeping.
// Rules form an acyclic dataflow over predicates (inputs hold their value via
// identity rules), so every predicate's value settles `depth` rounds after
// round 0. The maximum depth is the program's transient time.
class ProgramBuilder {
 public:
  Symbol fresh(const std::string& hint) {
    auto& n = counters_[hint];
    Symbol s;
    do {
      s = Symbol::intern(hint + std::to_string(n++));
    } while (used_.count(s));
    used_.insert(s);
    return s;
  }

  Symbol input(const std::string& name) {
    Symbol s = Symbol::intern(name);
    if (used_.count(s)) throw std::invalid_argument("duplicate input name " + name);
    used_.insert(s);
    prog_.declare(s);
    prog_.set_rule(s, Formula::var(s));
    depth_.emplace(s, 0);
    return s;
  }

  // Materialized predicate: terminal F, rule = formula; value settles one
  // round after its deepest dependency.
  Symbol pred(const std::string& hint, Formula rule, bool terminal_value = false) {
    Symbol s = fresh(hint);
    prog_.declare(s);
    prog_.set_terminal(s, terminal_value);
    prog_.set_rule(s, rule);
    int d = 1 + formula_depth(rule);
    depth_.emplace(s, d);
    max_depth_ = std::max(max_depth_, d);
    return s;
  }

  // Source predicate whose rule is installed later (latches, counters).
  // Excluded from depth bookkeeping; reads see it as depth 0.
  Symbol source(const std::string& hint, bool terminal_value) {
    Symbol s = fresh(hint);
    prog_.declare(s);
    prog_.set_terminal(s, terminal_value);
    depth_.emplace(s, 0);
    pending_.insert(s);
    return s;
  }

  // Input predicate (no terminal clause) whose rule is installed later.
  Symbol input_source(const std::string& name) {
    Symbol s = Symbol::intern(name);
    if (used_.count(s)) throw std::invalid_argument("duplicate input name " + name);
    used_.insert(s);
    prog_.declare(s);
    depth_.emplace(s, 0);
    pending_.insert(s);
    return s;
  }

  void set_source_rule(Symbol s, Formula rule) {
    if (!pending_.count(s)) throw std::logic_error("not a pending source: " + s.str());
    prog_.set_rule(s, rule);
    pending_.erase(s);
  }

  int formula_depth(const Formula& f) const {
    int d = 0;
    f.for_each_var([&](Symbol s) {
      auto it = depth_.find(s);
      if (it == depth_.end()) throw std::logic_error("rule references unknown predicate " + s.str());
      d = std::max(d, it->second);
    });
    return d;
  }

  int depth_of(Symbol s) const { return depth_.at(s); }
  int max_depth() const { return max_depth_; }

  // Monotone ready chain: the returned predicate is false before round k and
  // true from round k on.
  Symbol ready(int k) {
    if (k < 1) throw std::invalid_argument("ready round must be >= 1");
    while (static_cast<int>(chain_.size()) < k) {
      Symbol s = fresh("Rdy");
      prog_.declare(s);
      prog_.set_terminal(s, false);
      prog_.set_rule(s, chain_.empty() ? Formula::top() : Formula::var(chain_.back()));
      depth_.emplace(s, static_cast<int>(chain_.size()) + 1);
      chain_.push_back(s);
    }
    return chain_[static_cast<size_t>(k - 1)];
  }

  BnlProgram finish(std::vector<Symbol> print, AttentionSpec attention) {
    if (!pending_.empty()) throw std::logic_error("pending source predicates without rules");
    prog_.set_print(std::move(print));
    prog_.set_attention(std::move(attention));
    prog_.finalize();
    return std::move(prog_);
  }

  BnlProgram& raw() { return prog_; }

 private:
  BnlProgram prog_;
  std::set<Symbol> used_;
  std::map<std::string, int> counters_;
  std::unordered_map<Symbol, int, SymbolHash> depth_;
  std::set<Symbol> pending_;
  std::vector<Symbol> chain_;
  int max_depth_ = 0;
};

// ---- one-hot digit networks ----
// A digit is represented by beta formulas, one per value; exactly one is true
// on well-formed inputs. Numbers are little-endian digit vectors.

struct DigitNet {
  std::vector<Formula> bit;  // bit[d] <=> digit == d
};

struct UIntNet {
  std::vector<DigitNet> d;  // d[0] = least significant
  size_t width() const { return d.size(); }
};

struct SIntNet {
  Formula positive;  // sign bit: true <=> '+'
  UIntNet mag;
};

namespace nets {

inline DigitNet const_digit(int beta, int v) {
  DigitNet dn;
  dn.bit.reserve(static_cast<size_t>(beta));
  for (int k = 0; k < beta; ++k) dn.bit.push_back(k == v ? Formula::top() : Formula::bottom());
  return dn;
}

inline UIntNet const_uint(int beta, size_t width, long long value) {
  UIntNet u;
  for (size_t i = 0; i < width; ++i) {
    u.d.push_back(const_digit(beta, static_cast<int>(value % beta)));
    value /= beta;
  }
  if (value != 0) throw std::invalid_argument("constant does not fit the width");
  return u;
}

inline UIntNet pad(UIntNet u, int beta, size_t width) {
  while (u.d.size() < width) u.d.push_back(const_digit(beta, 0));
  return u;
}

inline UIntNet trim(UIntNet u, size_t width) {
  u.d.resize(width);
  return u;
}

// Shift toward the most significant end by k digit positions (value * beta^k).
inline UIntNet shift_up(UIntNet u, int beta, size_t k) {
  UIntNet r;
  for (size_t i = 0; i < k; ++i) r.d.push_back(const_digit(beta, 0));
  for (auto& dn : u.d) r.d.push_back(std::move(dn));
  return r;
}

inline UIntNet materialize(ProgramBuilder& b, const UIntNet& u, const std::string& hint) {
  UIntNet r;
  for (size_t i = 0; i < u.d.size(); ++i) {
    DigitNet dn;
    for (size_t k = 0; k < u.d[i].bit.size(); ++k) {
      const Formula& f = u.d[i].bit[k];
      if (f.op() == Formula::Op::Var || f.is_top() || f.is_bottom()) {
        dn.bit.push_back(f);  // already a predicate or a constant
      } else {
        dn.bit.push_back(Formula::var(b.pred(hint, f)));
      }
    }
    r.d.push_back(std::move(dn));
  }
  return r;
}

inline Formula is_zero(const UIntNet& u) {
  std::vector<Formula> fs;
  for (auto& dn : u.d) fs.push_back(dn.bit[0]);
  return Formula::big_and(std::move(fs));
}

// Pairwise digit disjunction: OR over {(n, m) : pred(n, m)} of X[n] ∧ Y[m].
template <typename Pred>
inline Formula digit_pair_or(const DigitNet& x, const DigitNet& y, Pred&& keep) {
  std::vector<Formula> terms;
  int beta = static_cast<int>(x.bit.size());
  for (int n = 0; n < beta; ++n)
    for (int m = 0; m < beta; ++m)
      if (keep(n, m)) terms.push_back(Formula::conj_fold(x.bit[static_cast<size_t>(n)], y.bit[static_cast<size_t>(m)]));
  return Formula::big_or(std::move(terms));
}

struct CmpNets {
  Formula gt, lt;
  Formula eq() const { return Formula::negate_fold(Formula::disj_fold(gt, lt)); }
};

// Digitwise comparison: position predicates record which side has the larger
// digit; the dominance formula checks that every position where Y wins is
// preceded (toward the most significant end) by one where X wins.
inline CmpNets cmp_unsigned(ProgramBuilder& b, UIntNet x, UIntNet y, const std::string& hint) {
  int beta = static_cast<int>(x.d[0].bit.size());
  size_t w = std::max(x.width(), y.width());
  x = pad(std::move(x), beta, w);
  y = pad(std::move(y), beta, w);
  std::vector<Formula> z1, z2;  // index 0 = least significant position
  for (size_t i = 0; i < w; ++i) {
    Formula f1 = digit_pair_or(x.d[i], y.d[i], [](int n, int m) { return n > m; });
    Formula f2 = digit_pair_or(x.d[i], y.d[i], [](int n, int m) { return n < m; });
    z1.push_back(f1.is_bottom() ? f1 : Formula::var(b.pred(hint + "z1_", f1)));
    z2.push_back(f2.is_bottom() ? f2 : Formula::var(b.pred(hint + "z2_", f2)));
  }
  auto dominance = [&](const std::vector<Formula>& win, const std::vector<Formula>& lose) {
    std::vector<Formula> conj;
    for (size_t i = 0; i < w; ++i) {
      std::vector<Formula> higher;
      for (size_t j = i + 1; j < w; ++j) higher.push_back(win[j]);
      conj.push_back(Formula::disj_fold(Formula::negate_fold(lose[i]), Formula::big_or(std::move(higher))));
    }
    std::vector<Formula> any;
    for (size_t i = 0; i < w; ++i) {
      any.push_back(win[i]);
      any.push_back(lose[i]);
    }
    return Formula::conj_fold(Formula::big_and(std::move(conj)), Formula::big_or(std::move(any)));
  };
  CmpNets c;
  c.gt = dominance(z1, z2);
  c.lt = dominance(z2, z1);
  return c;
}

struct AddNets {
  UIntNet sum;                  // materialized
  std::vector<Formula> carry;   // carry[i] = carry out of position i (settled one round before sum)
};

// Carry-lookahead addition: generate/propagate predicates per position, then
// the unrolled carry formula, then the sum digits.
inline AddNets add_unsigned(ProgramBuilder& b, UIntNet x, UIntNet y, const std::string& hint,
                            bool carry_out = true) {
  int beta = static_cast<int>(x.d[0].bit.size());
  size_t w = std::max(x.width(), y.width());
  x = pad(std::move(x), beta, w);
  y = pad(std::move(y), beta, w);
  std::vector<Formula> gen, prop;  // O_{i,0}, O_{i,1}
  for (size_t i = 0; i < w; ++i) {
    Formula g = digit_pair_or(x.d[i], y.d[i], [&](int n, int m) { return n + m >= beta; });
    Formula p = digit_pair_or(x.d[i], y.d[i], [&](int n, int m) { return n + m + 1 >= beta; });
    gen.push_back(g.is_bottom() || g.is_top() ? g : Formula::var(b.pred(hint + "g", g)));
    prop.push_back(p.is_bottom() || p.is_top() ? p : Formula::var(b.pred(hint + "p", p)));
  }
  std::vector<Formula> carry;  // carry[i] = c_{i+1} in 1-based terms
  for (size_t i = 0; i < w; ++i) {
    std::vector<Formula> terms;
    for (size_t j = 0; j <= i; ++j) {
      std::vector<Formula> ps = {gen[j]};
      for (size_t k = j + 1; k <= i; ++k) ps.push_back(prop[k]);
      terms.push_back(Formula::big_and(std::move(ps)));
    }
    Formula c = Formula::big_or(std::move(terms));
    carry.push_back(c.is_bottom() || c.is_top() ? c : Formula::var(b.pred(hint + "c", c)));
  }
  AddNets out;
  out.carry = carry;
  for (size_t i = 0; i < w; ++i) {
    DigitNet dn;
    for (int k = 0; k < beta; ++k) {
      Formula nocarry = digit_pair_or(x.d[i], y.d[i], [&](int n, int m) { return (n + m) % beta == k; });
      Formula f;
      if (i == 0) {
        f = nocarry;
      } else {
        Formula withcarry = digit_pair_or(x.d[i], y.d[i], [&](int n, int m) { return (n + m + 1) % beta == k; });
        f = Formula::disj_fold(Formula::conj_fold(Formula::negate_fold(carry[i - 1]), nocarry),
                               Formula::conj_fold(carry[i - 1], withcarry));
      }
      dn.bit.push_back(f);
    }
    out.sum.d.push_back(std::move(dn));
  }
  if (carry_out) {
    DigitNet top;
    top.bit.push_back(Formula::negate_fold(carry[w - 1]));
    top.bit.push_back(carry[w - 1]);
    for (int k = 2; k < beta; ++k) top.bit.push_back(Formula::bottom());
    out.sum.d.push_back(std::move(top));
  }
  out.sum = materialize(b, out.sum, hint + "s");
  return out;
}

// Borrow-lookahead subtraction; callers guarantee x >= y.
inline UIntNet sub_unsigned(ProgramBuilder& b, UIntNet x, UIntNet y, const std::string& hint) {
  int beta = static_cast<int>(x.d[0].bit.size());
  size_t w = std::max(x.width(), y.width());
  x = pad(std::move(x), beta, w);
  y = pad(std::move(y), beta, w);
  std::vector<Formula> gen, prop;
  for (size_t i = 0; i < w; ++i) {
    Formula g = digit_pair_or(x.d[i], y.d[i], [](int n, int m) { return n < m; });
    Formula p = digit_pair_or(x.d[i], y.d[i], [](int n, int m) { return n <= m; });
    gen.push_back(g.is_bottom() || g.is_top() ? g : Formula::var(b.pred(hint + "bg", g)));
    prop.push_back(p.is_bottom() || p.is_top() ? p : Formula::var(b.pred(hint + "bp", p)));
  }
  std::vector<Formula> borrow;
  for (size_t i = 0; i < w; ++i) {
    std::vector<Formula> terms;
    for (size_t j = 0; j <= i; ++j) {
      std::vector<Formula> ps = {gen[j]};
      for (size_t k = j + 1; k <= i; ++k) ps.push_back(prop[k]);
      terms.push_back(Formula::big_and(std::move(ps)));
    }
    Formula c = Formula::big_or(std::move(terms));
    borrow.push_back(c.is_bottom() || c.is_top() ? c : Formula::var(b.pred(hint + "bb", c)));
  }
  UIntNet out;
  for (size_t i = 0; i < w; ++i) {
    DigitNet dn;
    for (int k = 0; k < beta; ++k) {
      auto md = [&](int v) { return ((v % beta) + beta) % beta; };
      Formula noborrow = digit_pair_or(x.d[i], y.d[i], [&](int n, int m) { return md(n - m) == k; });
      Formula f;
      if (i == 0) {
        f = noborrow;
      } else {
        Formula withborrow = digit_pair_or(x.d[i], y.d[i], [&](int n, int m) { return md(n - m - 1) == k; });
        f = Formula::disj_fold(Formula::conj_fold(Formula::negate_fold(borrow[i - 1]), noborrow),
                               Formula::conj_fold(borrow[i - 1], withborrow));
      }
      dn.bit.push_back(f);
    }
    out.d.push_back(std::move(dn));
  }
  return materialize(b, out, hint + "d");
}

struct SignedAddNets {
  SIntNet result;               // materialized; width = max(inputs)+1
  std::vector<Formula> carry;   // carries of the same-sign branch
};

// Signed addition: same-sign branch adds magnitudes; mixed signs subtract the
// smaller magnitude from the larger, the sign following the larger operand.
// Equal magnitudes with mixed signs give canonical +0.
inline SignedAddNets add_signed(ProgramBuilder& b, const SIntNet& x, const SIntNet& y,
                                const std::string& hint) {
  int beta = static_cast<int>(x.mag.d[0].bit.size());
  size_t w = std::max(x.mag.width(), y.mag.width());
  AddNets sum = add_unsigned(b, x.mag, y.mag, hint + "a");
  CmpNets cmp = cmp_unsigned(b, x.mag, y.mag, hint + "m");
  Formula gtx = Formula::var(b.pred(hint + "gtx", cmp.gt));
  Formula ltx = Formula::var(b.pred(hint + "ltx", cmp.lt));
  UIntNet dxy = sub_unsigned(b, x.mag, y.mag, hint + "xy");
  UIntNet dyx = sub_unsigned(b, y.mag, x.mag, hint + "yx");
  Formula same = Formula::iff(x.positive, y.positive);

  SignedAddNets out;
  out.carry = sum.carry;
  UIntNet res;
  for (size_t i = 0; i <= w; ++i) {
    DigitNet dn;
    for (int k = 0; k < beta; ++k) {
      Formula from_sum = Formula::conj_fold(same, sum.sum.d[i].bit[static_cast<size_t>(k)]);
      Formula sub_pick;
      if (i < w) {
        sub_pick = Formula::disj_fold(
            Formula::conj_fold(ltx, dyx.d[i].bit[static_cast<size_t>(k)]),
            Formula::conj_fold(Formula::negate_fold(ltx), dxy.d[i].bit[static_cast<size_t>(k)]));
      } else {
        sub_pick = k == 0 ? Formula::top() : Formula::bottom();
      }
      Formula from_sub = Formula::conj_fold(Formula::negate_fold(same), sub_pick);
      dn.bit.push_back(Formula::disj_fold(from_sum, from_sub));
    }
    res.d.push_back(std::move(dn));
  }
  out.result.mag = materialize(b, res, hint + "r");
  Formula sign = Formula::disj_fold(
      Formula::conj_fold(same, x.positive),
      Formula::conj_fold(Formula::negate_fold(same),
                         Formula::disj_fold(Formula::conj_fold(gtx, x.positive),
                                            Formula::disj_fold(Formula::conj_fold(ltx, y.positive),
                                                               Formula::conj_fold(Formula::negate_fold(gtx),
                                                                                  Formula::negate_fold(ltx))))));
  out.result.positive = Formula::var(b.pred(hint + "sgn", sign));
  return out;
}

// Multiples table T[d] = x * d for d in [0, beta); width(x)+1 digits each.
inline std::vector<UIntNet> times_digit_table(ProgramBuilder& b, const UIntNet& x, const std::string& hint) {
  int beta = static_cast<int>(x.d[0].bit.size());
  size_t w1 = x.width() + 1;
  std::vector<UIntNet> powers;  // x * 2^j
  powers.push_back(pad(x, beta, w1));
  for (int j = 1; (1 << j) < beta; ++j) {
    AddNets a = add_unsigned(b, powers.back(), powers.back(), hint + "pw" + std::to_string(j), false);
    powers.push_back(pad(std::move(a.sum), beta, w1));
  }
  std::vector<UIntNet> table;
  for (int d = 0; d < beta; ++d) {
    std::vector<UIntNet> parts;
    for (int j = 0; (1 << j) <= d; ++j)
      if (d & (1 << j)) parts.push_back(powers[static_cast<size_t>(j)]);
    if (parts.empty()) {
      table.push_back(const_uint(beta, w1, 0));
      continue;
    }
    while (parts.size() > 1) {
      std::vector<UIntNet> next;
      for (size_t i = 0; i + 1 < parts.size(); i += 2) {
        AddNets a = add_unsigned(b, parts[i], parts[i + 1], hint + "t" + std::to_string(d), false);
        next.push_back(pad(std::move(a.sum), beta, w1));
      }
      if (parts.size() % 2 == 1) next.push_back(parts.back());
      parts = std::move(next);
    }
    table.push_back(trim(std::move(parts[0]), w1));
  }
  return table;
}

inline std::vector<Formula> tap_of(const UIntNet& u) {
  std::vector<Formula> bits;
  for (size_t i = u.width(); i-- > 0;)
    for (const Formula& f : u.d[i].bit) bits.push_back(f);
  return bits;
}

// One-hot selection of a table entry by a digit.
inline UIntNet select_by_digit(ProgramBuilder& b, const DigitNet& sel, const std::vector<UIntNet>& table,
                               const std::string& hint) {
  int beta = static_cast<int>(sel.bit.size());
  size_t w = table[0].width();
  UIntNet out;
  for (size_t i = 0; i < w; ++i) {
    DigitNet dn;
    for (size_t k = 0; k < table[0].d[0].bit.size(); ++k) {
      std::vector<Formula> terms;
      for (int d = 0; d < beta; ++d)
        terms.push_back(Formula::conj_fold(sel.bit[static_cast<size_t>(d)], table[static_cast<size_t>(d)].d[i].bit[k]));
      dn.bit.push_back(Formula::big_or(std::move(terms)));
    }
    out.d.push_back(std::move(dn));
  }
  return materialize(b, out, hint);
}

// Long multiplication as a binary tree: per multiplier digit a shifted
// multiple of the multiplicand, then pairwise parallel additions. Optionally
// records the tree values as named taps z{level}_{index}.
inline UIntNet mul_unsigned(ProgramBuilder& b, const UIntNet& x, const UIntNet& y, const std::string& hint,
                            std::map<std::string, std::vector<Formula>>* taps = nullptr) {
  int beta = static_cast<int>(x.d[0].bit.size());
  size_t w = x.width() + y.width();
  std::vector<UIntNet> table = times_digit_table(b, x, hint + "tab");
  int dlog = 0;
  while ((1 << dlog) < static_cast<int>(y.width())) ++dlog;
  std::vector<UIntNet> parts;
  for (int i = 1; i <= (1 << dlog); ++i) {
    UIntNet z;
    if (i <= static_cast<int>(y.width())) {
      UIntNet sel = select_by_digit(b, y.d[static_cast<size_t>(i - 1)], table, hint + "z1_" + std::to_string(i) + "_");
      z = trim(pad(shift_up(std::move(sel), beta, static_cast<size_t>(i - 1)), beta, w), w);
    } else {
      z = const_uint(beta, w, 0);
    }
    if (taps) (*taps)["z1_" + std::to_string(i)] = tap_of(z);
    parts.push_back(std::move(z));
  }
  int level = 2;
  while (parts.size() > 1) {
    std::vector<UIntNet> next;
    for (size_t i = 0; i + 1 < parts.size(); i += 2) {
      AddNets a = add_unsigned(b, parts[i], parts[i + 1],
                               hint + "z" + std::to_string(level) + "_" + std::to_string(i / 2 + 1) + "_", false);
      UIntNet z = trim(std::move(a.sum), w);
      if (taps) (*taps)["z" + std::to_string(level) + "_" + std::to_string(i / 2 + 1)] = tap_of(z);
      next.push_back(std::move(z));
    }
    if (parts.size() % 2 == 1) next.push_back(std::move(parts.back()));
    parts = std::move(next);
    ++level;
  }
  return parts[0];
}

}  // namespace nets
}  // namespace bnlkit
