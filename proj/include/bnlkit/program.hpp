#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "bnlkit/formula.hpp"

namespace bnlkit {

// Set of output rounds supplied from outside the program. Only the shapes
// the constructions actually produce are representable: finite lists,
// arithmetic progressions and affine images of either.
class RoundMap {
 public:
  enum class Kind { Explicit, Arithmetic, Affine };

  static RoundMap explicit_rounds(std::vector<long long> rounds) {
    RoundMap m;
    m.kind_ = Kind::Explicit;
    std::sort(rounds.begin(), rounds.end());
    m.rounds_ = std::move(rounds);
    return m;
  }
  static RoundMap arithmetic(long long start, long long step) {
    if (step < 1) throw std::invalid_argument("arithmetic round map requires step >= 1");
    if (start < 0) throw std::invalid_argument("arithmetic round map requires start >= 0");
    RoundMap m;
    m.kind_ = Kind::Arithmetic;
    m.start_ = start;
    m.step_ = step;
    return m;
  }
  static RoundMap affine(long long scale, long long offset, RoundMap inner) {
    if (scale < 1 || offset < 0) throw std::invalid_argument("affine round map requires scale >= 1, offset >= 0");
    if (scale == 1 && offset == 0) return inner;
    RoundMap m;
    m.kind_ = Kind::Affine;
    m.scale_ = scale;
    m.offset_ = offset;
    m.inner_ = std::make_shared<RoundMap>(std::move(inner));
    return m;
  }

  Kind kind() const { return kind_; }
  const std::vector<long long>& rounds() const { return rounds_; }
  long long start() const { return start_; }
  long long step() const { return step_; }
  long long scale() const { return scale_; }
  long long offset() const { return offset_; }
  const RoundMap& inner() const { return *inner_; }

  bool contains(long long n) const {
    switch (kind_) {
      case Kind::Explicit:
        return std::binary_search(rounds_.begin(), rounds_.end(), n);
      case Kind::Arithmetic:
        return n >= start_ && (n - start_) % step_ == 0;
      case Kind::Affine: {
        long long m = n - offset_;
        if (m < 0 || m % scale_ != 0) return false;
        return inner_->contains(m / scale_);
      }
    }
    return false;
  }

 private:
  Kind kind_ = Kind::Explicit;
  std::vector<long long> rounds_;
  long long start_ = 0, step_ = 1;
  long long scale_ = 1, offset_ = 0;
  std::shared_ptr<RoundMap> inner_;
};

// Either a set of attention predicates or an external round map.
struct AttentionSpec {
  bool external = false;
  std::vector<Symbol> predicates;  // used when !external
  RoundMap map;                    // used when external

  static AttentionSpec preds(std::vector<Symbol> ps) {
    AttentionSpec a;
    a.predicates = std::move(ps);
    return a;
  }
  static AttentionSpec rounds(RoundMap m) {
    AttentionSpec a;
    a.external = true;
    a.map = std::move(m);
    return a;
  }
};

using Configuration = std::vector<uint8_t>;

struct OutputSequence {
  std::vector<std::pair<long long, std::string>> emissions;  // (round, print substring)

  bool same_strings(const OutputSequence& o, size_t limit) const {
    size_t n = std::min(limit, std::min(emissions.size(), o.emissions.size()));
    for (size_t i = 0; i < n; ++i)
      if (emissions[i].second != o.emissions[i].second) return false;
    return true;
  }
};

struct MeasureResult {
  int64_t size = 0;
  int depth = 0;
};

struct DynamicsReport {
  long long transient = 0;
  long long cycle_length = 1;
  bool fixed_point() const { return cycle_length == 1; }
};

class BnlProgram {
 public:
  int declare(Symbol name) {
    auto it = index_.find(name);
    if (it != index_.end()) return it->second;
    int idx = static_cast<int>(vars_.size());
    vars_.push_back(name);
    index_.emplace(name, idx);
    terminal_.push_back(std::nullopt);
    rules_.push_back(Formula());
    return idx;
  }

  void set_terminal(Symbol name, bool value) {
    int i = declare(name);
    if (terminal_[i].has_value()) throw std::invalid_argument("duplicate terminal clause for " + name.str());
    terminal_[i] = value;
  }

  void set_rule(Symbol name, Formula body) {
    int i = declare(name);
    if (rules_[i].valid()) throw std::invalid_argument("duplicate iteration clause for " + name.str());
    rules_[i] = std::move(body);
  }

  void set_print(std::vector<Symbol> ps) { print_ = std::move(ps); }
  void set_attention(AttentionSpec a) { attention_ = std::move(a); }

  // Checks the well-formedness invariants and computes the input list.
  void finalize() {
    if (vars_.empty()) throw std::invalid_argument("program has no clauses");
    inputs_.clear();
    for (size_t i = 0; i < vars_.size(); ++i) {
      if (!rules_[i].valid())
        throw std::invalid_argument("variable " + vars_[i].str() + " has no iteration clause");
      rules_[i].for_each_var([&](Symbol s) {
        if (index_.find(s) == index_.end())
          throw std::invalid_argument("undeclared variable " + s.str() + " in rule of " + vars_[i].str());
      });
      if (!terminal_[i].has_value()) inputs_.push_back(static_cast<int>(i));
    }
    for (Symbol s : print_)
      if (index_.find(s) == index_.end()) throw std::invalid_argument("unknown print predicate " + s.str());
    if (!attention_.external)
      for (Symbol s : attention_.predicates)
        if (index_.find(s) == index_.end()) throw std::invalid_argument("unknown attention predicate " + s.str());
  }

  size_t var_count() const { return vars_.size(); }
  const std::vector<Symbol>& variables() const { return vars_; }
  const std::vector<int>& input_indices() const { return inputs_; }
  int index_of(Symbol s) const {
    auto it = index_.find(s);
    if (it == index_.end()) throw std::invalid_argument("unknown variable " + s.str());
    return it->second;
  }
  bool has_var(Symbol s) const { return index_.count(s) > 0; }
  const std::optional<bool>& terminal(int i) const { return terminal_[static_cast<size_t>(i)]; }
  const Formula& rule(int i) const { return rules_[static_cast<size_t>(i)]; }
  const std::vector<Symbol>& print() const { return print_; }
  const AttentionSpec& attention() const { return attention_; }

  // Size counts every token in clause bodies plus one head token per
  // terminal clause; depth is the maximum iteration-body depth.
  MeasureResult measure() const {
    MeasureResult m;
    for (size_t i = 0; i < vars_.size(); ++i) {
      m.size += rules_[i].tokens();
      if (terminal_[i].has_value()) m.size += 1 + 1;  // head + body (T or F)
      m.depth = std::max(m.depth, rules_[i].depth());
    }
    return m;
  }

  Configuration initial_configuration(const std::vector<uint8_t>& input) const {
    if (input.size() != inputs_.size())
      throw std::invalid_argument("input length " + std::to_string(input.size()) + " does not match " +
                                  std::to_string(inputs_.size()) + " input predicates");
    Configuration c(vars_.size(), 0);
    size_t next = 0;
    for (size_t i = 0; i < vars_.size(); ++i) {
      if (terminal_[i].has_value())
        c[i] = *terminal_[i] ? 1 : 0;
      else
        c[i] = input[next++] ? 1 : 0;
    }
    return c;
  }

 private:
  std::vector<Symbol> vars_;  // declaration order
  std::unordered_map<Symbol, int, SymbolHash> index_;
  std::vector<std::optional<bool>> terminal_;
  std::vector<Formula> rules_;
  std::vector<int> inputs_;
  std::vector<Symbol> print_;
  AttentionSpec attention_;
};

// Compiled form of a program: all rule bodies hash-consed into one DAG that
// is evaluated once per round, 64 configurations at a time.
class EvalPlan {
 public:
  explicit EvalPlan(const BnlProgram& p) : program_(&p) {
    nvars_ = static_cast<int>(p.var_count());
    std::unordered_map<uint64_t, std::vector<std::pair<Formula, int32_t>>> memo;
    roots_.reserve(p.var_count());
    for (size_t i = 0; i < p.var_count(); ++i) roots_.push_back(compile(p.rule(static_cast<int>(i)), memo));
  }

  int node_count() const { return static_cast<int>(nodes_.size()); }

  // One synchronous step on a batch of configurations packed into 64-bit
  // lanes: in[v] holds the lane bits of variable v.
  void step(const uint64_t* in, uint64_t* out, std::vector<uint64_t>& scratch) const {
    scratch.resize(nodes_.size());
    const size_t n = nodes_.size();
    for (size_t i = 0; i < n; ++i) {
      const Node& nd = nodes_[i];
      switch (nd.op) {
        case OpCode::Top: scratch[i] = ~0ull; break;
        case OpCode::Var: scratch[i] = in[nd.a]; break;
        case OpCode::Not: scratch[i] = ~scratch[nd.a]; break;
        case OpCode::And: scratch[i] = scratch[nd.a] & scratch[nd.b]; break;
      }
    }
    for (int v = 0; v < nvars_; ++v) out[v] = scratch[static_cast<size_t>(roots_[static_cast<size_t>(v)])];
  }

  void step(const Configuration& in, Configuration& out) const {
    std::vector<uint64_t> win(static_cast<size_t>(nvars_)), wout(static_cast<size_t>(nvars_));
    for (int v = 0; v < nvars_; ++v) win[static_cast<size_t>(v)] = in[static_cast<size_t>(v)] ? 1 : 0;
    std::vector<uint64_t> scratch;
    step(win.data(), wout.data(), scratch);
    out.resize(static_cast<size_t>(nvars_));
    for (int v = 0; v < nvars_; ++v) out[static_cast<size_t>(v)] = static_cast<uint8_t>(wout[static_cast<size_t>(v)] & 1);
  }

 private:
  enum class OpCode : uint8_t { Top, Var, Not, And };
  struct Node {
    OpCode op;
    int32_t a = -1, b = -1;
  };

  int32_t compile(const Formula& f, std::unordered_map<uint64_t, std::vector<std::pair<Formula, int32_t>>>& memo) {
    auto& bucket = memo[f.hash()];
    for (auto& [g, idx] : bucket)
      if (g.equals(f)) return idx;
    Node nd;
    switch (f.op()) {
      case Formula::Op::Top: nd.op = OpCode::Top; break;
      case Formula::Op::Var:
        nd.op = OpCode::Var;
        nd.a = program_->index_of(f.var_symbol());
        break;
      case Formula::Op::Not:
        nd.op = OpCode::Not;
        nd.a = compile(f.left(), memo);
        break;
      case Formula::Op::And:
        nd.op = OpCode::And;
        nd.a = compile(f.left(), memo);
        nd.b = compile(f.right(), memo);
        break;
    }
    int32_t idx = static_cast<int32_t>(nodes_.size());
    nodes_.push_back(nd);
    memo[f.hash()].emplace_back(f, idx);
    return idx;
  }

  const BnlProgram* program_;
  int nvars_ = 0;
  std::vector<Node> nodes_;
  std::vector<int32_t> roots_;
};

struct RunResult {
  std::vector<Configuration> configs;  // rounds 0..horizon
  OutputSequence output;
};

namespace detail {

inline std::string print_string(const BnlProgram& p, const Configuration& c) {
  std::string s;
  s.reserve(p.print().size());
  for (Symbol ps : p.print()) s.push_back(c[static_cast<size_t>(p.index_of(ps))] ? '1' : '0');
  return s;
}

inline bool attention_fires(const BnlProgram& p, const Configuration& c, long long round) {
  const AttentionSpec& a = p.attention();
  if (a.external) return a.map.contains(round);
  for (Symbol s : a.predicates)
    if (c[static_cast<size_t>(p.index_of(s))]) return true;
  return false;
}

}  // namespace detail

inline RunResult run(const BnlProgram& p, const std::vector<uint8_t>& input, long long horizon,
                     const EvalPlan* plan = nullptr) {
  std::optional<EvalPlan> local;
  if (!plan) {
    local.emplace(p);
    plan = &*local;
  }
  RunResult r;
  Configuration c = p.initial_configuration(input);
  for (long long t = 0;; ++t) {
    r.configs.push_back(c);
    if (detail::attention_fires(p, c, t)) r.output.emissions.emplace_back(t, detail::print_string(p, c));
    if (t == horizon) break;
    Configuration next;
    plan->step(c, next);
    c = std::move(next);
  }
  return r;
}

// Batched runner: up to 64 inputs at once. Emits, per lane, the first
// `max_outputs` emissions (0 = unlimited) up to the horizon.
inline std::vector<OutputSequence> run_batch(const BnlProgram& p, const EvalPlan& plan,
                                             const std::vector<std::vector<uint8_t>>& inputs, long long horizon,
                                             size_t max_outputs = 0) {
  size_t lanes = inputs.size();
  if (lanes == 0) return {};
  if (lanes > 64) throw std::invalid_argument("run_batch handles at most 64 lanes");
  size_t nv = p.var_count();
  std::vector<uint64_t> cur(nv, 0), next(nv, 0);
  for (size_t l = 0; l < lanes; ++l) {
    Configuration c0 = p.initial_configuration(inputs[l]);
    for (size_t v = 0; v < nv; ++v)
      if (c0[v]) cur[v] |= (1ull << l);
  }
  std::vector<OutputSequence> out(lanes);
  std::vector<int> print_idx;
  for (Symbol s : p.print()) print_idx.push_back(p.index_of(s));
  std::vector<int> att_idx;
  if (!p.attention().external)
    for (Symbol s : p.attention().predicates) att_idx.push_back(p.index_of(s));
  uint64_t done = 0;
  const uint64_t all = lanes == 64 ? ~0ull : ((1ull << lanes) - 1);
  std::vector<uint64_t> scratch;
  for (long long t = 0;; ++t) {
    uint64_t fire = 0;
    if (p.attention().external) {
      if (p.attention().map.contains(t)) fire = all;
    } else {
      for (int ai : att_idx) fire |= cur[static_cast<size_t>(ai)];
    }
    fire &= all & ~done;
    while (fire) {
      int l = __builtin_ctzll(fire);
      fire &= fire - 1;
      std::string s(print_idx.size(), '0');
      for (size_t j = 0; j < print_idx.size(); ++j)
        if (cur[static_cast<size_t>(print_idx[j])] >> l & 1) s[j] = '1';
      out[static_cast<size_t>(l)].emissions.emplace_back(t, std::move(s));
      if (max_outputs && out[static_cast<size_t>(l)].emissions.size() >= max_outputs) done |= (1ull << l);
    }
    if (t == horizon || done == all) break;
    plan.step(cur.data(), next.data(), scratch);
    std::swap(cur, next);
  }
  return out;
}

inline Configuration step(const BnlProgram& p, const Configuration& c) {
  if (c.size() != p.var_count()) throw std::invalid_argument("configuration length mismatch");
  EvalPlan plan(p);
  Configuration out;
  plan.step(c, out);
  return out;
}

// Simulates until a configuration repeats; reports transient and attractor.
inline DynamicsReport analyze_dynamics(const BnlProgram& p, const std::vector<uint8_t>& input,
                                       const EvalPlan* plan = nullptr) {
  std::optional<EvalPlan> local;
  if (!plan) {
    local.emplace(p);
    plan = &*local;
  }
  std::map<Configuration, long long> seen;
  Configuration c = p.initial_configuration(input);
  long long t = 0;
  while (true) {
    auto [it, fresh] = seen.emplace(c, t);
    if (!fresh) {
      DynamicsReport r;
      r.transient = it->second;
      r.cycle_length = t - it->second;
      return r;
    }
    Configuration next;
    plan->step(c, next);
    c = std::move(next);
    ++t;
  }
}

// Returns the fixed-point configuration of a halting program, stepping at
// most `limit` rounds. Throws if no fixed point is reached in time.
inline Configuration run_to_fixed_point(const BnlProgram& p, const EvalPlan& plan,
                                        const std::vector<uint8_t>& input, long long limit = 1 << 20) {
  Configuration c = p.initial_configuration(input);
  Configuration next;
  for (long long t = 0; t < limit; ++t) {
    plan.step(c, next);
    if (next == c) return c;
    std::swap(c, next);
  }
  throw std::runtime_error("program did not reach a fixed point within the step limit");
}

// One-hot counter fragment T_0..T_n: exactly one predicate true per round,
// cycling with period n+1.
inline BnlProgram make_counter(int n, const std::string& prefix = "T_") {
  if (n < 0) throw std::invalid_argument("counter length must be >= 0");
  BnlProgram p;
  std::vector<Symbol> ts;
  for (int i = 0; i <= n; ++i) ts.push_back(Symbol::intern(prefix + std::to_string(i)));
  for (int i = 0; i <= n; ++i) {
    p.declare(ts[static_cast<size_t>(i)]);
    p.set_terminal(ts[static_cast<size_t>(i)], i == 0);
    p.set_rule(ts[static_cast<size_t>(i)], Formula::var(ts[static_cast<size_t>(i == 0 ? n : i - 1)]));
  }
  p.set_print(ts);
  p.set_attention(AttentionSpec::preds({}));
  p.finalize();
  return p;
}

// Flagging: rewrites a rule body psi as (flag ∧ psi) ∨ (¬flag ∧ backup).
inline Formula apply_flag(Formula psi, Formula flag, Formula backup) {
  return Formula::disj(Formula::conj(flag, std::move(psi)),
                       Formula::conj(Formula::negate(flag), std::move(backup)));
}

}  // namespace bnlkit
