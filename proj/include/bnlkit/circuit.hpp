#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "bnlkit/program.hpp"
#include "bnlkit/sc.hpp"

namespace bnlkit {

// Boolean circuit as a DAG in topological order (every fan-in index is
// smaller than the gate's own index). AND/OR have unbounded fan-in; zero
// fan-in AND is constant 1 and zero fan-in OR constant 0.
class Circuit {
 public:
  enum class Label : uint8_t { Input, And, Or, Not };

  struct Gate {
    Label label;
    std::vector<int> fanin;
  };

  int add_input() {
    gates_.push_back({Label::Input, {}});
    int idx = static_cast<int>(gates_.size()) - 1;
    inputs_.push_back(idx);
    return idx;
  }

  int add_gate(Label label, std::vector<int> fanin) {
    if (label == Label::Input) throw std::invalid_argument("use add_input for input gates");
    if (label == Label::Not && fanin.size() != 1) throw std::invalid_argument("NOT gate needs fan-in 1");
    int idx = static_cast<int>(gates_.size());
    for (int f : fanin)
      if (f < 0 || f >= idx) throw std::invalid_argument("fan-in must reference an earlier gate");
    gates_.push_back({label, std::move(fanin)});
    return idx;
  }

  void set_outputs(std::vector<int> outs) { outputs_ = std::move(outs); }

  // Reorders the input gates (must be a permutation of them).
  void set_input_order(std::vector<int> order) {
    std::set<int> a(order.begin(), order.end()), b(inputs_.begin(), inputs_.end());
    if (a != b || order.size() != inputs_.size())
      throw std::invalid_argument("input order must be a permutation of the input gates");
    inputs_ = std::move(order);
  }

  size_t size() const { return gates_.size(); }
  const std::vector<Gate>& gates() const { return gates_; }
  const std::vector<int>& inputs() const { return inputs_; }
  const std::vector<int>& outputs() const { return outputs_; }

  std::vector<int> heights() const {
    std::vector<int> h(gates_.size(), 0);
    for (size_t i = 0; i < gates_.size(); ++i)
      for (int f : gates_[i].fanin) h[i] = std::max(h[i], h[static_cast<size_t>(f)] + 1);
    return h;
  }

  int depth() const {
    std::vector<int> h = heights();
    int d = 0;
    for (int o : outputs_) d = std::max(d, h[static_cast<size_t>(o)]);
    return d;
  }

  // Batched combinational evaluation; `in` holds one word per input gate in
  // input order, `vals` receives one word per gate.
  void eval_words(const uint64_t* in, std::vector<uint64_t>& vals) const {
    vals.resize(gates_.size());
    size_t next_input = 0;
    for (size_t i = 0; i < gates_.size(); ++i) {
      const Gate& g = gates_[i];
      switch (g.label) {
        case Label::Input: vals[i] = in[next_input++]; break;
        case Label::And: {
          uint64_t v = ~0ull;
          for (int f : g.fanin) v &= vals[static_cast<size_t>(f)];
          vals[i] = v;
          break;
        }
        case Label::Or: {
          uint64_t v = 0;
          for (int f : g.fanin) v |= vals[static_cast<size_t>(f)];
          vals[i] = v;
          break;
        }
        case Label::Not: vals[i] = ~vals[static_cast<size_t>(g.fanin[0])]; break;
      }
    }
  }

  std::vector<uint8_t> eval(const std::vector<uint8_t>& in) const {
    if (in.size() != inputs_.size()) throw std::invalid_argument("input length mismatch");
    std::vector<uint64_t> win(in.size());
    for (size_t i = 0; i < in.size(); ++i) win[i] = in[i] ? 1 : 0;
    std::vector<uint64_t> vals;
    eval_words(win.data(), vals);
    std::vector<uint8_t> out(outputs_.size());
    for (size_t i = 0; i < outputs_.size(); ++i) out[i] = static_cast<uint8_t>(vals[static_cast<size_t>(outputs_[i])] & 1);
    return out;
  }

  // Splices `other` into this circuit; its input gates are replaced by the
  // given existing gates. Returns the new index of each gate of `other`.
  std::vector<int> splice(const Circuit& other, const std::vector<int>& input_map) {
    if (input_map.size() != other.inputs_.size()) throw std::invalid_argument("splice input arity mismatch");
    std::vector<int> remap(other.gates_.size(), -1);
    size_t next_input = 0;
    for (size_t i = 0; i < other.gates_.size(); ++i) {
      const Gate& g = other.gates_[i];
      if (g.label == Label::Input) {
        remap[i] = input_map[next_input++];
        continue;
      }
      std::vector<int> fanin;
      fanin.reserve(g.fanin.size());
      for (int f : g.fanin) fanin.push_back(remap[static_cast<size_t>(f)]);
      remap[i] = add_gate(g.label, std::move(fanin));
    }
    return remap;
  }

 private:
  std::vector<Gate> gates_;
  std::vector<int> inputs_;
  std::vector<int> outputs_;
};

// A circuit with as many outputs as inputs, iterated on its own output.
struct SelfFeedingCircuit {
  Circuit circuit;
  std::vector<int> input_positions;          // 0-based, ascending
  std::vector<std::optional<bool>> init;     // per position; set exactly on auxiliary positions
  std::vector<int> print_positions;
  bool external = false;
  std::vector<int> attention_positions;
  RoundMap map;

  size_t width() const { return circuit.inputs().size(); }

  void validate() const {
    if (circuit.inputs().size() != circuit.outputs().size())
      throw std::invalid_argument("self-feeding circuit needs |inputs| = |outputs|");
    size_t k = width();
    if (init.size() != k) throw std::invalid_argument("initializing assignment has wrong width");
    std::vector<bool> is_input(k, false);
    for (int p : input_positions) {
      if (p < 0 || static_cast<size_t>(p) >= k) throw std::invalid_argument("input position out of range");
      is_input[static_cast<size_t>(p)] = true;
    }
    for (size_t j = 0; j < k; ++j) {
      if (is_input[j] && init[j].has_value())
        throw std::invalid_argument("initializing function set on an input position");
      if (!is_input[j] && !init[j].has_value())
        throw std::invalid_argument("initializing function missing on auxiliary position " + std::to_string(j));
    }
    auto check_pos = [&](const std::vector<int>& ps) {
      for (int p : ps)
        if (p < 0 || static_cast<size_t>(p) >= k) throw std::invalid_argument("position out of range");
    };
    check_pos(print_positions);
    if (!external) check_pos(attention_positions);
  }

  std::vector<uint8_t> initial_configuration(const std::vector<uint8_t>& input) const {
    if (input.size() != input_positions.size()) throw std::invalid_argument("input length mismatch");
    std::vector<uint8_t> c(width(), 0);
    for (size_t j = 0; j < width(); ++j)
      if (init[j].has_value()) c[j] = *init[j] ? 1 : 0;
    for (size_t i = 0; i < input_positions.size(); ++i) c[static_cast<size_t>(input_positions[i])] = input[i] ? 1 : 0;
    return c;
  }
};

inline RunResult run_self_feeding(const SelfFeedingCircuit& sfc, const std::vector<uint8_t>& input,
                                  long long horizon) {
  sfc.validate();
  RunResult r;
  std::vector<uint8_t> c = sfc.initial_configuration(input);
  std::vector<uint64_t> win(sfc.width()), vals;
  for (long long t = 0;; ++t) {
    r.configs.push_back(c);
    bool fire = false;
    if (sfc.external) {
      fire = sfc.map.contains(t);
    } else {
      for (int a : sfc.attention_positions) fire = fire || c[static_cast<size_t>(a)];
    }
    if (fire) {
      std::string s;
      for (int pp : sfc.print_positions) s.push_back(c[static_cast<size_t>(pp)] ? '1' : '0');
      r.output.emissions.emplace_back(t, std::move(s));
    }
    if (t == horizon) break;
    for (size_t i = 0; i < sfc.width(); ++i) win[i] = c[i] ? 1 : 0;
    sfc.circuit.eval_words(win.data(), vals);
    for (size_t i = 0; i < sfc.width(); ++i)
      c[i] = static_cast<uint8_t>(vals[static_cast<size_t>(sfc.circuit.outputs()[i])] & 1);
  }
  return r;
}

// Self-feeding circuit family computing PARITY: a pairing layer of
// exclusive-ors over consecutive disjoint pairs halves the live prefix each
// round; the attention gate fires on 1·0^{n-1} and 0^n.
inline SelfFeedingCircuit parity_circuit(int n) {
  if (n < 1) throw std::invalid_argument("parity circuit needs n >= 1");
  int klog = 1;
  while ((1 << klog) < n) ++klog;
  int W = 1 << klog;  // padded width

  SelfFeedingCircuit sfc;
  Circuit& c = sfc.circuit;
  std::vector<int> x(static_cast<size_t>(W), -1);
  for (int i = 0; i < n; ++i) x[static_cast<size_t>(i)] = c.add_input();
  int agate = c.add_input();
  for (int i = n; i < W; ++i) x[static_cast<size_t>(i)] = c.add_gate(Circuit::Label::Or, {});  // constant 0 pads

  auto xor_gate = [&](int u, int v) {
    int nu = c.add_gate(Circuit::Label::Not, {u});
    int nv = c.add_gate(Circuit::Label::Not, {v});
    int a = c.add_gate(Circuit::Label::And, {u, nv});
    int b = c.add_gate(Circuit::Label::And, {nu, v});
    return c.add_gate(Circuit::Label::Or, {a, b});
  };

  int zero = -1;
  auto zero_gate = [&]() {
    if (zero < 0) zero = c.add_gate(Circuit::Label::Or, {});
    return zero;
  };

  std::vector<int> outs;
  int half = W / 2;
  for (int i = 1; i <= n; ++i) {
    if (i <= half)
      outs.push_back(xor_gate(x[static_cast<size_t>(2 * i - 2)], x[static_cast<size_t>(2 * i - 1)]));
    else
      outs.push_back(c.add_gate(Circuit::Label::Or, {zero_gate()}));
  }
  // o fires on 1·0^{n-1}, on 0^n, or when a is already 1.
  std::vector<int> nots;
  for (int i = 0; i < n; ++i) nots.push_back(c.add_gate(Circuit::Label::Not, {x[static_cast<size_t>(i)]}));
  std::vector<int> head = {x[0]};
  for (int i = 1; i < n; ++i) head.push_back(nots[static_cast<size_t>(i)]);
  int one_zeros = c.add_gate(Circuit::Label::And, head);
  int all_zero = c.add_gate(Circuit::Label::And, nots);
  int o = c.add_gate(Circuit::Label::Or, {agate, one_zeros, all_zero});
  outs.push_back(o);
  c.set_outputs(outs);

  sfc.input_positions.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) sfc.input_positions[static_cast<size_t>(i)] = i;
  sfc.init.assign(static_cast<size_t>(n) + 1, std::nullopt);
  sfc.init[static_cast<size_t>(n)] = false;
  sfc.print_positions = {0};
  sfc.attention_positions = {n};
  sfc.validate();
  return sfc;
}

namespace detail {

inline Formula replace_subformula(const Formula& f, const Formula& target, const Formula& repl) {
  if (f.equals(target)) return repl;
  switch (f.op()) {
    case Formula::Op::Top:
    case Formula::Op::Var: return f;
    case Formula::Op::Not: return Formula::negate(replace_subformula(f.left(), target, repl));
    case Formula::Op::And:
      return Formula::conj(replace_subformula(f.left(), target, repl),
                           replace_subformula(f.right(), target, repl));
  }
  throw std::logic_error("bad op");
}

struct BalanceBuilder {
  Circuit c;
  std::vector<Symbol> var_order;
  std::unordered_map<Symbol, int, SymbolHash> var_gate;

  int gate_for(Symbol s) {
    auto it = var_gate.find(s);
    if (it != var_gate.end()) return it->second;
    throw std::logic_error("unregistered variable");
  }

  int direct(const Formula& f) {
    if (f.is_top()) return c.add_gate(Circuit::Label::And, {});
    if (f.is_bottom()) return c.add_gate(Circuit::Label::Or, {});
    switch (f.op()) {
      case Formula::Op::Var: return gate_for(f.var_symbol());
      case Formula::Op::Not: return c.add_gate(Circuit::Label::Not, {direct(f.left())});
      case Formula::Op::And: return c.add_gate(Circuit::Label::And, {direct(f.left()), direct(f.right())});
      default: throw std::logic_error("bad op");
    }
  }

  // Spira-style restructuring: split at a subformula of weight between one
  // and two thirds, then F = (F[G:=T] ∧ G) ∨ (F[G:=F] ∧ ¬G).
  int balance(const Formula& f) {
    int64_t n = f.tokens();
    if (n <= 8) return direct(f);
    Formula g = f;
    while (g.tokens() > (2 * n) / 3) {
      if (g.op() == Formula::Op::Not) {
        g = g.left();
      } else if (g.op() == Formula::Op::And) {
        g = g.left().tokens() >= g.right().tokens() ? g.left() : g.right();
      } else {
        break;  // leaf; cannot happen while tokens > 2n/3 > 1
      }
    }
    if (g.equals(f)) return direct(f);
    int gg = balance(g);
    int f1 = balance(replace_subformula(f, g, Formula::top()));
    int f0 = balance(replace_subformula(f, g, Formula::bottom()));
    int ng = c.add_gate(Circuit::Label::Not, {gg});
    int a = c.add_gate(Circuit::Label::And, {f1, gg});
    int b = c.add_gate(Circuit::Label::And, {f0, ng});
    return c.add_gate(Circuit::Label::Or, {a, b});
  }
};

}  // namespace detail

// Restructures a formula into an equivalent bounded-fan-in circuit of
// logarithmic depth with a single output gate. Inputs are the formula's
// variables in first-appearance order.
inline Circuit balance_formula(const Formula& f) {
  detail::BalanceBuilder b;
  f.for_each_var([&](Symbol s) {
    if (!b.var_gate.count(s)) {
      b.var_order.push_back(s);
      b.var_gate.emplace(s, b.c.add_input());
    }
  });
  int out = b.balance(f);
  b.c.set_outputs({out});
  return b.c;
}

inline std::vector<Symbol> formula_variables(const Formula& f) {
  std::vector<Symbol> order;
  std::set<Symbol> seen;
  f.for_each_var([&](Symbol s) {
    if (seen.insert(s).second) order.push_back(s);
  });
  return order;
}

enum class CircuitMode { Direct, Balanced };

// One subcircuit per rule over shared input gates; globally equivalent to
// the program. Balanced mode applies the formula restructuring per rule.
inline SelfFeedingCircuit bnl_to_circuit(const BnlProgram& p, CircuitMode mode) {
  SelfFeedingCircuit sfc;
  Circuit& c = sfc.circuit;
  size_t k = p.var_count();
  std::vector<int> in_gates;
  for (size_t i = 0; i < k; ++i) in_gates.push_back(c.add_input());

  std::vector<int> outs;
  for (size_t i = 0; i < k; ++i) {
    const Formula& body = p.rule(static_cast<int>(i));
    if (mode == CircuitMode::Direct) {
      struct Rec {
        Circuit& c;
        const BnlProgram& p;
        const std::vector<int>& in_gates;
        int build(const Formula& f) {
          if (f.is_top()) return c.add_gate(Circuit::Label::And, {});
          if (f.is_bottom()) return c.add_gate(Circuit::Label::Or, {});
          switch (f.op()) {
            case Formula::Op::Var: return in_gates[static_cast<size_t>(p.index_of(f.var_symbol()))];
            case Formula::Op::Not: return c.add_gate(Circuit::Label::Not, {build(f.left())});
            case Formula::Op::And: return c.add_gate(Circuit::Label::And, {build(f.left()), build(f.right())});
            default: throw std::logic_error("bad op");
          }
        }
      } rec{c, p, in_gates};
      outs.push_back(rec.build(body));
    } else {
      Circuit bal = balance_formula(body);
      std::vector<Symbol> order = formula_variables(body);
      std::vector<int> input_map;
      for (Symbol s : order) input_map.push_back(in_gates[static_cast<size_t>(p.index_of(s))]);
      std::vector<int> remap = c.splice(bal, input_map);
      outs.push_back(remap[static_cast<size_t>(bal.outputs()[0])]);
    }
  }
  c.set_outputs(outs);

  sfc.init.assign(k, std::nullopt);
  for (size_t i = 0; i < k; ++i)
    if (p.terminal(static_cast<int>(i)).has_value()) sfc.init[i] = *p.terminal(static_cast<int>(i));
  for (int idx : p.input_indices()) sfc.input_positions.push_back(idx);
  for (Symbol s : p.print()) sfc.print_positions.push_back(p.index_of(s));
  if (p.attention().external) {
    sfc.external = true;
    sfc.map = p.attention().map;
  } else {
    for (Symbol s : p.attention().predicates) sfc.attention_positions.push_back(p.index_of(s));
  }
  sfc.validate();
  return sfc;
}

struct CircuitToBnlResult {
  BnlProgram program;
  long long delay = 1;  // depth(C') + 1
};

// Height-uniformizes the circuit, then evaluates one gate layer per round
// under a one-hot counter; output-gate predicates hold their values exactly
// on landing rounds and are false in between.
inline CircuitToBnlResult circuit_to_bnl(const SelfFeedingCircuit& sfc) {
  sfc.validate();
  size_t k = sfc.width();

  // Copy live gates only (those reaching an output).
  const Circuit& src = sfc.circuit;
  std::vector<char> live(src.size(), 0);
  {
    std::vector<int> stack(src.outputs().begin(), src.outputs().end());
    while (!stack.empty()) {
      int g = stack.back();
      stack.pop_back();
      if (live[static_cast<size_t>(g)]) continue;
      live[static_cast<size_t>(g)] = 1;
      for (int f : src.gates()[static_cast<size_t>(g)].fanin) stack.push_back(f);
    }
    for (int g : src.inputs()) live[static_cast<size_t>(g)] = 1;  // inputs always kept
  }
  Circuit c;
  std::vector<int> remap(src.size(), -1);
  for (size_t i = 0; i < src.size(); ++i) {
    if (!live[i]) continue;
    const Circuit::Gate& g = src.gates()[i];
    if (g.label == Circuit::Label::Input) {
      remap[i] = c.add_input();
    } else {
      std::vector<int> fanin;
      for (int f : g.fanin) fanin.push_back(remap[static_cast<size_t>(f)]);
      remap[i] = c.add_gate(g.label, std::move(fanin));
    }
  }
  std::vector<int> outs;
  for (int o : src.outputs()) outs.push_back(remap[static_cast<size_t>(o)]);

  // Positions must map to distinct output gates before padding.
  {
    std::set<int> seen;
    for (int& o : outs)
      if (!seen.insert(o).second) o = c.add_gate(Circuit::Label::And, {o});
  }

  std::vector<int> h = c.heights();
  int D = 0;
  for (int o : outs) D = std::max(D, h[static_cast<size_t>(o)]);

  CircuitToBnlResult res;
  BnlProgram& out = res.program;

  if (D == 0) {
    // Pure wires and constants; identical sequences, delay 1.
    std::vector<Symbol> pos_syms;
    for (size_t j = 0; j < k; ++j) pos_syms.push_back(Symbol::intern("g" + std::to_string(j)));
    std::unordered_map<int, size_t> input_gate_pos;
    for (size_t i = 0; i < c.inputs().size(); ++i) input_gate_pos[c.inputs()[i]] = i;
    for (size_t j = 0; j < k; ++j) {
      out.declare(pos_syms[j]);
      if (sfc.init[j].has_value()) out.set_terminal(pos_syms[j], *sfc.init[j]);
    }
    for (size_t j = 0; j < k; ++j) {
      int og = outs[j];
      const Circuit::Gate& g = c.gates()[static_cast<size_t>(og)];
      Formula body;
      if (g.label == Circuit::Label::Input)
        body = Formula::var(pos_syms[input_gate_pos[og]]);
      else if (g.label == Circuit::Label::And)
        body = Formula::top();
      else if (g.label == Circuit::Label::Or)
        body = Formula::bottom();
      else
        throw std::logic_error("depth-0 circuit with a NOT output");
      out.set_rule(pos_syms[j], body);
    }
    std::vector<Symbol> prints;
    for (int pp : sfc.print_positions) prints.push_back(pos_syms[static_cast<size_t>(pp)]);
    out.set_print(prints);
    if (sfc.external) {
      out.set_attention(AttentionSpec::rounds(sfc.map));
    } else {
      std::vector<Symbol> atts;
      for (int a : sfc.attention_positions) atts.push_back(pos_syms[static_cast<size_t>(a)]);
      out.set_attention(AttentionSpec::preds(atts));
    }
    out.finalize();
    res.delay = 1;
    return res;
  }

  // Pad every output to height D with fan-in-1 AND chains.
  for (size_t j = 0; j < k; ++j) {
    int cur = outs[j];
    int hh = h[static_cast<size_t>(cur)];
    while (hh < D) {
      cur = c.add_gate(Circuit::Label::And, {cur});
      ++hh;
    }
    outs[j] = cur;
  }
  c.set_outputs(outs);
  h = c.heights();

  // Predicates: outputs for the k positions first (input predicates in
  // position order), then every other gate, then the counter.
  std::vector<Symbol> gate_sym(c.size());
  std::vector<char> is_output(c.size(), 0);
  for (size_t j = 0; j < k; ++j) {
    gate_sym[static_cast<size_t>(outs[j])] = Symbol::intern("o" + std::to_string(j));
    is_output[static_cast<size_t>(outs[j])] = 1;
  }
  std::vector<bool> is_input_pos(k, false);
  for (int p : sfc.input_positions) is_input_pos[static_cast<size_t>(p)] = true;

  for (size_t j = 0; j < k; ++j) {
    out.declare(gate_sym[static_cast<size_t>(outs[j])]);
    if (!is_input_pos[j]) out.set_terminal(gate_sym[static_cast<size_t>(outs[j])], *sfc.init[j]);
  }
  for (size_t i = 0; i < c.size(); ++i) {
    if (is_output[i]) continue;
    gate_sym[i] = Symbol::intern("g" + std::to_string(i));
    out.declare(gate_sym[i]);
    out.set_terminal(gate_sym[i], false);
  }
  std::vector<Symbol> counter;
  for (int i = 0; i <= D; ++i) counter.push_back(Symbol::intern("Tc" + std::to_string(i)));
  for (int i = 0; i <= D; ++i) {
    out.declare(counter[static_cast<size_t>(i)]);
    out.set_terminal(counter[static_cast<size_t>(i)], i == 0);
    out.set_rule(counter[static_cast<size_t>(i)], Formula::var(counter[static_cast<size_t>(i == 0 ? D : i - 1)]));
  }

  std::unordered_map<int, size_t> input_gate_pos;
  for (size_t i = 0; i < c.inputs().size(); ++i) input_gate_pos[c.inputs()[i]] = i;

  for (size_t i = 0; i < c.size(); ++i) {
    const Circuit::Gate& g = c.gates()[i];
    Symbol sym = gate_sym[i];
    Formula self = Formula::var(sym);
    Formula backup = is_output[i] ? Formula::bottom() : self;
    if (g.label == Circuit::Label::Input) {
      size_t pos = input_gate_pos[static_cast<int>(i)];
      Formula load = Formula::var(gate_sym[static_cast<size_t>(outs[pos])]);
      out.set_rule(sym, apply_flag(load, Formula::var(counter[0]), self));
      continue;
    }
    Formula body;
    switch (g.label) {
      case Circuit::Label::And: {
        std::vector<Formula> fs;
        for (int f : g.fanin) fs.push_back(Formula::var(gate_sym[static_cast<size_t>(f)]));
        body = fs.empty() ? Formula::top() : Formula::big_and(std::move(fs));
        break;
      }
      case Circuit::Label::Or: {
        std::vector<Formula> fs;
        for (int f : g.fanin) fs.push_back(Formula::var(gate_sym[static_cast<size_t>(f)]));
        body = fs.empty() ? Formula::bottom() : Formula::big_or(std::move(fs));
        break;
      }
      case Circuit::Label::Not:
        body = Formula::negate(Formula::var(gate_sym[static_cast<size_t>(g.fanin[0])]));
        break;
      default: throw std::logic_error("unexpected label");
    }
    out.set_rule(sym, apply_flag(body, Formula::var(counter[static_cast<size_t>(h[i])]), backup));
  }

  std::vector<Symbol> prints;
  for (int pp : sfc.print_positions) prints.push_back(gate_sym[static_cast<size_t>(outs[static_cast<size_t>(pp)])]);
  out.set_print(prints);
  if (sfc.external) {
    out.set_attention(AttentionSpec::rounds(RoundMap::affine(D + 1, 0, sfc.map)));
  } else {
    std::vector<Symbol> atts;
    for (int a : sfc.attention_positions)
      atts.push_back(gate_sym[static_cast<size_t>(outs[static_cast<size_t>(a)])]);
    out.set_attention(AttentionSpec::preds(atts));
  }
  out.finalize();
  res.delay = D + 1;
  return res;
}

}  // namespace bnlkit
