#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "bnlkit/program.hpp"
#include "bnlkit/softfloat.hpp"

namespace bnlkit {

enum class AggregationOrder { BalancedTree, LeftFold };

struct NNode {
  std::string id;
  FloatValue bias;
  std::optional<FloatValue> init;  // required unless the node is an input
  PieceTable activation;
};

struct NEdge {
  int from = 0, to = 0;
  FloatValue weight;
};

// Recurrent network over a floating-point system: arbitrary directed graph,
// piecewise polynomial activations, per-node bias and initial value.
class NeuralNetwork {
 public:
  FloatSystem system;
  std::vector<NNode> nodes;  // order = node order
  std::vector<NEdge> edges;
  std::vector<int> inputs;   // ascending
  std::vector<int> outputs;  // ascending
  bool external = false;
  std::vector<std::pair<int, FloatValue>> attention;  // (node, threshold), ascending
  RoundMap map;
  AggregationOrder aggregation = AggregationOrder::BalancedTree;

  std::vector<std::string> validate() const {
    std::vector<std::string> diags;
    auto bad_node = [&](int i) { return i < 0 || static_cast<size_t>(i) >= nodes.size(); };
    std::set<int> input_set(inputs.begin(), inputs.end());
    for (size_t i = 0; i < nodes.size(); ++i) {
      const NNode& n = nodes[i];
      if (!(n.bias.system() == system)) diags.push_back("node " + n.id + ": bias system mismatch");
      if (!input_set.count(static_cast<int>(i)) && !n.init.has_value())
        diags.push_back("node " + n.id + ": missing initial value on a non-input node");
      if (n.init.has_value() && !(n.init->system() == system))
        diags.push_back("node " + n.id + ": initial value system mismatch");
      try {
        n.activation.validate(system);
      } catch (const std::exception& e) {
        diags.push_back("node " + n.id + ": " + e.what());
      }
    }
    std::set<std::pair<int, int>> seen;
    for (const NEdge& e : edges) {
      if (bad_node(e.from) || bad_node(e.to)) {
        diags.push_back("edge references an undeclared node (" + std::to_string(e.from) + " -> " +
                        std::to_string(e.to) + ")");
        continue;
      }
      if (!seen.insert({e.from, e.to}).second)
        diags.push_back("duplicate edge " + nodes[static_cast<size_t>(e.from)].id + " -> " +
                        nodes[static_cast<size_t>(e.to)].id);
      if (!(e.weight.system() == system))
        diags.push_back("edge " + nodes[static_cast<size_t>(e.from)].id + " -> " +
                        nodes[static_cast<size_t>(e.to)].id + ": weight system mismatch");
    }
    for (int i : inputs)
      if (bad_node(i)) diags.push_back("input list references an undeclared node");
    for (int i : outputs)
      if (bad_node(i)) diags.push_back("output list references an undeclared node");
    if (!external)
      for (auto& [i, t] : attention) {
        if (bad_node(i)) {
          diags.push_back("attention list references an undeclared node");
          continue;
        }
        if (!(t.system() == system))
          diags.push_back("attention node " + nodes[static_cast<size_t>(i)].id + ": threshold system mismatch");
      }
    return diags;
  }

  int index_of(const std::string& id) const {
    for (size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].id == id) return static_cast<int>(i);
    throw std::invalid_argument("unknown node " + id);
  }

  // in-edges per node, sources ascending in the node order
  std::vector<std::vector<std::pair<int, FloatValue>>> in_edges() const {
    std::vector<std::vector<std::pair<int, FloatValue>>> in(nodes.size());
    for (const NEdge& e : edges) in[static_cast<size_t>(e.to)].emplace_back(e.from, e.weight);
    for (auto& v : in)
      std::sort(v.begin(), v.end(), [](auto& a, auto& b) { return a.first < b.first; });
    return in;
  }

  int degree() const {
    auto in = in_edges();
    size_t d = 0;
    for (auto& v : in) d = std::max(d, v.size());
    return static_cast<int>(d);
  }

  int piece_size() const {
    size_t p = 1;
    for (auto& n : nodes) p = std::max(p, n.activation.pieces.size());
    return static_cast<int>(p);
  }

  int order() const {
    int o = 1;
    for (auto& n : nodes) o = std::max(o, n.activation.max_order());
    return o;
  }
};

using NetworkState = std::vector<FloatValue>;  // node -> value, in node order

struct FloatRunResult {
  std::vector<NetworkState> states;
  std::vector<std::pair<long long, std::vector<FloatValue>>> emissions;
};

namespace detail {

struct NodeCache {
  std::unordered_map<std::string, FloatValue> memo;
};

inline FloatValue aggregate(const NeuralNetwork& net, const std::vector<FloatValue>& terms) {
  if (net.aggregation == AggregationOrder::LeftFold) {
    FloatValue acc = terms[0];
    for (size_t i = 1; i < terms.size(); ++i) acc = fp_add(acc, terms[i]);
    return acc;
  }
  std::vector<FloatValue> xs = terms;
  return balanced_combine(std::move(xs), [](const FloatValue& a, const FloatValue& b) { return fp_add(a, b); });
}

}  // namespace detail

// Reference simulator. Products are rounded, the bias-led aggregation
// follows the configured order, the activation uses the canonical balanced
// schedule. Per-node memoization is sound because updates are pure.
inline FloatRunResult simulate(const NeuralNetwork& net, const std::vector<FloatValue>& input, long long horizon,
                               bool use_cache = true) {
  {
    auto diags = net.validate();
    if (!diags.empty()) throw std::invalid_argument("invalid network: " + diags[0]);
  }
  if (input.size() != net.inputs.size()) throw std::invalid_argument("input length mismatch");
  auto in = net.in_edges();
  std::vector<detail::NodeCache> caches(net.nodes.size());

  NetworkState state(net.nodes.size());
  for (size_t i = 0; i < net.nodes.size(); ++i)
    if (net.nodes[i].init.has_value()) state[i] = *net.nodes[i].init;
  for (size_t i = 0; i < net.inputs.size(); ++i) {
    if (!(input[i].system() == net.system)) throw std::invalid_argument("input value system mismatch");
    state[static_cast<size_t>(net.inputs[i])] = input[i];
  }

  FloatRunResult out;
  auto record = [&](long long t, const NetworkState& st) {
    bool fire = false;
    if (net.external) {
      fire = net.map.contains(t);
    } else {
      for (auto& [u, thresh] : net.attention)
        if (fp_compare(st[static_cast<size_t>(u)], thresh) > 0) fire = true;
    }
    if (fire) {
      std::vector<FloatValue> vals;
      for (int o : net.outputs) vals.push_back(st[static_cast<size_t>(o)]);
      out.emissions.emplace_back(t, std::move(vals));
    }
  };

  for (long long t = 0;; ++t) {
    out.states.push_back(state);
    record(t, state);
    if (t == horizon) break;
    NetworkState next(net.nodes.size());
    for (size_t v = 0; v < net.nodes.size(); ++v) {
      std::string key;
      if (use_cache) {
        for (auto& [u, w] : in[v]) {
          key += state[static_cast<size_t>(u)].str();
          key += '|';
        }
        auto it = caches[v].memo.find(key);
        if (it != caches[v].memo.end()) {
          next[v] = it->second;
          continue;
        }
      }
      std::vector<FloatValue> terms = {net.nodes[v].bias};
      for (auto& [u, w] : in[v]) terms.push_back(fp_mul(state[static_cast<size_t>(u)], w));
      FloatValue pre = detail::aggregate(net, terms);
      FloatValue val = eval_polynomial(select_piece(net.nodes[v].activation, pre).poly, pre);
      if (use_cache) caches[v].memo.emplace(std::move(key), val);
      next[v] = val;
    }
    state = std::move(next);
  }
  return out;
}

}  // namespace bnlkit
