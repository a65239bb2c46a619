#pragma once

#include <random>
#include <set>

#include "bnlkit/network.hpp"
#include "testutil_fp.hpp"

namespace testutil {

using bnlkit::FloatSystem;
using bnlkit::FloatValue;
using bnlkit::NeuralNetwork;
using bnlkit::Piece;
using bnlkit::PieceTable;

struct NetOpts {
  int nodes = 4;
  int max_degree = 2;
  int max_pieces = 2;
  int max_order = 2;
  FloatSystem sys{3, 2, 2};
};

inline NeuralNetwork random_network(std::mt19937& rng, const NetOpts& o) {
  auto values = bnlkit::enumerate_system(o.sys);
  std::uniform_int_distribution<size_t> vpick(0, values.size() - 1);
  auto val = [&]() { return values[vpick(rng)]; };
  std::uniform_int_distribution<int> coin(0, 1);

  NeuralNetwork net;
  net.system = o.sys;
  for (int i = 0; i < o.nodes; ++i) {
    bnlkit::NNode n;
    n.id = "n" + std::to_string(i);
    n.bias = val();
    n.init = val();
    std::uniform_int_distribution<int> pc(1, o.max_pieces);
    int npieces = pc(rng);
    std::set<std::string> used;
    std::vector<FloatValue> breaks;
    while (static_cast<int>(breaks.size()) < npieces - 1) {
      FloatValue v = val();
      if (used.insert(v.str()).second) breaks.push_back(v);
    }
    std::sort(breaks.begin(), breaks.end(),
              [](const FloatValue& a, const FloatValue& b) { return bnlkit::fp_compare(a, b) < 0; });
    std::uniform_int_distribution<int> oc(0, o.max_order);
    for (int pi = 0; pi < npieces; ++pi) {
      Piece pc2;
      if (pi > 0) pc2.lower = breaks[static_cast<size_t>(pi - 1)];
      int order = oc(rng);
      for (int k = 0; k <= order; ++k) pc2.poly.coeffs.push_back(val());
      n.activation.pieces.push_back(std::move(pc2));
    }
    net.nodes.push_back(std::move(n));
  }
  // in-degree bounded by both the requested degree and the node count
  // (edges form a set, so at most one edge per source)
  std::uniform_int_distribution<int> deg(0, std::min(o.max_degree, o.nodes));
  std::uniform_int_distribution<int> src(0, o.nodes - 1);
  for (int i = 0; i < o.nodes; ++i) {
    int d = deg(rng);
    std::set<int> used;
    while (static_cast<int>(used.size()) < d) used.insert(src(rng));
    for (int u : used) net.edges.push_back({u, i, val()});
  }
  for (int i = 0; i < o.nodes; ++i)
    if (coin(rng) && static_cast<int>(net.inputs.size()) + 1 < o.nodes) net.inputs.push_back(i);
  std::set<int> input_set(net.inputs.begin(), net.inputs.end());
  for (int i = 0; i < o.nodes; ++i) {
    if (input_set.count(i)) net.nodes[static_cast<size_t>(i)].init.reset();
    if (coin(rng)) net.outputs.push_back(i);
  }
  if (net.outputs.empty()) net.outputs.push_back(o.nodes - 1);
  for (int i = 0; i < o.nodes; ++i)
    if (!input_set.count(i) && coin(rng)) net.attention.emplace_back(i, val());
  if (net.attention.empty()) {
    for (int i = o.nodes - 1; i >= 0; --i) {
      if (!input_set.count(i)) {
        net.attention.emplace_back(i, val());
        break;
      }
    }
  }
  std::sort(net.attention.begin(), net.attention.end(), [](auto& a, auto& b) { return a.first < b.first; });
  if (net.attention.empty()) throw std::logic_error("generator made a net with no possible attention node");
  return net;
}

}  // namespace testutil
