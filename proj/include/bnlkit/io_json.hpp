#pragma once

#include <fstream>
#include <functional>
#include <json.hpp>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "bnlkit/circuit.hpp"
#include "bnlkit/network.hpp"
#include "bnlkit/text.hpp"

namespace bnlkit {

using nlohmann::json;

// ---- self-feeding circuits (.circ) ----

inline json circuit_to_json(const SelfFeedingCircuit& sfc) {
  json j;
  json gates = json::array();
  for (size_t i = 0; i < sfc.circuit.size(); ++i) {
    const Circuit::Gate& g = sfc.circuit.gates()[i];
    json gj;
    gj["id"] = i;
    switch (g.label) {
      case Circuit::Label::Input: gj["label"] = "input"; break;
      case Circuit::Label::And: gj["label"] = "and"; break;
      case Circuit::Label::Or: gj["label"] = "or"; break;
      case Circuit::Label::Not: gj["label"] = "not"; break;
    }
    if (!g.fanin.empty()) gj["in"] = g.fanin;
    gates.push_back(std::move(gj));
  }
  j["gates"] = std::move(gates);
  j["inputs"] = sfc.circuit.inputs();
  j["outputs"] = sfc.circuit.outputs();
  j["input_positions"] = sfc.input_positions;
  json init = json::object();
  for (size_t pos = 0; pos < sfc.init.size(); ++pos)
    if (sfc.init[pos].has_value()) init[std::to_string(pos)] = *sfc.init[pos] ? 1 : 0;
  j["init"] = std::move(init);
  j["print_positions"] = sfc.print_positions;
  if (sfc.external)
    j["rounds"] = detail::format_round_map(sfc.map);
  else
    j["attention_positions"] = sfc.attention_positions;
  return j;
}

inline SelfFeedingCircuit circuit_from_json(const json& j) {
  struct RawGate {
    std::string label;
    std::vector<long long> in;
  };
  std::map<long long, RawGate> raw;
  for (const json& gj : j.at("gates")) {
    RawGate g;
    g.label = gj.at("label").get<std::string>();
    if (gj.contains("in")) g.in = gj.at("in").get<std::vector<long long>>();
    raw[gj.at("id").get<long long>()] = std::move(g);
  }
  // topological order over the gate ids
  std::map<long long, int> state;  // 0 new, 1 visiting, 2 done
  std::vector<long long> order;
  std::function<void(long long)> visit = [&](long long id) {
    auto it = raw.find(id);
    if (it == raw.end()) throw std::invalid_argument("gate references unknown id " + std::to_string(id));
    int& st = state[id];
    if (st == 2) return;
    if (st == 1) throw std::invalid_argument("circuit has a cycle through gate " + std::to_string(id));
    st = 1;
    for (long long f : it->second.in) visit(f);
    st = 2;
    order.push_back(id);
  };
  for (auto& [id, g] : raw) visit(id);

  SelfFeedingCircuit sfc;
  std::map<long long, int> remap;
  for (long long id : order) {
    const RawGate& g = raw[id];
    std::vector<int> fanin;
    for (long long f : g.in) fanin.push_back(remap.at(f));
    if (g.label == "input") {
      if (!g.in.empty()) throw std::invalid_argument("input gate with fan-in");
      remap[id] = sfc.circuit.add_input();
    } else if (g.label == "and") {
      remap[id] = sfc.circuit.add_gate(Circuit::Label::And, std::move(fanin));
    } else if (g.label == "or") {
      remap[id] = sfc.circuit.add_gate(Circuit::Label::Or, std::move(fanin));
    } else if (g.label == "not") {
      remap[id] = sfc.circuit.add_gate(Circuit::Label::Not, std::move(fanin));
    } else {
      throw std::invalid_argument("unknown gate label " + g.label);
    }
  }
  // input order follows the file's list
  std::vector<int> file_inputs;
  for (long long id : j.at("inputs").get<std::vector<long long>>()) file_inputs.push_back(remap.at(id));
  sfc.circuit.set_input_order(std::move(file_inputs));

  std::vector<int> outs;
  for (long long id : j.at("outputs").get<std::vector<long long>>()) outs.push_back(remap.at(id));
  sfc.circuit.set_outputs(outs);

  sfc.input_positions = j.at("input_positions").get<std::vector<int>>();
  sfc.init.assign(sfc.circuit.inputs().size(), std::nullopt);
  for (auto& [key, val] : j.at("init").items()) {
    size_t pos = static_cast<size_t>(std::stoll(key));
    if (pos >= sfc.init.size()) throw std::invalid_argument("init position out of range");
    sfc.init[pos] = val.get<int>() != 0;
  }
  if (j.contains("print_positions")) sfc.print_positions = j.at("print_positions").get<std::vector<int>>();
  if (j.contains("rounds")) {
    sfc.external = true;
    sfc.map = detail::parse_round_map(j.at("rounds").get<std::string>());
  } else if (j.contains("attention_positions")) {
    sfc.attention_positions = j.at("attention_positions").get<std::vector<int>>();
  }
  sfc.validate();
  return sfc;
}

// ---- piece tables ----

inline json pieces_to_json(const PieceTable& t) {
  json arr = json::array();
  for (const Piece& pc : t.pieces) {
    json pj;
    if (pc.lower.has_value()) pj["lower"] = pc.lower->str();
    json cs = json::array();
    for (const FloatValue& c : pc.poly.coeffs) cs.push_back(c.str());
    pj["coeffs"] = std::move(cs);
    arr.push_back(std::move(pj));
  }
  return json{{"pieces", std::move(arr)}};
}

inline PieceTable pieces_from_json(const json& j, const FloatSystem& s) {
  PieceTable t;
  for (const json& pj : j.at("pieces")) {
    Piece pc;
    if (pj.contains("lower") && !pj.at("lower").is_null())
      pc.lower = FloatValue::parse(s, pj.at("lower").get<std::string>());
    for (const json& c : pj.at("coeffs")) pc.poly.coeffs.push_back(FloatValue::parse(s, c.get<std::string>()));
    t.pieces.push_back(std::move(pc));
  }
  t.validate(s);
  return t;
}

// ---- neural networks (.nn) ----

inline json network_to_json(const NeuralNetwork& net) {
  json j;
  j["system"] = {{"p", net.system.p}, {"q", net.system.q}, {"beta", net.system.beta}};
  j["aggregation"] = net.aggregation == AggregationOrder::BalancedTree ? "balanced" : "left";
  json nodes = json::array();
  for (const NNode& n : net.nodes) {
    json nj;
    nj["id"] = n.id;
    nj["bias"] = n.bias.str();
    if (n.init.has_value()) nj["init"] = n.init->str();
    nj["activation"] = pieces_to_json(n.activation)["pieces"];
    nodes.push_back(std::move(nj));
  }
  j["nodes"] = std::move(nodes);
  json edges = json::array();
  for (const NEdge& e : net.edges)
    edges.push_back({{"from", net.nodes[static_cast<size_t>(e.from)].id},
                     {"to", net.nodes[static_cast<size_t>(e.to)].id},
                     {"weight", e.weight.str()}});
  j["edges"] = std::move(edges);
  json ins = json::array(), outs = json::array();
  for (int i : net.inputs) ins.push_back(net.nodes[static_cast<size_t>(i)].id);
  for (int i : net.outputs) outs.push_back(net.nodes[static_cast<size_t>(i)].id);
  j["inputs"] = std::move(ins);
  j["outputs"] = std::move(outs);
  if (net.external) {
    j["rounds"] = detail::format_round_map(net.map);
  } else {
    json att = json::array();
    for (auto& [i, t] : net.attention)
      att.push_back({{"node", net.nodes[static_cast<size_t>(i)].id}, {"threshold", t.str()}});
    j["attention"] = std::move(att);
  }
  return j;
}

inline NeuralNetwork network_from_json(const json& j) {
  NeuralNetwork net;
  const json& sj = j.at("system");
  net.system = FloatSystem{sj.at("p").get<int>(), sj.at("q").get<int>(), sj.at("beta").get<int>()};
  if (j.contains("aggregation"))
    net.aggregation = j.at("aggregation").get<std::string>() == "left" ? AggregationOrder::LeftFold
                                                                       : AggregationOrder::BalancedTree;
  for (const json& nj : j.at("nodes")) {
    NNode n;
    n.id = nj.at("id").get<std::string>();
    n.bias = FloatValue::parse(net.system, nj.at("bias").get<std::string>());
    if (nj.contains("init") && !nj.at("init").is_null())
      n.init = FloatValue::parse(net.system, nj.at("init").get<std::string>());
    n.activation = pieces_from_json(json{{"pieces", nj.at("activation")}}, net.system);
    net.nodes.push_back(std::move(n));
  }
  for (const json& ej : j.at("edges"))
    net.edges.push_back({net.index_of(ej.at("from").get<std::string>()),
                         net.index_of(ej.at("to").get<std::string>()),
                         FloatValue::parse(net.system, ej.at("weight").get<std::string>())});
  for (const json& id : j.at("inputs")) net.inputs.push_back(net.index_of(id.get<std::string>()));
  for (const json& id : j.at("outputs")) net.outputs.push_back(net.index_of(id.get<std::string>()));
  std::sort(net.inputs.begin(), net.inputs.end());
  if (j.contains("rounds")) {
    net.external = true;
    net.map = detail::parse_round_map(j.at("rounds").get<std::string>());
  } else if (j.contains("attention")) {
    for (const json& aj : j.at("attention"))
      net.attention.emplace_back(net.index_of(aj.at("node").get<std::string>()),
                                 FloatValue::parse(net.system, aj.at("threshold").get<std::string>()));
    std::sort(net.attention.begin(), net.attention.end(), [](auto& a, auto& b) { return a.first < b.first; });
  }
  auto diags = net.validate();
  if (!diags.empty()) throw std::invalid_argument("invalid network: " + diags[0]);
  return net;
}

// ---- file helpers ----

inline std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << content;
}

}  // namespace bnlkit
