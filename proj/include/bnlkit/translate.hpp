#pragma once

#include <string>
#include <vector>

#include "bnlkit/fpops.hpp"
#include "bnlkit/fully_open.hpp"
#include "bnlkit/network.hpp"

namespace bnlkit {

struct NnToBnlResult {
  BnlProgram program;
  long long period = 1;  // landing-tick spacing T
};

namespace fpdetail {

inline std::vector<Formula> float_bits(const FloatNet& v) {
  std::vector<Formula> bits;
  bits.push_back(v.esign);
  bits.push_back(v.fsign);
  for (size_t i = v.e.width(); i-- > 0;)
    for (const Formula& f : v.e.d[i].bit) bits.push_back(f);
  for (size_t i = v.f.width(); i-- > 0;)
    for (const Formula& f : v.f.d[i].bit) bits.push_back(f);
  return bits;
}

inline FloatNet float_net_of_bits(const std::vector<Symbol>& bits, const FloatSystem& S) {
  FloatNet n;
  size_t i = 0;
  n.esign = Formula::var(bits[i++]);
  n.fsign = Formula::var(bits[i++]);
  std::vector<DigitNet> eb, fb;
  for (int j = 0; j < S.q; ++j) {
    DigitNet dn;
    for (int k = 0; k < S.beta; ++k) dn.bit.push_back(Formula::var(bits[i++]));
    eb.push_back(std::move(dn));
  }
  for (int j = 0; j < S.p; ++j) {
    DigitNet dn;
    for (int k = 0; k < S.beta; ++k) dn.bit.push_back(Formula::var(bits[i++]));
    fb.push_back(std::move(dn));
  }
  for (int j = S.q - 1; j >= 0; --j) n.e.d.push_back(std::move(eb[static_cast<size_t>(j)]));
  for (int j = S.p - 1; j >= 0; --j) n.f.d.push_back(std::move(fb[static_cast<size_t>(j)]));
  return n;
}

}  // namespace fpdetail

// Network-to-program translation: per node a block of one-hot value
// predicates, one arithmetic pipeline per node (edge multiplications, the
// configured aggregation order, the piecewise activation), and a global
// one-hot counter whose period covers the deepest pipeline, so all value
// blocks latch on the same tick.
inline NnToBnlResult nn_to_bnl(const NeuralNetwork& net) {
  {
    auto diags = net.validate();
    if (!diags.empty()) throw std::invalid_argument("invalid network: " + diags[0]);
  }
  const FloatSystem& S = net.system;
  std::set<int> input_set(net.inputs.begin(), net.inputs.end());
  if (!net.external)
    for (auto& [u, t] : net.attention)
      if (input_set.count(u))
        throw std::invalid_argument(
            "attention node " + net.nodes[static_cast<size_t>(u)].id +
            " is an input node; its round-0 firing depends on the input and has no program counterpart");

  ProgramBuilder b;
  size_t enc = 2 + static_cast<size_t>(S.beta) * static_cast<size_t>(S.p + S.q);

  // Value predicates per node, declared in node order with the codec layout.
  std::vector<std::vector<Symbol>> bits(net.nodes.size());
  FloatCodec codec = FloatCodec::normal(S);
  for (size_t v = 0; v < net.nodes.size(); ++v) {
    const std::string& id = net.nodes[v].id;
    bool is_input = input_set.count(static_cast<int>(v)) > 0;
    std::vector<uint8_t> init_bits;
    if (!is_input) init_bits = codec.encode(*net.nodes[v].init);
    for (size_t k = 0; k < enc; ++k) {
      std::string name = id + "_v" + std::to_string(k);
      bits[v].push_back(is_input ? b.input_source(name) : b.source(name, init_bits[k] != 0));
    }
  }

  // Per-node pipelines.
  auto in = net.in_edges();
  std::vector<FloatNet> result(net.nodes.size());
  for (size_t v = 0; v < net.nodes.size(); ++v) {
    std::string hint = "n" + std::to_string(v) + "_";
    std::vector<FloatNet> terms = {fpdetail::const_float_net(net.nodes[v].bias)};
    for (size_t j = 0; j < in[v].size(); ++j) {
      FloatNet src = fpdetail::float_net_of_bits(bits[static_cast<size_t>(in[v][j].first)], S);
      terms.push_back(fpdetail::fp_mul_net(b, src, fpdetail::const_float_net(in[v][j].second), S,
                                           hint + "e" + std::to_string(j) + "_"));
    }
    FloatNet pre;
    if (net.aggregation == AggregationOrder::LeftFold) {
      pre = terms[0];
      for (size_t j = 1; j < terms.size(); ++j)
        pre = fpdetail::fp_add_net(b, pre, terms[j], S, hint + "a" + std::to_string(j) + "_");
    } else {
      int stage = 0;
      while (terms.size() > 1) {
        std::vector<FloatNet> next;
        for (size_t j = 0; j + 1 < terms.size(); j += 2)
          next.push_back(fpdetail::fp_add_net(b, terms[j], terms[j + 1], S,
                                              hint + "a" + std::to_string(stage) + "_" + std::to_string(j) + "_"));
        if (terms.size() % 2 == 1) next.push_back(terms.back());
        terms = std::move(next);
        ++stage;
      }
      pre = terms[0];
    }
    result[v] = fpdetail::piecewise_net(b, pre, net.nodes[v].activation, S, hint + "f", nullptr);
  }

  // Attention comparators on the incoming (pipeline) values.
  std::vector<std::pair<int, Symbol>> att_gt;
  if (!net.external) {
    for (auto& [u, t] : net.attention) {
      fpdetail::FpCmpNets c = fpdetail::fp_cmp_net(b, result[static_cast<size_t>(u)],
                                                   fpdetail::const_float_net(t), "att" + std::to_string(u) + "_");
      att_gt.emplace_back(u, b.pred("attgt", c.gt));
    }
  }

  long long period = b.max_depth() + 1;

  // Cyclic counter (excluded from depth bookkeeping).
  std::vector<Symbol> counter;
  for (long long i = 0; i < period; ++i) counter.push_back(b.source("Tick", i == 0));
  for (long long i = 0; i < period; ++i)
    b.set_source_rule(counter[static_cast<size_t>(i)],
                      Formula::var(counter[static_cast<size_t>(i == 0 ? period - 1 : i - 1)]));
  Formula tick = Formula::var(counter[static_cast<size_t>(period - 1)]);

  // Latches: every value block lands on the same tick.
  for (size_t v = 0; v < net.nodes.size(); ++v) {
    std::vector<Formula> res_bits = fpdetail::float_bits(result[v]);
    for (size_t k = 0; k < enc; ++k)
      b.set_source_rule(bits[v][k], apply_flag(res_bits[k], tick, Formula::var(bits[v][k])));
  }

  std::vector<Symbol> prints;
  for (int o : net.outputs)
    for (Symbol s : bits[static_cast<size_t>(o)]) prints.push_back(s);

  AttentionSpec spec;
  if (net.external) {
    spec = AttentionSpec::rounds(RoundMap::affine(period, 0, net.map));
  } else {
    std::vector<Symbol> att;
    for (auto& [u, gt] : att_gt) {
      FloatValue thresh;
      for (auto& [uu, tt] : net.attention)
        if (uu == u) thresh = tt;
      bool fire0 = fp_compare(*net.nodes[static_cast<size_t>(u)].init, thresh) > 0;
      Symbol a = b.fresh("Att");
      b.raw().declare(a);
      b.raw().set_terminal(a, fire0);
      b.raw().set_rule(a, Formula::conj(tick, Formula::var(gt)));
      att.push_back(a);
    }
    spec = AttentionSpec::preds(att);
  }

  NnToBnlResult out;
  out.period = period;
  out.program = b.finish(prints, std::move(spec));
  return out;
}

// Program-to-network translation over the fully-open form: one node per
// predicate, biases and unit weights by clause shape, values always 0 or 1.
inline NeuralNetwork bnl_to_nn(const BnlProgram& p, bool heaviside, const FloatSystem& S) {
  FullyOpenResult fo = to_fully_open(p);
  const BnlProgram& q = fo.program;

  NeuralNetwork net;
  net.system = S;
  FloatValue one = FloatValue::one(S);
  FloatValue zero = FloatValue::zero(S);
  FloatValue minus_one = FloatValue::make(S, false, one.digits(), one.exponent());
  PieceTable act = heaviside ? PieceTable::heaviside(S) : PieceTable::relu(S);

  for (size_t i = 0; i < q.var_count(); ++i) {
    NNode n;
    n.id = q.variables()[i].str();
    n.activation = act;
    n.bias = zero;
    if (q.terminal(static_cast<int>(i)).has_value())
      n.init = *q.terminal(static_cast<int>(i)) ? one : zero;
    const Formula& body = q.rule(static_cast<int>(i));
    switch (body.op()) {
      case Formula::Op::Top:
        n.bias = one;
        break;
      case Formula::Op::Var:
        net.edges.push_back({static_cast<int>(q.index_of(body.var_symbol())), static_cast<int>(i), one});
        break;
      case Formula::Op::Not:
        n.bias = one;
        net.edges.push_back({static_cast<int>(q.index_of(body.left().var_symbol())), static_cast<int>(i), minus_one});
        break;
      case Formula::Op::And: {
        int y = q.index_of(body.left().var_symbol());
        int z = q.index_of(body.right().var_symbol());
        if (y == z) {  // Y AND Y behaves as Y
          net.edges.push_back({y, static_cast<int>(i), one});
        } else {
          n.bias = minus_one;
          net.edges.push_back({y, static_cast<int>(i), one});
          net.edges.push_back({z, static_cast<int>(i), one});
        }
        break;
      }
    }
    net.nodes.push_back(std::move(n));
  }

  for (int idx : q.input_indices()) net.inputs.push_back(idx);
  // emission order follows the program's print list
  for (Symbol s : q.print()) net.outputs.push_back(q.index_of(s));
  if (q.attention().external) {
    net.external = true;
    net.map = q.attention().map;  // already scaled by the fully-open transform
  } else {
    // firing means value 1; the threshold is the largest value below one
    FloatValue below_one = FloatValue::make(S, true, std::vector<uint8_t>(static_cast<size_t>(S.p),
                                                                          static_cast<uint8_t>(S.beta - 1)),
                                            0);
    for (Symbol s : q.attention().predicates) net.attention.emplace_back(q.index_of(s), below_one);
    std::sort(net.attention.begin(), net.attention.end(),
              [](auto& a, auto& b) { return a.first < b.first; });
  }
  {
    auto diags = net.validate();
    if (!diags.empty()) throw std::logic_error("translated network invalid: " + diags[0]);
  }
  return net;
}

}  // namespace bnlkit
