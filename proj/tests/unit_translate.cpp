#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "bnlkit/text.hpp"
#include "bnlkit/translate.hpp"
#include "testutil.hpp"
#include "testutil_nn.hpp"

using namespace bnlkit;
using testutil::all_inputs;

namespace {

// Binary asynchronous equivalence: the program's emitted bit strings must
// match the network's emitted 0/1 float tuples, emission by emission.
void check_binary_equivalence(const BnlProgram& p, const EvalPlan& plan, const NeuralNetwork& net,
                              const std::vector<uint8_t>& bits, size_t m, long long bnl_horizon,
                              long long nn_horizon) {
  RunResult rp = run(p, bits, bnl_horizon, &plan);
  std::vector<FloatValue> floats;
  for (uint8_t b : bits) floats.push_back(b ? FloatValue::one(net.system) : FloatValue::zero(net.system));
  FloatRunResult rn = simulate(net, floats, nn_horizon);
  size_t n = std::min(m, std::min(rp.output.emissions.size(), rn.emissions.size()));
  REQUIRE(rp.output.emissions.size() >= n);
  REQUIRE(rn.emissions.size() >= n);
  FloatValue one = FloatValue::one(net.system);
  for (size_t i = 0; i < n; ++i) {
    const std::string& ps = rp.output.emissions[i].second;
    const auto& nv = rn.emissions[i].second;
    REQUIRE(ps.size() == nv.size());
    for (size_t j = 0; j < ps.size(); ++j) {
      bool nn_bit = nv[j] == one;
      if (!nn_bit) REQUIRE(nv[j] == FloatValue::zero(net.system));
      REQUIRE((ps[j] == '1') == nn_bit);
    }
  }
  // both sides must agree on whether more outputs exist within the horizons
  if (rp.output.emissions.size() < m && rn.emissions.size() < m)
    REQUIRE(rp.output.emissions.size() == rn.emissions.size());
}

}  // namespace

TEST_CASE("conjunction gadget computes AND through ReLU") {
  FloatSystem s{2, 2, 2};
  BnlProgram p = parse_program("X :- Y & Z. Y :- Y. Z :- Z.\n#print X\n#attention X");
  NeuralNetwork net = bnl_to_nn(p, false, s);
  FloatValue one = FloatValue::one(s), zero = FloatValue::zero(s);
  auto out = simulate(net, {zero, one, one}, 1);
  CHECK(out.states[1][net.index_of("X")] == one);
  auto out2 = simulate(net, {zero, one, zero}, 1);
  CHECK(out2.states[1][net.index_of("X")] == zero);
}

TEST_CASE("negation gadget computes 1 - x") {
  FloatSystem s{2, 2, 2};
  BnlProgram p = parse_program("X :- !Y. Y :- Y.\n#print X\n#attention X");
  for (bool heaviside : {false, true}) {
    NeuralNetwork net = bnl_to_nn(p, heaviside, s);
    FloatValue one = FloatValue::one(s), zero = FloatValue::zero(s);
    auto out = simulate(net, {zero, one}, 1);
    CHECK(out.states[1][net.index_of("X")] == zero);
    auto out2 = simulate(net, {zero, zero}, 1);
    CHECK(out2.states[1][net.index_of("X")] == one);
  }
}

TEST_CASE("bnl_to_nn: binary asynchronous equivalence on random programs") {
  std::mt19937 rng(515);
  FloatSystem s{2, 2, 2};
  for (int rep = 0; rep < 30; ++rep) {
    BnlProgram p = testutil::random_program(rng, {.max_vars = 7, .max_inputs = 5, .max_depth = 4});
    EvalPlan plan(p);
    for (bool heaviside : {false, true}) {
      NeuralNetwork net = bnl_to_nn(p, heaviside, s);
      // degree and node-count bounds from the construction
      CHECK(net.degree() <= 2);
      CHECK(static_cast<int64_t>(net.nodes.size()) <= to_fully_open(p).program.measure().size);
      long long delay = to_fully_open(p).delay;
      for (auto& in : all_inputs(p.input_indices().size())) {
        check_binary_equivalence(p, plan, net, in, 10, 12, 12 * delay);
      }
    }
  }
}

TEST_CASE("bnl_to_nn keeps activation values binary") {
  std::mt19937 rng(616);
  FloatSystem s{3, 2, 2};
  FloatValue one = FloatValue::one(s), zero = FloatValue::zero(s);
  for (int rep = 0; rep < 10; ++rep) {
    BnlProgram p = testutil::random_program(rng, {.max_vars = 5, .max_inputs = 4});
    NeuralNetwork net = bnl_to_nn(p, false, s);
    for (auto& in : all_inputs(p.input_indices().size())) {
      std::vector<FloatValue> floats;
      for (uint8_t b : in) floats.push_back(b ? one : zero);
      FloatRunResult r = simulate(net, floats, 20);
      for (auto& st : r.states)
        for (auto& v : st) CHECK((v == one || v == zero));
    }
  }
}

TEST_CASE("nn_to_bnl: single constant node lands its value every tick") {
  FloatSystem s{2, 2, 2};
  NeuralNetwork net;
  net.system = s;
  NNode n;
  n.id = "n0";
  n.bias = FloatValue::one(s);
  n.init = FloatValue::zero(s);
  n.activation = PieceTable::relu(s);
  net.nodes.push_back(n);
  net.outputs = {0};
  net.attention.emplace_back(0, FloatValue::zero(s));
  REQUIRE(net.validate().empty());

  NnToBnlResult r = nn_to_bnl(net);
  EvalPlan plan(r.program);
  FloatRunResult sim = simulate(net, {}, 4);
  RunResult rp = run(r.program, {}, 4 * r.period, &plan);
  FloatCodec codec = FloatCodec::normal(s);
  REQUIRE(rp.output.emissions.size() >= sim.emissions.size());
  for (size_t i = 0; i < sim.emissions.size(); ++i) {
    CHECK(rp.output.emissions[i].first == sim.emissions[i].first * r.period);
    std::vector<uint8_t> bits;
    for (char c : rp.output.emissions[i].second) bits.push_back(c == '1');
    CHECK(codec.decode(bits) == sim.emissions[i].second[0]);
  }
}

TEST_CASE("nn_to_bnl rejects attention on input nodes") {
  FloatSystem s{2, 2, 2};
  NeuralNetwork net;
  net.system = s;
  NNode n;
  n.id = "n0";
  n.bias = FloatValue::zero(s);
  n.activation = PieceTable::relu(s);
  net.nodes.push_back(n);
  net.inputs = {0};
  net.outputs = {0};
  net.attention.emplace_back(0, FloatValue::zero(s));
  CHECK_THROWS_AS(nn_to_bnl(net), std::invalid_argument);
}

TEST_CASE("nn_to_bnl: random networks are asynchronously equivalent in S") {
  std::mt19937 rng(717);
  testutil::NetOpts opts;
  opts.nodes = 3;
  opts.sys = FloatSystem{2, 2, 2};
  auto values = enumerate_system(opts.sys);
  std::uniform_int_distribution<size_t> vpick(0, values.size() - 1);
  for (int rep = 0; rep < 6; ++rep) {
    NeuralNetwork net = testutil::random_network(rng, opts);
    NnToBnlResult r = nn_to_bnl(net);
    EvalPlan plan(r.program);
    FloatCodec codec = FloatCodec::normal(opts.sys);
    for (int trial = 0; trial < 12; ++trial) {
      std::vector<FloatValue> in;
      std::vector<uint8_t> bits;
      for (size_t i = 0; i < net.inputs.size(); ++i) {
        FloatValue v = values[vpick(rng)];
        in.push_back(v);
        std::vector<uint8_t> e = codec.encode(v);
        bits.insert(bits.end(), e.begin(), e.end());
      }
      FloatRunResult sim = simulate(net, in, 12);
      RunResult rp = run(r.program, bits, 12 * r.period, &plan);
      size_t m = std::min<size_t>(3, sim.emissions.size());
      REQUIRE(rp.output.emissions.size() >= m);
      for (size_t i = 0; i < m; ++i) {
        CAPTURE(rep, trial, i);
        REQUIRE(rp.output.emissions[i].first == sim.emissions[i].first * r.period);
        const std::string& str = rp.output.emissions[i].second;
        size_t enc = codec.encoded_length();
        REQUIRE(str.size() == enc * sim.emissions[i].second.size());
        for (size_t j = 0; j < sim.emissions[i].second.size(); ++j) {
          std::vector<uint8_t> vb;
          for (size_t k = 0; k < enc; ++k) vb.push_back(str[j * enc + k] == '1');
          REQUIRE(codec.decode(vb) == sim.emissions[i].second[j]);
        }
      }
    }
  }
}
