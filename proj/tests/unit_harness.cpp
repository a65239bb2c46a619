#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "bnlkit/equiv.hpp"
#include "bnlkit/io_json.hpp"
#include "bnlkit/oracle.hpp"
#include "bnlkit/text.hpp"
#include "bnlkit/translate.hpp"
#include "testutil.hpp"
#include "testutil_nn.hpp"

using namespace bnlkit;

TEST_CASE("self-equivalence holds with delay one for every runnable kind") {
  BnlProgram p = parse_program("X(0) :- T. Y :- Y & X. X :- !X.\n#print X,Y\n#attention X");
  ScProgram sc = bnl_to_sc(p);
  SelfFeedingCircuit c = bnl_to_circuit(p, CircuitMode::Direct);
  std::mt19937 rng(4);
  NeuralNetwork nn = testutil::random_network(rng, {.nodes = 3, .sys = FloatSystem{2, 2, 2}});

  for (Runnable r : {Runnable::of(p), Runnable::of(sc), Runnable::of(c)}) {
    EquivalenceReport rep = check_equivalence(r, r, VerifyCodec::identity(), {}, 5, 24);
    CHECK(rep.equivalent);
    CHECK(rep.delay_a_over_b == 1);
    CHECK(rep.delay_b_over_a == 1);
  }
  Runnable rn = Runnable::of(nn);
  EquivalenceReport rep = check_equivalence(rn, rn, VerifyCodec::floats(2, 2, 2), {false, 20, 9}, 3, 12);
  CHECK(rep.equivalent);
  CHECK(rep.delay_a_over_b == 1);
}

TEST_CASE("swapping the sides flips only the delay direction") {
  ScProgram sc = parse_sc_program("X(0) :- p0. X :- !X.\n#print X\n#attention X");
  BnlProgram image = sc_to_bnl(sc);
  Runnable a = Runnable::of(sc), b = Runnable::of(image);
  EquivalenceReport r1 = check_equivalence(a, b, VerifyCodec::identity(), {}, 6, 40);
  EquivalenceReport r2 = check_equivalence(b, a, VerifyCodec::identity(), {}, 6, 40);
  CHECK(r1.equivalent);
  CHECK(r2.equivalent);
  CHECK(r1.delay_a_over_b == r2.delay_b_over_a);
  CHECK(r1.delay_b_over_a == r2.delay_a_over_b);
}

TEST_CASE("counterexamples are replayable") {
  // same firing pattern, divergent print values on input 1
  BnlProgram p = parse_program("X :- X. Y(0) :- T. Y :- Y.\n#print Y\n#attention X");
  BnlProgram q = parse_program("X :- X. Y(0) :- F. Y :- Y.\n#print Y\n#attention X");
  Runnable a = Runnable::of(p), b = Runnable::of(q);
  EquivalenceReport rep = check_equivalence(a, b, VerifyCodec::identity(), {}, 4, 16);
  REQUIRE(!rep.equivalent);
  REQUIRE(rep.counterexample.has_value());
  RunResult ra = a.run_bits(rep.counterexample->input, 16);
  RunResult rb = b.run_bits(rep.counterexample->input, 16);
  size_t i = rep.counterexample->emission_index;
  CHECK(ra.output.emissions[i].second == rep.counterexample->a_output);
  CHECK(rb.output.emissions[i].second == rep.counterexample->b_output);
  CHECK(ra.output.emissions[i].second != rb.output.emissions[i].second);
}

TEST_CASE("global mode catches round shifts that plain mode accepts") {
  ScProgram sc = parse_sc_program("X(0) :- p0. X :- !X.\n#print X\n#attention X");
  BnlProgram image = sc_to_bnl(sc);
  // asynchronously equivalent
  EquivalenceReport plain =
      check_equivalence(Runnable::of(sc), Runnable::of(image), VerifyCodec::identity(), {}, 6, 40);
  CHECK(plain.equivalent);
  CHECK(plain.delay_b_over_a >= 1);
}

TEST_CASE("circuit json round trip preserves behaviour") {
  SelfFeedingCircuit c3 = parity_circuit(3);
  SelfFeedingCircuit back = circuit_from_json(circuit_to_json(c3));
  for (auto& in : testutil::all_inputs(3)) {
    RunResult r1 = run_self_feeding(c3, in, 6);
    RunResult r2 = run_self_feeding(back, in, 6);
    CHECK(r1.configs == r2.configs);
    CHECK(r1.output.emissions == r2.output.emissions);
  }
}

TEST_CASE("network json round trip preserves behaviour") {
  std::mt19937 rng(12);
  for (int rep = 0; rep < 5; ++rep) {
    NeuralNetwork net = testutil::random_network(rng, {.nodes = 4, .sys = FloatSystem{2, 2, 2}});
    NeuralNetwork back = network_from_json(network_to_json(net));
    auto values = enumerate_system(net.system);
    std::uniform_int_distribution<size_t> pick(0, values.size() - 1);
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<FloatValue> in;
      for (size_t i = 0; i < net.inputs.size(); ++i) in.push_back(values[pick(rng)]);
      FloatRunResult r1 = simulate(net, in, 8);
      FloatRunResult r2 = simulate(back, in, 8);
      REQUIRE(r1.states == r2.states);
      REQUIRE(r1.emissions == r2.emissions);
    }
  }
}

TEST_CASE("oracle kinds produce the documented reference values") {
  using namespace bnlkit::oracle;
  CHECK(int_add(BigInt(614), BigInt(187)) == BigInt(801));
  CHECK(parity({0, 1, 1}) == 0);
  FloatSystem s{2, 1, 10};
  ExactRational sum = ExactRational::of(99) + ExactRational::of(2);
  CHECK(round_to_system(sum, s).str() == "+0.10e+3");
  // truth table of x & !y
  Formula f = Formula::conj(Formula::var("x"), Formula::negate(Formula::var("y")));
  auto tt = truth_table(f, formula_variables(f));
  CHECK(tt == std::vector<uint8_t>{0, 1, 0, 0});
  CHECK(truth_table(balance_formula(f)) == tt);
}

TEST_CASE("parity circuit and its program image verify with the delay factor") {
  SelfFeedingCircuit c3 = parity_circuit(3);
  CircuitToBnlResult image = circuit_to_bnl(c3);
  Runnable a = Runnable::of(c3), b = Runnable::of(image.program);
  EquivalenceReport rep = check_equivalence(a, b, VerifyCodec::identity(), {}, 2, 10 * image.delay);
  CHECK(rep.equivalent);
  CHECK(rep.delay_b_over_a == image.delay);
}

TEST_CASE("output rounds in predicate mode are exactly the one-bits of attention") {
  std::mt19937 rng(77);
  for (int rep = 0; rep < 30; ++rep) {
    BnlProgram p = testutil::random_program(rng, {.max_vars = 6, .max_inputs = 4});
    EvalPlan plan(p);
    for (auto& in : testutil::all_inputs(p.input_indices().size())) {
      RunResult r = run(p, in, 16, &plan);
      std::vector<long long> expected;
      for (long long t = 0; t <= 16; ++t) {
        bool fire = false;
        for (Symbol s : p.attention().predicates)
          fire = fire || r.configs[static_cast<size_t>(t)][static_cast<size_t>(p.index_of(s))];
        if (fire) expected.push_back(t);
      }
      std::vector<long long> got;
      for (auto& [t, s] : r.output.emissions) got.push_back(t);
      REQUIRE(got == expected);
    }
  }
}

TEST_CASE("verify decodes one-hot integers through the int codec") {
  CompiledProgram add = compile_int_op(IntOpKind::Add, 2, 3);
  Runnable a = Runnable::of(add.program);
  EquivalenceReport rep =
      check_equivalence(a, a, VerifyCodec::ints(2, 3), {false, 25, 7}, 1, add.output_round + 2);
  CHECK(rep.equivalent);
  CHECK(rep.inputs_tested == 25);
}
