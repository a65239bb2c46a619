#include <catch2/catch_amalgamated.hpp>

#include "bnlkit/circuit.hpp"
#include "bnlkit/fully_open.hpp"
#include "bnlkit/text.hpp"
#include "testutil.hpp"

using namespace bnlkit;
using testutil::all_inputs;

static int parity_of(const std::vector<uint8_t>& bits) {
  int s = 0;
  for (uint8_t b : bits) s ^= b;
  return s;
}

TEST_CASE("parity circuit reproduces the documented 3-bit traces") {
  SelfFeedingCircuit c3 = parity_circuit(3);
  // width 4: positions x1,x2,x3,a
  RunResult r = run_self_feeding(c3, {0, 1, 0}, 3);
  CHECK(testutil::config_string(r.configs[0]) == "0100");
  CHECK(testutil::config_string(r.configs[1]) == "1000");
  CHECK(testutil::config_string(r.configs[2]) == "1001");
  CHECK(testutil::config_string(r.configs[3]) == "1001");
  REQUIRE(!r.output.emissions.empty());
  CHECK(r.output.emissions[0].first == 2);
  CHECK(r.output.emissions[0].second == "1");

  RunResult r2 = run_self_feeding(c3, {0, 1, 1}, 3);
  CHECK(testutil::config_string(r2.configs[0]) == "0110");
  CHECK(testutil::config_string(r2.configs[1]) == "1100");
  CHECK(testutil::config_string(r2.configs[2]) == "0000");
  CHECK(testutil::config_string(r2.configs[3]) == "0001");
  REQUIRE(!r2.output.emissions.empty());
  CHECK(r2.output.emissions[0].first == 3);
  CHECK(r2.output.emissions[0].second == "0");
}

TEST_CASE("parity circuit: single bit is its own parity") {
  SelfFeedingCircuit c1 = parity_circuit(1);
  for (uint8_t b : {0, 1}) {
    RunResult r = run_self_feeding(c1, {b}, 2);
    REQUIRE(!r.output.emissions.empty());
    CHECK(r.output.emissions[0].first == 1);
    CHECK(r.output.emissions[0].second == std::string(1, '0' + b));
  }
}

TEST_CASE("parity circuit computes parity within log rounds") {
  for (int n = 2; n <= 10; ++n) {
    SelfFeedingCircuit cn = parity_circuit(n);
    int klog = 1;
    while ((1 << klog) < n) ++klog;
    for (auto& in : all_inputs(static_cast<size_t>(n))) {
      RunResult r = run_self_feeding(cn, in, klog + 1);
      REQUIRE(!r.output.emissions.empty());
      CHECK(r.output.emissions[0].second == std::string(1, '0' + parity_of(in)));
      CHECK(r.output.emissions[0].first <= klog + 1);
    }
  }
}

TEST_CASE("parity circuit size is linear with one auxiliary position") {
  size_t base = parity_circuit(1).circuit.size();
  for (int n = 1; n <= 64; ++n) {
    SelfFeedingCircuit cn = parity_circuit(n);
    CHECK(cn.width() - cn.input_positions.size() == 1);
    CHECK(cn.circuit.size() <= base * static_cast<size_t>(12 * n));
  }
}

TEST_CASE("identity self-feeding circuit is a fixed point") {
  SelfFeedingCircuit sfc;
  for (int i = 0; i < 3; ++i) sfc.circuit.add_input();
  sfc.circuit.set_outputs({0, 1, 2});
  sfc.input_positions = {0, 1, 2};
  sfc.init.assign(3, std::nullopt);
  sfc.print_positions = {0, 1, 2};
  sfc.attention_positions = {0};
  for (auto& in : all_inputs(3)) {
    RunResult r = run_self_feeding(sfc, in, 4);
    for (auto& c : r.configs) CHECK(c == Configuration(in.begin(), in.end()));
  }
}

// ---- formula balancing ----

static void check_truth_table(const Formula& f, const Circuit& c) {
  std::vector<Symbol> order = formula_variables(f);
  REQUIRE(order.size() == c.inputs().size());
  REQUIRE(order.size() <= 16);
  for (auto& in : all_inputs(order.size())) {
    auto look = [&](Symbol s) {
      for (size_t i = 0; i < order.size(); ++i)
        if (order[i] == s) return in[i] != 0;
      return false;
    };
    std::vector<uint8_t> got = c.eval(in);
    REQUIRE(got.size() == 1);
    CHECK((got[0] != 0) == f.eval_with(look));
  }
}

TEST_CASE("balance_formula: a variable is a wire") {
  Formula f = Formula::var("x");
  Circuit c = balance_formula(f);
  CHECK(c.depth() == 0);
  check_truth_table(f, c);
}

TEST_CASE("balance_formula: conjunction chain flattens to log depth") {
  Formula f = Formula::var("x0");
  for (int i = 1; i < 16; ++i) f = Formula::conj(f, Formula::var("x" + std::to_string(i)));
  Circuit c = balance_formula(f);
  check_truth_table(f, c);
  CHECK(c.depth() <= 6 * 4);  // C * log2(16)
}

TEST_CASE("balance_formula: x and not y") {
  Formula f = Formula::conj(Formula::var("x"), Formula::negate(Formula::var("y")));
  check_truth_table(f, balance_formula(f));
}

TEST_CASE("balance_formula: random formulas keep their truth table at log depth") {
  std::mt19937 rng(606);
  std::vector<Symbol> vars;
  for (int i = 0; i < 8; ++i) vars.push_back(Symbol::intern("x" + std::to_string(i)));
  for (int rep = 0; rep < 120; ++rep) {
    Formula f = testutil::random_formula(rng, vars, 7);
    Circuit c = balance_formula(f);
    check_truth_table(f, c);
    double logsz = std::log2(static_cast<double>(std::max<int64_t>(2, f.tokens())));
    CHECK(c.depth() <= static_cast<int>(6 * logsz) + 6);
    CHECK(static_cast<int64_t>(c.size()) <= 12 * f.tokens() * f.tokens() + 16);
  }
}

// ---- program <-> circuit ----

TEST_CASE("bnl_to_circuit matches the example program configurations") {
  BnlProgram p = parse_program("X(0) :- T. Y :- Y & X. X :- !X.\n#print X,Y\n#attention X");
  SelfFeedingCircuit c = bnl_to_circuit(p, CircuitMode::Direct);
  CHECK(c.width() == 2);
  CHECK(c.init[0].has_value());
  CHECK(*c.init[0] == true);
  EvalPlan plan(p);
  for (auto& in : all_inputs(1)) {
    RunResult rp = run(p, in, 16, &plan);
    RunResult rc = run_self_feeding(c, in, 16);
    CHECK(rp.configs == rc.configs);
    CHECK(rp.output.emissions == rc.output.emissions);
  }
}

TEST_CASE("bnl_to_circuit on identity rules yields wires") {
  BnlProgram p = parse_program("A :- A. B :- B.\n#print A,B\n#attention A");
  SelfFeedingCircuit c = bnl_to_circuit(p, CircuitMode::Direct);
  CHECK(c.circuit.depth() == 0);
  for (auto& in : all_inputs(2)) {
    RunResult r = run_self_feeding(c, in, 3);
    for (auto& cfg : r.configs) CHECK(cfg == Configuration(in.begin(), in.end()));
  }
}

TEST_CASE("bnl_to_circuit is globally equivalent in both modes") {
  std::mt19937 rng(9000);
  for (int rep = 0; rep < 60; ++rep) {
    BnlProgram p = testutil::random_program(rng, {.max_vars = 7, .max_inputs = 5});
    EvalPlan plan(p);
    for (CircuitMode mode : {CircuitMode::Direct, CircuitMode::Balanced}) {
      SelfFeedingCircuit c = bnl_to_circuit(p, mode);
      for (auto& in : all_inputs(p.input_indices().size())) {
        RunResult rp = run(p, in, 32, &plan);
        RunResult rc = run_self_feeding(c, in, 32);
        CHECK(rp.configs == rc.configs);
        CHECK(rp.output.emissions == rc.output.emissions);
      }
    }
  }
}

TEST_CASE("balanced mode keeps circuit depth logarithmic in program size") {
  std::mt19937 rng(9100);
  for (int rep = 0; rep < 40; ++rep) {
    BnlProgram p = testutil::random_program(rng, {.max_vars = 8, .max_depth = 6});
    SelfFeedingCircuit c = bnl_to_circuit(p, CircuitMode::Balanced);
    double logn = std::log2(static_cast<double>(std::max<int64_t>(2, p.measure().size)));
    CHECK(c.circuit.depth() <= static_cast<int>(6 * logn) + 6);
  }
}

TEST_CASE("circuit_to_bnl simulates the parity circuit with scaled rounds") {
  SelfFeedingCircuit c3 = parity_circuit(3);
  auto [prog, delay] = circuit_to_bnl(c3);
  EvalPlan plan(prog);
  for (auto& in : all_inputs(3)) {
    RunResult rc = run_self_feeding(c3, in, 8);
    RunResult rp = run(prog, in, 8 * delay, &plan);
    REQUIRE(rp.output.emissions.size() >= rc.output.emissions.size());
    for (size_t i = 0; i < rc.output.emissions.size(); ++i) {
      CHECK(rp.output.emissions[i].first == rc.output.emissions[i].first * delay);
      CHECK(rp.output.emissions[i].second == rc.output.emissions[i].second);
    }
  }
}

TEST_CASE("circuit_to_bnl on pure wires has delay one") {
  SelfFeedingCircuit sfc;
  int a = sfc.circuit.add_input();
  int b = sfc.circuit.add_input();
  sfc.circuit.set_outputs({b, a});  // swap
  sfc.input_positions = {0, 1};
  sfc.init.assign(2, std::nullopt);
  sfc.print_positions = {0, 1};
  sfc.attention_positions = {0};
  auto [prog, delay] = circuit_to_bnl(sfc);
  CHECK(delay == 1);
  EvalPlan plan(prog);
  for (auto& in : all_inputs(2)) {
    RunResult rc = run_self_feeding(sfc, in, 6);
    RunResult rp = run(prog, in, 6, &plan);
    CHECK(rc.configs == rp.configs);
    CHECK(rc.output.emissions == rp.output.emissions);
  }
}

TEST_CASE("round trip program -> circuit -> program preserves outputs") {
  std::mt19937 rng(9200);
  for (int rep = 0; rep < 40; ++rep) {
    BnlProgram p = testutil::random_program(rng, {.max_vars = 6, .max_inputs = 5});
    SelfFeedingCircuit c = bnl_to_circuit(p, CircuitMode::Direct);
    auto [q, delay] = circuit_to_bnl(c);
    EvalPlan pp(p), qq(q);
    for (auto& in : all_inputs(p.input_indices().size())) {
      RunResult rp = run(p, in, 24, &pp);
      RunResult rq = run(q, in, 24 * delay, &qq);
      REQUIRE(rq.output.emissions.size() >= rp.output.emissions.size());
      for (size_t i = 0; i < rp.output.emissions.size(); ++i) {
        CHECK(rq.output.emissions[i].second == rp.output.emissions[i].second);
        CHECK(rq.output.emissions[i].first == rp.output.emissions[i].first * delay);
      }
    }
  }
}
