// Command-line front end: run, translate, open, gen, analyze and verify over
// .bnl / .sc / .circ / .nn files. Exit codes: 0 success or equivalent,
// 1 counterexample, 2 usage or input error.

#include <CLI11.hpp>
#include <iostream>
#include <json.hpp>

#include "bnlkit/equiv.hpp"
#include "bnlkit/fpops.hpp"
#include "bnlkit/fully_open.hpp"
#include "bnlkit/io_json.hpp"
#include "bnlkit/translate.hpp"

using namespace bnlkit;

namespace {

std::string extension(const std::string& path) {
  auto dot = path.rfind('.');
  return dot == std::string::npos ? "" : path.substr(dot + 1);
}

Runnable load_runnable(const std::string& path) {
  std::string ext = extension(path);
  std::string text = read_file(path);
  if (ext == "bnl") return Runnable::of(parse_program(text));
  if (ext == "sc") return Runnable::of(parse_sc_program(text));
  if (ext == "circ") return Runnable::of(circuit_from_json(json::parse(text)));
  if (ext == "nn") return Runnable::of(network_from_json(json::parse(text)));
  throw std::invalid_argument("unknown file extension ." + ext + " (expected .bnl/.sc/.circ/.nn)");
}

std::vector<uint8_t> parse_bits(const std::string& s) {
  std::vector<uint8_t> bits;
  for (char c : s) {
    if (c == '0' || c == '1')
      bits.push_back(c == '1');
    else if (!std::isspace(static_cast<unsigned char>(c)))
      throw std::invalid_argument("input bits must be 0/1");
  }
  return bits;
}

FloatSystem parse_system(const std::string& s) {
  int p, q, beta;
  if (std::sscanf(s.c_str(), "%d,%d,%d", &p, &q, &beta) != 3)
    throw std::invalid_argument("system must be P,Q,B");
  return {p, q, beta};
}

void write_or_print(const std::string& out, const std::string& content) {
  if (out.empty())
    std::cout << content;
  else
    write_file(out, content);
}

int cmd_run(const std::string& file, const std::string& input, long long horizon, bool trace) {
  Runnable r = load_runnable(file);
  std::vector<uint8_t> bits;
  if (r.kind() == RunnableKind::Nn) {
    FloatCodec c = FloatCodec::normal(r.nn().system);
    std::stringstream ss(input);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      for (uint8_t b : c.encode(FloatValue::parse(r.nn().system, item))) bits.push_back(b);
    }
  } else {
    bits = parse_bits(input);
  }
  RunResult res = r.run_bits(bits, horizon);
  if (trace) {
    for (size_t t = 0; t < res.configs.size(); ++t) {
      std::cout << t << ": ";
      for (uint8_t b : res.configs[t]) std::cout << (b ? '1' : '0');
      std::cout << "\n";
    }
  }
  if (r.kind() == RunnableKind::Nn) {
    VerifyCodec vc = VerifyCodec::floats(r.nn().system.p, r.nn().system.q, r.nn().system.beta);
    for (auto& [t, s] : res.output.emissions)
      std::cout << "output round " << t << ": " << vc.decode_string(s) << "\n";
  } else {
    for (auto& [t, s] : res.output.emissions) std::cout << "output round " << t << ": " << s << "\n";
  }
  return 0;
}

int cmd_analyze(const std::string& file, const std::string& input) {
  Runnable r = load_runnable(file);
  if (r.kind() != RunnableKind::Bnl) throw std::invalid_argument("analyze expects a .bnl program");
  DynamicsReport d = analyze_dynamics(r.bnl(), parse_bits(input));
  std::cout << "transient time: " << d.transient << "\n";
  std::cout << "attractor: " << (d.fixed_point() ? "fixed point" : "cycle") << "\n";
  std::cout << "cycle length: " << d.cycle_length << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boolean network logic toolkit"};
  app.require_subcommand(1);

  // run
  auto* run_cmd = app.add_subcommand("run", "simulate a program, circuit or network");
  std::string run_kind, run_file, run_input;
  long long run_horizon = 32;
  bool run_trace = false;
  run_cmd->add_option("kind", run_kind, "bnl|sc|circ|nn")->required();
  run_cmd->add_option("file", run_file)->required();
  run_cmd->add_option("--input", run_input, "bit string, or comma-separated floats for .nn");
  run_cmd->add_option("--horizon", run_horizon);
  run_cmd->add_flag("--trace", run_trace, "print every configuration");

  // translate
  auto* tr_cmd = app.add_subcommand("translate", "translate between representations");
  std::string tr_dir, tr_in, tr_out, tr_mode = "direct", tr_act = "relu", tr_sys = "3,2,2";
  tr_cmd->add_option("direction", tr_dir, "sc2bnl|bnl2sc|bnl2circ|circ2bnl|nn2bnl|bnl2nn")->required();
  tr_cmd->add_option("input", tr_in)->required();
  tr_cmd->add_option("-o,--output", tr_out);
  tr_cmd->add_option("--mode", tr_mode, "bnl2circ: direct|balanced");
  tr_cmd->add_option("--activation", tr_act, "bnl2nn: relu|heaviside");
  tr_cmd->add_option("--system", tr_sys, "bnl2nn: P,Q,B");

  // open
  auto* open_cmd = app.add_subcommand("open", "rewrite a program into fully-open form");
  std::string open_in, open_out;
  open_cmd->add_option("input", open_in)->required();
  open_cmd->add_option("-o,--output", open_out);

  // gen
  auto* gen_cmd = app.add_subcommand("gen", "generate circuits and compiled arithmetic programs");
  gen_cmd->require_subcommand(1);
  auto* gen_parity = gen_cmd->add_subcommand("parity", "self-feeding parity circuit");
  int parity_n = 3;
  std::string gen_out;
  gen_parity->add_option("n", parity_n)->required();
  gen_parity->add_option("-o,--output", gen_out);
  auto* gen_int = gen_cmd->add_subcommand("int", "integer compare/add/multiply program");
  std::string int_op = "add";
  int int_p = 2, int_beta = 10;
  std::string int_out;
  gen_int->add_option("--op", int_op, "cmp|add|mul")->required();
  gen_int->add_option("--p", int_p)->required();
  gen_int->add_option("--beta", int_beta)->required();
  gen_int->add_option("-o,--output", int_out);
  auto* gen_fp = gen_cmd->add_subcommand("fp", "floating-point norm/add/mul/poly program");
  std::string fp_op = "add", fp_pieces, fp_out;
  int fp_p = 2, fp_q = 2, fp_beta = 2;
  gen_fp->add_option("--op", fp_op, "norm|add|mul|poly")->required();
  gen_fp->add_option("--p", fp_p)->required();
  gen_fp->add_option("--q", fp_q)->required();
  gen_fp->add_option("--beta", fp_beta)->required();
  gen_fp->add_option("--pieces", fp_pieces, "piece table file (for --op poly)");
  gen_fp->add_option("-o,--output", fp_out);

  // analyze
  auto* an_cmd = app.add_subcommand("analyze", "transient time and attractor of a program");
  std::string an_file, an_input;
  an_cmd->add_option("file", an_file)->required();
  an_cmd->add_option("--input", an_input);

  // verify
  auto* ver_cmd = app.add_subcommand("verify", "check two objects for equivalent output sequences");
  std::string ver_a, ver_b, ver_codec = "id", ver_inputs = "exhaustive", ver_report;
  long long ver_outputs = 10, ver_horizon = 0, ver_seed = 1;
  bool ver_global = false;
  ver_cmd->add_option("a", ver_a)->required();
  ver_cmd->add_option("b", ver_b)->required();
  ver_cmd->add_option("--codec", ver_codec, "id | int:P,B | float:P,Q,B");
  ver_cmd->add_option("--inputs", ver_inputs, "exhaustive | random:N");
  ver_cmd->add_option("--outputs", ver_outputs, "emissions compared per input");
  ver_cmd->add_option("--horizon", ver_horizon, "0 = pick from a probe run");
  ver_cmd->add_option("--seed", ver_seed);
  ver_cmd->add_flag("--global", ver_global, "also compare configurations and output rounds");
  ver_cmd->add_option("--report", ver_report, "write a JSON report here");

  try {
    app.parse(argc, argv);

    if (run_cmd->parsed()) {
      (void)run_kind;  // the file extension selects the loader
      return cmd_run(run_file, run_input, run_horizon, run_trace);
    }

    if (tr_cmd->parsed()) {
      if (tr_dir == "sc2bnl") {
        ScProgram sc = parse_sc_program(read_file(tr_in));
        write_or_print(tr_out, pretty_print(sc_to_bnl(sc)));
      } else if (tr_dir == "bnl2sc") {
        BnlProgram p = parse_program(read_file(tr_in));
        write_or_print(tr_out, pretty_print_sc(bnl_to_sc(p)));
      } else if (tr_dir == "bnl2circ") {
        BnlProgram p = parse_program(read_file(tr_in));
        CircuitMode mode = tr_mode == "balanced" ? CircuitMode::Balanced : CircuitMode::Direct;
        write_or_print(tr_out, circuit_to_json(bnl_to_circuit(p, mode)).dump(2) + "\n");
      } else if (tr_dir == "circ2bnl") {
        SelfFeedingCircuit c = circuit_from_json(json::parse(read_file(tr_in)));
        CircuitToBnlResult r = circuit_to_bnl(c);
        write_or_print(tr_out, "// delay factor: " + std::to_string(r.delay) + "\n" + pretty_print(r.program));
      } else if (tr_dir == "nn2bnl") {
        NeuralNetwork net = network_from_json(json::parse(read_file(tr_in)));
        NnToBnlResult r = nn_to_bnl(net);
        write_or_print(tr_out, "// landing tick period: " + std::to_string(r.period) + "\n" + pretty_print(r.program));
      } else if (tr_dir == "bnl2nn") {
        BnlProgram p = parse_program(read_file(tr_in));
        NeuralNetwork net = bnl_to_nn(p, tr_act == "heaviside", parse_system(tr_sys));
        write_or_print(tr_out, network_to_json(net).dump(2) + "\n");
      } else {
        throw CLI::ValidationError("unknown translate direction " + tr_dir);
      }
      return 0;
    }

    if (open_cmd->parsed()) {
      BnlProgram p = parse_program(read_file(open_in));
      FullyOpenResult r = to_fully_open(p);
      write_or_print(open_out, "// delay factor: " + std::to_string(r.delay) + "\n" + pretty_print(r.program));
      return 0;
    }

    if (gen_parity->parsed()) {
      write_or_print(gen_out, circuit_to_json(parity_circuit(parity_n)).dump(2) + "\n");
      return 0;
    }
    if (gen_int->parsed()) {
      IntOpKind kind;
      int out_p;
      if (int_op == "cmp") {
        kind = IntOpKind::Compare;
        out_p = 1;
      } else if (int_op == "add") {
        kind = IntOpKind::Add;
        out_p = int_p + 1;
      } else if (int_op == "mul") {
        kind = IntOpKind::Mul;
        out_p = 2 * int_p;
      } else {
        throw CLI::ValidationError("unknown --op " + int_op);
      }
      CompiledProgram cp = compile_int_op(kind, int_p, int_beta);
      std::string header =
          "// " + int_op + " over Z(" + std::to_string(int_p) + "," + std::to_string(int_beta) + ")\n" +
          "// inputs: two operands, each 1 sign bit then " + std::to_string(int_p) + " one-hot digit blocks of " +
          std::to_string(int_beta) + " bits, most significant digit first\n" +
          "// print: one operand of Z(" + std::to_string(out_p) + "," + std::to_string(int_beta) +
          ") in the same encoding; first output round " + std::to_string(cp.output_round) + "\n";
      write_or_print(int_out, header + pretty_print(cp.program));
      return 0;
    }
    if (gen_fp->parsed()) {
      FloatSystem s{fp_p, fp_q, fp_beta};
      CompiledProgram cp;
      std::string desc;
      if (fp_op == "norm") {
        cp = compile_fp_op(FpOpKind::Normalize, s);
        desc = "normalize: input is one raw operand (" + std::to_string(raw_fraction_width(s)) + "+1 fraction digits, " +
               std::to_string(raw_exponent_width(s)) + " exponent digits)";
      } else if (fp_op == "add") {
        cp = compile_fp_op(FpOpKind::Add, s);
        desc = "add: inputs are two normalized operands";
      } else if (fp_op == "mul") {
        cp = compile_fp_op(FpOpKind::Mul, s);
        desc = "mul: inputs are two normalized operands";
      } else if (fp_op == "poly") {
        if (fp_pieces.empty()) throw CLI::ValidationError("--op poly needs --pieces");
        PieceTable t = pieces_from_json(json::parse(read_file(fp_pieces)), s);
        cp = compile_fp_op(FpOpKind::Piecewise, s, &t);
        desc = "piecewise: input is one normalized operand";
      } else {
        throw CLI::ValidationError("unknown --op " + fp_op);
      }
      std::string header = "// " + desc + "\n// system S(" + std::to_string(fp_p) + "," + std::to_string(fp_q) +
                           "," + std::to_string(fp_beta) +
                           "); encoding per value: exponent sign, fraction sign, exponent blocks, fraction "
                           "blocks (one-hot, most significant digit first)\n// first output round " +
                           std::to_string(cp.output_round) + "\n";
      write_or_print(fp_out, header + pretty_print(cp.program));
      return 0;
    }

    if (an_cmd->parsed()) return cmd_analyze(an_file, an_input);

    if (ver_cmd->parsed()) {
      Runnable a = load_runnable(ver_a);
      Runnable b = load_runnable(ver_b);
      VerifyCodec codec;
      if (ver_codec == "id") {
        codec = VerifyCodec::identity();
      } else if (ver_codec.rfind("int:", 0) == 0) {
        int p, beta;
        if (std::sscanf(ver_codec.c_str(), "int:%d,%d", &p, &beta) != 2)
          throw CLI::ValidationError("--codec int:P,B");
        codec = VerifyCodec::ints(p, beta);
      } else if (ver_codec.rfind("float:", 0) == 0) {
        int p, q, beta;
        if (std::sscanf(ver_codec.c_str(), "float:%d,%d,%d", &p, &q, &beta) != 3)
          throw CLI::ValidationError("--codec float:P,Q,B");
        codec = VerifyCodec::floats(p, q, beta);
      } else {
        throw CLI::ValidationError("unknown --codec " + ver_codec);
      }
      InputSpec spec;
      spec.seed = static_cast<uint64_t>(ver_seed);
      if (ver_inputs == "exhaustive") {
        spec.exhaustive = true;
      } else if (ver_inputs.rfind("random:", 0) == 0) {
        spec.exhaustive = false;
        spec.count = std::stoll(ver_inputs.substr(7));
      } else {
        throw CLI::ValidationError("--inputs exhaustive | random:N");
      }
      long long horizon = ver_horizon;
      bool binary = codec.kind == VerifyCodec::Kind::Identity;
      if (horizon == 0) {
        // probe to estimate the delay, then widen per the default rule
        std::vector<uint8_t> zero(a.input_bits(binary), 0);
        if (!binary) {
          std::mt19937 rng(1);
          zero.clear();
          for (size_t u = 0; u < a.input_bits(binary) / codec.unit_bits(); ++u) {
            auto one = codec.random_unit(rng);
            zero.insert(zero.end(), one.begin(), one.end());
          }
        }
        long long dmax = 1;
        for (const Runnable* r : {&a, &b}) {
          RunResult pr = r->run_bits(zero, 512, binary);
          if (pr.output.emissions.size() >= 2) {
            long long gap = pr.output.emissions[1].first - pr.output.emissions[0].first;
            dmax = std::max(dmax, std::max(pr.output.emissions[0].first, gap));
          } else if (!pr.output.emissions.empty()) {
            dmax = std::max(dmax, std::max<long long>(1, pr.output.emissions[0].first));
          }
        }
        horizon = 10 * dmax * ver_outputs;
      }
      EquivalenceReport rep =
          check_equivalence(a, b, codec, spec, static_cast<size_t>(ver_outputs), horizon, ver_global);
      std::cout << rep.text();
      if (!ver_report.empty()) {
        json j;
        j["verdict"] = rep.equivalent ? "equivalent-on-suite" : "counterexample";
        j["inputs_tested"] = rep.inputs_tested;
        j["outputs_compared"] = rep.outputs_compared;
        j["horizon"] = rep.horizon;
        j["delay_a_over_b"] = rep.delay_a_over_b;
        j["delay_b_over_a"] = rep.delay_b_over_a;
        j["seed"] = rep.seed;
        j["warnings"] = rep.warnings;
        if (rep.counterexample.has_value()) {
          std::string bits;
          for (uint8_t x : rep.counterexample->input) bits.push_back(x ? '1' : '0');
          j["counterexample"] = {{"input", bits},
                                 {"index", rep.counterexample->emission_index},
                                 {"a", rep.counterexample->a_output},
                                 {"b", rep.counterexample->b_output}};
        }
        write_file(ver_report, j.dump(2) + "\n");
      }
      return rep.equivalent ? 0 : 1;
    }
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
