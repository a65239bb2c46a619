#include <catch2/catch_amalgamated.hpp>

#include "bnlkit/intops.hpp"
#include "bnlkit/text.hpp"
#include "testutil.hpp"

using namespace bnlkit;

namespace {

// Runs a compiled halting program on encoded operands and returns the
// fixed-point configuration.
Configuration run_int_program(const CompiledProgram& cp, const EvalPlan& plan,
                              const std::vector<uint8_t>& input) {
  return run_to_fixed_point(cp.program, plan, input, 4096);
}

IntegerValue decode_result(const CompiledProgram& cp, const Configuration& fixed, const IntCodec& out_codec) {
  std::vector<uint8_t> bits;
  for (Symbol s : cp.program.print()) bits.push_back(fixed[static_cast<size_t>(cp.program.index_of(s))]);
  return out_codec.decode(bits);
}

struct IntRig {
  CompiledProgram cp;
  EvalPlan plan;
  IntCodec in_codec, out_codec;

  IntRig(IntOpKind kind, int p, int beta)
      : cp(compile_int_op(kind, p, beta)),
        plan(cp.program),
        in_codec{p, beta},
        out_codec{kind == IntOpKind::Compare ? 1 : (kind == IntOpKind::Add ? p + 1 : 2 * p), beta} {}

  long long eval(long long xv, long long yv) {
    std::vector<uint8_t> input = in_codec.encode(in_codec.from_value(xv));
    std::vector<uint8_t> e2 = in_codec.encode(in_codec.from_value(yv));
    input.insert(input.end(), e2.begin(), e2.end());
    Configuration fixed = run_int_program(cp, plan, input);
    return decode_result(cp, fixed, out_codec).value(out_codec.beta);
  }
};

long long pow_ll(int b, int e) {
  long long r = 1;
  while (e--) r *= b;
  return r;
}

}  // namespace

TEST_CASE("int codec round-trips the documented base-5 example") {
  IntCodec codec{3, 5};
  IntegerValue v;
  v.positive = true;
  v.digits = {2, 1, 4};
  std::vector<uint8_t> bits = codec.encode(v);
  std::string s;
  for (uint8_t b : bits) s += ('0' + b);
  CHECK(s == "1" "00100" "01000" "00001");
  IntegerValue back = codec.decode(bits);
  CHECK(back.positive);
  CHECK(back.digits == v.digits);
}

TEST_CASE("int codec: zero is canonical and round trips are identity") {
  IntCodec codec{4, 7};
  IntegerValue z = codec.from_value(0);
  CHECK(codec.decode(codec.encode(z)).value(7) == 0);
  std::mt19937 rng(11);
  for (int p = 1; p <= 4; ++p) {
    for (int beta : {2, 3, 5, 10}) {
      IntCodec c{p, beta};
      std::uniform_int_distribution<long long> dist(-(pow_ll(beta, p) - 1), pow_ll(beta, p) - 1);
      for (int rep = 0; rep < 80; ++rep) {
        long long v = dist(rng);
        IntegerValue iv = c.from_value(v);
        CHECK(c.decode(c.encode(iv)).value(beta) == v);
      }
    }
  }
  // decoding a non-one-hot block fails
  std::vector<uint8_t> bad(codec.encoded_length(), 0);
  bad[0] = 1;
  CHECK_THROWS_AS(codec.decode(bad), std::invalid_argument);
}

TEST_CASE("compiled add reproduces the worked base-10 example with carries") {
  IntRig rig(IntOpKind::Add, 3, 10);
  IntCodec c3{3, 10};
  std::vector<uint8_t> input = c3.encode(c3.from_value(614));
  std::vector<uint8_t> e2 = c3.encode(c3.from_value(187));
  input.insert(input.end(), e2.begin(), e2.end());
  Configuration fixed = run_int_program(rig.cp, rig.plan, input);
  IntegerValue res = decode_result(rig.cp, fixed, rig.out_codec);
  CHECK(res.positive);
  CHECK(res.digits == std::vector<uint8_t>{0, 8, 0, 1});
  auto carry = [&](const std::string& name) {
    auto look = [&](Symbol s) { return fixed[static_cast<size_t>(rig.cp.program.index_of(s))] != 0; };
    return rig.cp.taps.at(name)[0].eval_with(look);
  };
  CHECK(carry("c1") == true);
  CHECK(carry("c2") == true);
  CHECK(carry("c3") == false);
}

TEST_CASE("compiled multiply reproduces the tree of partial results") {
  IntRig rig(IntOpKind::Mul, 3, 10);
  IntCodec c3{3, 10};
  std::vector<uint8_t> input = c3.encode(c3.from_value(187));
  std::vector<uint8_t> e2 = c3.encode(c3.from_value(463));
  input.insert(input.end(), e2.begin(), e2.end());
  Configuration fixed = run_int_program(rig.cp, rig.plan, input);
  IntegerValue res = decode_result(rig.cp, fixed, rig.out_codec);
  CHECK(res.value(10) == 86581);
  CHECK(res.digits == std::vector<uint8_t>{0, 8, 6, 5, 8, 1});
  auto tap = [&](const std::string& name) { return decode_tap(rig.cp.program, fixed, rig.cp.taps.at(name), 10); };
  CHECK(tap("z1_1") == 561);
  CHECK(tap("z1_2") == 11220);
  CHECK(tap("z1_3") == 74800);
  CHECK(tap("z1_4") == 0);
  CHECK(tap("z2_1") == 11781);
  CHECK(tap("z2_2") == 74800);
  CHECK(tap("z3_1") == 86581);
}

TEST_CASE("compare is irreflexive and outputs at round two") {
  for (auto [p, beta] : std::vector<std::pair<int, int>>{{2, 2}, {2, 3}, {3, 10}}) {
    IntRig rig(IntOpKind::Compare, p, beta);
    CHECK(rig.cp.output_round == 2);
    std::mt19937 rng(5);
    std::uniform_int_distribution<long long> dist(-(pow_ll(beta, p) - 1), pow_ll(beta, p) - 1);
    for (int rep = 0; rep < 20; ++rep) {
      long long v = dist(rng);
      CHECK(rig.eval(v, v) == 0);
    }
  }
}

TEST_CASE("compiled integer ops agree with exact arithmetic exhaustively at p=2") {
  for (int beta : {2, 3}) {
    IntRig cmp(IntOpKind::Compare, 2, beta);
    IntRig add(IntOpKind::Add, 2, beta);
    IntRig mul(IntOpKind::Mul, 2, beta);
    long long lim = pow_ll(beta, 2) - 1;
    for (long long xv = -lim; xv <= lim; ++xv) {
      for (long long yv = -lim; yv <= lim; ++yv) {
        CAPTURE(beta, xv, yv);
        REQUIRE(cmp.eval(xv, yv) == (xv > yv ? 1 : 0));
        REQUIRE(add.eval(xv, yv) == xv + yv);
        REQUIRE(mul.eval(xv, yv) == xv * yv);
      }
    }
  }
}

TEST_CASE("compiled integer programs reach fixed points and hold them") {
  IntRig add(IntOpKind::Add, 2, 3);
  IntCodec c{2, 3};
  for (long long xv : {-8, -3, 0, 5, 8}) {
    for (long long yv : {-7, -1, 0, 2, 8}) {
      std::vector<uint8_t> input = c.encode(c.from_value(xv));
      std::vector<uint8_t> e2 = c.encode(c.from_value(yv));
      input.insert(input.end(), e2.begin(), e2.end());
      DynamicsReport d = analyze_dynamics(add.cp.program, input);
      CHECK(d.fixed_point());
      CHECK(d.transient <= add.cp.output_round);
    }
  }
}

TEST_CASE("round counts: compare at 2, add constant, mul logarithmic") {
  for (int p : {2, 4, 8}) {
    CHECK(compile_int_op(IntOpKind::Compare, p, 3).output_round == 2);
  }
  long long add_round = compile_int_op(IntOpKind::Add, 2, 3).output_round;
  for (int p : {4, 8}) {
    CHECK(compile_int_op(IntOpKind::Add, p, 3).output_round == add_round);
  }
  long long base = compile_int_op(IntOpKind::Mul, 2, 2).output_round;
  double cfit = static_cast<double>(base) / 2.0;  // log2(2)+log2(2) = 2
  for (int p : {4, 8, 16}) {
    long long got = compile_int_op(IntOpKind::Mul, p, 2).output_round;
    double bound = 2.0 * cfit * (std::log2(p) + 1.0);
    CHECK(static_cast<double>(got) <= bound);
  }
}

TEST_CASE("size shapes stay within a bounded spread over a grid") {
  auto ratio_spread = [](std::vector<double> rs) {
    double lo = rs[0], hi = rs[0];
    for (double r : rs) {
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    return hi / lo;
  };
  std::vector<double> rs_cmp, rs_add, rs_mul;
  for (auto [p, beta] : std::vector<std::pair<int, int>>{{2, 2}, {4, 2}, {8, 2}, {2, 5}, {4, 5}, {2, 10}}) {
    double pd = p, bd = beta;
    rs_cmp.push_back(static_cast<double>(compile_int_op(IntOpKind::Compare, p, beta).program.measure().size) /
                     (pd * bd * bd + pd * pd));
    rs_add.push_back(static_cast<double>(compile_int_op(IntOpKind::Add, p, beta).program.measure().size) /
                     (pd * pd * pd + pd * bd * bd));
    rs_mul.push_back(static_cast<double>(compile_int_op(IntOpKind::Mul, p, beta).program.measure().size) /
                     (pd * pd * pd * pd + pd * pd * pd * bd * bd + pd * bd * bd * bd * bd));
  }
  CHECK(ratio_spread(rs_cmp) <= 16.0);
  CHECK(ratio_spread(rs_add) <= 16.0);
  CHECK(ratio_spread(rs_mul) <= 16.0);
}

TEST_CASE("digit blocks at the output round are one-hot") {
  IntRig mul(IntOpKind::Mul, 2, 3);
  IntCodec c{2, 3};
  std::mt19937 rng(17);
  std::uniform_int_distribution<long long> dist(-8, 8);
  for (int rep = 0; rep < 40; ++rep) {
    long long xv = dist(rng), yv = dist(rng);
    std::vector<uint8_t> input = c.encode(c.from_value(xv));
    std::vector<uint8_t> e2 = c.encode(c.from_value(yv));
    input.insert(input.end(), e2.begin(), e2.end());
    Configuration fixed = run_int_program(mul.cp, mul.plan, input);
    CHECK_NOTHROW(decode_result(mul.cp, fixed, mul.out_codec));
  }
}
