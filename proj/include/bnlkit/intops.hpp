#pragma once

#include <map>
#include <string>
#include <vector>

#include "bnlkit/builder.hpp"
#include "bnlkit/program.hpp"

namespace bnlkit {

// Signed p-digit base-beta integer; digits most significant first, leading
// zeros allowed.
struct IntegerValue {
  bool positive = true;
  std::vector<uint8_t> digits;

  long long value(int beta) const {
    long long v = 0;
    for (uint8_t d : digits) v = v * beta + d;
    return positive ? v : -v;
  }
};

struct IntCodec {
  int p;
  int beta;

  size_t encoded_length() const { return 1 + static_cast<size_t>(p) * static_cast<size_t>(beta); }

  std::vector<uint8_t> encode(const IntegerValue& v) const {
    if (static_cast<int>(v.digits.size()) != p) throw std::invalid_argument("digit count mismatch");
    std::vector<uint8_t> bits;
    bits.reserve(encoded_length());
    bits.push_back(v.positive ? 1 : 0);
    for (uint8_t d : v.digits) {
      if (d >= beta) throw std::invalid_argument("digit out of range");
      for (int k = 0; k < beta; ++k) bits.push_back(k == d ? 1 : 0);
    }
    return bits;
  }

  IntegerValue decode(const std::vector<uint8_t>& bits) const {
    if (bits.size() != encoded_length()) throw std::invalid_argument("encoded length mismatch");
    IntegerValue v;
    v.positive = bits[0] != 0;
    for (int i = 0; i < p; ++i) {
      int digit = -1;
      for (int k = 0; k < beta; ++k) {
        if (bits[1 + static_cast<size_t>(i * beta + k)]) {
          if (digit >= 0) throw std::invalid_argument("digit block is not one-hot");
          digit = k;
        }
      }
      if (digit < 0) throw std::invalid_argument("digit block is not one-hot");
      v.digits.push_back(static_cast<uint8_t>(digit));
    }
    // normalize -0 to +0
    bool all_zero = true;
    for (uint8_t d : v.digits) all_zero = all_zero && d == 0;
    if (all_zero) v.positive = true;
    return v;
  }

  IntegerValue from_value(long long x) const {
    IntegerValue v;
    v.positive = x >= 0;
    long long m = x >= 0 ? x : -x;
    v.digits.assign(static_cast<size_t>(p), 0);
    for (int i = p - 1; i >= 0; --i) {
      v.digits[static_cast<size_t>(i)] = static_cast<uint8_t>(m % beta);
      m /= beta;
    }
    if (m != 0) throw std::invalid_argument("value does not fit in p digits");
    return v;
  }
};

enum class IntOpKind { Compare, Add, Mul };

struct CompiledProgram {
  BnlProgram program;
  // Named bit groups for instrumented runs; each tap lists bit formulas in
  // codec order (digit blocks most significant first).
  std::map<std::string, std::vector<Formula>> taps;
  long long output_round = 0;  // first (and fixed-point) output round
};

namespace detail {

inline SIntNet declare_int_operand(ProgramBuilder& b, const std::string& prefix, int p, int beta) {
  SIntNet v;
  v.positive = Formula::var(b.input(prefix + "_sgn"));
  std::vector<DigitNet> msd_first;
  for (int j = 0; j < p; ++j) {
    DigitNet dn;
    for (int k = 0; k < beta; ++k)
      dn.bit.push_back(Formula::var(b.input(prefix + "_b" + std::to_string(j) + "_" + std::to_string(k))));
    msd_first.push_back(std::move(dn));
  }
  for (int j = p - 1; j >= 0; --j) v.mag.d.push_back(std::move(msd_first[static_cast<size_t>(j)]));
  return v;
}

// Print predicates for a one-hot integer: sign followed by digit blocks,
// most significant first. Constant bits become dedicated predicates.
inline std::vector<Symbol> output_symbols(ProgramBuilder& b, Formula sign, const UIntNet& u,
                                          const std::string& hint) {
  std::vector<Symbol> out;
  auto as_symbol = [&](const Formula& f) {
    if (f.op() == Formula::Op::Var) return f.var_symbol();
    return b.pred(hint, f);
  };
  out.push_back(as_symbol(sign));
  for (size_t i = u.width(); i-- > 0;)
    for (const Formula& f : u.d[i].bit) out.push_back(as_symbol(f));
  return out;
}

}  // namespace detail

// Emits a halting program computing the comparison, sum or product of two
// signed one-hot integers. The program stabilizes after a fixed number of
// rounds and a monotone ready chain doubles as the attention predicate, so
// outputs happen precisely at the fixed point.
inline CompiledProgram compile_int_op(IntOpKind kind, int p, int beta) {
  if (p < 1 || beta < 2) throw std::invalid_argument("need p >= 1 and beta >= 2");
  ProgramBuilder b;
  SIntNet x = detail::declare_int_operand(b, "x", p, beta);
  SIntNet y = detail::declare_int_operand(b, "y", p, beta);
  CompiledProgram out;

  switch (kind) {
    case IntOpKind::Compare: {
      nets::CmpNets cmp = nets::cmp_unsigned(b, x.mag, y.mag, "cmp");
      Formula zboth = Formula::conj_fold(nets::is_zero(x.mag), nets::is_zero(y.mag));
      Formula gt_val = Formula::big_or(
          {Formula::big_and({x.positive, Formula::negate_fold(y.positive), Formula::negate_fold(zboth)}),
           Formula::big_and({x.positive, y.positive, cmp.gt}),
           Formula::big_and({Formula::negate_fold(x.positive), Formula::negate_fold(y.positive), cmp.lt})});
      Formula f1 = Formula::var(b.ready(1));
      Symbol o1 = b.pred("O1_", Formula::conj(f1, gt_val));
      Symbol o0 = b.pred("O0_", Formula::conj(f1, Formula::negate_fold(gt_val)));
      std::vector<Symbol> prints;
      prints.push_back(b.ready(2));  // sign bit: result is always non-negative
      prints.push_back(o0);
      prints.push_back(o1);
      for (int k = 2; k < beta; ++k) prints.push_back(b.pred("Oz", Formula::bottom()));
      out.output_round = b.max_depth();
      Symbol att = b.ready(static_cast<int>(out.output_round));
      out.program = b.finish(prints, AttentionSpec::preds({att}));
      return out;
    }

    case IntOpKind::Add: {
      nets::SignedAddNets r = nets::add_signed(b, x, y, "add");
      for (size_t i = 0; i < r.carry.size(); ++i)
        out.taps["c" + std::to_string(i + 1)] = {r.carry[i]};
      out.taps["sum"] = nets::tap_of(r.result.mag);
      std::vector<Symbol> prints = detail::output_symbols(b, r.result.positive, r.result.mag, "outbit");
      out.output_round = b.max_depth();
      Symbol att = b.ready(static_cast<int>(out.output_round));
      out.program = b.finish(prints, AttentionSpec::preds({att}));
      return out;
    }

    case IntOpKind::Mul: {
      UIntNet prod = nets::mul_unsigned(b, x.mag, y.mag, "", &out.taps);
      Formula sign = Formula::var(b.pred("sgn", Formula::iff(x.positive, y.positive)));
      std::vector<Symbol> prints = detail::output_symbols(b, sign, prod, "outbit");
      out.output_round = b.max_depth();
      Symbol att = b.ready(static_cast<int>(out.output_round));
      out.program = b.finish(prints, AttentionSpec::preds({att}));
      return out;
    }
  }
  throw std::logic_error("unreachable");
}

// Decodes a named tap from a configuration (digit blocks, no sign).
inline long long decode_tap(const BnlProgram& p, const Configuration& c, const std::vector<Formula>& tap,
                            int beta) {
  auto look = [&](Symbol s) { return c[static_cast<size_t>(p.index_of(s))] != 0; };
  long long value = 0;
  size_t nblocks = tap.size() / static_cast<size_t>(beta);
  for (size_t i = 0; i < nblocks; ++i) {
    int digit = -1;
    for (int k = 0; k < beta; ++k)
      if (tap[i * static_cast<size_t>(beta) + static_cast<size_t>(k)].eval_with(look)) {
        if (digit >= 0) throw std::runtime_error("tap block is not one-hot");
        digit = k;
      }
    if (digit < 0) throw std::runtime_error("tap block is not one-hot");
    value = value * beta + digit;
  }
  return value;
}

}  // namespace bnlkit
