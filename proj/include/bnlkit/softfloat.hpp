#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bnlkit {

struct FloatSystem {
  int p = 2, q = 2, beta = 2;

  bool operator==(const FloatSystem&) const = default;

  long long max_exponent() const {
    long long m = 1;
    for (int i = 0; i < q; ++i) {
      m *= beta;
      if (m > (1ll << 40)) throw std::invalid_argument("exponent range too large");
    }
    return m - 1;
  }

  std::string str() const {
    return "S(" + std::to_string(p) + "," + std::to_string(q) + "," + std::to_string(beta) + ")";
  }
};

// Raw (pre-normalization) value ±d0.d1...dp' x beta^e with an exact signed
// exponent; fraction digits most significant first.
struct RawFloatValue {
  FloatSystem sys;
  bool frac_positive = true;
  uint8_t d0 = 0;
  std::vector<uint8_t> frac;
  long long exponent = 0;

  bool fraction_is_zero() const {
    if (d0 != 0) return false;
    for (uint8_t d : frac)
      if (d != 0) return false;
    return true;
  }
};

// Normalized value in S(p,q,beta): either d1 != 0, or the canonical zero
// (fraction zero, most negative exponent, positive fraction sign).
class FloatValue {
 public:
  FloatValue() = default;

  static FloatValue zero(const FloatSystem& s) {
    FloatValue v;
    v.sys_ = s;
    v.frac_positive_ = true;
    v.frac_.assign(static_cast<size_t>(s.p), 0);
    v.exp_ = -s.max_exponent();
    return v;
  }

  static FloatValue max_magnitude(const FloatSystem& s, bool positive) {
    FloatValue v;
    v.sys_ = s;
    v.frac_positive_ = positive;
    v.frac_.assign(static_cast<size_t>(s.p), static_cast<uint8_t>(s.beta - 1));
    v.exp_ = s.max_exponent();
    return v;
  }

  static FloatValue min_positive(const FloatSystem& s) {
    FloatValue v;
    v.sys_ = s;
    v.frac_positive_ = true;
    v.frac_.assign(static_cast<size_t>(s.p), 0);
    v.frac_[0] = 1;
    v.exp_ = -s.max_exponent();
    return v;
  }

  static FloatValue one(const FloatSystem& s) {
    if (s.max_exponent() < 1) throw std::invalid_argument("1 needs exponent range >= 1");
    FloatValue v;
    v.sys_ = s;
    v.frac_positive_ = true;
    v.frac_.assign(static_cast<size_t>(s.p), 0);
    v.frac_[0] = 1;
    v.exp_ = 1;
    return v;
  }

  static FloatValue make(const FloatSystem& s, bool positive, std::vector<uint8_t> digits, long long exponent) {
    FloatValue v;
    v.sys_ = s;
    v.frac_positive_ = positive;
    v.frac_ = std::move(digits);
    v.exp_ = exponent;
    v.check();
    return v;
  }

  const FloatSystem& system() const { return sys_; }
  bool positive() const { return frac_positive_; }
  const std::vector<uint8_t>& digits() const { return frac_; }
  long long exponent() const { return exp_; }

  bool is_zero() const {
    for (uint8_t d : frac_)
      if (d != 0) return false;
    return true;
  }

  bool operator==(const FloatValue& o) const {
    return sys_ == o.sys_ && frac_positive_ == o.frac_positive_ && frac_ == o.frac_ && exp_ == o.exp_;
  }

  // fraction as an integer (d1...dp)
  long long fraction_int() const {
    long long f = 0;
    for (uint8_t d : frac_) f = f * sys_.beta + d;
    return f;
  }

  std::string str() const {
    std::string s = frac_positive_ ? "+0." : "-0.";
    for (uint8_t d : frac_) s.push_back(static_cast<char>('0' + d));
    s += "e";
    s += exp_ < 0 ? "-" : "+";
    long long e = exp_ < 0 ? -exp_ : exp_;
    std::string es(static_cast<size_t>(sys_.q), '0');
    for (int i = sys_.q - 1; i >= 0; --i) {
      es[static_cast<size_t>(i)] = static_cast<char>('0' + (e % sys_.beta));
      e /= sys_.beta;
    }
    return s + es;
  }

  static FloatValue parse(const FloatSystem& s, const std::string& text) {
    size_t i = 0;
    auto fail = [&]() { throw std::invalid_argument("bad float literal: " + text); };
    if (i >= text.size() || (text[i] != '+' && text[i] != '-')) fail();
    bool pos = text[i++] == '+';
    if (i + 1 >= text.size() || text[i] != '0' || text[i + 1] != '.') fail();
    i += 2;
    std::vector<uint8_t> digits;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])))
      digits.push_back(static_cast<uint8_t>(text[i++] - '0'));
    if (i >= text.size() || text[i] != 'e') fail();
    ++i;
    if (i >= text.size() || (text[i] != '+' && text[i] != '-')) fail();
    bool epos = text[i++] == '+';
    long long e = 0;
    size_t edigits = 0;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
      e = e * s.beta + (text[i++] - '0');
      ++edigits;
    }
    if (i != text.size() || static_cast<int>(digits.size()) != s.p || static_cast<int>(edigits) != s.q) fail();
    for (uint8_t d : digits)
      if (d >= s.beta) fail();
    return make(s, pos, std::move(digits), epos ? e : -e);
  }

 private:
  void check() const {
    if (static_cast<int>(frac_.size()) != sys_.p) throw std::invalid_argument("fraction width mismatch");
    for (uint8_t d : frac_)
      if (d >= sys_.beta) throw std::invalid_argument("digit out of range");
    long long maxe = sys_.max_exponent();
    if (exp_ > maxe || exp_ < -maxe) throw std::invalid_argument("exponent out of range");
    if (frac_[0] == 0) {
      bool zero = is_zero();
      if (!zero) throw std::invalid_argument("not normalized: leading zero in a nonzero fraction");
      if (!frac_positive_ || exp_ != -maxe)
        throw std::invalid_argument("zero must be +0 with the smallest exponent");
    }
  }

  FloatSystem sys_;
  bool frac_positive_ = true;
  std::vector<uint8_t> frac_;
  long long exp_ = 0;
};

inline RawFloatValue raw_of(const FloatValue& v) {
  RawFloatValue r;
  r.sys = v.system();
  r.frac_positive = v.positive();
  r.d0 = 0;
  r.frac = v.digits();
  r.exponent = v.exponent();
  return r;
}

// Round-to-nearest ties-to-even on the digit after position p, as a
// standalone step: exponent range check first, then the digit decision; a
// fraction carry shifts right and re-rounds once.
inline RawFloatValue round_nearest_even(RawFloatValue raw, int target_p) {
  const FloatSystem& s = raw.sys;
  long long maxe = s.max_exponent();
  auto saturated = [&](bool positive) {
    RawFloatValue r;
    r.sys = s;
    r.frac_positive = positive;
    r.d0 = 0;
    r.frac.assign(static_cast<size_t>(target_p), static_cast<uint8_t>(s.beta - 1));
    r.exponent = maxe;
    return r;
  };
  auto flushed_zero = [&]() {
    RawFloatValue r;
    r.sys = s;
    r.frac_positive = true;
    r.d0 = 0;
    r.frac.assign(static_cast<size_t>(target_p), 0);
    r.exponent = -maxe;
    return r;
  };
  if (raw.exponent > maxe) return saturated(raw.frac_positive);
  if (static_cast<int>(raw.frac.size()) <= target_p) {
    raw.frac.resize(static_cast<size_t>(target_p), 0);
    if (raw.exponent < -maxe) return flushed_zero();
    return raw;
  }
  int next = raw.frac[static_cast<size_t>(target_p)];
  bool up;
  if (2 * next < s.beta)
    up = false;
  else if (2 * next > s.beta)
    up = true;
  else
    up = raw.frac[static_cast<size_t>(target_p - 1)] % 2 == 1;  // tie: round to even last digit
  raw.frac.resize(static_cast<size_t>(target_p));
  if (up) {
    int carry = 1;
    for (int i = target_p - 1; i >= 0 && carry; --i) {
      int d = raw.frac[static_cast<size_t>(i)] + carry;
      raw.frac[static_cast<size_t>(i)] = static_cast<uint8_t>(d % s.beta);
      carry = d / s.beta;
    }
    if (carry) {
      // 0.(beta-1)...(beta-1) rounded up: shift right and re-round.
      raw.frac.assign(static_cast<size_t>(target_p), 0);
      raw.frac[0] = 1;
      raw.exponent += 1;
      if (raw.exponent > maxe) return saturated(raw.frac_positive);
    }
  }
  // Underflow is detected after rounding, so a round-up that re-enters the
  // exponent range is kept rather than flushed.
  if (raw.exponent < -maxe) return flushed_zero();
  return raw;
}

// Normalization to the system: zero case, left shift over leading zeros, or
// a single right shift, followed by rounding and the exponent range check.
inline FloatValue normalize(RawFloatValue raw, const FloatSystem& s) {
  if (raw.sys.beta != s.beta) throw std::invalid_argument("system base mismatch");
  raw.sys = s;
  long long maxe = s.max_exponent();
  bool zero = raw.d0 == 0;
  for (uint8_t d : raw.frac) zero = zero && d == 0;
  if (zero) return FloatValue::zero(s);

  if (raw.d0 != 0) {
    // |f| >= 1: shift right once.
    raw.frac.insert(raw.frac.begin(), raw.d0);
    raw.frac.pop_back();
    raw.d0 = 0;
    raw.exponent += 1;
  } else if (raw.frac[0] == 0) {
    size_t n = 0;
    while (n < raw.frac.size() && raw.frac[n] == 0) ++n;
    raw.frac.erase(raw.frac.begin(), raw.frac.begin() + static_cast<long>(n));
    raw.frac.insert(raw.frac.end(), n, 0);
    raw.exponent -= static_cast<long long>(n);
  }
  RawFloatValue rounded = round_nearest_even(raw, s.p);
  if (rounded.exponent > maxe) return FloatValue::max_magnitude(s, rounded.frac_positive);
  if (rounded.exponent < -maxe) return FloatValue::zero(s);
  bool allzero = true;
  for (uint8_t d : rounded.frac) allzero = allzero && d == 0;
  if (allzero) return FloatValue::zero(s);
  return FloatValue::make(s, rounded.frac_positive, rounded.frac, rounded.exponent);
}

inline int fp_compare(const FloatValue& a, const FloatValue& b) {
  if (a.system() != b.system()) throw std::invalid_argument("system mismatch");
  if (a.positive() != b.positive()) return a.positive() ? 1 : -1;
  int mag;
  if (a.exponent() != b.exponent()) {
    mag = a.exponent() > b.exponent() ? 1 : -1;
  } else {
    mag = 0;
    for (size_t i = 0; i < a.digits().size() && mag == 0; ++i)
      mag = a.digits()[i] == b.digits()[i] ? 0 : (a.digits()[i] > b.digits()[i] ? 1 : -1);
  }
  return a.positive() ? mag : -mag;
}

// Addition: align the smaller-exponent operand, add the fractions as signed
// integers, normalize. When the exponent gap exceeds p+2 the larger operand
// is returned verbatim.
inline FloatValue fp_add(const FloatValue& a, const FloatValue& b) {
  if (a.system() != b.system()) throw std::invalid_argument("system mismatch");
  const FloatSystem& s = a.system();
  const int w = 2 * s.p + 1;
  const FloatValue& big = a.exponent() >= b.exponent() ? a : b;
  const FloatValue& small = a.exponent() >= b.exponent() ? b : a;
  long long diff = big.exponent() - small.exponent();
  if (diff > s.p + 2) return big;

  auto widen = [&](const FloatValue& v, long long shift) {
    std::vector<uint8_t> d(static_cast<size_t>(w), 0);
    for (int i = 0; i < s.p; ++i) {
      long long pos = shift + i;
      if (pos < w) d[static_cast<size_t>(pos)] = v.digits()[static_cast<size_t>(i)];
    }
    return d;
  };
  std::vector<uint8_t> dbig = widen(big, 0), dsmall = widen(small, diff);
  auto geq = [&](const std::vector<uint8_t>& x, const std::vector<uint8_t>& y) {
    for (int i = 0; i < w; ++i)
      if (x[static_cast<size_t>(i)] != y[static_cast<size_t>(i)]) return x[static_cast<size_t>(i)] > y[static_cast<size_t>(i)];
    return true;
  };
  RawFloatValue raw;
  raw.sys = s;
  raw.exponent = big.exponent();
  raw.frac.assign(static_cast<size_t>(w), 0);
  if (big.positive() == small.positive()) {
    int carry = 0;
    for (int i = w - 1; i >= 0; --i) {
      int d = dbig[static_cast<size_t>(i)] + dsmall[static_cast<size_t>(i)] + carry;
      raw.frac[static_cast<size_t>(i)] = static_cast<uint8_t>(d % s.beta);
      carry = d / s.beta;
    }
    raw.d0 = static_cast<uint8_t>(carry);
    raw.frac_positive = big.positive();
  } else {
    const std::vector<uint8_t>& hi = geq(dbig, dsmall) ? dbig : dsmall;
    const std::vector<uint8_t>& lo = geq(dbig, dsmall) ? dsmall : dbig;
    bool hi_positive = geq(dbig, dsmall) ? big.positive() : small.positive();
    int borrow = 0;
    for (int i = w - 1; i >= 0; --i) {
      int d = hi[static_cast<size_t>(i)] - lo[static_cast<size_t>(i)] - borrow;
      borrow = d < 0 ? 1 : 0;
      raw.frac[static_cast<size_t>(i)] = static_cast<uint8_t>(d + (borrow ? s.beta : 0));
    }
    raw.d0 = 0;
    bool zero = true;
    for (uint8_t d : raw.frac) zero = zero && d == 0;
    raw.frac_positive = zero ? true : hi_positive;
  }
  return normalize(raw, s);
}

// Multiplication: add exponents, multiply fractions into 2p digits,
// normalize (the final range check saturates or flushes as needed).
inline FloatValue fp_mul(const FloatValue& a, const FloatValue& b) {
  if (a.system() != b.system()) throw std::invalid_argument("system mismatch");
  const FloatSystem& s = a.system();
  std::vector<uint8_t> prod(static_cast<size_t>(2 * s.p), 0);
  // schoolbook digit product, most significant first
  for (int i = s.p - 1; i >= 0; --i) {
    int carry = 0;
    for (int j = s.p - 1; j >= 0; --j) {
      int idx = i + j + 1;
      int cur = prod[static_cast<size_t>(idx)] +
                a.digits()[static_cast<size_t>(i)] * b.digits()[static_cast<size_t>(j)] + carry;
      prod[static_cast<size_t>(idx)] = static_cast<uint8_t>(cur % s.beta);
      carry = cur / s.beta;
    }
    int idx = i;
    while (carry) {
      int cur = prod[static_cast<size_t>(idx)] + carry;
      prod[static_cast<size_t>(idx)] = static_cast<uint8_t>(cur % s.beta);
      carry = cur / s.beta;
      --idx;
    }
  }
  RawFloatValue raw;
  raw.sys = s;
  raw.frac_positive = a.positive() == b.positive();
  raw.d0 = 0;
  raw.frac = std::move(prod);
  raw.exponent = a.exponent() + b.exponent();
  return normalize(raw, s);
}

// ---- piecewise polynomials ----

struct Polynomial {
  std::vector<FloatValue> coeffs;  // a_0 ... a_n
  int order() const { return static_cast<int>(coeffs.size()) - 1; }
};

struct Piece {
  std::optional<FloatValue> lower;  // absent on the first piece (-infinity)
  Polynomial poly;
};

struct PieceTable {
  std::vector<Piece> pieces;

  void validate(const FloatSystem& s) const {
    if (pieces.empty()) throw std::invalid_argument("piece table is empty");
    if (pieces[0].lower.has_value()) throw std::invalid_argument("first piece must be unbounded below");
    for (size_t i = 1; i < pieces.size(); ++i) {
      if (!pieces[i].lower.has_value()) throw std::invalid_argument("inner piece lacks a breakpoint");
      if (pieces[i].lower->system() != s) throw std::invalid_argument("breakpoint system mismatch");
      if (i >= 2 && fp_compare(*pieces[i].lower, *pieces[i - 1].lower) <= 0)
        throw std::invalid_argument("breakpoints must be strictly increasing");
    }
    for (const Piece& pc : pieces) {
      if (pc.poly.coeffs.empty()) throw std::invalid_argument("piece has no coefficients");
      for (const FloatValue& c : pc.poly.coeffs)
        if (c.system() != s) throw std::invalid_argument("coefficient system mismatch");
    }
  }

  int max_order() const {
    int o = 0;
    for (auto& pc : pieces) o = std::max(o, pc.poly.order());
    return std::max(o, 1);
  }

  static PieceTable relu(const FloatSystem& s) {
    PieceTable t;
    t.pieces.push_back({std::nullopt, {{FloatValue::zero(s)}}});
    t.pieces.push_back({FloatValue::zero(s), {{FloatValue::zero(s), FloatValue::one(s)}}});
    return t;
  }

  // H(x) = 1 for x > 0; over system values x > 0 iff x >= the smallest
  // positive number.
  static PieceTable heaviside(const FloatSystem& s) {
    PieceTable t;
    t.pieces.push_back({std::nullopt, {{FloatValue::zero(s)}}});
    t.pieces.push_back({FloatValue::min_positive(s), {{FloatValue::one(s)}}});
    return t;
  }
};

// Balanced pairing used for both products and sums: neighbours combine, an
// odd element passes through, until one value remains.
template <typename Op>
inline FloatValue balanced_combine(std::vector<FloatValue> xs, Op&& op) {
  while (xs.size() > 1) {
    std::vector<FloatValue> next;
    for (size_t i = 0; i + 1 < xs.size(); i += 2) next.push_back(op(xs[i], xs[i + 1]));
    if (xs.size() % 2 == 1) next.push_back(xs.back());
    xs = std::move(next);
  }
  return xs[0];
}

// Term a_i * x^i evaluated as the balanced product of [a_i, x, ..., x].
inline FloatValue eval_term(const FloatValue& coeff, const FloatValue& x, int power) {
  std::vector<FloatValue> factors = {coeff};
  for (int i = 0; i < power; ++i) factors.push_back(x);
  return balanced_combine(std::move(factors), [](const FloatValue& a, const FloatValue& b) { return fp_mul(a, b); });
}

// Sum of the terms in descending order a_n x^n + ... + a_0, balanced pairing,
// rounding after every operation.
inline FloatValue eval_polynomial(const Polynomial& poly, const FloatValue& x) {
  std::vector<FloatValue> terms;
  for (int i = poly.order(); i >= 0; --i) terms.push_back(eval_term(poly.coeffs[static_cast<size_t>(i)], x, i));
  return balanced_combine(std::move(terms), [](const FloatValue& a, const FloatValue& b) { return fp_add(a, b); });
}

inline const Piece& select_piece(const PieceTable& t, const FloatValue& x) {
  size_t chosen = 0;
  for (size_t i = 1; i < t.pieces.size(); ++i)
    if (fp_compare(x, *t.pieces[i].lower) >= 0) chosen = i;
  return t.pieces[chosen];
}

inline FloatValue eval_piecewise(const PieceTable& t, const FloatValue& x) {
  t.validate(x.system());
  return eval_polynomial(select_piece(t, x).poly, x);
}

// All normalized values of a system, in no particular order.
inline std::vector<FloatValue> enumerate_system(const FloatSystem& s) {
  std::vector<FloatValue> out;
  out.push_back(FloatValue::zero(s));
  std::vector<uint8_t> digits(static_cast<size_t>(s.p), 0);
  long long maxe = s.max_exponent();
  auto rec = [&](auto&& self, int pos) -> void {
    if (pos == s.p) {
      for (long long e = -maxe; e <= maxe; ++e)
        for (bool pos_sign : {true, false}) out.push_back(FloatValue::make(s, pos_sign, digits, e));
      return;
    }
    int lo = pos == 0 ? 1 : 0;
    for (int d = lo; d < s.beta; ++d) {
      digits[static_cast<size_t>(pos)] = static_cast<uint8_t>(d);
      self(self, pos + 1);
    }
  };
  rec(rec, 0);
  return out;
}

}  // namespace bnlkit
