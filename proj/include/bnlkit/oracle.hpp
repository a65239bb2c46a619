#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <vector>

#include "bnlkit/circuit.hpp"
#include "bnlkit/formula.hpp"
#include "bnlkit/softfloat.hpp"

namespace bnlkit::oracle {

using BigInt = boost::multiprecision::cpp_int;

// ---- integer reference results ----

inline BigInt int_add(const BigInt& x, const BigInt& y) { return x + y; }
inline BigInt int_mul(const BigInt& x, const BigInt& y) { return x * y; }
inline int int_compare(const BigInt& x, const BigInt& y) { return x > y ? 1 : 0; }

// ---- parity ----

inline int parity(const std::vector<uint8_t>& bits) {
  int s = 0;
  for (uint8_t b : bits) s ^= (b & 1);
  return s;
}

// ---- exact rational arithmetic with the reference rounding schedule ----

struct ExactRational {
  BigInt num = 0;
  BigInt den = 1;

  void reduce() {
    if (den < 0) {
      den = -den;
      num = -num;
    }
    BigInt g = boost::multiprecision::gcd(num < 0 ? BigInt(-num) : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  static ExactRational of(long long n, long long d = 1) {
    ExactRational r{BigInt(n), BigInt(d)};
    r.reduce();
    return r;
  }

  static ExactRational of_float(const FloatValue& v) {
    const FloatSystem& s = v.system();
    BigInt f = 0;
    for (uint8_t d : v.digits()) f = f * s.beta + d;
    if (!v.positive()) f = -f;
    long long shift = v.exponent() - s.p;
    ExactRational r;
    r.num = f;
    r.den = 1;
    for (long long i = 0; i < shift; ++i) r.num *= s.beta;
    for (long long i = 0; i < -shift; ++i) r.den *= s.beta;
    r.reduce();
    return r;
  }

  ExactRational operator+(const ExactRational& o) const {
    ExactRational r{num * o.den + o.num * den, den * o.den};
    r.reduce();
    return r;
  }
  ExactRational operator*(const ExactRational& o) const {
    ExactRational r{num * o.num, den * o.den};
    r.reduce();
    return r;
  }
  bool is_zero() const { return num == 0; }
  bool positive() const { return num > 0; }
  int compare(const ExactRational& o) const {
    BigInt l = num * o.den, r = o.num * den;
    return l == r ? 0 : (l > r ? 1 : -1);
  }
};

// Rounds an exact rational into the system: exact leading digits by floor
// division, then the keep/up/tie-to-even decision on digit p+1, saturating
// above the exponent range and flushing to canonical zero below it.
inline FloatValue round_to_system(const ExactRational& v, const FloatSystem& s) {
  if (v.is_zero()) return FloatValue::zero(s);
  BigInt n = v.num < 0 ? BigInt(-v.num) : v.num;
  BigInt d = v.den;
  long long maxe = s.max_exponent();
  long long e = 0;
  {
    BigInt scale = d;
    while (n >= scale) {
      scale *= s.beta;
      ++e;
      if (e > maxe + 2) return FloatValue::max_magnitude(s, v.positive());
    }
    if (e == 0) {
      BigInt t = n * s.beta;
      while (t < d) {
        t *= s.beta;
        --e;
        if (e < -maxe - static_cast<long long>(4 * s.p) - 4) return FloatValue::zero(s);
      }
    }
  }
  if (e > maxe) return FloatValue::max_magnitude(s, v.positive());

  BigInt scaled_num = n;
  for (int i = 0; i < s.p + 1; ++i) scaled_num *= s.beta;
  BigInt scaled_den = d;
  for (long long i = 0; i < e; ++i) scaled_den *= s.beta;
  for (long long i = 0; i < -e; ++i) scaled_num *= s.beta;
  BigInt digits_int = scaled_num / scaled_den;

  std::vector<uint8_t> digits(static_cast<size_t>(s.p) + 1, 0);
  BigInt tmp = digits_int;
  for (int i = s.p; i >= 0; --i) {
    digits[static_cast<size_t>(i)] = static_cast<uint8_t>(static_cast<long long>(tmp % s.beta));
    tmp /= s.beta;
  }
  int next = digits[static_cast<size_t>(s.p)];
  bool up;
  if (2 * next < s.beta)
    up = false;
  else if (2 * next > s.beta)
    up = true;
  else
    up = digits[static_cast<size_t>(s.p) - 1] % 2 == 1;
  digits.resize(static_cast<size_t>(s.p));
  if (up) {
    int carry = 1;
    for (int i = s.p - 1; i >= 0 && carry; --i) {
      int dd = digits[static_cast<size_t>(i)] + carry;
      digits[static_cast<size_t>(i)] = static_cast<uint8_t>(dd % s.beta);
      carry = dd / s.beta;
    }
    if (carry) {
      digits.assign(static_cast<size_t>(s.p), 0);
      digits[0] = 1;
      ++e;
    }
  }
  if (e > maxe) return FloatValue::max_magnitude(s, v.positive());
  if (e < -maxe) return FloatValue::zero(s);
  return FloatValue::make(s, v.positive(), digits, e);
}

// ---- truth tables (up to 16 variables) ----

inline std::vector<uint8_t> truth_table(const Formula& f, const std::vector<Symbol>& vars) {
  if (vars.size() > 16) throw std::invalid_argument("truth table limited to 16 variables");
  std::vector<uint8_t> out;
  out.reserve(static_cast<size_t>(1) << vars.size());
  for (uint64_t m = 0; m < (1ull << vars.size()); ++m) {
    auto look = [&](Symbol s) {
      for (size_t i = 0; i < vars.size(); ++i)
        if (vars[i] == s) return ((m >> i) & 1) != 0;
      return false;
    };
    out.push_back(f.eval_with(look) ? 1 : 0);
  }
  return out;
}

inline std::vector<uint8_t> truth_table(const Circuit& c) {
  if (c.inputs().size() > 16) throw std::invalid_argument("truth table limited to 16 variables");
  if (c.outputs().size() != 1) throw std::invalid_argument("truth table needs a single output");
  std::vector<uint8_t> out;
  size_t n = c.inputs().size();
  for (uint64_t m = 0; m < (1ull << n); ++m) {
    std::vector<uint8_t> in(n);
    for (size_t i = 0; i < n; ++i) in[i] = (m >> i) & 1;
    out.push_back(c.eval(in)[0]);
  }
  return out;
}

}  // namespace bnlkit::oracle
