#pragma once

#include <vector>

#include "bnlkit/softfloat.hpp"

namespace bnlkit {

// One-hot encoding of floating-point values: exponent sign, fraction sign,
// exponent digit blocks (most significant first), then fraction blocks. Raw
// values insert the d0 block between the exponent and fraction parts.
struct FloatCodec {
  FloatSystem sys;
  bool raw = false;
  int pprime = 0, qprime = 0;  // raw widths; ignored unless raw

  static FloatCodec normal(const FloatSystem& s) { return {s, false, 0, 0}; }
  static FloatCodec raw_codec(const FloatSystem& s, int pp, int qp) { return {s, true, pp, qp}; }

  size_t encoded_length() const {
    return raw ? 2 + static_cast<size_t>(sys.beta) * static_cast<size_t>(pprime + 1 + qprime)
               : 2 + static_cast<size_t>(sys.beta) * static_cast<size_t>(sys.p + sys.q);
  }

  std::vector<uint8_t> encode(const FloatValue& v) const {
    if (raw) throw std::invalid_argument("raw codec cannot encode normalized values");
    if (!(v.system() == sys)) throw std::invalid_argument("system mismatch");
    std::vector<uint8_t> bits;
    bits.reserve(encoded_length());
    bits.push_back(v.exponent() >= 0 ? 1 : 0);
    bits.push_back(v.positive() ? 1 : 0);
    append_digits(bits, magnitude_digits(v.exponent(), sys.q));
    append_digits(bits, v.digits());
    return bits;
  }

  FloatValue decode(const std::vector<uint8_t>& bits) const {
    if (raw) throw std::invalid_argument("raw codec cannot decode normalized values");
    if (bits.size() != encoded_length()) throw std::invalid_argument("encoded length mismatch");
    size_t i = 0;
    bool epos = bits[i++] != 0;
    bool fpos = bits[i++] != 0;
    long long e = 0;
    for (int j = 0; j < sys.q; ++j) e = e * sys.beta + read_block(bits, i);
    std::vector<uint8_t> digits;
    for (int j = 0; j < sys.p; ++j) digits.push_back(static_cast<uint8_t>(read_block(bits, i)));
    return FloatValue::make(sys, fpos, std::move(digits), epos ? e : -e);
  }

  std::vector<uint8_t> encode_raw(const RawFloatValue& v) const {
    if (!raw) throw std::invalid_argument("normal codec cannot encode raw values");
    if (static_cast<int>(v.frac.size()) != pprime) throw std::invalid_argument("raw fraction width mismatch");
    std::vector<uint8_t> bits;
    bits.reserve(encoded_length());
    bits.push_back(v.exponent >= 0 ? 1 : 0);
    bits.push_back(v.frac_positive ? 1 : 0);
    append_digits(bits, magnitude_digits(v.exponent, qprime));
    append_digits(bits, std::vector<uint8_t>{v.d0});
    append_digits(bits, v.frac);
    return bits;
  }

  RawFloatValue decode_raw(const std::vector<uint8_t>& bits) const {
    if (!raw) throw std::invalid_argument("normal codec cannot decode raw values");
    if (bits.size() != encoded_length()) throw std::invalid_argument("encoded length mismatch");
    size_t i = 0;
    RawFloatValue v;
    v.sys = sys;
    bool epos = bits[i++] != 0;
    v.frac_positive = bits[i++] != 0;
    long long e = 0;
    for (int j = 0; j < qprime; ++j) e = e * sys.beta + read_block(bits, i);
    v.exponent = epos ? e : -e;
    v.d0 = static_cast<uint8_t>(read_block(bits, i));
    for (int j = 0; j < pprime; ++j) v.frac.push_back(static_cast<uint8_t>(read_block(bits, i)));
    return v;
  }

 private:
  std::vector<uint8_t> magnitude_digits(long long e, int width) const {
    long long m = e < 0 ? -e : e;
    std::vector<uint8_t> d(static_cast<size_t>(width), 0);
    for (int i = width - 1; i >= 0; --i) {
      d[static_cast<size_t>(i)] = static_cast<uint8_t>(m % sys.beta);
      m /= sys.beta;
    }
    if (m != 0) throw std::invalid_argument("exponent does not fit its width");
    return d;
  }

  void append_digits(std::vector<uint8_t>& bits, const std::vector<uint8_t>& digits) const {
    for (uint8_t d : digits) {
      if (d >= sys.beta) throw std::invalid_argument("digit out of range");
      for (int k = 0; k < sys.beta; ++k) bits.push_back(k == d ? 1 : 0);
    }
  }

  int read_block(const std::vector<uint8_t>& bits, size_t& i) const {
    int digit = -1;
    for (int k = 0; k < sys.beta; ++k) {
      if (bits[i++]) {
        if (digit >= 0) throw std::invalid_argument("digit block is not one-hot");
        digit = k;
      }
    }
    if (digit < 0) throw std::invalid_argument("digit block is not one-hot");
    return digit;
  }
};

}  // namespace bnlkit
