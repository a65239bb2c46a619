#pragma once

#include <map>
#include <string>
#include <vector>

#include "bnlkit/builder.hpp"
#include "bnlkit/floatcodec.hpp"
#include "bnlkit/intops.hpp"
#include "bnlkit/softfloat.hpp"

namespace bnlkit {

// Float value as formulas: sign bits plus little-endian one-hot digit nets.
struct FloatNet {
  Formula esign, fsign;  // true <=> '+'
  UIntNet e;             // exponent magnitude, width q
  UIntNet f;             // fraction, width p, f.d[0] = d_p
};

struct RawNet {
  Formula esign, fsign;
  UIntNet e;    // width q'
  DigitNet d0;  // digit left of the radix point
  UIntNet f;    // width p', f.d[0] = d_{p'}
};

namespace nets {

inline SIntNet as_signed(Formula sign, UIntNet mag) { return {std::move(sign), std::move(mag)}; }

inline SIntNet negate_sint(SIntNet v) {
  v.positive = Formula::negate_fold(v.positive);
  return v;
}

struct SCmpNets {
  Formula gt, lt;
};

// Signed comparison treating +0 and -0 as equal.
inline SCmpNets scmp(ProgramBuilder& b, const SIntNet& x, const SIntNet& y, const std::string& hint) {
  CmpNets m = cmp_unsigned(b, x.mag, y.mag, hint);
  Formula bothz = Formula::conj_fold(is_zero(x.mag), is_zero(y.mag));
  Formula nx = Formula::negate_fold(x.positive), ny = Formula::negate_fold(y.positive);
  SCmpNets r;
  r.gt = Formula::big_or({Formula::big_and({x.positive, ny, Formula::negate_fold(bothz)}),
                          Formula::big_and({x.positive, y.positive, m.gt}),
                          Formula::big_and({nx, ny, m.lt})});
  r.lt = Formula::big_or({Formula::big_and({nx, y.positive, Formula::negate_fold(bothz)}),
                          Formula::big_and({x.positive, y.positive, m.lt}),
                          Formula::big_and({nx, ny, m.gt})});
  return r;
}

inline SIntNet const_sint(int beta, size_t width, long long value) {
  SIntNet s;
  s.positive = value >= 0 ? Formula::top() : Formula::bottom();
  s.mag = const_uint(beta, width, value < 0 ? -value : value);
  return s;
}

inline Formula eq_const(const UIntNet& u, int beta, long long value) {
  std::vector<Formula> fs;
  for (size_t i = 0; i < u.width(); ++i) {
    fs.push_back(u.d[i].bit[static_cast<size_t>(value % beta)]);
    value /= beta;
  }
  if (value != 0) return Formula::bottom();
  return Formula::big_and(std::move(fs));
}

// Digit-level multiplexer over mutually exclusive conditions. Every
// (condition, net) pair must have the same width.
inline UIntNet mux(ProgramBuilder& b, const std::vector<std::pair<Formula, const UIntNet*>>& cases,
                   const std::string& hint) {
  size_t w = cases[0].second->width();
  size_t nb = cases[0].second->d[0].bit.size();
  UIntNet out;
  for (size_t i = 0; i < w; ++i) {
    DigitNet dn;
    for (size_t k = 0; k < nb; ++k) {
      std::vector<Formula> terms;
      for (auto& [cond, net] : cases) terms.push_back(Formula::conj_fold(cond, net->d[i].bit[k]));
      dn.bit.push_back(Formula::big_or(std::move(terms)));
    }
    out.d.push_back(std::move(dn));
  }
  return materialize(b, out, hint);
}

inline Formula mux_bit(ProgramBuilder& b, const std::vector<std::pair<Formula, Formula>>& cases,
                       const std::string& hint) {
  std::vector<Formula> terms;
  for (auto& [cond, bit] : cases) terms.push_back(Formula::conj_fold(cond, bit));
  Formula f = Formula::big_or(std::move(terms));
  if (f.op() == Formula::Op::Var || f.is_top() || f.is_bottom()) return f;
  return Formula::var(b.pred(hint, f));
}

}  // namespace nets

namespace fpdetail {

inline int internal_exp_width(const FloatSystem& s, size_t qprime, size_t pprime) {
  long long need = 1;
  for (size_t i = 0; i < qprime; ++i) need *= s.beta;
  need = need - 1 + static_cast<long long>(pprime) + 2;
  int qi = static_cast<int>(qprime);
  long long cap = 1;
  for (int i = 0; i < qi; ++i) cap *= s.beta;
  while (cap - 1 < need) {
    cap *= s.beta;
    ++qi;
  }
  return qi;
}

inline SIntNet widen_exp(const SIntNet& e, int beta, size_t width) {
  SIntNet r = e;
  r.mag = nets::pad(r.mag, beta, width);
  return r;
}

inline FloatNet const_float_net(const FloatValue& v) {
  FloatNet n;
  n.esign = v.exponent() >= 0 ? Formula::top() : Formula::bottom();
  n.fsign = v.positive() ? Formula::top() : Formula::bottom();
  long long e = v.exponent() < 0 ? -v.exponent() : v.exponent();
  n.e = nets::const_uint(v.system().beta, static_cast<size_t>(v.system().q), e);
  UIntNet f;
  for (int i = v.system().p - 1; i >= 0; --i)
    f.d.push_back(nets::const_digit(v.system().beta, v.digits()[static_cast<size_t>(i)]));
  n.f = std::move(f);
  return n;
}

// The exact mirror of `normalize`: case split on d0 and leading zeros, shift,
// round on the digit after position p, then the exponent range checks.
inline FloatNet normalize_net(ProgramBuilder& b, const RawNet& raw, const FloatSystem& S,
                              const std::string& hint) {
  const int beta = S.beta;
  const int p = S.p;
  const size_t pp = raw.f.width();
  const size_t qp = raw.e.width();
  if (pp < static_cast<size_t>(p)) throw std::invalid_argument("raw fraction narrower than the target");
  const long long maxe = S.max_exponent();
  const int qi = internal_exp_width(S, qp, pp);

  Formula zf = Formula::conj_fold(nets::is_zero(raw.f), raw.d0.bit[0]);
  Formula ge1 = Formula::negate_fold(raw.d0.bit[0]);

  // |f| >= 1 branch: shift right once.
  UIntNet fshift_r;
  for (size_t i = 0; i + 1 < pp; ++i) fshift_r.d.push_back(raw.f.d[i + 1]);
  fshift_r.d.push_back(raw.d0);

  // 0 < |f| < 1 branch: count leading zeros and shift left.
  std::vector<Formula> prefix_zero(pp + 1);  // prefix_zero[i] <=> d_1..d_i are all 0
  prefix_zero[0] = Formula::top();
  for (size_t i = 1; i <= pp; ++i)
    prefix_zero[i] = Formula::conj_fold(prefix_zero[i - 1], raw.f.d[pp - i].bit[0]);
  std::vector<Formula> nz(pp);  // nz[k] <=> exactly k leading zeros
  for (size_t k = 0; k + 1 < pp; ++k)
    nz[k] = Formula::conj_fold(prefix_zero[k], Formula::negate_fold(prefix_zero[k + 1]));
  nz[pp - 1] = prefix_zero[pp - 1];
  for (size_t k = 0; k < pp; ++k)
    if (!nz[k].is_bottom() && !nz[k].is_top()) nz[k] = Formula::var(b.pred(hint + "lz", nz[k]));

  UIntNet fshift_l;
  for (size_t i = 0; i < pp; ++i) {
    DigitNet dn;
    for (int dd = 0; dd < beta; ++dd) {
      std::vector<Formula> terms;
      for (size_t k = 0; k < pp; ++k) {
        if (i >= k)
          terms.push_back(Formula::conj_fold(nz[k], raw.f.d[i - k].bit[static_cast<size_t>(dd)]));
        else if (dd == 0)
          terms.push_back(nz[k]);
      }
      dn.bit.push_back(Formula::big_or(std::move(terms)));
    }
    fshift_l.d.push_back(std::move(dn));
  }

  UIntNet fmid = nets::mux(b, {{ge1, &fshift_r}, {Formula::negate_fold(ge1), &fshift_l}}, hint + "fm");

  // leading-zero count as a number (for the exponent decrement)
  size_t wn = 1;
  {
    long long cap = beta;
    while (cap - 1 < static_cast<long long>(pp)) {
      cap *= beta;
      ++wn;
    }
  }
  UIntNet n_net;
  for (size_t j = 0; j < wn; ++j) {
    DigitNet dn;
    long long div = 1;
    for (size_t t = 0; t < j; ++t) div *= beta;
    for (int dd = 0; dd < beta; ++dd) {
      std::vector<Formula> terms;
      for (size_t k = 0; k < pp; ++k)
        if ((static_cast<long long>(k) / div) % beta == dd) terms.push_back(nz[k]);
      dn.bit.push_back(Formula::big_or(std::move(terms)));
    }
    n_net.d.push_back(std::move(dn));
  }

  SIntNet ewide = widen_exp(nets::as_signed(raw.esign, raw.e), beta, static_cast<size_t>(qi));
  SIntNet eplus = nets::add_signed(b, ewide, nets::const_sint(beta, 1, 1), hint + "ep").result;
  SIntNet eminus =
      nets::add_signed(b, ewide, nets::negate_sint(nets::as_signed(Formula::top(), n_net)), hint + "em").result;
  eplus.mag = nets::trim(std::move(eplus.mag), static_cast<size_t>(qi));
  eminus.mag = nets::trim(std::move(eminus.mag), static_cast<size_t>(qi));
  Formula notge1 = Formula::negate_fold(ge1);
  SIntNet emid;
  emid.positive = nets::mux_bit(b, {{ge1, eplus.positive}, {notge1, eminus.positive}}, hint + "ems");
  emid.mag = nets::mux(b, {{ge1, &eplus.mag}, {notge1, &eminus.mag}}, hint + "emm");

  nets::SCmpNets pre_over_cmp = nets::scmp(b, emid, nets::const_sint(beta, static_cast<size_t>(qi), maxe), hint + "po");
  Formula pre_over = Formula::var(b.pred(hint + "ov", pre_over_cmp.gt));

  // round-to-nearest ties-to-even on digit p+1 of fmid
  UIntNet kept;  // little-endian, kept.d[0] = d_p
  for (int i = 0; i < p; ++i) kept.d.push_back(fmid.d[pp - static_cast<size_t>(p) + static_cast<size_t>(i)]);
  Formula up = Formula::bottom();
  if (pp > static_cast<size_t>(p)) {
    const DigitNet& next = fmid.d[pp - static_cast<size_t>(p) - 1];
    std::vector<Formula> gt_terms, tie_terms;
    for (int dd = 0; dd < beta; ++dd) {
      if (2 * dd > beta) gt_terms.push_back(next.bit[static_cast<size_t>(dd)]);
      if (2 * dd == beta) tie_terms.push_back(next.bit[static_cast<size_t>(dd)]);
    }
    std::vector<Formula> odd_terms;
    for (int dd = 1; dd < beta; dd += 2) odd_terms.push_back(kept.d[0].bit[static_cast<size_t>(dd)]);
    up = Formula::disj_fold(Formula::big_or(std::move(gt_terms)),
                            Formula::conj_fold(Formula::big_or(std::move(tie_terms)),
                                               Formula::big_or(std::move(odd_terms))));
    if (!up.is_bottom()) up = Formula::var(b.pred(hint + "up", up));
  }

  std::vector<Formula> all_max(static_cast<size_t>(p) + 1);  // kept.d[0..i-1] all beta-1
  all_max[0] = Formula::top();
  for (int i = 1; i <= p; ++i)
    all_max[static_cast<size_t>(i)] = Formula::conj_fold(all_max[static_cast<size_t>(i - 1)],
                                                         kept.d[static_cast<size_t>(i - 1)].bit[static_cast<size_t>(beta - 1)]);
  Formula overflow = Formula::conj_fold(up, all_max[static_cast<size_t>(p)]);
  if (!overflow.is_bottom() && !overflow.is_top()) overflow = Formula::var(b.pred(hint + "ovf", overflow));

  UIntNet rounded;
  for (int i = 0; i < p; ++i) {
    Formula carry_in = Formula::conj_fold(up, all_max[static_cast<size_t>(i)]);
    DigitNet dn;
    for (int dd = 0; dd < beta; ++dd) {
      Formula keep = Formula::conj_fold(Formula::negate_fold(carry_in), kept.d[static_cast<size_t>(i)].bit[static_cast<size_t>(dd)]);
      Formula inc = Formula::conj_fold(carry_in, kept.d[static_cast<size_t>(i)].bit[static_cast<size_t>((dd - 1 + beta) % beta)]);
      Formula v = Formula::disj_fold(keep, inc);
      // on overflow the fraction becomes 0...01 shifted: 0.10...0
      Formula norm_case = Formula::conj_fold(Formula::negate_fold(overflow), v);
      Formula ov_case = i == p - 1 && dd == 1 ? overflow
                        : (dd == 0 && i != p - 1 ? overflow : Formula::bottom());
      dn.bit.push_back(Formula::disj_fold(norm_case, ov_case));
    }
    rounded.d.push_back(std::move(dn));
  }
  SIntNet efin_plus = nets::add_signed(b, emid, nets::const_sint(beta, 1, 1), hint + "ef").result;
  efin_plus.mag = nets::trim(std::move(efin_plus.mag), static_cast<size_t>(qi));
  Formula notovf = Formula::negate_fold(overflow);
  SIntNet efin;
  efin.positive = nets::mux_bit(b, {{overflow, efin_plus.positive}, {notovf, emid.positive}}, hint + "efs");
  efin.mag = nets::mux(b, {{overflow, &efin_plus.mag}, {notovf, &emid.mag}}, hint + "efm");

  nets::SCmpNets post_over_cmp =
      nets::scmp(b, efin, nets::const_sint(beta, static_cast<size_t>(qi), maxe), hint + "qo");
  Formula post_over = Formula::var(b.pred(hint + "ov2", post_over_cmp.gt));
  nets::SCmpNets post_under_cmp =
      nets::scmp(b, efin, nets::const_sint(beta, static_cast<size_t>(qi), -maxe), hint + "qu");
  Formula post_under = Formula::var(b.pred(hint + "un", post_under_cmp.lt));

  Formula out_zero = Formula::disj_fold(zf, post_under);
  Formula out_sat = Formula::big_and({Formula::negate_fold(out_zero),
                                      Formula::disj_fold(pre_over, post_over)});
  Formula out_norm = Formula::conj_fold(Formula::negate_fold(out_zero), Formula::negate_fold(out_sat));
  out_zero = Formula::var(b.pred(hint + "cz", out_zero));
  out_sat = Formula::var(b.pred(hint + "cs", out_sat));
  out_norm = Formula::var(b.pred(hint + "cn", out_norm));

  UIntNet zero_frac = nets::const_uint(beta, static_cast<size_t>(p), 0);
  UIntNet max_frac;
  for (int i = 0; i < p; ++i) max_frac.d.push_back(nets::const_digit(beta, beta - 1));
  UIntNet maxe_digits;
  {
    long long m = maxe;
    for (int i = 0; i < S.q; ++i) {
      maxe_digits.d.push_back(nets::const_digit(beta, static_cast<int>(m % beta)));
      m /= beta;
    }
  }
  UIntNet efin_low = nets::trim(efin.mag, static_cast<size_t>(S.q));

  FloatNet out;
  out.f = nets::mux(b, {{out_zero, &zero_frac}, {out_sat, &max_frac}, {out_norm, &rounded}}, hint + "of");
  out.e = nets::mux(b, {{out_zero, &maxe_digits}, {out_sat, &maxe_digits}, {out_norm, &efin_low}}, hint + "oe");
  out.esign = nets::mux_bit(b, {{out_zero, Formula::bottom()}, {out_sat, Formula::top()}, {out_norm, efin.positive}},
                            hint + "oes");
  out.fsign = nets::mux_bit(b, {{out_zero, Formula::top()}, {out_sat, raw.fsign}, {out_norm, raw.fsign}},
                            hint + "ofs");
  return out;
}

// Mirror of fp_add: exponent difference, alignment with the early-out flag,
// signed fraction addition, normalization.
inline FloatNet fp_add_net(ProgramBuilder& b, const FloatNet& x, const FloatNet& y, const FloatSystem& S,
                           const std::string& hint) {
  const int beta = S.beta;
  const int p = S.p;
  const size_t w = 2 * static_cast<size_t>(p) + 1;

  SIntNet ex = nets::as_signed(x.esign, x.e), ey = nets::as_signed(y.esign, y.e);
  SIntNet d = nets::add_signed(b, ex, nets::negate_sint(ey), hint + "ed").result;
  Formula big_x = d.positive;  // e_x >= e_y, ties to x
  Formula big_y = Formula::negate_fold(big_x);

  nets::CmpNets eo_cmp = nets::cmp_unsigned(b, d.mag, nets::const_uint(beta, d.mag.width(), p + 2), hint + "eo");
  Formula eo = Formula::var(b.pred(hint + "eo", eo_cmp.gt));

  std::vector<Formula> sh(static_cast<size_t>(p) + 3);  // sh[k] <=> |diff| == k
  for (int k = 0; k <= p + 2; ++k) {
    Formula f = nets::eq_const(d.mag, beta, k);
    sh[static_cast<size_t>(k)] = f.is_bottom() || f.is_top() ? f : Formula::var(b.pred(hint + "sh", f));
  }

  // Aligned fraction over w digits: the operand with the larger exponent
  // keeps positions 1..p, the other shifts right by |diff| (or vanishes past
  // the early-out threshold).
  auto aligned_pair = [&](const FloatNet& v, Formula is_big) {
    UIntNet out;
    Formula is_small = Formula::negate_fold(is_big);
    for (size_t i = 0; i < w; ++i) {
      long long pos = static_cast<long long>(w - i);
      DigitNet dn;
      for (int dd = 0; dd < beta; ++dd) {
        std::vector<Formula> terms;
        // big side: delta = 0
        if (pos >= 1 && pos <= p)
          terms.push_back(Formula::conj_fold(is_big, v.f.d[static_cast<size_t>(p - pos)].bit[static_cast<size_t>(dd)]));
        else if (dd == 0)
          terms.push_back(is_big);
        // small side: delta = |diff| (clamped by the early-out flag)
        for (int k = 0; k <= p + 2; ++k) {
          long long j = pos - k;
          Formula c = Formula::conj_fold(is_small, sh[static_cast<size_t>(k)]);
          if (j >= 1 && j <= p)
            terms.push_back(Formula::conj_fold(c, v.f.d[static_cast<size_t>(p - j)].bit[static_cast<size_t>(dd)]));
          else if (dd == 0)
            terms.push_back(c);
        }
        if (dd == 0) terms.push_back(Formula::conj_fold(is_small, eo));
        dn.bit.push_back(Formula::big_or(std::move(terms)));
      }
      out.d.push_back(std::move(dn));
    }
    return nets::materialize(b, out, hint + "al");
  };

  UIntNet ax = aligned_pair(x, big_x);
  UIntNet ay = aligned_pair(y, big_y);

  nets::SignedAddNets sum = nets::add_signed(b, nets::as_signed(x.fsign, ax), nets::as_signed(y.fsign, ay),
                                             hint + "fs");

  RawNet raw;
  raw.fsign = sum.result.positive;
  raw.d0 = sum.result.mag.d[w];  // carry digit
  raw.f = nets::trim(sum.result.mag, w);
  raw.esign = nets::mux_bit(b, {{big_x, x.esign}, {big_y, y.esign}}, hint + "bes");
  raw.e = nets::mux(b, {{big_x, &x.e}, {big_y, &y.e}}, hint + "bem");
  FloatNet nrm = normalize_net(b, raw, S, hint + "n");

  Formula keep = Formula::negate_fold(eo);
  UIntNet big_f = nets::mux(b, {{big_x, &x.f}, {big_y, &y.f}}, hint + "bf");
  Formula big_fs = nets::mux_bit(b, {{big_x, x.fsign}, {big_y, y.fsign}}, hint + "bfs");

  FloatNet out;
  out.f = nets::mux(b, {{eo, &big_f}, {keep, &nrm.f}}, hint + "rf");
  out.e = nets::mux(b, {{eo, &raw.e}, {keep, &nrm.e}}, hint + "re");
  out.esign = nets::mux_bit(b, {{eo, raw.esign}, {keep, nrm.esign}}, hint + "res");
  out.fsign = nets::mux_bit(b, {{eo, big_fs}, {keep, nrm.fsign}}, hint + "rfs");
  return out;
}

// Mirror of fp_mul: exponent sum, exact fraction product, normalization.
inline FloatNet fp_mul_net(ProgramBuilder& b, const FloatNet& x, const FloatNet& y, const FloatSystem& S,
                           const std::string& hint) {
  const int beta = S.beta;
  SIntNet esum = nets::add_signed(b, nets::as_signed(x.esign, x.e), nets::as_signed(y.esign, y.e),
                                  hint + "es").result;
  UIntNet prod = nets::mul_unsigned(b, x.f, y.f, hint + "m");
  RawNet raw;
  raw.fsign = nets::mux_bit(b, {{Formula::top(), Formula::iff(x.fsign, y.fsign)}}, hint + "ms");
  raw.d0 = nets::const_digit(beta, 0);
  raw.f = std::move(prod);
  raw.esign = esum.positive;
  raw.e = esum.mag;
  return normalize_net(b, raw, S, hint + "n");
}

struct FpCmpNets {
  Formula gt, lt;
};

inline FpCmpNets fp_cmp_net(ProgramBuilder& b, const FloatNet& x, const FloatNet& y, const std::string& hint) {
  nets::SCmpNets ec = nets::scmp(b, nets::as_signed(x.esign, x.e), nets::as_signed(y.esign, y.e), hint + "e");
  nets::CmpNets fc = nets::cmp_unsigned(b, x.f, y.f, hint + "f");
  Formula e_eq = Formula::negate_fold(Formula::disj_fold(ec.gt, ec.lt));
  Formula mag_gt = Formula::disj_fold(ec.gt, Formula::conj_fold(e_eq, fc.gt));
  Formula mag_lt = Formula::disj_fold(ec.lt, Formula::conj_fold(e_eq, fc.lt));
  Formula nx = Formula::negate_fold(x.fsign), ny = Formula::negate_fold(y.fsign);
  FpCmpNets r;
  r.gt = Formula::big_or({Formula::conj_fold(x.fsign, ny), Formula::big_and({x.fsign, y.fsign, mag_gt}),
                          Formula::big_and({nx, ny, mag_lt})});
  r.lt = Formula::big_or({Formula::conj_fold(nx, y.fsign), Formula::big_and({x.fsign, y.fsign, mag_lt}),
                          Formula::big_and({nx, ny, mag_gt})});
  return r;
}

// Piecewise polynomial evaluation: piece flags from breakpoint comparisons,
// per-piece evaluation in the canonical balanced order, one-hot selection.
inline FloatNet piecewise_net(ProgramBuilder& b, const FloatNet& x, const PieceTable& t, const FloatSystem& S,
                              const std::string& hint, std::map<std::string, std::vector<Formula>>* taps) {
  size_t np = t.pieces.size();
  std::vector<Formula> ge(np);  // ge[i] <=> x >= lower_i (i >= 1)
  for (size_t i = 1; i < np; ++i) {
    FloatNet lim = const_float_net(*t.pieces[i].lower);
    FpCmpNets c = fp_cmp_net(b, x, lim, hint + "c" + std::to_string(i));
    ge[i] = Formula::var(b.pred(hint + "ge", Formula::negate_fold(c.lt)));
  }
  std::vector<Formula> flag(np);
  for (size_t i = 0; i < np; ++i) {
    Formula lo = i == 0 ? Formula::top() : ge[i];
    Formula hi = i + 1 < np ? Formula::negate_fold(ge[i + 1]) : Formula::top();
    flag[i] = Formula::var(b.pred(hint + "flag", Formula::conj_fold(lo, hi)));
    if (taps) (*taps)["flag" + std::to_string(i)] = {flag[i]};
  }

  std::vector<FloatNet> vals;
  for (size_t i = 0; i < np; ++i) {
    const Polynomial& poly = t.pieces[i].poly;
    std::vector<FloatNet> terms;
    for (int k = poly.order(); k >= 0; --k) {
      std::vector<FloatNet> factors = {const_float_net(poly.coeffs[static_cast<size_t>(k)])};
      for (int j = 0; j < k; ++j) factors.push_back(x);
      int stage = 0;
      while (factors.size() > 1) {
        std::vector<FloatNet> next;
        for (size_t j = 0; j + 1 < factors.size(); j += 2)
          next.push_back(fp_mul_net(b, factors[j], factors[j + 1], S,
                                    hint + "p" + std::to_string(i) + "t" + std::to_string(k) + "m" +
                                        std::to_string(stage) + "_" + std::to_string(j) + "_"));
        if (factors.size() % 2 == 1) next.push_back(factors.back());
        factors = std::move(next);
        ++stage;
      }
      terms.push_back(factors[0]);
    }
    int stage = 0;
    while (terms.size() > 1) {
      std::vector<FloatNet> next;
      for (size_t j = 0; j + 1 < terms.size(); j += 2)
        next.push_back(fp_add_net(b, terms[j], terms[j + 1], S,
                                  hint + "p" + std::to_string(i) + "s" + std::to_string(stage) + "_" +
                                      std::to_string(j) + "_"));
      if (terms.size() % 2 == 1) next.push_back(terms.back());
      terms = std::move(next);
      ++stage;
    }
    vals.push_back(terms[0]);
  }

  FloatNet out;
  std::vector<std::pair<Formula, const UIntNet*>> fcases, ecases;
  std::vector<std::pair<Formula, Formula>> fscases, escases;
  for (size_t i = 0; i < np; ++i) {
    fcases.emplace_back(flag[i], &vals[i].f);
    ecases.emplace_back(flag[i], &vals[i].e);
    fscases.emplace_back(flag[i], vals[i].fsign);
    escases.emplace_back(flag[i], vals[i].esign);
  }
  out.f = nets::mux(b, fcases, hint + "sf");
  out.e = nets::mux(b, ecases, hint + "se");
  out.fsign = nets::mux_bit(b, fscases, hint + "sfs");
  out.esign = nets::mux_bit(b, escases, hint + "ses");
  return out;
}

inline FloatNet declare_float_input(ProgramBuilder& b, const std::string& prefix, const FloatSystem& S) {
  FloatNet n;
  n.esign = Formula::var(b.input(prefix + "_es"));
  n.fsign = Formula::var(b.input(prefix + "_fs"));
  std::vector<DigitNet> eblocks, fblocks;
  for (int j = 0; j < S.q; ++j) {
    DigitNet dn;
    for (int k = 0; k < S.beta; ++k)
      dn.bit.push_back(Formula::var(b.input(prefix + "_e" + std::to_string(j + 1) + "_" + std::to_string(k))));
    eblocks.push_back(std::move(dn));
  }
  for (int j = 0; j < S.p; ++j) {
    DigitNet dn;
    for (int k = 0; k < S.beta; ++k)
      dn.bit.push_back(Formula::var(b.input(prefix + "_d" + std::to_string(j + 1) + "_" + std::to_string(k))));
    fblocks.push_back(std::move(dn));
  }
  for (int j = S.q - 1; j >= 0; --j) n.e.d.push_back(std::move(eblocks[static_cast<size_t>(j)]));
  for (int j = S.p - 1; j >= 0; --j) n.f.d.push_back(std::move(fblocks[static_cast<size_t>(j)]));
  return n;
}

inline RawNet declare_raw_input(ProgramBuilder& b, const std::string& prefix, const FloatSystem& S, int pp,
                                int qp) {
  RawNet n;
  n.esign = Formula::var(b.input(prefix + "_es"));
  n.fsign = Formula::var(b.input(prefix + "_fs"));
  std::vector<DigitNet> eblocks, fblocks;
  for (int j = 0; j < qp; ++j) {
    DigitNet dn;
    for (int k = 0; k < S.beta; ++k)
      dn.bit.push_back(Formula::var(b.input(prefix + "_e" + std::to_string(j + 1) + "_" + std::to_string(k))));
    eblocks.push_back(std::move(dn));
  }
  for (int k = 0; k < S.beta; ++k)
    n.d0.bit.push_back(Formula::var(b.input(prefix + "_d0_" + std::to_string(k))));
  for (int j = 0; j < pp; ++j) {
    DigitNet dn;
    for (int k = 0; k < S.beta; ++k)
      dn.bit.push_back(Formula::var(b.input(prefix + "_d" + std::to_string(j + 1) + "_" + std::to_string(k))));
    fblocks.push_back(std::move(dn));
  }
  for (int j = qp - 1; j >= 0; --j) n.e.d.push_back(std::move(eblocks[static_cast<size_t>(j)]));
  for (int j = pp - 1; j >= 0; --j) n.f.d.push_back(std::move(fblocks[static_cast<size_t>(j)]));
  return n;
}

inline std::vector<Symbol> float_output_symbols(ProgramBuilder& b, const FloatNet& v, const std::string& hint) {
  std::vector<Symbol> out;
  auto as_symbol = [&](const Formula& f) {
    if (f.op() == Formula::Op::Var) return f.var_symbol();
    return b.pred(hint, f);
  };
  out.push_back(as_symbol(v.esign));
  out.push_back(as_symbol(v.fsign));
  for (size_t i = v.e.width(); i-- > 0;)
    for (const Formula& f : v.e.d[i].bit) out.push_back(as_symbol(f));
  for (size_t i = v.f.width(); i-- > 0;)
    for (const Formula& f : v.f.d[i].bit) out.push_back(as_symbol(f));
  return out;
}

}  // namespace fpdetail

enum class FpOpKind { Normalize, Add, Mul, Piecewise };

// Raw operand widths accepted by the compiled normalizer (and produced by
// the arithmetic intermediates): 2p+1 fraction digits, q+1 exponent digits.
inline int raw_fraction_width(const FloatSystem& s) { return 2 * s.p + 1; }
inline int raw_exponent_width(const FloatSystem& s) { return s.q + 1; }

inline CompiledProgram compile_fp_op(FpOpKind kind, const FloatSystem& S, const PieceTable* pieces = nullptr) {
  if (S.p < 1 || S.q < 1 || S.beta < 2) throw std::invalid_argument("invalid float system");
  ProgramBuilder b;
  CompiledProgram out;
  FloatNet result;
  switch (kind) {
    case FpOpKind::Normalize: {
      RawNet raw = fpdetail::declare_raw_input(b, "x", S, raw_fraction_width(S), raw_exponent_width(S));
      result = fpdetail::normalize_net(b, raw, S, "n");
      break;
    }
    case FpOpKind::Add: {
      FloatNet x = fpdetail::declare_float_input(b, "x", S);
      FloatNet y = fpdetail::declare_float_input(b, "y", S);
      result = fpdetail::fp_add_net(b, x, y, S, "a");
      break;
    }
    case FpOpKind::Mul: {
      FloatNet x = fpdetail::declare_float_input(b, "x", S);
      FloatNet y = fpdetail::declare_float_input(b, "y", S);
      result = fpdetail::fp_mul_net(b, x, y, S, "m");
      break;
    }
    case FpOpKind::Piecewise: {
      if (!pieces) throw std::invalid_argument("piecewise compilation needs a piece table");
      pieces->validate(S);
      FloatNet x = fpdetail::declare_float_input(b, "x", S);
      result = fpdetail::piecewise_net(b, x, *pieces, S, "w", &out.taps);
      break;
    }
  }
  std::vector<Symbol> prints = fpdetail::float_output_symbols(b, result, "outbit");
  out.output_round = b.max_depth();
  Symbol att = b.ready(static_cast<int>(std::max<long long>(1, out.output_round)));
  out.program = b.finish(prints, AttentionSpec::preds({att}));
  return out;
}

}  // namespace bnlkit
