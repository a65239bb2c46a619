#pragma once

#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bnlkit/circuit.hpp"
#include "bnlkit/floatcodec.hpp"
#include "bnlkit/intops.hpp"
#include "bnlkit/network.hpp"
#include "bnlkit/program.hpp"
#include "bnlkit/sc.hpp"

namespace bnlkit {

enum class RunnableKind { Bnl, Sc, Circ, Nn };

// Any of the four executable objects, run over bit-string inputs. Neural
// networks are bridged through the one-hot float codec on both ends.
class Runnable {
 public:
  static Runnable of(BnlProgram p) {
    Runnable r;
    r.kind_ = RunnableKind::Bnl;
    r.bnl_ = std::make_shared<BnlProgram>(std::move(p));
    r.plan_ = std::make_shared<EvalPlan>(*r.bnl_);
    return r;
  }
  static Runnable of(ScProgram p) {
    Runnable r;
    r.kind_ = RunnableKind::Sc;
    r.sc_ = std::make_shared<ScProgram>(std::move(p));
    return r;
  }
  static Runnable of(SelfFeedingCircuit c) {
    Runnable r;
    r.kind_ = RunnableKind::Circ;
    r.circ_ = std::make_shared<SelfFeedingCircuit>(std::move(c));
    return r;
  }
  static Runnable of(NeuralNetwork n) {
    Runnable r;
    r.kind_ = RunnableKind::Nn;
    r.nn_ = std::make_shared<NeuralNetwork>(std::move(n));
    return r;
  }

  RunnableKind kind() const { return kind_; }
  const BnlProgram& bnl() const { return *bnl_; }
  const ScProgram& sc() const { return *sc_; }
  const SelfFeedingCircuit& circ() const { return *circ_; }
  const NeuralNetwork& nn() const { return *nn_; }

  // binary_floats: a network consumes and emits bare bits as the floats 0/1
  size_t input_bits(bool binary_floats) const {
    switch (kind_) {
      case RunnableKind::Bnl: return bnl_->input_indices().size();
      case RunnableKind::Sc: return sc_->propositions().size();
      case RunnableKind::Circ: return circ_->input_positions.size();
      case RunnableKind::Nn: {
        if (binary_floats) return nn_->inputs.size();
        FloatCodec c = FloatCodec::normal(nn_->system);
        return nn_->inputs.size() * c.encoded_length();
      }
    }
    return 0;
  }

  size_t config_width() const {
    switch (kind_) {
      case RunnableKind::Bnl: return bnl_->var_count();
      case RunnableKind::Sc: return sc_->variables().size();
      case RunnableKind::Circ: return circ_->width();
      case RunnableKind::Nn: throw std::invalid_argument("global mode is not defined for networks");
    }
    return 0;
  }

  // Runs to the horizon; emissions are bit strings. Networks either consume
  // encoded floats, or (binary_floats) bare bits interpreted as 0/1 values,
  // emitting '?' for any non-binary output so comparisons fail loudly.
  RunResult run_bits(const std::vector<uint8_t>& input, long long horizon, bool binary_floats = false) const {
    switch (kind_) {
      case RunnableKind::Bnl: return run(*bnl_, input, horizon, plan_.get());
      case RunnableKind::Sc: return run_sc(*sc_, input, horizon);
      case RunnableKind::Circ: return run_self_feeding(*circ_, input, horizon);
      case RunnableKind::Nn: {
        FloatCodec c = FloatCodec::normal(nn_->system);
        std::vector<FloatValue> floats;
        if (binary_floats) {
          if (input.size() != nn_->inputs.size()) throw std::invalid_argument("input length mismatch");
          for (uint8_t b : input)
            floats.push_back(b ? FloatValue::one(nn_->system) : FloatValue::zero(nn_->system));
        } else {
          size_t enc = c.encoded_length();
          if (input.size() != nn_->inputs.size() * enc) throw std::invalid_argument("input length mismatch");
          for (size_t i = 0; i < nn_->inputs.size(); ++i)
            floats.push_back(c.decode(std::vector<uint8_t>(input.begin() + static_cast<long>(i * enc),
                                                           input.begin() + static_cast<long>((i + 1) * enc))));
        }
        FloatRunResult fr = simulate(*nn_, floats, horizon);
        FloatValue one = FloatValue::one(nn_->system), zero = FloatValue::zero(nn_->system);
        RunResult out;
        for (auto& [t, vals] : fr.emissions) {
          std::string s;
          for (const FloatValue& v : vals) {
            if (binary_floats)
              s.push_back(v == one ? '1' : (v == zero ? '0' : '?'));
            else
              for (uint8_t bit : c.encode(v)) s.push_back(bit ? '1' : '0');
          }
          out.output.emissions.emplace_back(t, std::move(s));
        }
        return out;
      }
    }
    throw std::logic_error("bad runnable");
  }

 private:
  RunnableKind kind_ = RunnableKind::Bnl;
  std::shared_ptr<BnlProgram> bnl_;
  std::shared_ptr<EvalPlan> plan_;
  std::shared_ptr<ScProgram> sc_;
  std::shared_ptr<SelfFeedingCircuit> circ_;
  std::shared_ptr<NeuralNetwork> nn_;
};

// Output alphabet bridge: raw bits, one-hot integers, or one-hot floats.
struct VerifyCodec {
  enum class Kind { Identity, Int, Float };
  Kind kind = Kind::Identity;
  int p = 0, q = 0, beta = 0;

  static VerifyCodec identity() { return {}; }
  static VerifyCodec ints(int p_, int beta_) { return {Kind::Int, p_, 0, beta_}; }
  static VerifyCodec floats(int p_, int q_, int beta_) { return {Kind::Float, p_, q_, beta_}; }

  size_t unit_bits() const {
    switch (kind) {
      case Kind::Identity: return 1;
      case Kind::Int: return IntCodec{p, beta}.encoded_length();
      case Kind::Float: return FloatCodec::normal({p, q, beta}).encoded_length();
    }
    return 1;
  }

  // Decodes a bit string into a comparable text value.
  std::string decode_string(const std::string& bits) const {
    if (kind == Kind::Identity) return bits;
    size_t unit = unit_bits();
    if (bits.size() % unit != 0) return "<arity error: " + bits + ">";
    std::string out;
    for (size_t i = 0; i < bits.size(); i += unit) {
      std::vector<uint8_t> chunk;
      for (size_t k = 0; k < unit; ++k) chunk.push_back(bits[i + k] == '1');
      if (i) out += ",";
      try {
        if (kind == Kind::Int) {
          IntegerValue v = IntCodec{p, beta}.decode(chunk);
          out += std::to_string(v.value(beta));
        } else {
          out += FloatCodec::normal({p, q, beta}).decode(chunk).str();
        }
      } catch (const std::exception& e) {
        out += std::string("<decode error: ") + e.what() + ">";
      }
    }
    return out;
  }

  // One random valid encoded value.
  std::vector<uint8_t> random_unit(std::mt19937& rng) const {
    switch (kind) {
      case Kind::Identity: {
        std::uniform_int_distribution<int> bit(0, 1);
        return {static_cast<uint8_t>(bit(rng))};
      }
      case Kind::Int: {
        IntCodec c{p, beta};
        long long lim = 1;
        for (int i = 0; i < p; ++i) lim *= beta;
        std::uniform_int_distribution<long long> v(-(lim - 1), lim - 1);
        return c.encode(c.from_value(v(rng)));
      }
      case Kind::Float: {
        FloatSystem s{p, q, beta};
        // uniform over normalized values
        std::uniform_int_distribution<int> digit(0, beta - 1), lead(1, beta - 1), coin(0, 1);
        std::uniform_int_distribution<long long> expo(-s.max_exponent(), s.max_exponent());
        std::uniform_int_distribution<int> zero(0, 24);
        if (zero(rng) == 0) return FloatCodec::normal(s).encode(FloatValue::zero(s));
        std::vector<uint8_t> digits;
        digits.push_back(static_cast<uint8_t>(lead(rng)));
        for (int i = 1; i < p; ++i) digits.push_back(static_cast<uint8_t>(digit(rng)));
        return FloatCodec::normal(s).encode(FloatValue::make(s, coin(rng) == 1, digits, expo(rng)));
      }
    }
    return {};
  }

  // Every valid encoded value, for exhaustive sweeps.
  std::vector<std::vector<uint8_t>> all_units() const {
    std::vector<std::vector<uint8_t>> out;
    switch (kind) {
      case Kind::Identity:
        out.push_back({0});
        out.push_back({1});
        break;
      case Kind::Int: {
        IntCodec c{p, beta};
        long long lim = 1;
        for (int i = 0; i < p; ++i) lim *= beta;
        for (long long v = -(lim - 1); v <= lim - 1; ++v) out.push_back(c.encode(c.from_value(v)));
        break;
      }
      case Kind::Float: {
        FloatSystem s{p, q, beta};
        for (const FloatValue& v : enumerate_system(s)) out.push_back(FloatCodec::normal(s).encode(v));
        break;
      }
    }
    return out;
  }
};

struct InputSpec {
  bool exhaustive = true;
  long long count = 0;  // random inputs when !exhaustive
  uint64_t seed = 1;
};

struct EquivalenceReport {
  bool equivalent = true;
  struct Counterexample {
    std::vector<uint8_t> input;
    size_t emission_index = 0;
    std::string a_output, b_output;
  };
  std::optional<Counterexample> counterexample;
  long long inputs_tested = 0;
  long long outputs_compared = 0;
  long long horizon = 0;
  long long delay_a_over_b = 1;
  long long delay_b_over_a = 1;
  uint64_t seed = 0;
  std::vector<std::string> warnings;

  std::string text() const {
    std::ostringstream os;
    os << "verdict: " << (equivalent ? "equivalent-on-suite" : "counterexample") << "\n";
    os << "inputs tested: " << inputs_tested << "\n";
    os << "outputs compared: " << outputs_compared << "\n";
    os << "horizon: " << horizon << "\n";
    os << "measured delay (a over b): " << delay_a_over_b << "\n";
    os << "measured delay (b over a): " << delay_b_over_a << "\n";
    os << "seed: " << seed << "\n";
    if (counterexample.has_value()) {
      os << "counterexample input: ";
      for (uint8_t b : counterexample->input) os << (b ? '1' : '0');
      os << "\n  first divergent output index: " << counterexample->emission_index << "\n  a: "
         << counterexample->a_output << "\n  b: " << counterexample->b_output << "\n";
    }
    for (const std::string& w : warnings) os << "warning: " << w << "\n";
    return os.str();
  }
};

namespace detail {

inline void note_delay(const OutputSequence& a, const OutputSequence& b, size_t upto, long long& dab,
                       long long& dba) {
  size_t n = std::min({upto, a.emissions.size(), b.emissions.size()});
  for (size_t i = 0; i < n; ++i) {
    long long x = a.emissions[i].first, y = b.emissions[i].first;
    if (y > 0) dab = std::max(dab, (x + y - 1) / y);
    if (x > 0) dba = std::max(dba, (y + x - 1) / x);
  }
}

}  // namespace detail

// Runs both sides on the same inputs, decodes the emitted strings through
// the codec and compares the first m emissions per input (also the full
// configuration sequences and output rounds in global mode).
inline EquivalenceReport check_equivalence(const Runnable& a, const Runnable& b, const VerifyCodec& codec,
                                           const InputSpec& inputs, size_t m, long long horizon,
                                           bool global = false) {
  EquivalenceReport rep;
  rep.horizon = horizon;
  rep.seed = inputs.seed;

  const bool binary_floats = codec.kind == VerifyCodec::Kind::Identity;
  size_t bits = a.input_bits(binary_floats);
  if (bits != b.input_bits(binary_floats))
    throw std::invalid_argument("input arities differ: " + std::to_string(bits) + " vs " +
                                std::to_string(b.input_bits(binary_floats)));
  size_t unit = codec.unit_bits();
  if (bits % unit != 0)
    throw std::invalid_argument("input bit count " + std::to_string(bits) + " is not a multiple of the codec unit");
  size_t units = bits / unit;

  if (global && (a.kind() == RunnableKind::Nn || b.kind() == RunnableKind::Nn))
    throw std::invalid_argument("global mode is not defined for networks");
  if (global && a.config_width() != b.config_width())
    throw std::invalid_argument("global mode needs equal configuration widths");

  std::vector<std::vector<uint8_t>> cases;
  if (inputs.exhaustive) {
    std::vector<std::vector<uint8_t>> domain = codec.all_units();
    double total = 1;
    for (size_t i = 0; i < units; ++i) total *= static_cast<double>(domain.size());
    if (total > (1 << 22)) throw std::invalid_argument("exhaustive input space too large; use random sampling");
    std::vector<size_t> idx(units, 0);
    while (true) {
      std::vector<uint8_t> in;
      for (size_t i = 0; i < units; ++i) in.insert(in.end(), domain[idx[i]].begin(), domain[idx[i]].end());
      cases.push_back(std::move(in));
      size_t k = 0;
      while (k < units && ++idx[k] == domain.size()) idx[k++] = 0;
      if (k == units) break;
    }
  } else {
    std::mt19937 rng(static_cast<unsigned>(inputs.seed));
    for (long long i = 0; i < inputs.count; ++i) {
      std::vector<uint8_t> in;
      for (size_t u = 0; u < units; ++u) {
        std::vector<uint8_t> one = codec.random_unit(rng);
        in.insert(in.end(), one.begin(), one.end());
      }
      cases.push_back(std::move(in));
    }
  }

  bool warned_horizon = false;
  for (const std::vector<uint8_t>& in : cases) {
    RunResult ra = a.run_bits(in, horizon, binary_floats);
    RunResult rb = b.run_bits(in, horizon, binary_floats);
    ++rep.inputs_tested;
    size_t n = std::min({m, ra.output.emissions.size(), rb.output.emissions.size()});
    if ((ra.output.emissions.size() < m || rb.output.emissions.size() < m) && !warned_horizon &&
        ra.output.emissions.size() != rb.output.emissions.size()) {
      rep.warnings.push_back("horizon " + std::to_string(horizon) + " exhausted before " + std::to_string(m) +
                             " outputs on one side (a: " + std::to_string(ra.output.emissions.size()) +
                             ", b: " + std::to_string(rb.output.emissions.size()) + ")");
      warned_horizon = true;
    }
    for (size_t i = 0; i < n; ++i) {
      std::string da = codec.decode_string(ra.output.emissions[i].second);
      std::string db = codec.decode_string(rb.output.emissions[i].second);
      ++rep.outputs_compared;
      if (da != db) {
        rep.equivalent = false;
        rep.counterexample = {in, i, da, db};
        return rep;
      }
    }
    if (global) {
      size_t rounds = std::min(ra.configs.size(), rb.configs.size());
      for (size_t t = 0; t < rounds; ++t) {
        if (ra.configs[t] != rb.configs[t]) {
          rep.equivalent = false;
          std::string ca, cb;
          for (uint8_t x : ra.configs[t]) ca.push_back(x ? '1' : '0');
          for (uint8_t x : rb.configs[t]) cb.push_back(x ? '1' : '0');
          rep.counterexample = {in, t, "config " + ca, "config " + cb};
          return rep;
        }
      }
      size_t ne = std::min(ra.output.emissions.size(), rb.output.emissions.size());
      for (size_t i = 0; i < ne; ++i) {
        if (ra.output.emissions[i].first != rb.output.emissions[i].first) {
          rep.equivalent = false;
          rep.counterexample = {in, i, "round " + std::to_string(ra.output.emissions[i].first),
                                "round " + std::to_string(rb.output.emissions[i].first)};
          return rep;
        }
      }
    }
    detail::note_delay(ra.output, rb.output, m, rep.delay_a_over_b, rep.delay_b_over_a);
  }
  return rep;
}

}  // namespace bnlkit
