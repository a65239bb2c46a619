#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bnlkit/program.hpp"
#include "bnlkit/text.hpp"

namespace bnlkit {

inline Symbol fresh_symbol(const std::set<Symbol>& taken, const std::string& base) {
  Symbol s = Symbol::intern(base);
  int k = 0;
  while (taken.count(s)) s = Symbol::intern(base + std::to_string(k++));
  return s;
}

// Substitution-calculus program: every variable has one terminal clause
// (a propositional formula over the p_i) and one iteration clause (which may
// also mention variables). Propositions keep their valuation at every round.
class ScProgram {
 public:
  void add_variable(Symbol name, Formula terminal_body, Formula rule) {
    if (index(name).has_value()) throw std::invalid_argument("duplicate variable " + name.str());
    vars_.push_back(name);
    terminals_.push_back(std::move(terminal_body));
    rules_.push_back(std::move(rule));
  }

  void set_print(std::vector<Symbol> ps) { print_ = std::move(ps); }
  void set_attention(AttentionSpec a) { attention_ = std::move(a); }

  void finalize() {
    if (vars_.empty()) throw std::invalid_argument("program has no clauses");
    std::set<Symbol> props;
    auto classify = [&](const Formula& f, bool allow_vars, const char* where, Symbol head) {
      f.for_each_var([&](Symbol s) {
        if (index(s).has_value()) {
          if (!allow_vars)
            throw std::invalid_argument(std::string(where) + " of " + head.str() + " mentions variable " + s.str());
        } else {
          if (prop_index_of(s) < 0)
            throw std::invalid_argument("identifier " + s.str() + " is neither a variable nor a proposition p<k>");
          props.insert(s);
        }
      });
    };
    for (size_t i = 0; i < vars_.size(); ++i) {
      classify(terminals_[i], false, "terminal clause", vars_[i]);
      classify(rules_[i], true, "iteration clause", vars_[i]);
    }
    props_.assign(props.begin(), props.end());
    std::sort(props_.begin(), props_.end(),
              [this](Symbol a, Symbol b) { return prop_index_of(a) < prop_index_of(b); });
    for (Symbol s : print_)
      if (!index(s).has_value()) throw std::invalid_argument("unknown print predicate " + s.str());
    if (!attention_.external)
      for (Symbol s : attention_.predicates)
        if (!index(s).has_value()) throw std::invalid_argument("unknown attention predicate " + s.str());
  }

  const std::vector<Symbol>& variables() const { return vars_; }
  const std::vector<Symbol>& propositions() const { return props_; }
  const Formula& terminal(size_t i) const { return terminals_[i]; }
  const Formula& rule(size_t i) const { return rules_[i]; }
  const std::vector<Symbol>& print() const { return print_; }
  const AttentionSpec& attention() const { return attention_; }

  std::optional<size_t> index(Symbol s) const {
    for (size_t i = 0; i < vars_.size(); ++i)
      if (vars_[i] == s) return i;
    return std::nullopt;
  }

  // Propositions must be named p0, p1, ...; returns the index or -1.
  static int prop_index_of(Symbol s) {
    const std::string& n = s.str();
    if (n.size() < 2 || n[0] != 'p') return -1;
    for (size_t i = 1; i < n.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(n[i]))) return -1;
    if (n.size() > 2 && n[1] == '0') return -1;  // no leading zeros
    return std::stoi(n.substr(1));
  }

  MeasureResult measure() const {
    MeasureResult m;
    for (size_t i = 0; i < vars_.size(); ++i) {
      m.size += terminals_[i].tokens() + 1;  // terminal head + body
      m.size += rules_[i].tokens();
      m.depth = std::max(m.depth, rules_[i].depth());
    }
    return m;
  }

 private:
  std::vector<Symbol> vars_;
  std::vector<Formula> terminals_;
  std::vector<Formula> rules_;
  std::vector<Symbol> props_;
  std::vector<Symbol> print_;
  AttentionSpec attention_;
};

namespace detail {

// Internal synchronous evaluator for SC: variables followed by propositions
// (held fixed by identity rules).
struct ScRunner {
  explicit ScRunner(const ScProgram& sc) : sc_(&sc) {
    combined_ = BnlProgram();
    for (size_t i = 0; i < sc.variables().size(); ++i) {
      combined_.declare(sc.variables()[i]);
      combined_.set_terminal(sc.variables()[i], false);  // placeholder, round 0 set manually
      combined_.set_rule(sc.variables()[i], sc.rule(i));
    }
    for (Symbol pr : sc.propositions()) {
      combined_.declare(pr);
      combined_.set_terminal(pr, false);
      combined_.set_rule(pr, Formula::var(pr));
    }
    combined_.finalize();
    plan_.emplace(combined_);
  }

  Configuration initial(const std::vector<uint8_t>& valuation) const {
    const auto& props = sc_->propositions();
    if (valuation.size() != props.size()) throw std::invalid_argument("valuation length mismatch");
    auto lookup = [&](Symbol s) -> bool {
      for (size_t i = 0; i < props.size(); ++i)
        if (props[i] == s) return valuation[i] != 0;
      throw std::logic_error("terminal clause mentions a variable");
    };
    Configuration c(sc_->variables().size() + props.size(), 0);
    for (size_t i = 0; i < sc_->variables().size(); ++i) c[i] = sc_->terminal(i).eval_with(lookup) ? 1 : 0;
    for (size_t i = 0; i < props.size(); ++i) c[sc_->variables().size() + i] = valuation[i] ? 1 : 0;
    return c;
  }

  const ScProgram* sc_;
  BnlProgram combined_;
  std::optional<EvalPlan> plan_;
};

}  // namespace detail

// Runs an SC program; configurations contain variable values only.
inline RunResult run_sc(const ScProgram& sc, const std::vector<uint8_t>& valuation, long long horizon) {
  detail::ScRunner runner(sc);
  RunResult r;
  Configuration c = runner.initial(valuation);
  size_t nv = sc.variables().size();
  auto var_part = [&](const Configuration& full) { return Configuration(full.begin(), full.begin() + static_cast<long>(nv)); };
  auto fires = [&](const Configuration& full, long long t) {
    const AttentionSpec& a = sc.attention();
    if (a.external) return a.map.contains(t);
    for (Symbol s : a.predicates)
      if (full[*sc.index(s)]) return true;
    return false;
  };
  for (long long t = 0;; ++t) {
    Configuration vars = var_part(c);
    r.configs.push_back(vars);
    if (fires(c, t)) {
      std::string s;
      for (Symbol ps : sc.print()) s.push_back(vars[*sc.index(ps)] ? '1' : '0');
      r.output.emissions.emplace_back(t, std::move(s));
    }
    if (t == horizon) break;
    Configuration next;
    runner.plan_->step(c, next);
    c = std::move(next);
  }
  return r;
}

inline DynamicsReport analyze_sc_dynamics(const ScProgram& sc, const std::vector<uint8_t>& valuation) {
  detail::ScRunner runner(sc);
  std::map<Configuration, long long> seen;
  Configuration c = runner.initial(valuation);
  long long t = 0;
  while (true) {
    auto [it, fresh] = seen.emplace(c, t);
    if (!fresh) {
      DynamicsReport r;
      r.transient = it->second;
      r.cycle_length = t - it->second;
      return r;
    }
    Configuration next;
    runner.plan_->step(c, next);
    c = std::move(next);
    ++t;
  }
}

// SC -> BNL: one extra round computes the terminal clauses; proposition
// predicates act as inputs and a first-round flag selects between the
// terminal and iteration behaviour. Output rounds shift by exactly +1.
inline BnlProgram sc_to_bnl(const ScProgram& sc) {
  std::set<Symbol> taken(sc.variables().begin(), sc.variables().end());
  for (Symbol pr : sc.propositions()) taken.insert(pr);
  Symbol flag = fresh_symbol(taken, "Go");

  std::unordered_map<Symbol, Formula, SymbolHash> prop_subst;
  for (Symbol pr : sc.propositions()) prop_subst.emplace(pr, Formula::var(pr));  // same names, now predicates

  BnlProgram out;
  for (size_t i = 0; i < sc.variables().size(); ++i) {
    Symbol v = sc.variables()[i];
    out.declare(v);
    out.set_terminal(v, false);
    Formula psi = sc.rule(i).substitute(prop_subst);
    Formula phi = sc.terminal(i).substitute(prop_subst);
    out.set_rule(v, apply_flag(psi, Formula::var(flag), phi));
  }
  for (Symbol pr : sc.propositions()) {
    out.declare(pr);
    out.set_rule(pr, Formula::var(pr));  // input predicate
  }
  out.declare(flag);
  out.set_terminal(flag, false);
  out.set_rule(flag, Formula::top());

  out.set_print(sc.print());
  if (sc.attention().external)
    out.set_attention(AttentionSpec::rounds(RoundMap::affine(1, 1, sc.attention().map)));
  else
    out.set_attention(sc.attention());
  out.finalize();
  return out;
}

// BNL -> SC: globally equivalent; input predicates receive terminal clauses
// binding them to propositions in variable order.
inline ScProgram bnl_to_sc(const BnlProgram& p) {
  ScProgram out;
  size_t next_prop = 0;
  for (size_t i = 0; i < p.var_count(); ++i) {
    Symbol v = p.variables()[i];
    Formula term;
    if (p.terminal(static_cast<int>(i)).has_value()) {
      term = *p.terminal(static_cast<int>(i)) ? Formula::top() : Formula::bottom();
    } else {
      Symbol prop = Symbol::intern("p" + std::to_string(next_prop++));
      if (p.has_var(prop))
        throw std::invalid_argument("cannot translate: variable " + prop.str() + " shadows a proposition name");
      term = Formula::var(prop);
    }
    out.add_variable(v, term, p.rule(static_cast<int>(i)));
  }
  out.set_print(p.print());
  out.set_attention(p.attention());
  out.finalize();
  return out;
}

// ---- text form (.sc) ----

inline ScProgram parse_sc_program(const std::string& text) {
  // Reuse the clause scanner by accepting arbitrary terminal bodies.
  detail::Lexer lex(text);
  ScProgram p;
  struct Pending {
    Symbol head;
    std::optional<Formula> term, rule;
    size_t order;
  };
  std::vector<Pending> pend;
  auto find = [&](Symbol s) -> Pending& {
    for (auto& q : pend)
      if (q.head == s) return q;
    pend.push_back({s, std::nullopt, std::nullopt, pend.size()});
    return pend.back();
  };
  std::vector<Symbol> print;
  std::vector<Symbol> att;
  bool have_rounds = false, have_att = false;
  RoundMap rounds;
  while (true) {
    detail::Token t = lex.next();
    if (t.kind == detail::Token::Kind::End) break;
    if (t.kind == detail::Token::Kind::Directive) {
      if (t.text == "print" || t.text == "attention") {
        std::vector<Symbol> names = detail::parse_name_list(lex.rest_of_line(), t.text);
        if (t.text == "print")
          print = std::move(names);
        else {
          att = std::move(names);
          have_att = true;
        }
      } else if (t.text == "rounds") {
        std::string payload = detail::trim(lex.rest_of_line());
        if (!payload.empty() && payload.back() == '.') payload.pop_back();
        rounds = detail::parse_round_map(payload);
        have_rounds = true;
      } else {
        throw ParseError("unknown directive #" + t.text);
      }
      continue;
    }
    if (t.kind != detail::Token::Kind::Name) throw ParseError("expected a clause head");
    Symbol head = Symbol::intern(t.text);
    detail::Token u = lex.next();
    bool terminal = false;
    if (u.kind == detail::Token::Kind::LParen) {
      detail::Token z = lex.next();
      if (z.kind != detail::Token::Kind::Number || z.text != "0") throw ParseError("expected (0)");
      if (lex.next().kind != detail::Token::Kind::RParen) throw ParseError("expected ')'");
      u = lex.next();
      terminal = true;
    }
    if (u.kind != detail::Token::Kind::ColonMinus) throw ParseError("expected ':-'");
    std::vector<detail::Token> body;
    while (true) {
      detail::Token b = lex.next();
      if (b.kind == detail::Token::Kind::Dot) break;
      if (b.kind == detail::Token::Kind::End) throw ParseError("clause not terminated with '.'");
      body.push_back(b);
    }
    Formula f = detail::BodyParser(std::move(body)).parse();
    Pending& q = find(head);
    if (terminal) {
      if (q.term.has_value()) throw ParseError("duplicate terminal clause for " + head.str());
      q.term = f;
    } else {
      if (q.rule.has_value()) throw ParseError("duplicate iteration clause for " + head.str());
      q.rule = f;
    }
  }
  std::sort(pend.begin(), pend.end(), [](const Pending& a, const Pending& b) { return a.order < b.order; });
  for (auto& q : pend) {
    if (!q.term.has_value()) throw ParseError("variable " + q.head.str() + " has no terminal clause");
    if (!q.rule.has_value()) throw ParseError("variable " + q.head.str() + " has no iteration clause");
    p.add_variable(q.head, *q.term, *q.rule);
  }
  p.set_print(print);
  if (have_rounds) {
    if (have_att) throw ParseError("program declares both #attention and #rounds");
    p.set_attention(AttentionSpec::rounds(rounds));
  } else {
    p.set_attention(AttentionSpec::preds(att));
  }
  p.finalize();
  return p;
}

inline std::string pretty_print_sc(const ScProgram& p) {
  std::ostringstream os;
  for (size_t i = 0; i < p.variables().size(); ++i) {
    os << p.variables()[i].str() << "(0) :- ";
    detail::print_formula(os, p.terminal(i), 0);
    os << ".\n" << p.variables()[i].str() << " :- ";
    detail::print_formula(os, p.rule(i), 0);
    os << ".\n";
  }
  if (!p.print().empty()) {
    os << "#print ";
    for (size_t i = 0; i < p.print().size(); ++i) os << (i ? "," : "") << p.print()[i].str();
    os << "\n";
  }
  if (p.attention().external)
    os << "#rounds " << detail::format_round_map(p.attention().map) << "\n";
  else if (!p.attention().predicates.empty()) {
    os << "#attention ";
    for (size_t i = 0; i < p.attention().predicates.size(); ++i)
      os << (i ? "," : "") << p.attention().predicates[i].str();
    os << "\n";
  }
  return os.str();
}

}  // namespace bnlkit
