#pragma once

#include <cctype>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bnlkit/program.hpp"

namespace bnlkit {

struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {

struct Token {
  enum class Kind { Name, Number, TopLit, BotLit, Not, And, Or, LParen, RParen, Dot, ColonMinus, Comma, Directive, End };
  Kind kind;
  std::string text;
  int line;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) {}

  Token next() {
    skip_ws();
    if (pos_ >= src_.size()) return {Token::Kind::End, "", line_};
    char c = src_[pos_];
    if (c == '#') {
      size_t start = ++pos_;
      while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
      return {Token::Kind::Directive, src_.substr(start, pos_ - start), line_};
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
      std::string name = src_.substr(start, pos_ - start);
      if (name == "T") return {Token::Kind::TopLit, name, line_};
      if (name == "F") return {Token::Kind::BotLit, name, line_};
      return {Token::Kind::Name, name, line_};
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t start = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      return {Token::Kind::Number, src_.substr(start, pos_ - start), line_};
    }
    ++pos_;
    switch (c) {
      case '!': return {Token::Kind::Not, "!", line_};
      case '&': return {Token::Kind::And, "&", line_};
      case '|': return {Token::Kind::Or, "|", line_};
      case '(': return {Token::Kind::LParen, "(", line_};
      case ')': return {Token::Kind::RParen, ")", line_};
      case '.': return {Token::Kind::Dot, ".", line_};
      case ',': return {Token::Kind::Comma, ",", line_};
      case ':':
        if (pos_ < src_.size() && src_[pos_] == '-') {
          ++pos_;
          return {Token::Kind::ColonMinus, ":-", line_};
        }
        throw ParseError("line " + std::to_string(line_) + ": stray ':'");
      default:
        throw ParseError("line " + std::to_string(line_) + ": unexpected character '" + std::string(1, c) + "'");
    }
  }

  // Reads the raw remainder of the current line (for #rounds payloads).
  std::string rest_of_line() {
    size_t start = pos_;
    while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
    return src_.substr(start, pos_ - start);
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '\n') {
        ++line_;
        ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& src_;
  size_t pos_ = 0;
  int line_ = 1;
};

class BodyParser {
 public:
  BodyParser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Formula parse() {
    Formula f = parse_or();
    if (pos_ != toks_.size()) throw ParseError("trailing tokens in formula");
    return f;
  }

 private:
  Formula parse_or() {
    Formula f = parse_and();
    while (peek() == Token::Kind::Or) {
      ++pos_;
      f = Formula::disj(f, parse_and());
    }
    return f;
  }
  Formula parse_and() {
    Formula f = parse_unary();
    while (peek() == Token::Kind::And) {
      ++pos_;
      f = Formula::conj(f, parse_unary());
    }
    return f;
  }
  Formula parse_unary() {
    if (peek() == Token::Kind::Not) {
      ++pos_;
      return Formula::negate(parse_unary());
    }
    return parse_atom();
  }
  Formula parse_atom() {
    switch (peek()) {
      case Token::Kind::TopLit: ++pos_; return Formula::top();
      case Token::Kind::BotLit: ++pos_; return Formula::bottom();
      case Token::Kind::Name: return Formula::var(toks_[pos_++].text);
      case Token::Kind::LParen: {
        ++pos_;
        Formula f = parse_or();
        if (peek() != Token::Kind::RParen) throw ParseError("expected ')'");
        ++pos_;
        return f;
      }
      default: throw ParseError("expected a formula atom");
    }
  }
  Token::Kind peek() const { return pos_ < toks_.size() ? toks_[pos_].kind : Token::Kind::End; }

  std::vector<Token> toks_;
  size_t pos_ = 0;
};

inline std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline std::vector<Symbol> parse_name_list(const std::string& line, const std::string& directive) {
  std::string body = trim(line);
  if (!body.empty() && body.back() == '.') body = trim(body.substr(0, body.size() - 1));
  std::vector<Symbol> names;
  if (body.empty()) return names;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::string name = trim(item);
    if (name.empty()) throw ParseError("malformed #" + directive + " directive");
    for (char c : name)
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_')
        throw ParseError("malformed name '" + name + "' in #" + directive);
    names.push_back(Symbol::intern(name));
  }
  return names;
}

inline RoundMap parse_round_map(const std::string& spec) {
  std::string s = trim(spec);
  auto colon = s.find(':');
  if (colon == std::string::npos) throw ParseError("malformed #rounds spec: " + s);
  std::string kind = trim(s.substr(0, colon));
  std::string body = trim(s.substr(colon + 1));
  auto parse_ll = [](const std::string& t) {
    size_t used = 0;
    long long v = std::stoll(t, &used);
    if (used != t.size()) throw ParseError("malformed number in #rounds: " + t);
    return v;
  };
  if (kind == "explicit") {
    std::vector<long long> rs;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) rs.push_back(parse_ll(trim(item)));
    return RoundMap::explicit_rounds(std::move(rs));
  }
  if (kind == "arith") {
    auto comma = body.find(',');
    if (comma == std::string::npos) throw ParseError("arith round map needs start,step");
    return RoundMap::arithmetic(parse_ll(trim(body.substr(0, comma))), parse_ll(trim(body.substr(comma + 1))));
  }
  if (kind == "affine") {
    auto lparen = body.find('(');
    if (lparen == std::string::npos || body.back() != ')') throw ParseError("affine round map needs scale,offset(inner)");
    std::string head = trim(body.substr(0, lparen));
    std::string inner = body.substr(lparen + 1, body.size() - lparen - 2);
    auto comma = head.find(',');
    if (comma == std::string::npos) throw ParseError("affine round map needs scale,offset(inner)");
    return RoundMap::affine(parse_ll(trim(head.substr(0, comma))), parse_ll(trim(head.substr(comma + 1))),
                            parse_round_map(inner));
  }
  throw ParseError("unknown round map kind: " + kind);
}

inline std::string format_round_map(const RoundMap& m) {
  switch (m.kind()) {
    case RoundMap::Kind::Explicit: {
      std::string s = "explicit:";
      for (size_t i = 0; i < m.rounds().size(); ++i) {
        if (i) s += ",";
        s += std::to_string(m.rounds()[i]);
      }
      return s;
    }
    case RoundMap::Kind::Arithmetic:
      return "arith:" + std::to_string(m.start()) + "," + std::to_string(m.step());
    case RoundMap::Kind::Affine:
      return "affine:" + std::to_string(m.scale()) + "," + std::to_string(m.offset()) + "(" +
             format_round_map(m.inner()) + ")";
  }
  return "";
}

// Formula printer with minimal parentheses; re-sugars !T to F and
// !(!a & !b) to (a | b).
inline void print_formula(std::ostream& os, const Formula& f, int parent_prec) {
  if (f.is_top()) {
    os << "T";
    return;
  }
  if (f.is_bottom()) {
    os << "F";
    return;
  }
  // precedence: | = 1, & = 2, ! = 3
  if (f.op() == Formula::Op::Not) {
    Formula inner = f.left();
    if (inner.op() == Formula::Op::And && inner.left().op() == Formula::Op::Not &&
        inner.right().op() == Formula::Op::Not && !inner.left().left().is_top() &&
        !inner.right().left().is_top()) {
      bool paren = parent_prec > 1;
      if (paren) os << "(";
      print_formula(os, inner.left().left(), 1);
      os << " | ";
      print_formula(os, inner.right().left(), 2);
      if (paren) os << ")";
      return;
    }
    os << "!";
    print_formula(os, inner, 3);
    return;
  }
  if (f.op() == Formula::Op::Var) {
    os << f.var_symbol().str();
    return;
  }
  bool paren = parent_prec > 2;
  if (paren) os << "(";
  print_formula(os, f.left(), 2);
  os << " & ";
  print_formula(os, f.right(), 3);
  if (paren) os << ")";
}

}  // namespace detail

inline BnlProgram parse_program(const std::string& text) {
  detail::Lexer lex(text);
  BnlProgram p;
  std::vector<Symbol> print;
  bool have_print = false, have_att_preds = false, have_rounds = false;
  std::vector<Symbol> att;
  RoundMap rounds;
  bool any_clause = false;

  while (true) {
    detail::Token t = lex.next();
    if (t.kind == detail::Token::Kind::End) break;
    if (t.kind == detail::Token::Kind::Directive) {
      if (t.text == "print" || t.text == "attention") {
        std::vector<Symbol> names = detail::parse_name_list(lex.rest_of_line(), t.text);
        if (t.text == "print") {
          if (have_print) throw ParseError("duplicate #print directive");
          print = std::move(names);
          have_print = true;
        } else {
          if (have_att_preds) throw ParseError("duplicate #attention directive");
          att = std::move(names);
          have_att_preds = true;
        }
      } else if (t.text == "rounds") {
        if (have_rounds) throw ParseError("duplicate #rounds directive");
        std::string payload = detail::trim(lex.rest_of_line());
        if (!payload.empty() && payload.back() == '.') payload.pop_back();
        rounds = detail::parse_round_map(payload);
        have_rounds = true;
      } else {
        throw ParseError("line " + std::to_string(t.line) + ": unknown directive #" + t.text);
      }
      continue;
    }
    if (t.kind != detail::Token::Kind::Name)
      throw ParseError("line " + std::to_string(t.line) + ": expected a clause head");
    Symbol head = Symbol::intern(t.text);
    detail::Token u = lex.next();
    bool terminal = false;
    if (u.kind == detail::Token::Kind::LParen) {
      detail::Token z = lex.next();
      if (z.kind != detail::Token::Kind::Number || z.text != "0")
        throw ParseError("line " + std::to_string(z.line) + ": expected (0) in terminal clause");
      detail::Token r = lex.next();
      if (r.kind != detail::Token::Kind::RParen) throw ParseError("line " + std::to_string(r.line) + ": expected ')'");
      u = lex.next();
      terminal = true;
    }
    if (u.kind != detail::Token::Kind::ColonMinus)
      throw ParseError("line " + std::to_string(u.line) + ": expected ':-'");
    std::vector<detail::Token> body;
    while (true) {
      detail::Token b = lex.next();
      if (b.kind == detail::Token::Kind::Dot) break;
      if (b.kind == detail::Token::Kind::End)
        throw ParseError("line " + std::to_string(b.line) + ": clause not terminated with '.'");
      body.push_back(b);
    }
    p.declare(head);
    any_clause = true;
    if (terminal) {
      if (body.size() != 1 ||
          (body[0].kind != detail::Token::Kind::TopLit && body[0].kind != detail::Token::Kind::BotLit))
        throw ParseError("terminal clause body of " + head.str() + " must be T or F");
      p.set_terminal(head, body[0].kind == detail::Token::Kind::TopLit);
    } else {
      p.set_rule(head, detail::BodyParser(std::move(body)).parse());
    }
  }
  if (!any_clause) throw ParseError("program has no clauses");
  p.set_print(print);
  if (have_rounds) {
    if (have_att_preds) throw ParseError("program declares both #attention and #rounds");
    p.set_attention(AttentionSpec::rounds(rounds));
  } else {
    p.set_attention(AttentionSpec::preds(att));
  }
  p.finalize();
  return p;
}

inline std::string pretty_print(const BnlProgram& p) {
  std::ostringstream os;
  for (size_t i = 0; i < p.var_count(); ++i) {
    Symbol v = p.variables()[i];
    if (p.terminal(static_cast<int>(i)).has_value())
      os << v.str() << "(0) :- " << (*p.terminal(static_cast<int>(i)) ? "T" : "F") << ".\n";
    os << v.str() << " :- ";
    detail::print_formula(os, p.rule(static_cast<int>(i)), 0);
    os << ".\n";
  }
  if (!p.print().empty()) {
    os << "#print ";
    for (size_t i = 0; i < p.print().size(); ++i) os << (i ? "," : "") << p.print()[i].str();
    os << "\n";
  }
  if (p.attention().external) {
    os << "#rounds " << detail::format_round_map(p.attention().map) << "\n";
  } else if (!p.attention().predicates.empty()) {
    os << "#attention ";
    for (size_t i = 0; i < p.attention().predicates.size(); ++i)
      os << (i ? "," : "") << p.attention().predicates[i].str();
    os << "\n";
  }
  return os.str();
}

}  // namespace bnlkit
