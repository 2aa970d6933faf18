#ifndef TIMESTITCH_QASM_HPP
#define TIMESTITCH_QASM_HPP

// OpenQASM 2 subset: one qreg, optional cregs, the fixed gate set of ir.hpp
// and a `delay[n] q[i];` extension expressing an explicit idle of n dt.

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "timestitch/ir.hpp"

namespace timestitch::qasm {

struct SourceSpan {
  std::size_t line = 1;    // 1-based
  std::size_t column = 1;  // 1-based

  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

enum class ParseErrorKind { Syntax, UnsupportedGate, MultipleQreg, Semantic };

class ParseError : public Error {
 public:
  ParseError(ParseErrorKind kind, SourceSpan span, const std::string& message)
      : Error(std::to_string(span.line) + ":" + std::to_string(span.column) + ": " + message),
        kind_(kind),
        span_(span),
        detail_(message) {}

  ParseErrorKind kind() const { return kind_; }
  const SourceSpan& span() const { return span_; }
  const std::string& detail() const { return detail_; }

 private:
  ParseErrorKind kind_;
  SourceSpan span_;
  std::string detail_;
};

namespace detail {

enum class Tok { End, Ident, Number, String, Semi, Comma, LBrack, RBrack, LParen, RParen, Arrow, Plus, Minus, Star, Slash };

struct Token {
  Tok kind = Tok::End;
  std::string_view text;
  SourceSpan span;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_space_and_comments();
    Token t;
    t.span = {line_, col_};
    if (pos_ >= src_.size()) return t;
    const std::size_t begin = pos_;
    const unsigned char c = static_cast<unsigned char>(src_[pos_]);
    if (std::isalpha(c) || c == '_') {
      while (pos_ < src_.size() && is_ident_char(src_[pos_])) advance();
      t.kind = Tok::Ident;
    } else if (std::isdigit(c) || (c == '.' && pos_ + 1 < src_.size() &&
                                   std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
      lex_number();
      t.kind = Tok::Number;
    } else if (c == '"') {
      advance();
      while (pos_ < src_.size() && src_[pos_] != '"' && src_[pos_] != '\n') advance();
      if (pos_ >= src_.size() || src_[pos_] != '"') {
        throw ParseError(ParseErrorKind::Syntax, t.span, "unterminated string");
      }
      advance();
      t.kind = Tok::String;
    } else if (c == '-' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') {
      advance();
      advance();
      t.kind = Tok::Arrow;
    } else {
      switch (c) {
        case ';': t.kind = Tok::Semi; break;
        case ',': t.kind = Tok::Comma; break;
        case '[': t.kind = Tok::LBrack; break;
        case ']': t.kind = Tok::RBrack; break;
        case '(': t.kind = Tok::LParen; break;
        case ')': t.kind = Tok::RParen; break;
        case '+': t.kind = Tok::Plus; break;
        case '-': t.kind = Tok::Minus; break;
        case '*': t.kind = Tok::Star; break;
        case '/': t.kind = Tok::Slash; break;
        default: {
          char buf[48];
          if (std::isprint(c)) {
            std::snprintf(buf, sizeof buf, "unexpected character '%c'", c);
          } else {
            std::snprintf(buf, sizeof buf, "unexpected byte 0x%02x", c);
          }
          throw ParseError(ParseErrorKind::Syntax, t.span, buf);
        }
      }
      advance();
    }
    t.text = src_.substr(begin, pos_ - begin);
    return t;
  }

 private:
  static bool is_ident_char(char ch) {
    const auto u = static_cast<unsigned char>(ch);
    return std::isalnum(u) || ch == '_';
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  bool digit_at(std::size_t p) const {
    return p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]));
  }

  void lex_number() {
    while (digit_at(pos_)) advance();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      advance();
      while (digit_at(pos_)) advance();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
      if (digit_at(look)) {
        while (pos_ < look) advance();
        while (digit_at(pos_)) advance();
      }
    }
  }

  void skip_space_and_comments() {
    while (pos_ < src_.size()) {
      const auto c = static_cast<unsigned char>(src_[pos_]);
      if (std::isspace(c)) {
        advance();
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

struct GateInfo {
  std::string_view name;
  GateType type;
};

inline constexpr GateInfo kGates[] = {
    {"x", GateType::X},     {"y", GateType::Y},       {"z", GateType::Z},
    {"h", GateType::H},     {"s", GateType::S},       {"sdg", GateType::Sdg},
    {"sx", GateType::SX},   {"sxdg", GateType::SXdg}, {"rz", GateType::RZ},
    {"cx", GateType::CX},   {"barrier", GateType::Barrier}, {"delay", GateType::Delay},
    {"measure", GateType::Measure},
};

class Parser {
 public:
  explicit Parser(std::string_view src) : lex_(src) { shift(); }

  Circuit parse() {
    expect_keyword("OPENQASM");
    const Token version = expect(Tok::Number, "version number");
    if (version.text != "2.0" && version.text != "2") {
      throw ParseError(ParseErrorKind::Syntax, version.span,
                       "unsupported OpenQASM version " + std::string(version.text));
    }
    expect(Tok::Semi, "';'");
    while (cur_.kind != Tok::End) statement();
    if (!circuit_) return Circuit(0);
    return std::move(*circuit_);
  }

 private:
  void shift() { cur_ = lex_.next(); }

  [[noreturn]] void fail(const Token& at, const std::string& msg,
                         ParseErrorKind kind = ParseErrorKind::Syntax) const {
    throw ParseError(kind, at.span, msg);
  }

  Token expect(Tok kind, const char* what) {
    if (cur_.kind != kind) {
      fail(cur_, std::string("expected ") + what + ", found " + describe(cur_));
    }
    Token t = cur_;
    shift();
    return t;
  }

  void expect_keyword(std::string_view kw) {
    if (cur_.kind != Tok::Ident || cur_.text != kw) {
      fail(cur_, "expected '" + std::string(kw) + "', found " + describe(cur_));
    }
    shift();
  }

  static std::string describe(const Token& t) {
    if (t.kind == Tok::End) return "end of input";
    return "'" + std::string(t.text) + "'";
  }

  std::uint64_t parse_index(const Token& t) const {
    std::uint64_t v = 0;
    const auto* b = t.text.data();
    const auto* e = b + t.text.size();
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc{} || ptr != e) fail(t, "expected a non-negative integer, found '" + std::string(t.text) + "'");
    return v;
  }

  void statement() {
    const Token head = cur_;
    if (head.kind != Tok::Ident) fail(head, "expected a statement, found " + describe(head));
    const std::string_view word = head.text;
    if (word == "include") {
      shift();
      const Token file = expect(Tok::String, "include file name");
      if (file.text != "\"qelib1.inc\"") {
        fail(file, "only qelib1.inc may be included");
      }
      expect(Tok::Semi, "';'");
      return;
    }
    if (word == "qreg" || word == "creg") {
      declaration(word == "qreg");
      return;
    }
    if (word == "gate" || word == "opaque" || word == "if" || word == "reset") {
      fail(head, "'" + std::string(word) + "' is not supported");
    }
    gate_statement();
  }

  void declaration(bool quantum) {
    const Token head = cur_;
    shift();
    const Token name = expect(Tok::Ident, "register name");
    expect(Tok::LBrack, "'['");
    const Token size_tok = expect(Tok::Number, "register size");
    const auto size = parse_index(size_tok);
    expect(Tok::RBrack, "']'");
    expect(Tok::Semi, "';'");
    if (!quantum) return;
    if (circuit_) fail(head, "multiple qreg declarations are not supported", ParseErrorKind::MultipleQreg);
    if (size > 4096) fail(size_tok, "register too large");
    qreg_ = std::string(name.text);
    circuit_.emplace(static_cast<std::size_t>(size));
  }

  // A qubit argument: either `name[i]` or the whole register `name`.
  std::vector<Qubit> qubit_arg() {
    const Token name = expect(Tok::Ident, "qubit argument");
    if (!circuit_) fail(name, "qubit used before qreg declaration", ParseErrorKind::Semantic);
    if (name.text != qreg_) fail(name, "unknown quantum register '" + std::string(name.text) + "'", ParseErrorKind::Semantic);
    if (cur_.kind != Tok::LBrack) {
      std::vector<Qubit> all(circuit_->num_qubits());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<Qubit>(i);
      return all;
    }
    shift();
    const Token idx = expect(Tok::Number, "qubit index");
    const auto v = parse_index(idx);
    expect(Tok::RBrack, "']'");
    if (v >= circuit_->num_qubits()) {
      fail(idx, "qubit index " + std::to_string(v) + " out of range", ParseErrorKind::Semantic);
    }
    return {static_cast<Qubit>(v)};
  }

  void classical_arg() {
    expect(Tok::Ident, "classical register");
    if (cur_.kind == Tok::LBrack) {
      shift();
      parse_index(expect(Tok::Number, "bit index"));
      expect(Tok::RBrack, "']'");
    }
  }

  void append(const Token& at, Instruction ins) {
    try {
      circuit_->append(std::move(ins));
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      fail(at, e.what(), ParseErrorKind::Semantic);
    }
  }

  void gate_statement() {
    const Token head = cur_;
    const GateInfo* info = nullptr;
    for (const auto& g : kGates) {
      if (g.name == head.text) info = &g;
    }
    if (!info) {
      fail(head, "unsupported gate '" + std::string(head.text) + "'", ParseErrorKind::UnsupportedGate);
    }
    shift();
    double theta = 0.0;
    Duration delay = 0;
    if (info->type == GateType::RZ) {
      expect(Tok::LParen, "'('");
      const Token at = cur_;
      theta = expression(0);
      expect(Tok::RParen, "')'");
      if (!std::isfinite(theta)) fail(at, "rotation angle is not finite");
    } else if (info->type == GateType::Delay) {
      expect(Tok::LBrack, "'['");
      const Token d = expect(Tok::Number, "delay duration");
      const auto v = parse_index(d);
      if (v > static_cast<std::uint64_t>(std::numeric_limits<Duration>::max() / 4)) fail(d, "delay too long");
      delay = static_cast<Duration>(v);
      expect(Tok::RBrack, "']'");
    } else if (cur_.kind == Tok::LParen) {
      fail(cur_, "gate '" + std::string(head.text) + "' takes no parameters");
    }

    std::vector<std::vector<Qubit>> args;
    args.push_back(qubit_arg());
    while (cur_.kind == Tok::Comma) {
      shift();
      args.push_back(qubit_arg());
    }
    if (info->type == GateType::Measure && cur_.kind == Tok::Arrow) {
      shift();
      classical_arg();
    }
    expect(Tok::Semi, "';'");

    if (info->type == GateType::Barrier) {
      std::vector<Qubit> qs;
      for (const auto& a : args) qs.insert(qs.end(), a.begin(), a.end());
      append(head, Instruction::barrier(std::move(qs)));
      return;
    }
    if (info->type == GateType::CX) {
      if (args.size() != 2 || args[0].size() != 1 || args[1].size() != 1) {
        fail(head, "cx takes two indexed qubit arguments");
      }
      append(head, Instruction::cx(args[0][0], args[1][0]));
      return;
    }
    if (args.size() != 1) fail(head, std::string(info->name) + " takes one qubit argument");
    for (Qubit q : args[0]) {
      Instruction ins{info->type, {q}};
      ins.theta = theta;
      ins.delay = delay;
      append(head, std::move(ins));
    }
  }

  // Precedence climbing over + - * / with unary minus, pi and literals.
  double expression(int depth) {
    double lhs = term(depth);
    while (cur_.kind == Tok::Plus || cur_.kind == Tok::Minus) {
      const bool plus = cur_.kind == Tok::Plus;
      shift();
      const double rhs = term(depth);
      lhs = plus ? lhs + rhs : lhs - rhs;
    }
    return lhs;
  }

  double term(int depth) {
    double lhs = unary(depth);
    while (cur_.kind == Tok::Star || cur_.kind == Tok::Slash) {
      const bool mul = cur_.kind == Tok::Star;
      shift();
      const double rhs = unary(depth);
      lhs = mul ? lhs * rhs : lhs / rhs;
    }
    return lhs;
  }

  double unary(int depth) {
    if (depth > 64) fail(cur_, "expression nested too deeply");
    if (cur_.kind == Tok::Minus) {
      shift();
      return -unary(depth + 1);
    }
    if (cur_.kind == Tok::Plus) {
      shift();
      return unary(depth + 1);
    }
    return primary(depth);
  }

  double primary(int depth) {
    const Token t = cur_;
    if (t.kind == Tok::Number) {
      shift();
      double v = 0.0;
      const auto* b = t.text.data();
      const auto* e = b + t.text.size();
      auto [ptr, ec] = std::from_chars(b, e, v);
      if (ec != std::errc{} || ptr != e) fail(t, "malformed number '" + std::string(t.text) + "'");
      return v;
    }
    if (t.kind == Tok::Ident && t.text == "pi") {
      shift();
      return std::numbers::pi;
    }
    if (t.kind == Tok::LParen) {
      shift();
      const double v = expression(depth + 1);
      expect(Tok::RParen, "')'");
      return v;
    }
    fail(t, "expected an expression, found " + describe(t));
  }

  Lexer lex_;
  Token cur_;
  std::optional<Circuit> circuit_;
  std::string qreg_;
};

inline std::string format_angle(double theta) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", theta);
  return buf;
}

}  // namespace detail

/// Parses the subset grammar. Every failure is a ParseError carrying a span.
inline Circuit parse(std::string_view text) { return detail::Parser(text).parse(); }

inline Circuit parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(e.kind(), e.span(), path + ": " + e.detail());
  }
}

inline std::string format_instruction(const Instruction& ins) {
  std::string s{gate_name(ins.type)};
  if (ins.type == GateType::RZ) s += "(" + detail::format_angle(ins.theta) + ")";
  if (ins.type == GateType::Delay) s += "[" + std::to_string(ins.delay) + "]";
  s += " ";
  for (std::size_t k = 0; k < ins.qubits.size(); ++k) {
    if (k) s += ",";
    s += "q[" + std::to_string(ins.qubits[k]) + "]";
  }
  if (ins.type == GateType::Measure) s += " -> c[" + std::to_string(ins.qubits[0]) + "]";
  s += ";";
  return s;
}

inline std::string header(std::size_t num_qubits, bool with_creg) {
  std::string s = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\n";
  s += "qreg q[" + std::to_string(num_qubits) + "];\n";
  if (with_creg) s += "creg c[" + std::to_string(num_qubits) + "];\n";
  return s;
}

/// Emits the subset grammar; parse(serialize(c)) == c.
inline std::string serialize(const Circuit& c) {
  std::string out = header(c.num_qubits(), c.has_measure());
  for (const auto& ins : c.instructions()) {
    out += format_instruction(ins);
    out += '\n';
  }
  return out;
}

}  // namespace timestitch::qasm

#endif  // TIMESTITCH_QASM_HPP
