//===- dsl.hpp - Textual design format --------------------------*- C++ -*-===//
//
// SPDX-License-Identifier: Apache-2.0
//
//===----------------------------------------------------------------------===//
//
// Parser and printers for the design language:
//
//   design   := "design" ID ";" decl*
//   decl     := input | opdef | output
//   input    := "input" ID ":" type ";"
//   output   := "output" ID ";"
//   opdef    := ID ":" kind type [carry] "=" expr ";"
//   kind     := add | sub | mult | multcore | lt | max | min | not | select
//   type     := ("u"|"s") INT
//   carry    := "carry" "(" (ID | "0" | "1") ")"
//   expr     := operand (SEP operand)*      SEP is one of + - * < , ? :
//   operand  := term | "{" term ("," term)* "}"
//   term     := (ID | "const" "(" BITS ")" | "carry" "(" ID ")") ["[" INT ":" INT "]"]
//
// `//` starts a comment that runs to the end of the line.
//
//===----------------------------------------------------------------------===//

#pragma once

#include "bitfrag/dfg.hpp"

#include <cctype>
#include <sstream>

namespace bitfrag {

struct ParseResult {
  std::optional<DataFlowGraph> graph;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return graph.has_value(); }
};

namespace detail {

struct Token {
  enum class Kind { Ident, Int, Punct, End };

  Kind kind = Kind::End;
  std::string text;
  SourceSpan span;
};

class Lexer {
public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run(std::vector<Diagnostic> &diags) {
    std::vector<Token> tokens;
    while (true) {
      skip_space();
      SourceSpan span{line_, column_, pos_, pos_};
      if (pos_ >= text_.size()) {
        tokens.push_back({Token::Kind::End, {}, span});
        return tokens;
      }
      char c = text_[pos_];
      Token tok;
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        tok.kind = Token::Kind::Ident;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
          advance();
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        tok.kind = Token::Kind::Int;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
          advance();
      } else if (std::string_view(";:=()[]{},+-*<?").find(c) != std::string_view::npos) {
        tok.kind = Token::Kind::Punct;
        advance();
      } else {
        advance();
        span.end = pos_;
        diags.push_back({Diagnostic::Kind::Syntax, {},
                         std::string("unexpected character '") + c + "'", span});
        continue;
      }
      span.end = pos_;
      tok.text = std::string(text_.substr(span.begin, span.end - span.begin));
      tok.span = span;
      tokens.push_back(std::move(tok));
    }
  }

private:
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      if (std::isspace(static_cast<unsigned char>(text_[pos_]))) {
        advance();
      } else if (text_.substr(pos_, 2) == "//") {
        while (pos_ < text_.size() && text_[pos_] != '\n')
          advance();
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

struct SyntaxError {
  Diagnostic diag;
};

class Parser {
public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  DataFlowGraph run(std::map<std::string, SourceSpan> &spans) {
    DataFlowGraph dfg;
    expect_word("design");
    dfg.name = expect(Token::Kind::Ident, "design name").text;
    expect_punct(";");
    while (peek().kind != Token::Kind::End) {
      const Token &head = peek();
      if (head.kind != Token::Kind::Ident)
        fail(head, "expected a declaration");
      bool keyword_decl = peek(1).kind == Token::Kind::Ident;
      if (head.text == "input" && keyword_decl) {
        next();
        Input in;
        const Token &name = expect(Token::Kind::Ident, "input name");
        in.name = name.text;
        expect_punct(":");
        std::tie(in.signedness, in.width) = type();
        expect_punct(";");
        spans.emplace(in.name, name.span);
        dfg.inputs.push_back(std::move(in));
      } else if (head.text == "output" && keyword_decl) {
        next();
        const Token &name = expect(Token::Kind::Ident, "output name");
        dfg.outputs.push_back(name.text);
        expect_punct(";");
      } else {
        SourceSpan begin = head.span;
        Operation op;
        op.id = next().text;
        expect_punct(":");
        const Token &kind_tok = expect(Token::Kind::Ident, "operation kind");
        auto kind = kind_from_name(kind_tok.text);
        if (!kind)
          fail(kind_tok, "unknown operation kind '" + kind_tok.text + "'");
        op.kind = *kind;
        std::tie(op.signedness, op.width) = type();
        if (peek().kind == Token::Kind::Ident && peek().text == "carry") {
          next();
          expect_punct("(");
          const Token &c = next();
          if (c.kind == Token::Kind::Int && c.text == "0")
            op.carry_in = CarryIn::zero();
          else if (c.kind == Token::Kind::Int && c.text == "1")
            op.carry_in = CarryIn::one();
          else if (c.kind == Token::Kind::Ident)
            op.carry_in = CarryIn::of(c.text);
          else
            fail(c, "carry-in must be 0, 1 or an operation name");
          expect_punct(")");
        }
        expect_punct("=");
        op.operands.push_back(operand());
        while (is_separator(peek())) {
          next();
          op.operands.push_back(operand());
        }
        const Token &end = expect_punct(";");
        spans.emplace(op.id, SourceSpan{begin.line, begin.column, begin.begin, end.span.end});
        dfg.operations.push_back(std::move(op));
      }
    }
    return dfg;
  }

private:
  const Token &peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }
  const Token &next() {
    const Token &t = peek();
    if (pos_ < tokens_.size() - 1)
      ++pos_;
    return t;
  }

  [[noreturn]] void fail(const Token &at, std::string msg) {
    throw SyntaxError{{Diagnostic::Kind::Syntax, {}, std::move(msg), at.span}};
  }

  const Token &expect(Token::Kind kind, const char *what) {
    if (peek().kind != kind)
      fail(peek(), std::string("expected ") + what + describe(peek()));
    return next();
  }
  const Token &expect_punct(std::string_view p) {
    if (peek().kind != Token::Kind::Punct || peek().text != p)
      fail(peek(), "expected '" + std::string(p) + "'" + describe(peek()));
    return next();
  }
  void expect_word(std::string_view w) {
    if (peek().kind != Token::Kind::Ident || peek().text != w)
      fail(peek(), "expected '" + std::string(w) + "'" + describe(peek()));
    next();
  }
  static std::string describe(const Token &t) {
    return t.kind == Token::Kind::End ? " at end of input" : ", found '" + t.text + "'";
  }
  static bool is_separator(const Token &t) {
    return t.kind == Token::Kind::Punct && t.text.size() == 1 &&
           std::string_view("+-*<,?:").find(t.text[0]) != std::string_view::npos;
  }

  unsigned integer(const Token &t) {
    if (t.kind != Token::Kind::Int || t.text.size() > 9)
      fail(t, "expected an integer" + describe(t));
    return static_cast<unsigned>(std::stoul(t.text));
  }

  std::pair<Signedness, unsigned> type() {
    const Token &t = expect(Token::Kind::Ident, "a type like u16 or s8");
    if (t.text.size() < 2 || (t.text[0] != 'u' && t.text[0] != 's') ||
        t.text.find_first_not_of("0123456789", 1) != std::string::npos ||
        t.text.size() > 10)
      fail(t, "expected a type like u16 or s8, found '" + t.text + "'");
    auto width = static_cast<unsigned>(std::stoul(t.text.substr(1)));
    if (width < 1)
      fail(t, "width must be at least 1");
    return {t.text[0] == 's' ? Signedness::Signed : Signedness::Unsigned, width};
  }

  Operand operand() {
    if (peek().kind == Token::Kind::Punct && peek().text == "{") {
      next();
      std::vector<Operand> parts;
      parts.push_back(term());
      while (peek().kind == Token::Kind::Punct && peek().text == ",") {
        next();
        parts.push_back(term());
      }
      expect_punct("}");
      return Operand::concat(std::move(parts));
    }
    return term();
  }

  Operand term() {
    const Token &t = expect(Token::Kind::Ident, "an operand");
    Operand op;
    bool call = peek().kind == Token::Kind::Punct && peek().text == "(";
    if (t.text == "const" && call) {
      next();
      const Token &bits = expect(Token::Kind::Int, "binary constant");
      if (bits.text.find_first_not_of("01") != std::string::npos)
        fail(bits, "constant must be written in binary");
      op = Operand::constant(bits.text);
      expect_punct(")");
    } else if (t.text == "carry" && call) {
      next();
      op = Operand::carry(expect(Token::Kind::Ident, "operation name").text);
      expect_punct(")");
    } else {
      // Resolved to an input or a result once all declarations are known.
      op = Operand::result(t.text);
    }
    if (peek().kind == Token::Kind::Punct && peek().text == "[") {
      next();
      unsigned hi = integer(next());
      expect_punct(":");
      unsigned lo = integer(next());
      expect_punct("]");
      op.slice = Slice{hi, lo};
    }
    return op;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

inline void resolve_inputs(const DataFlowGraph &dfg, Operand &operand) {
  if (operand.kind == Operand::Kind::Concat)
    for (auto &p : operand.parts)
      resolve_inputs(dfg, p);
  else if (operand.kind == Operand::Kind::Result && dfg.find_input(operand.ref))
    operand.kind = Operand::Kind::Input;
}

} // namespace detail

/// Parses and validates a design. Validation diagnostics carry the span of
/// the offending definition.
inline ParseResult parse(std::string_view text) {
  ParseResult result;
  auto tokens = detail::Lexer(text).run(result.diagnostics);
  if (!result.diagnostics.empty())
    return result;
  std::map<std::string, SourceSpan> spans;
  DataFlowGraph dfg;
  try {
    dfg = detail::Parser(std::move(tokens)).run(spans);
  } catch (const detail::SyntaxError &e) {
    result.diagnostics.push_back(e.diag);
    return result;
  }
  for (auto &op : dfg.operations)
    for (auto &operand : op.operands)
      detail::resolve_inputs(dfg, operand);
  auto diags = validate(dfg);
  if (!diags.empty()) {
    SourceSpan whole{1, 1, 0, text.size()};
    for (auto &d : diags) {
      auto it = spans.find(d.op);
      d.span = it != spans.end() ? it->second : whole;
    }
    result.diagnostics = std::move(diags);
    return result;
  }
  result.graph = std::move(dfg);
  return result;
}

inline std::string format_diagnostic(const Diagnostic &d) {
  std::string out;
  if (d.span)
    out += std::to_string(d.span->line) + ":" + std::to_string(d.span->column) + ": ";
  out += "error: ";
  if (!d.op.empty())
    out += d.op + ": ";
  return out + d.message;
}

namespace detail {

inline void emit_operand(std::ostream &os, const Operand &operand) {
  switch (operand.kind) {
  case Operand::Kind::Concat:
    os << '{';
    for (std::size_t i = 0; i < operand.parts.size(); ++i) {
      if (i)
        os << ", ";
      emit_operand(os, operand.parts[i]);
    }
    os << '}';
    return;
  case Operand::Kind::Constant:
    os << "const(" << operand.bits << ')';
    break;
  case Operand::Kind::Carry:
    os << "carry(" << operand.ref << ')';
    break;
  default:
    os << operand.ref;
  }
  if (operand.slice)
    os << '[' << operand.slice->hi << ':' << operand.slice->lo << ']';
}

inline std::string type_name(Signedness s, unsigned width) {
  return (s == Signedness::Signed ? "s" : "u") + std::to_string(width);
}

} // namespace detail

inline std::string emit(const DataFlowGraph &dfg) {
  std::ostringstream os;
  os << "design " << dfg.name << ";\n";
  for (const auto &in : dfg.inputs)
    os << "input " << in.name << ": " << detail::type_name(in.signedness, in.width) << ";\n";
  for (const auto &op : dfg.operations) {
    os << op.id << ": " << kind_name(op.kind) << ' '
       << detail::type_name(op.signedness, op.width);
    switch (op.carry_in.kind) {
    case CarryIn::Kind::None: break;
    case CarryIn::Kind::Zero: os << " carry(0)"; break;
    case CarryIn::Kind::One: os << " carry(1)"; break;
    case CarryIn::Kind::CarryOf: os << " carry(" << op.carry_in.ref << ')'; break;
    }
    os << " = ";
    std::vector<std::string_view> seps;
    switch (op.kind) {
    case OpKind::Add: seps = {" + "}; break;
    case OpKind::Sub: seps = {" - "}; break;
    case OpKind::Mult:
    case OpKind::MultCore: seps = {" * "}; break;
    case OpKind::Lt: seps = {" < "}; break;
    case OpKind::Select: seps = {" ? ", " : "}; break;
    default: seps = {", "}; break;
    }
    for (std::size_t i = 0; i < op.operands.size(); ++i) {
      if (i)
        os << seps[std::min(i - 1, seps.size() - 1)];
      detail::emit_operand(os, op.operands[i]);
    }
    os << ";\n";
  }
  for (const auto &out : dfg.outputs)
    os << "output " << out << ";\n";
  return os.str();
}

/// Graphviz rendering: inputs, operations and outputs as nodes in definition
/// order, one edge per operand reference labelled with its bit range.
inline std::string emit_dot(const DataFlowGraph &dfg) {
  std::ostringstream os;
  os << "digraph \"" << dfg.name << "\" {\n";
  os << "  rankdir=TB;\n";
  for (const auto &in : dfg.inputs)
    os << "  \"in:" << in.name << "\" [shape=invtriangle, label=\"" << in.name << "\\n"
       << detail::type_name(in.signedness, in.width) << "\"];\n";
  for (const auto &op : dfg.operations)
    os << "  \"op:" << op.id << "\" [shape=box, label=\"" << op.id << "\\n"
       << kind_name(op.kind) << ' ' << detail::type_name(op.signedness, op.width)
       << "\"];\n";
  for (const auto &out : dfg.outputs)
    os << "  \"out:" << out << "\" [shape=triangle, label=\"" << out << "\"];\n";

  auto node_of = [&](const std::string &name) {
    return (dfg.find_input(name) ? "\"in:" : "\"op:") + name + "\"";
  };
  std::function<void(const Operation &, const Operand &)> edge =
      [&](const Operation &op, const Operand &operand) {
        switch (operand.kind) {
        case Operand::Kind::Concat:
          for (const auto &p : operand.parts)
            edge(op, p);
          return;
        case Operand::Kind::Constant:
          return;
        case Operand::Kind::Carry:
          os << "  " << node_of(operand.ref) << " -> \"op:" << op.id
             << "\" [label=\"carry\", style=dashed];\n";
          return;
        default: {
          Slice s = operand.slice.value_or(Slice{dfg.width_of(operand.ref) - 1, 0});
          os << "  " << node_of(operand.ref) << " -> \"op:" << op.id << "\" [label=\"["
             << s.hi << ':' << s.lo << "]\"];\n";
        }
        }
      };
  for (const auto &op : dfg.operations) {
    for (const auto &operand : op.operands)
      edge(op, operand);
    if (op.carry_in.kind == CarryIn::Kind::CarryOf)
      os << "  \"op:" << op.carry_in.ref << "\" -> \"op:" << op.id
         << "\" [label=\"carry\", style=dashed];\n";
  }
  for (const auto &out : dfg.outputs)
    os << "  " << node_of(out) << " -> \"out:" << out << "\";\n";
  os << "}\n";
  return os.str();
}

} // namespace bitfrag
