#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mql/ast.hpp"

namespace mql {

enum class TokenKind {
  Keyword,     // reserved word, `text` holds the upper-case spelling
  Identifier,  // bare or double-quoted name, `text` holds the name verbatim
  String,      // single-quoted literal, unescaped
  Number,
  Comma,
  LParen,
  RParen,
  Star,
  Plus,
  Minus,
  Slash,
  Semicolon,
  Compare,  // = <> != < <= > >=
};

struct Token {
  TokenKind kind;
  std::string text;
  double number = 0;
  bool quoted = false;  // identifier written as "name"
  int line = 1;
  int column = 1;

  bool is_keyword(std::string_view kw) const { return kind == TokenKind::Keyword && text == kw; }
};

bool is_reserved_word(std::string_view word);

// Throws SyntaxError(LexError) with position on an illegal character or an
// unterminated literal.
std::vector<Token> tokenize(std::string_view text);

// Statements separated by `;` (the final one optional). Throws
// SyntaxError(ParseError / ExclusivityError).
Program parse_program(std::string_view text);

// Canonical text; parse_program(pretty_print(s)) reproduces s.
std::string pretty_print(const Statement& s);
std::string pretty_print(const Program& p);

std::string to_text(const IntExpr& e);
std::string to_text(const NumExpr& e);
std::string to_text(const Predicate& p);

// Identifier as it must be written in source (double-quoted when needed).
std::string quote_identifier(std::string_view name);

}  // namespace mql
