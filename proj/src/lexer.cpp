#include <algorithm>
#include <array>
#include <cctype>

#include "mql/error.hpp"
#include "mql/syntax.hpp"

namespace mql {

namespace {

constexpr std::array<std::string_view, 33> kReserved = {
    "ACCURACY",   "ALGORITHM",   "AND",        "AS",         "CATEGORIZE",     "CLASSIFICATION",
    "CLUSTER",    "CONSTRUCT",   "COUNT",      "DEDUPLICATE", "DISPLAY",       "FEATURES",
    "FOR",        "FROM",        "GENERATE",   "IMPUTE",      "INSPECT",       "INTO",
    "LABEL",      "MODEL",       "NUMERIZE",   "OF",          "ON",            "OVER",
    "PREDICTION", "SUPERVISED",  "TEST",       "TRAIN",       "UNSUPERVISED",  "USING",
    "WHERE",      "WITH",        "OR",
};

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

}  // namespace

bool is_reserved_word(std::string_view word) {
  auto up = upper(word);
  return std::find(kReserved.begin(), kReserved.end(), up) != kReserved.end();
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1;
  int col = 1;

  auto advance = [&](std::size_t n = 1) {
    for (std::size_t k = 0; k < n && i < text.size(); ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto lex_error = [&](const std::string& msg) {
    throw SyntaxError(ErrorCode::LexError,
                      msg + " at line " + std::to_string(line) + ", column " + std::to_string(col),
                      line, col);
  };

  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance();
      continue;
    }
    if (c == '-' && i + 1 < text.size() && text[i + 1] == '-') {
      while (i < text.size() && text[i] != '\n') advance();
      continue;
    }

    Token tok{TokenKind::Comma, {}, 0, false, line, col};

    if (ident_start(c)) {
      std::size_t start = i;
      while (i < text.size() && ident_char(text[i])) advance();
      std::string_view word = text.substr(start, i - start);
      if (is_reserved_word(word)) {
        tok.kind = TokenKind::Keyword;
        tok.text = upper(word);
      } else {
        tok.kind = TokenKind::Identifier;
        tok.text = std::string(word);
      }
      out.push_back(std::move(tok));
      continue;
    }

    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
      std::size_t start = i;
      while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) advance();
      if (i < text.size() && text[i] == '.') {
        advance();
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) advance();
      }
      if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
        std::size_t save = i;
        std::size_t j = i + 1;
        if (j < text.size() && (text[j] == '+' || text[j] == '-')) ++j;
        if (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) {
          advance(j - i);
          while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) advance();
        } else {
          i = save;
        }
      }
      tok.kind = TokenKind::Number;
      tok.text = std::string(text.substr(start, i - start));
      auto v = parse_number(tok.text);
      if (!v) lex_error("malformed number '" + tok.text + "'");
      tok.number = *v;
      out.push_back(std::move(tok));
      continue;
    }

    if (c == '\'' || c == '"') {
      const char quote = c;
      advance();
      std::string value;
      bool closed = false;
      while (i < text.size()) {
        if (text[i] == quote) {
          if (i + 1 < text.size() && text[i + 1] == quote) {
            value.push_back(quote);
            advance(2);
            continue;
          }
          advance();
          closed = true;
          break;
        }
        value.push_back(text[i]);
        advance();
      }
      if (!closed) {
        throw SyntaxError(ErrorCode::LexError,
                          std::string("unterminated ") + (quote == '"' ? "quoted identifier" : "string") +
                              " starting at line " + std::to_string(tok.line) + ", column " +
                              std::to_string(tok.column),
                          tok.line, tok.column);
      }
      if (quote == '"') {
        if (value.empty()) lex_error("empty quoted identifier");
        tok.kind = TokenKind::Identifier;
        tok.quoted = true;
      } else {
        tok.kind = TokenKind::String;
      }
      tok.text = std::move(value);
      out.push_back(std::move(tok));
      continue;
    }

    auto single = [&](TokenKind kind) {
      tok.kind = kind;
      tok.text = std::string(1, c);
      advance();
      out.push_back(std::move(tok));
    };
    switch (c) {
      case ',': single(TokenKind::Comma); continue;
      case '(': single(TokenKind::LParen); continue;
      case ')': single(TokenKind::RParen); continue;
      case '*': single(TokenKind::Star); continue;
      case '+': single(TokenKind::Plus); continue;
      case '-': single(TokenKind::Minus); continue;
      case '/': single(TokenKind::Slash); continue;
      case ';': single(TokenKind::Semicolon); continue;
      case '=': single(TokenKind::Compare); continue;
      default: break;
    }
    if (c == '<' || c == '>' || c == '!') {
      std::string op(1, c);
      if (i + 1 < text.size()) {
        char n = text[i + 1];
        if (n == '=' || (c == '<' && n == '>')) op.push_back(n);
      }
      if (op == "!") lex_error("illegal character '!'");
      tok.kind = TokenKind::Compare;
      tok.text = op == "!=" ? "<>" : op;
      advance(op.size());
      out.push_back(std::move(tok));
      continue;
    }

    std::string shown = std::isprint(static_cast<unsigned char>(c))
                            ? std::string(1, c)
                            : "\\x" + std::to_string(static_cast<unsigned char>(c));
    lex_error("illegal character '" + shown + "'");
  }
  return out;
}

}  // namespace mql
