#include <algorithm>
#include <cctype>
#include <cmath>
#include <initializer_list>
#include <set>

#include "mql/error.hpp"
#include "mql/syntax.hpp"

namespace mql {

namespace {

std::string describe(const Token& t) {
  switch (t.kind) {
    case TokenKind::Keyword: return "keyword " + t.text;
    case TokenKind::Identifier: return "identifier '" + t.text + "'";
    case TokenKind::String: return "string '" + t.text + "'";
    case TokenKind::Number: return "number " + t.text;
    default: return "'" + t.text + "'";
  }
}

bool is_action_keyword(const Token& t) {
  return t.is_keyword("CATEGORIZE") || t.is_keyword("IMPUTE") || t.is_keyword("NUMERIZE") ||
         t.is_keyword("DEDUPLICATE");
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  Program program() {
    Program out;
    while (!at_end()) {
      if (peek().kind == TokenKind::Semicolon) {
        ++pos_;
        continue;
      }
      out.push_back(statement());
      if (!at_end()) {
        if (peek().kind != TokenKind::Semicolon) end_of_statement_error();
        ++pos_;
      }
    }
    return out;
  }

 private:
  // -- token helpers --------------------------------------------------------

  bool at_end() const { return pos_ >= toks_.size(); }
  const Token& peek(std::size_t ahead = 0) const {
    static const Token eof{TokenKind::Semicolon, "<end of input>", 0, false, 0, 0};
    return pos_ + ahead < toks_.size() ? toks_[pos_ + ahead] : eof;
  }
  bool peek_keyword(std::string_view kw, std::size_t ahead = 0) const {
    return pos_ + ahead < toks_.size() && toks_[pos_ + ahead].is_keyword(kw);
  }
  bool accept_keyword(std::string_view kw) {
    if (peek_keyword(kw)) {
      ++pos_;
      return true;
    }
    return false;
  }
  bool accept(TokenKind kind) {
    if (!at_end() && peek().kind == kind) {
      ++pos_;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(std::initializer_list<std::string_view> expected,
                         ErrorCode code = ErrorCode::ParseError) const {
    std::string exp;
    for (auto e : expected) {
      if (!exp.empty()) exp += ", ";
      exp += e;
    }
    fail_msg("expected " + exp + ", found " + found(), code);
  }

  [[noreturn]] void fail_msg(const std::string& msg, ErrorCode code = ErrorCode::ParseError) const {
    const Token& t = at_end() ? (toks_.empty() ? peek() : toks_.back()) : peek();
    int line = t.line, col = t.column;
    if (at_end() && !toks_.empty()) col += static_cast<int>(t.text.size());
    throw SyntaxError(code,
                      msg + " (line " + std::to_string(line) + ", column " + std::to_string(col) + ")",
                      line, col);
  }

  std::string found() const { return at_end() ? "end of input" : describe(peek()); }

  void expect_keyword(std::string_view kw) {
    if (!accept_keyword(kw)) fail({kw});
  }

  void expect(TokenKind kind, std::string_view what) {
    if (!accept(kind)) fail({what});
  }

  std::string identifier(std::string_view what) {
    if (at_end() || peek().kind != TokenKind::Identifier) {
      if (!at_end() && peek().kind == TokenKind::Keyword) {
        fail_msg("expected " + std::string(what) + ", found reserved word " + peek().text +
                 " (double-quote names that collide with keywords)");
      }
      fail({what});
    }
    return toks_[pos_++].text;
  }

  std::vector<std::string> identifier_list(std::string_view what) {
    std::vector<std::string> out{identifier(what)};
    while (accept(TokenKind::Comma)) out.push_back(identifier(what));
    return out;
  }

  std::string label_value() {
    const Token& t = peek();
    if (!at_end() &&
        (t.kind == TokenKind::Identifier || t.kind == TokenKind::String || t.kind == TokenKind::Number)) {
      ++pos_;
      return t.text;
    }
    fail({"label"});
  }

  // Labels separated by commas; when `stop_before_action` is set, a comma
  // followed by `<name> <action>` ends the list (INSPECT item boundary).
  std::vector<std::string> label_list(bool stop_before_action) {
    std::vector<std::string> out{label_value()};
    while (peek().kind == TokenKind::Comma && !at_end()) {
      if (stop_before_action && is_action_keyword(peek(2))) break;
      ++pos_;
      out.push_back(label_value());
    }
    return out;
  }

  double number_literal(std::string_view what) {
    bool neg = accept(TokenKind::Minus);
    if (at_end() || peek().kind != TokenKind::Number) fail({what});
    double v = toks_[pos_++].number;
    return neg ? -v : v;
  }

  [[noreturn]] void end_of_statement_error() const {
    fail({"';'", "end of input"});
  }

  // -- expressions ----------------------------------------------------------

  IntExpr int_expr() {
    IntExpr lhs = int_term();
    while (!at_end() && (peek().kind == TokenKind::Plus || peek().kind == TokenKind::Minus)) {
      char op = toks_[pos_++].text[0];
      lhs = IntExpr::binary(op, std::move(lhs), int_term());
    }
    return lhs;
  }

  IntExpr int_term() {
    IntExpr lhs = int_factor();
    while (!at_end() && (peek().kind == TokenKind::Star || peek().kind == TokenKind::Slash)) {
      char op = toks_[pos_++].text[0];
      lhs = IntExpr::binary(op, std::move(lhs), int_factor());
    }
    return lhs;
  }

  IntExpr int_factor() {
    if (accept(TokenKind::LParen)) {
      IntExpr e = int_expr();
      expect(TokenKind::RParen, "')'");
      return e;
    }
    if (accept_keyword("COUNT")) {
      expect(TokenKind::LParen, "'('");
      expect(TokenKind::Star, "'*'");
      expect(TokenKind::RParen, "')'");
      return IntExpr::count_star();
    }
    if (!at_end() && peek().kind == TokenKind::Number) {
      const Token& t = toks_[pos_];
      if (t.text.find_first_of(".eE") != std::string::npos || t.number != std::floor(t.number)) {
        fail_msg("expected an integer, found " + describe(t));
      }
      ++pos_;
      return IntExpr::literal(static_cast<long long>(t.number));
    }
    if (!at_end() && peek().kind == TokenKind::Identifier && peek(1).kind == TokenKind::LParen) {
      fail_msg("unsupported aggregate " + peek().text + "(); only COUNT(*) is allowed in integer expressions");
    }
    fail({"integer", "COUNT(*)", "'('"});
  }

  NumExpr num_expr() {
    NumExpr lhs = num_term();
    while (!at_end() && (peek().kind == TokenKind::Plus || peek().kind == TokenKind::Minus)) {
      char op = toks_[pos_++].text[0];
      lhs = NumExpr::binary(op, std::move(lhs), num_term());
    }
    return lhs;
  }

  NumExpr num_term() {
    NumExpr lhs = num_unary();
    while (!at_end() && (peek().kind == TokenKind::Star || peek().kind == TokenKind::Slash)) {
      char op = toks_[pos_++].text[0];
      lhs = NumExpr::binary(op, std::move(lhs), num_unary());
    }
    return lhs;
  }

  NumExpr num_unary() {
    if (accept(TokenKind::Minus)) return NumExpr::negate(num_unary());
    return num_primary();
  }

  NumExpr num_primary() {
    if (accept(TokenKind::LParen)) {
      NumExpr e = num_expr();
      expect(TokenKind::RParen, "')'");
      return e;
    }
    if (!at_end() && peek().kind == TokenKind::Number) return NumExpr::constant(toks_[pos_++].number);
    if (!at_end() && peek().kind == TokenKind::Identifier) {
      const Token& t = toks_[pos_];
      if (!t.quoted && peek(1).kind == TokenKind::LParen && pos_ + 1 < toks_.size()) {
        std::string fn = lower(t.text);
        if (!is_known_function(fn)) {
          fail_msg("unknown function '" + t.text + "' (supported: log, log10, exp, abs, sqrt)");
        }
        pos_ += 2;
        NumExpr arg = num_expr();
        expect(TokenKind::RParen, "')'");
        return NumExpr::call(fn, std::move(arg));
      }
      ++pos_;
      return NumExpr::column(t.text);
    }
    fail({"number", "column", "function call", "'('"});
  }

  Predicate predicate() {
    Predicate p;
    do {
      Comparison c;
      c.column = identifier("column name");
      if (at_end() || peek().kind != TokenKind::Compare) fail({"comparison operator"});
      const std::string op = toks_[pos_++].text;
      if (op == "=") c.op = CompareOp::Eq;
      else if (op == "<>") c.op = CompareOp::Ne;
      else if (op == "<") c.op = CompareOp::Lt;
      else if (op == "<=") c.op = CompareOp::Le;
      else if (op == ">") c.op = CompareOp::Gt;
      else c.op = CompareOp::Ge;
      if (!at_end() && peek().kind == TokenKind::String) {
        c.value = toks_[pos_++].text;
      } else {
        c.value = number_literal("literal");
      }
      p.terms.push_back(std::move(c));
    } while (accept_keyword("AND"));
    if (peek_keyword("OR")) fail_msg("OR is not supported; WHERE takes a conjunction of comparisons");
    return p;
  }

  // -- clauses --------------------------------------------------------------

  TaskHead task_head(std::optional<std::string>* over) {
    TaskHead head;
    if (accept_keyword("PREDICTION")) {
      head = PredictionHead{identifier("target column")};
    } else if (accept_keyword("CLASSIFICATION")) {
      expect_keyword("INTO");
      ClassificationHead c{label_list(false)};
      if (c.labels.size() < 2) fail_msg("CLASSIFICATION INTO needs at least two labels");
      head = std::move(c);
    } else if (accept_keyword("CLUSTER")) {
      expect_keyword("OF");
      head = ClusterHead{int_expr()};
    } else {
      fail({"PREDICTION", "CLASSIFICATION", "CLUSTER"});
    }
    if (over && accept_keyword("OVER")) *over = identifier("table name");
    return head;
  }

  FeatureList feature_list() {
    FeatureList f;
    if (accept(TokenKind::Star)) {
      f.star = true;
    } else {
      f.names = identifier_list("feature column");
    }
    return f;
  }

  double accuracy_clause() {
    expect_keyword("MODEL");
    expect_keyword("ACCURACY");
    return number_literal("accuracy value");
  }

  Statement statement() {
    SourcePos pos{peek().line, peek().column};
    Statement s;
    if (accept_keyword("GENERATE")) {
      s.body = generate();
    } else if (accept_keyword("CONSTRUCT")) {
      s.body = construct();
    } else if (accept_keyword("INSPECT")) {
      s.body = inspect();
    } else {
      fail({"GENERATE", "CONSTRUCT", "INSPECT"});
    }
    s.pos = pos;
    return s;
  }

  GenerateStmt generate() {
    GenerateStmt g;
    if (accept_keyword("DISPLAY")) {
      expect_keyword("OF");
      g.display = true;
    }
    g.task = task_head(&g.over);

    auto model_clause = [&]() -> bool {
      if (peek_keyword("USING") || peek_keyword("ALGORITHM")) {
        if (!std::holds_alternative<std::monostate>(g.model)) {
          fail_msg("USING MODEL and ALGORITHM are mutually exclusive", ErrorCode::ExclusivityError);
        }
        if (accept_keyword("USING")) {
          if (accept_keyword("MODEL")) {
            g.model = StoredModelRef{identifier("model name")};
            return true;
          }
          if (!accept_keyword("ALGORITHM")) fail({"MODEL", "ALGORITHM"});
        } else {
          expect_keyword("ALGORITHM");
        }
        g.model = AlgorithmRef{identifier("algorithm name")};
        return true;
      }
      return false;
    };

    model_clause();
    // A second model clause, wherever it appears, violates the exclusive or.
    auto exclusive_guard = [&] {
      if ((peek_keyword("USING") || peek_keyword("ALGORITHM")) &&
          !std::holds_alternative<std::monostate>(g.model)) {
        fail_msg("USING MODEL and ALGORITHM are mutually exclusive", ErrorCode::ExclusivityError);
      }
    };
    exclusive_guard();
    if (accept_keyword("WITH")) g.accuracy = accuracy_clause();
    exclusive_guard();
    bool have_label = false;
    if (accept_keyword("LABEL")) {
      g.labels = identifier_list("label column");
      have_label = true;
    }
    if (accept_keyword("FEATURES")) g.features = feature_list();
    if (!have_label && accept_keyword("LABEL")) g.labels = identifier_list("label column");
    if (accept_keyword("FROM")) g.from = identifier_list("table name");
    if (accept_keyword("WHERE")) g.where = predicate();
    exclusive_guard();

    if (!std::holds_alternative<StoredModelRef>(g.model)) {
      if (!g.features) fail_msg("FEATURES is required unless USING MODEL names a stored model; found " + found());
      if (g.from.empty()) fail_msg("FROM is required unless USING MODEL names a stored model; found " + found());
    }
    return g;
  }

  ConstructStmt construct() {
    ConstructStmt c;
    c.model_name = identifier("model name");
    if (accept_keyword("AS")) {
      if (accept_keyword("SUPERVISED")) c.supervision = Supervision::Supervised;
      else if (accept_keyword("UNSUPERVISED")) c.supervision = Supervision::Unsupervised;
      else fail({"SUPERVISED", "UNSUPERVISED"});
    }
    expect_keyword("FOR");
    c.task = task_head(nullptr);
    if (accept_keyword("USING")) {
      if (peek_keyword("MODEL")) fail_msg("CONSTRUCT takes USING <algorithm>, not USING MODEL");
      accept_keyword("ALGORITHM");
      c.algorithm = identifier("algorithm name");
    }
    if (accept_keyword("WITH")) c.accuracy = accuracy_clause();
    expect_keyword("TRAIN");
    expect_keyword("ON");
    c.train_n = int_expr();
    expect_keyword("TEST");
    expect_keyword("ON");
    c.test_m = int_expr();
    expect_keyword("FEATURES");
    c.features = feature_list();
    expect_keyword("FROM");
    c.from = identifier_list("table name");
    if (accept_keyword("WHERE")) c.where = predicate();
    return c;
  }

  InspectStmt inspect() {
    InspectStmt s;
    std::set<std::string> seen;
    do {
      InspectAction a;
      const int line = peek().line, col = peek().column;
      a.column = identifier("column name");
      if (!seen.insert(a.column).second) {
        throw SyntaxError(ErrorCode::ParseError,
                          "column '" + a.column + "' has more than one INSPECT action (line " +
                              std::to_string(line) + ", column " + std::to_string(col) + ")",
                          line, col);
      }
      if (accept_keyword("CATEGORIZE")) {
        expect_keyword("INTO");
        a.action = Categorize{label_list(true)};
      } else if (accept_keyword("IMPUTE")) {
        a.action = Impute{};
      } else if (accept_keyword("NUMERIZE")) {
        expect_keyword("AS");
        NumExpr e = num_expr();
        check_numerize_refs(e, a.column);
        a.action = Numerize{std::move(e)};
      } else if (accept_keyword("DEDUPLICATE")) {
        a.action = Deduplicate{};
      } else {
        fail({"CATEGORIZE", "IMPUTE", "NUMERIZE", "DEDUPLICATE"});
      }
      s.actions.push_back(std::move(a));
    } while (accept(TokenKind::Comma));
    expect_keyword("FROM");
    s.from = identifier_list("table name");
    if (accept_keyword("WHERE")) s.where = predicate();
    return s;
  }

  void check_numerize_refs(const NumExpr& e, const std::string& column) const {
    if (e.kind == NumExpr::Kind::ColumnRef && e.name != column) {
      fail_msg("NUMERIZE expression for '" + column + "' may only reference '" + column +
               "', found '" + e.name + "'");
    }
    for (const auto& op : e.operands) check_numerize_refs(op, column);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

Program parse_program(std::string_view text) {
  Parser p(tokenize(text));
  return p.program();
}

}  // namespace mql
