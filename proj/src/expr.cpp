#include <array>

#include "mql/ast.hpp"
#include "mql/error.hpp"

namespace mql {

IntExpr IntExpr::binary(char op, IntExpr lhs, IntExpr rhs) {
  IntExpr e;
  e.kind = Kind::Binary;
  e.op = op;
  e.operands.push_back(std::move(lhs));
  e.operands.push_back(std::move(rhs));
  return e;
}

long long evaluate(const IntExpr& e, std::optional<long long> row_count) {
  switch (e.kind) {
    case IntExpr::Kind::Literal:
      return e.value;
    case IntExpr::Kind::CountStar:
      if (!row_count) throw Error(ErrorCode::MissingInput, "COUNT(*) needs a FROM table");
      return *row_count;
    case IntExpr::Kind::Binary: {
      long long a = evaluate(e.operands[0], row_count);
      long long b = evaluate(e.operands[1], row_count);
      switch (e.op) {
        case '+': return a + b;
        case '-': return a - b;
        case '*': return a * b;
        case '/':
          if (b == 0) throw Error(ErrorCode::RangeError, "integer division by zero");
          return a / b;
      }
    }
  }
  throw Error(ErrorCode::ParseError, "malformed integer expression");
}

NumExpr NumExpr::negate(NumExpr e) {
  NumExpr out;
  out.kind = Kind::Negate;
  out.operands.push_back(std::move(e));
  return out;
}

NumExpr NumExpr::binary(char op, NumExpr lhs, NumExpr rhs) {
  NumExpr out;
  out.kind = Kind::Binary;
  out.op = op;
  out.operands.push_back(std::move(lhs));
  out.operands.push_back(std::move(rhs));
  return out;
}

NumExpr NumExpr::call(std::string fn, NumExpr arg) {
  NumExpr out;
  out.kind = Kind::Call;
  out.name = std::move(fn);
  out.operands.push_back(std::move(arg));
  return out;
}

bool is_known_function(std::string_view name) {
  static constexpr std::array<std::string_view, 5> kFns = {"log", "log10", "exp", "abs", "sqrt"};
  for (auto f : kFns) {
    if (f == name) return true;
  }
  return false;
}

}  // namespace mql
