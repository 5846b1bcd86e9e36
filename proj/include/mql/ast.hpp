#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mql/table.hpp"

namespace mql {

// Integer expressions used for TRAIN ON / TEST ON / CLUSTER OF: literals,
// + - * / (integer division), parentheses and COUNT(*) over the FROM table.
struct IntExpr {
  enum class Kind { Literal, CountStar, Binary };

  Kind kind = Kind::Literal;
  long long value = 0;
  char op = 0;  // '+', '-', '*', '/' for Binary
  std::vector<IntExpr> operands;

  static IntExpr literal(long long v) { return IntExpr{Kind::Literal, v, 0, {}}; }
  static IntExpr count_star() { return IntExpr{Kind::CountStar, 0, 0, {}}; }
  static IntExpr binary(char op, IntExpr lhs, IntExpr rhs);

  bool operator==(const IntExpr&) const = default;
};

// Evaluates with `row_count` bound to COUNT(*). Throws RangeError on
// division by zero; MissingInput when COUNT(*) has no table to count.
long long evaluate(const IntExpr& e, std::optional<long long> row_count);

// NUMERIZE expressions: column references, real literals, + - * /, unary
// minus, and log/log10/exp/abs/sqrt.
struct NumExpr {
  enum class Kind { Number, ColumnRef, Negate, Binary, Call };

  Kind kind = Kind::Number;
  double number = 0;
  std::string name;  // column or function name
  char op = 0;
  std::vector<NumExpr> operands;

  static NumExpr constant(double v) { return NumExpr{Kind::Number, v, {}, 0, {}}; }
  static NumExpr column(std::string n) { return NumExpr{Kind::ColumnRef, 0, std::move(n), 0, {}}; }
  static NumExpr negate(NumExpr e);
  static NumExpr binary(char op, NumExpr lhs, NumExpr rhs);
  static NumExpr call(std::string fn, NumExpr arg);

  bool operator==(const NumExpr&) const = default;
};

bool is_known_function(std::string_view name);

// ---------------------------------------------------------------------------

struct PredictionHead {
  std::string target;
  bool operator==(const PredictionHead&) const = default;
};

struct ClassificationHead {
  std::vector<std::string> labels;
  bool operator==(const ClassificationHead&) const = default;
};

struct ClusterHead {
  IntExpr k;
  bool operator==(const ClusterHead&) const = default;
};

using TaskHead = std::variant<PredictionHead, ClassificationHead, ClusterHead>;

// Feature list, or `*` meaning every column except target/label/class columns.
struct FeatureList {
  bool star = false;
  std::vector<std::string> names;
  bool operator==(const FeatureList&) const = default;
};

struct StoredModelRef {
  std::string name;
  bool operator==(const StoredModelRef&) const = default;
};

struct AlgorithmRef {
  std::string name;
  bool operator==(const AlgorithmRef&) const = default;
};

using ModelRef = std::variant<std::monostate, StoredModelRef, AlgorithmRef>;

struct GenerateStmt {
  bool display = false;
  TaskHead task;
  std::optional<std::string> over;
  ModelRef model;
  std::optional<double> accuracy;
  std::vector<std::string> labels;
  std::optional<FeatureList> features;
  std::vector<std::string> from;
  Predicate where;

  bool operator==(const GenerateStmt&) const = default;
};

enum class Supervision { Supervised, Unsupervised };

struct ConstructStmt {
  std::string model_name;
  std::optional<Supervision> supervision;
  TaskHead task;
  std::optional<std::string> algorithm;
  std::optional<double> accuracy;
  IntExpr train_n;
  IntExpr test_m;
  FeatureList features;
  std::vector<std::string> from;
  Predicate where;

  bool operator==(const ConstructStmt&) const = default;
};

struct Categorize {
  std::vector<std::string> labels;
  bool operator==(const Categorize&) const = default;
};
struct Impute {
  bool operator==(const Impute&) const = default;
};
struct Numerize {
  NumExpr expr;
  bool operator==(const Numerize&) const = default;
};
struct Deduplicate {
  bool operator==(const Deduplicate&) const = default;
};

using WrangleAction = std::variant<Categorize, Impute, Numerize, Deduplicate>;

struct InspectAction {
  std::string column;
  WrangleAction action;
  bool operator==(const InspectAction&) const = default;
};

struct InspectStmt {
  std::vector<InspectAction> actions;
  std::vector<std::string> from;
  Predicate where;

  bool operator==(const InspectStmt&) const = default;
};

struct SourcePos {
  int line = 1;
  int column = 1;
};

struct Statement {
  std::variant<GenerateStmt, ConstructStmt, InspectStmt> body;
  SourcePos pos;  // position of the leading keyword; not part of equality

  bool operator==(const Statement& other) const { return body == other.body; }
};

using Program = std::vector<Statement>;

}  // namespace mql
