#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mql/ast.hpp"
#include "mql/error.hpp"
#include "mql/learn.hpp"
#include "mql/table.hpp"

namespace mql {

enum class StmtType { Gen, Con, Ins };
enum class ModelMode { Stored, Custom, Default, Best };

std::string_view stmt_type_name(StmtType t);    // "gen" / "con" / "ins"
std::string_view model_mode_name(ModelMode m);  // "stored" / "custom" / "default" / "best"

// Descriptor of one statement, the input to planning and emission.
struct Delta {
  StmtType st_type = StmtType::Gen;
  ModelMode model = ModelMode::Default;
  MlType ml_type = MlType::Pred;
  std::optional<std::string> mod_name;  // stored model (GENERATE) or model to build (CONSTRUCT)
  std::optional<FeatureList> features;
  bool display = false;
  bool label = false;
  std::vector<std::string> label_columns;
  std::optional<std::string> alg_name;
  std::optional<double> accuracy;      // normalized to (0,1] when the raw value is valid
  std::optional<double> accuracy_raw;  // as written
  std::optional<std::string> target;
  std::vector<std::string> class_labels;
  std::optional<IntExpr> k_expr;
  std::optional<std::string> over_table;
  std::optional<IntExpr> train_n;
  std::optional<IntExpr> test_m;
  std::optional<Supervision> supervision;
  std::vector<std::string> from_tables;
  Predicate where;
  std::vector<InspectAction> actions;
  std::size_t statement_index = 0;
};

Delta gather(const Statement& s, std::size_t statement_index = 0);

struct NormalizedAccuracy {
  double value = 0;
  bool scaled = false;  // true when a percentage was divided by 100
};

// (0,1] is kept, (1,100] is read as a percentage; anything else throws
// RangeError.
NormalizedAccuracy normalize_accuracy(double p);

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  ErrorCode code = ErrorCode::ParseError;
  std::string clause;   // e.g. "FEATURES", may be empty
  std::string message;
  std::size_t statement_index = 0;  // 1-based; 0 when not tied to a statement

  bool is_error() const { return severity == Severity::Error; }
  // error[MQL-028] statement 2, FEATURES: message
  std::string render() const;
};

Diagnostic diagnostic_from(const Error& e, std::size_t statement_index, std::string clause = {});

struct ModelInfo {
  std::string name;
  MlType ml_type = MlType::Pred;
  std::string algorithm;
  std::vector<FeatureSpec> features;
  std::optional<std::string> target;
};

// Schema lookup used by validation. `table` returns nullptr for unknown
// names and may throw Error for unreadable files.
class Catalog {
 public:
  virtual ~Catalog() = default;
  virtual std::shared_ptr<const Table> table(std::string_view name) const = 0;
  virtual std::optional<ModelInfo> model(std::string_view name) const = 0;
};

std::vector<Diagnostic> validate(const Delta& d, const Catalog& catalog);

// The class column is the unique column (outside `excluded`) whose distinct
// tokens include every label. Throws UnknownLabels / AmbiguousTarget.
std::string infer_class_column(const Table& t, std::span<const std::string> labels,
                               std::span<const std::string> excluded = {});

// Resolved feature list: `*` expands to every column except the target,
// class column and LABEL columns; an explicit list drops the class column.
std::vector<std::string> expand_features(const Delta& d, const Table& from,
                                         const std::optional<std::string>& class_column);

}  // namespace mql
