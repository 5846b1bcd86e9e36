#pragma once

#include <string>
#include <vector>

#include "mql/ast.hpp"
#include "mql/table.hpp"

namespace mql {

// One line of the wrangle log.
struct WrangleStep {
  std::string column;
  std::string action;  // CATEGORIZE / IMPUTE / NUMERIZE / DEDUPLICATE
  std::size_t rows_in = 0;
  std::size_t rows_out = 0;
  std::size_t cells_changed = 0;
};

struct InspectResult {
  Table table;
  std::vector<WrangleStep> log;
};

// Applies the actions in order; WHERE must already have been applied.
InspectResult inspect_execute(const InspectStmt& s, const Table& input);

// Equal-frequency binning at the j/x linear-interpolation quantiles.
Table categorize(const Table& t, const std::string& column, std::span<const std::string> labels);
// Median for numeric columns, mode for categorical ones.
Table impute(const Table& t, const std::string& column);
// Applies `e` to every present cell of `column`; the result is numeric.
Table numerize(const Table& t, const std::string& column, const NumExpr& e);
// Whole-row uniqueness, first occurrence kept.
Table deduplicate(const Table& t);

// Evaluates `e` with every column reference bound to `value`. Throws
// DomainError (message without row context) for undefined results.
double eval_numeric(const NumExpr& e, double value);

// Quantile edges used by categorize (x - 1 values).
std::vector<double> quantile_edges(std::vector<double> values, std::size_t bins);

std::string wrangle_log_text(const std::string& table_name, const std::vector<WrangleStep>& log);

}  // namespace mql
