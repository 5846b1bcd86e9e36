#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mql {

// A cell is missing (monostate), a finite real, or a text token.
using Cell = std::variant<std::monostate, double, std::string>;

inline bool is_missing(const Cell& c) { return std::holds_alternative<std::monostate>(c); }

enum class DataType { Numeric, Categorical };

std::string_view dtype_name(DataType t);

struct Column {
  std::string name;
  DataType dtype = DataType::Numeric;
  std::vector<Cell> cells;

  std::size_t size() const { return cells.size(); }
  bool missing(std::size_t row) const { return is_missing(cells[row]); }
  double number(std::size_t row) const { return std::get<double>(cells[row]); }
  const std::string& text(std::size_t row) const { return std::get<std::string>(cells[row]); }
  std::size_t missing_count() const;

  // Present cells rendered as tokens (numbers in shortest round-trip form).
  std::set<std::string> distinct_tokens() const;

  bool operator==(const Column&) const = default;
};

// Immutable named table. Columns all share one row count and have unique,
// case-sensitive names.
class Table {
 public:
  Table() = default;
  Table(std::string name, std::vector<Column> columns);

  const std::string& name() const { return name_; }
  std::size_t row_count() const { return rows_; }
  std::size_t column_count() const { return columns_.size(); }
  const std::vector<Column>& columns() const { return columns_; }
  std::vector<std::string> column_names() const;

  std::optional<std::size_t> find(std::string_view column) const;
  bool has_column(std::string_view column) const { return find(column).has_value(); }
  // Throws UnknownColumn.
  const Column& column(std::string_view column) const;

  Table renamed(std::string name) const;
  // Replaces the column of the same name; row count must match.
  Table with_column(Column column) const;
  Table take_rows(std::span<const std::size_t> rows) const;

  bool operator==(const Table&) const = default;

 private:
  std::string name_;
  std::vector<Column> columns_;
  std::size_t rows_ = 0;
};

// ---------------------------------------------------------------------------
// Numbers and missing tokens

// Empty, `-`, `NA`, `NaN` (case-insensitive).
bool is_missing_token(std::string_view token);

// Strict decimal parse of the whole token (surrounding blanks ignored);
// non-finite values are rejected.
std::optional<double> parse_number(std::string_view token);

// Shortest representation that parses back to the identical double.
std::string format_number(double value);

std::string cell_token(const Cell& cell);

// ---------------------------------------------------------------------------
// CSV

Table parse_csv(std::string_view text, std::string name);
Table load_csv(const std::filesystem::path& path);
Table load_csv(const std::filesystem::path& path, std::string name);
std::string to_csv(const Table& table);
void write_csv(const Table& table, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Row filters

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };

std::string_view compare_op_text(CompareOp op);

using Literal = std::variant<double, std::string>;

struct Comparison {
  std::string column;
  CompareOp op = CompareOp::Eq;
  Literal value;

  bool operator==(const Comparison&) const = default;
};

// Conjunction of comparisons; empty means "all rows".
struct Predicate {
  std::vector<Comparison> terms;

  bool empty() const { return terms.empty(); }
  bool operator==(const Predicate&) const = default;
};

Table apply_where(const Table& table, const Predicate& predicate);
Table select_columns(const Table& table, std::span<const std::string> names);

struct ColumnStats {
  std::optional<double> median;  // numeric columns only
  std::string mode;
  std::set<std::string> distinct;
  std::size_t missing_count = 0;
};

// Throws UnknownColumn, or EmptyColumn when every cell is missing.
ColumnStats column_stats(const Table& table, std::string_view name);

double column_median(const Column& column);
std::string column_mode(const Column& column);

}  // namespace mql
