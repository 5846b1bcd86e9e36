#include "mql/table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <unordered_set>

#include "mql/error.hpp"

namespace mql {

std::string_view dtype_name(DataType t) {
  return t == DataType::Numeric ? "numeric" : "categorical";
}

std::size_t Column::missing_count() const {
  return static_cast<std::size_t>(
      std::count_if(cells.begin(), cells.end(), [](const Cell& c) { return is_missing(c); }));
}

std::set<std::string> Column::distinct_tokens() const {
  std::set<std::string> out;
  for (const auto& c : cells) {
    if (!is_missing(c)) out.insert(cell_token(c));
  }
  return out;
}

Table::Table(std::string name, std::vector<Column> columns)
    : name_(std::move(name)), columns_(std::move(columns)) {
  rows_ = columns_.empty() ? 0 : columns_.front().cells.size();
  std::unordered_set<std::string_view> seen;
  for (const auto& col : columns_) {
    if (col.cells.size() != rows_) {
      throw Error(ErrorCode::FormatError,
                  "column '" + col.name + "' has " + std::to_string(col.cells.size()) +
                      " cells, expected " + std::to_string(rows_));
    }
    if (!seen.insert(col.name).second) {
      throw Error(ErrorCode::DuplicateColumn, "duplicate column name '" + col.name + "'");
    }
  }
}

std::vector<std::string> Table::column_names() const {
  std::vector<std::string> out;
  out.reserve(columns_.size());
  for (const auto& c : columns_) out.push_back(c.name);
  return out;
}

std::optional<std::size_t> Table::find(std::string_view column) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name == column) return i;
  }
  return std::nullopt;
}

const Column& Table::column(std::string_view column) const {
  auto idx = find(column);
  if (!idx) {
    throw Error(ErrorCode::UnknownColumn,
                "unknown column '" + std::string(column) + "' in table '" + name_ + "'");
  }
  return columns_[*idx];
}

Table Table::renamed(std::string name) const {
  Table t = *this;
  t.name_ = std::move(name);
  return t;
}

Table Table::with_column(Column column) const {
  auto idx = find(column.name);
  if (!idx) {
    throw Error(ErrorCode::UnknownColumn, "unknown column '" + column.name + "'");
  }
  std::vector<Column> cols = columns_;
  cols[*idx] = std::move(column);
  return Table(name_, std::move(cols));
}

Table Table::take_rows(std::span<const std::size_t> rows) const {
  std::vector<Column> cols;
  cols.reserve(columns_.size());
  for (const auto& c : columns_) {
    Column out{c.name, c.dtype, {}};
    out.cells.reserve(rows.size());
    for (auto r : rows) out.cells.push_back(c.cells.at(r));
    cols.push_back(std::move(out));
  }
  return Table(name_, std::move(cols));
}

// ---------------------------------------------------------------------------

namespace {

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    char x = a[i], y = b[i];
    if (x >= 'A' && x <= 'Z') x = static_cast<char>(x - 'A' + 'a');
    if (y >= 'A' && y <= 'Z') y = static_cast<char>(y - 'A' + 'a');
    if (x != y) return false;
  }
  return true;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace

bool is_missing_token(std::string_view token) {
  token = trim(token);
  return token.empty() || token == "-" || iequals(token, "NA") || iequals(token, "NaN");
}

std::optional<double> parse_number(std::string_view token) {
  token = trim(token);
  if (token.empty()) return std::nullopt;
  if (token.front() == '+') token.remove_prefix(1);
  // from_chars accepts "inf"/"nan" spellings; only digits, sign, dot and
  // exponent are numeric here.
  for (char ch : token) {
    if (!((ch >= '0' && ch <= '9') || ch == '.' || ch == '-' || ch == 'e' || ch == 'E' ||
          ch == '+')) {
      return std::nullopt;
    }
  }
  double value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) return std::nullopt;
  if (!std::isfinite(value)) return std::nullopt;
  return value;
}

std::string format_number(double value) {
  if (value == 0) return "0";  // folds -0
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string cell_token(const Cell& cell) {
  if (auto d = std::get_if<double>(&cell)) return format_number(*d);
  if (auto s = std::get_if<std::string>(&cell)) return *s;
  return {};
}

// ---------------------------------------------------------------------------

std::string_view compare_op_text(CompareOp op) {
  switch (op) {
    case CompareOp::Eq: return "=";
    case CompareOp::Ne: return "<>";
    case CompareOp::Lt: return "<";
    case CompareOp::Le: return "<=";
    case CompareOp::Gt: return ">";
    case CompareOp::Ge: return ">=";
  }
  return "?";
}

namespace {

template <typename T>
bool compare(const T& a, CompareOp op, const T& b) {
  switch (op) {
    case CompareOp::Eq: return a == b;
    case CompareOp::Ne: return a != b;
    case CompareOp::Lt: return a < b;
    case CompareOp::Le: return a <= b;
    case CompareOp::Gt: return a > b;
    case CompareOp::Ge: return a >= b;
  }
  return false;
}

bool is_ordering(CompareOp op) { return op != CompareOp::Eq && op != CompareOp::Ne; }

}  // namespace

Table apply_where(const Table& table, const Predicate& predicate) {
  if (predicate.empty()) return table;

  struct Bound {
    const Column* column;
    const Comparison* cmp;
  };
  std::vector<Bound> bound;
  for (const auto& term : predicate.terms) {
    const Column& col = table.column(term.column);
    bool literal_numeric = std::holds_alternative<double>(term.value);
    if (col.dtype == DataType::Categorical && is_ordering(term.op)) {
      throw Error(ErrorCode::TypeMismatch, "ordering comparison '" +
                                               std::string(compare_op_text(term.op)) +
                                               "' on categorical column '" + col.name + "'");
    }
    if (col.dtype == DataType::Numeric && !literal_numeric) {
      throw Error(ErrorCode::TypeMismatch,
                  "numeric column '" + col.name + "' compared with a text literal");
    }
    bound.push_back({&col, &term});
  }

  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    bool ok = true;
    for (const auto& b : bound) {
      if (b.column->missing(r)) {
        ok = false;
        break;
      }
      if (b.column->dtype == DataType::Numeric) {
        ok = compare(b.column->number(r), b.cmp->op, std::get<double>(b.cmp->value));
      } else {
        std::string lit = std::visit(
            [](const auto& v) -> std::string {
              if constexpr (std::is_same_v<std::decay_t<decltype(v)>, double>) {
                return format_number(v);
              } else {
                return v;
              }
            },
            b.cmp->value);
        ok = compare(b.column->text(r), b.cmp->op, lit);
      }
      if (!ok) break;
    }
    if (ok) keep.push_back(r);
  }
  return table.take_rows(keep);
}

Table select_columns(const Table& table, std::span<const std::string> names) {
  std::vector<Column> cols;
  std::unordered_set<std::string_view> seen;
  for (const auto& n : names) {
    if (!seen.insert(n).second) {
      throw Error(ErrorCode::DuplicateColumn, "column '" + n + "' listed more than once");
    }
    cols.push_back(table.column(n));
  }
  return Table(table.name(), std::move(cols));
}

double column_median(const Column& column) {
  if (column.dtype != DataType::Numeric) {
    throw Error(ErrorCode::NotNumeric, "median of categorical column '" + column.name + "'");
  }
  std::vector<double> v;
  for (std::size_t r = 0; r < column.size(); ++r) {
    if (!column.missing(r)) v.push_back(column.number(r));
  }
  if (v.empty()) {
    throw Error(ErrorCode::EmptyColumn, "column '" + column.name + "' has no present values");
  }
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

std::string column_mode(const Column& column) {
  std::map<std::string, std::size_t> counts;
  for (const auto& c : column.cells) {
    if (!is_missing(c)) ++counts[cell_token(c)];
  }
  if (counts.empty()) {
    throw Error(ErrorCode::EmptyColumn, "column '" + column.name + "' has no present values");
  }
  // std::map iterates in lexicographic order, so the first maximum wins ties.
  auto best = counts.begin();
  for (auto it = counts.begin(); it != counts.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return best->first;
}

ColumnStats column_stats(const Table& table, std::string_view name) {
  const Column& col = table.column(name);
  ColumnStats s;
  s.missing_count = col.missing_count();
  s.distinct = col.distinct_tokens();
  s.mode = column_mode(col);
  if (col.dtype == DataType::Numeric) s.median = column_median(col);
  return s;
}

}  // namespace mql
