#include "mql/wrangler.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <set>

#include "mql/error.hpp"

namespace mql {

double eval_numeric(const NumExpr& e, double value) {
  switch (e.kind) {
    case NumExpr::Kind::Number: return e.number;
    case NumExpr::Kind::ColumnRef: return value;
    case NumExpr::Kind::Negate: return -eval_numeric(e.operands[0], value);
    case NumExpr::Kind::Binary: {
      const double a = eval_numeric(e.operands[0], value);
      const double b = eval_numeric(e.operands[1], value);
      switch (e.op) {
        case '+': return a + b;
        case '-': return a - b;
        case '*': return a * b;
        default:
          if (b == 0) throw Error(ErrorCode::DomainError, "division by zero");
          return a / b;
      }
    }
    case NumExpr::Kind::Call: {
      const double x = eval_numeric(e.operands[0], value);
      if (e.name == "log" || e.name == "log10") {
        if (!(x > 0)) {
          throw Error(ErrorCode::DomainError, e.name + " of non-positive value " + format_number(x));
        }
        return e.name == "log" ? std::log(x) : std::log10(x);
      }
      if (e.name == "sqrt") {
        if (x < 0) throw Error(ErrorCode::DomainError, "sqrt of negative value " + format_number(x));
        return std::sqrt(x);
      }
      if (e.name == "exp") return std::exp(x);
      if (e.name == "abs") return std::abs(x);
      throw Error(ErrorCode::DomainError, "unknown function '" + e.name + "'");
    }
  }
  return 0;
}

std::vector<double> quantile_edges(std::vector<double> values, std::size_t bins) {
  std::sort(values.begin(), values.end());
  std::vector<double> edges;
  const double last = static_cast<double>(values.size() - 1);
  for (std::size_t j = 1; j < bins; ++j) {
    const double pos = last * static_cast<double>(j) / static_cast<double>(bins);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    edges.push_back(values[lo] + (values[hi] - values[lo]) * frac);
  }
  return edges;
}

Table categorize(const Table& t, const std::string& column, std::span<const std::string> labels) {
  const Column& c = t.column(column);
  if (c.dtype != DataType::Numeric) {
    throw Error(ErrorCode::NotNumeric, "CATEGORIZE needs a numeric column; '" + column + "' is categorical");
  }
  if (labels.size() < 2) throw Error(ErrorCode::TooFewValues, "CATEGORIZE needs at least two labels");
  std::vector<double> present;
  for (std::size_t r = 0; r < c.size(); ++r) {
    if (!c.missing(r)) present.push_back(c.number(r));
  }
  if (present.size() < labels.size()) {
    throw Error(ErrorCode::TooFewValues,
                fmt::format("column '{}' has {} present values, fewer than the {} labels", column,
                            present.size(), labels.size()));
  }
  const auto edges = quantile_edges(present, labels.size());
  Column out{c.name, DataType::Categorical, {}};
  out.cells.reserve(c.size());
  for (std::size_t r = 0; r < c.size(); ++r) {
    if (c.missing(r)) {
      out.cells.emplace_back();
      continue;
    }
    // first edge >= v, or the last label
    const auto j = static_cast<std::size_t>(std::lower_bound(edges.begin(), edges.end(), c.number(r)) -
                                            edges.begin());
    out.cells.emplace_back(labels[j]);
  }
  return t.with_column(std::move(out));
}

Table impute(const Table& t, const std::string& column) {
  const Column& c = t.column(column);
  if (c.missing_count() == c.size()) {
    throw Error(ErrorCode::EmptyColumn, "cannot impute '" + column + "': every cell is missing");
  }
  if (c.missing_count() == 0) return t;
  Cell fill = c.dtype == DataType::Numeric ? Cell{column_median(c)} : Cell{column_mode(c)};
  Column out = c;
  for (auto& cell : out.cells) {
    if (is_missing(cell)) cell = fill;
  }
  return t.with_column(std::move(out));
}

Table numerize(const Table& t, const std::string& column, const NumExpr& e) {
  const Column& c = t.column(column);
  Column out{c.name, DataType::Numeric, {}};
  out.cells.reserve(c.size());
  for (std::size_t r = 0; r < c.size(); ++r) {
    if (c.missing(r)) {
      out.cells.emplace_back();
      continue;
    }
    double v;
    if (c.dtype == DataType::Numeric) {
      v = c.number(r);
    } else {
      auto parsed = parse_number(c.text(r));
      if (!parsed) {
        throw Error(ErrorCode::NotNumeric, fmt::format("NUMERIZE {}: row {} holds non-numeric token '{}'",
                                                       column, r + 1, c.text(r)));
      }
      v = *parsed;
    }
    double result;
    try {
      result = eval_numeric(e, v);
    } catch (const Error& err) {
      throw Error(err.code(), fmt::format("NUMERIZE {}: row {}: {}", column, r + 1, err.what()));
    }
    if (!std::isfinite(result)) {
      throw Error(ErrorCode::DomainError,
                  fmt::format("NUMERIZE {}: row {}: result is not finite", column, r + 1));
    }
    out.cells.emplace_back(result);
  }
  return t.with_column(std::move(out));
}

Table deduplicate(const Table& t) {
  std::set<std::vector<Cell>> seen;
  std::vector<std::size_t> keep;
  std::vector<Cell> row(t.column_count());
  for (std::size_t r = 0; r < t.row_count(); ++r) {
    for (std::size_t j = 0; j < t.column_count(); ++j) row[j] = t.columns()[j].cells[r];
    if (seen.insert(row).second) keep.push_back(r);
  }
  if (keep.size() == t.row_count()) return t;
  return t.take_rows(keep);
}

namespace {

std::size_t changed_cells(const Table& before, const Table& after, const std::string& column) {
  if (before.row_count() != after.row_count()) return 0;
  const Column& a = before.column(column);
  const Column& b = after.column(column);
  std::size_t n = 0;
  for (std::size_t r = 0; r < a.size(); ++r) n += a.cells[r] != b.cells[r] ? 1 : 0;
  return n;
}

}  // namespace

InspectResult inspect_execute(const InspectStmt& s, const Table& input) {
  InspectResult res{input, {}};
  for (const auto& a : s.actions) {
    (void)res.table.column(a.column);  // UnknownColumn before any work
    const Table before = res.table;
    WrangleStep step{a.column, "", before.row_count(), 0, 0};
    std::visit(
        [&](const auto& act) {
          using A = std::decay_t<decltype(act)>;
          if constexpr (std::is_same_v<A, Categorize>) {
            step.action = "CATEGORIZE";
            res.table = categorize(res.table, a.column, act.labels);
          } else if constexpr (std::is_same_v<A, Impute>) {
            step.action = "IMPUTE";
            res.table = impute(res.table, a.column);
          } else if constexpr (std::is_same_v<A, Numerize>) {
            step.action = "NUMERIZE";
            res.table = numerize(res.table, a.column, act.expr);
          } else {
            step.action = "DEDUPLICATE";
            res.table = deduplicate(res.table);
          }
        },
        a.action);
    step.rows_out = res.table.row_count();
    step.cells_changed = changed_cells(before, res.table, a.column);
    res.log.push_back(std::move(step));
  }
  return res;
}

std::string wrangle_log_text(const std::string& table_name, const std::vector<WrangleStep>& log) {
  std::string out = "table: " + table_name + "\n";
  for (const auto& s : log) {
    out += fmt::format("{} {}: rows {} -> {}, cells changed {}\n", s.action, s.column, s.rows_in,
                       s.rows_out, s.cells_changed);
  }
  return out;
}

}  // namespace mql
