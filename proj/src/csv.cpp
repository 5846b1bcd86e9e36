#include <fstream>
#include <sstream>

#include "mql/error.hpp"
#include "mql/table.hpp"

namespace mql {

namespace {

// RFC-4180 record splitter. Accepts \n and \r\n terminators.
std::vector<std::vector<std::string>> split_records(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    records.push_back(std::move(record));
    record.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty()) {
          throw Error(ErrorCode::FormatError,
                      "stray quote inside unquoted field on line " + std::to_string(line));
        }
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        end_field();
        field_started = true;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        field.push_back(c);
        break;
      case '\n':
        end_record();
        ++line;
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw Error(ErrorCode::FormatError, "unterminated quoted field");
  if (field_started || !field.empty() || !record.empty()) end_record();
  return records;
}

bool needs_quotes(std::string_view s) {
  if (s.empty()) return false;
  if (s.front() == ' ' || s.back() == ' ') return true;
  return s.find_first_of(",\"\r\n") != std::string_view::npos;
}

void append_field(std::string& out, std::string_view s) {
  if (!needs_quotes(s)) {
    out.append(s);
    return;
  }
  out.push_back('"');
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

}  // namespace

Table parse_csv(std::string_view text, std::string name) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  auto records = split_records(text);
  if (records.empty()) throw Error(ErrorCode::FormatError, "missing header row");

  const auto& header = records.front();
  const std::size_t width = header.size();
  std::vector<std::vector<std::string>> raw(width);
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != width) {
      throw Error(ErrorCode::FormatError,
                  "record " + std::to_string(r + 1) + " has " +
                      std::to_string(records[r].size()) + " fields, header has " +
                      std::to_string(width));
    }
    for (std::size_t c = 0; c < width; ++c) raw[c].push_back(std::move(records[r][c]));
  }

  std::vector<Column> columns;
  columns.reserve(width);
  for (std::size_t c = 0; c < width; ++c) {
    Column col{header[c], DataType::Numeric, {}};
    col.cells.reserve(raw[c].size());
    bool numeric = true;
    for (const auto& tok : raw[c]) {
      if (!is_missing_token(tok) && !parse_number(tok)) {
        numeric = false;
        break;
      }
    }
    col.dtype = numeric ? DataType::Numeric : DataType::Categorical;
    for (auto& tok : raw[c]) {
      if (is_missing_token(tok)) {
        col.cells.emplace_back(std::monostate{});
      } else if (numeric) {
        col.cells.emplace_back(*parse_number(tok));
      } else {
        col.cells.emplace_back(std::move(tok));
      }
    }
    columns.push_back(std::move(col));
  }
  try {
    return Table(std::move(name), std::move(columns));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::DuplicateColumn) throw Error(ErrorCode::FormatError, e.what());
    throw;
  }
}

Table load_csv(const std::filesystem::path& path, std::string name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoError, "error reading '" + path.string() + "'");
  return parse_csv(buf.str(), std::move(name));
}

Table load_csv(const std::filesystem::path& path) {
  return load_csv(path, path.stem().string());
}

std::string to_csv(const Table& table) {
  std::string out;
  const auto& cols = table.columns();
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (c) out.push_back(',');
    append_field(out, cols[c].name);
  }
  out.push_back('\n');
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (c) out.push_back(',');
      append_field(out, cell_token(cols[c].cells[r]));
    }
    out.push_back('\n');
  }
  return out;
}

void write_csv(const Table& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  out << to_csv(table);
  if (!out) throw Error(ErrorCode::IoError, "error writing '" + path.string() + "'");
}

}  // namespace mql
