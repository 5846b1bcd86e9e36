#include "mql/render.hpp"

#include <fmt/format.h>

#include <nlohmann/json.hpp>

#include "mql/display.hpp"

namespace mql {

std::optional<OutputFormat> parse_output_format(std::string_view s) {
  if (s == "table") return OutputFormat::Table;
  if (s == "csv") return OutputFormat::Csv;
  if (s == "json") return OutputFormat::Json;
  return std::nullopt;
}

std::string render_rows(const Table& t, OutputFormat format) {
  switch (format) {
    case OutputFormat::Table: return render_text_table(t);
    case OutputFormat::Csv: return to_csv(t);
    case OutputFormat::Json: {
      std::string out;
      for (std::size_t r = 0; r < t.row_count(); ++r) {
        nlohmann::ordered_json row = nlohmann::ordered_json::object();
        for (const auto& c : t.columns()) {
          const Cell& cell = c.cells[r];
          if (is_missing(cell)) row[c.name] = nullptr;
          else if (const double* d = std::get_if<double>(&cell)) row[c.name] = *d;
          else row[c.name] = std::get<std::string>(cell);
        }
        out += row.dump() + "\n";
      }
      return out;
    }
  }
  return {};
}

namespace {

std::string model_line(const Model& m) {
  std::string score = "-";
  if (const MetricRecord* r = m.reference_metrics()) score = fmt::format("{:.6f}", r->normalized_score);
  return fmt::format("model {} ({} {}) saved, accuracy {}\n", m.name, ml_type_name(m.ml_type),
                     m.algorithm, score);
}

}  // namespace

std::string render_outcomes(const RunReport& r, OutputFormat format) {
  std::string out;
  for (const auto& s : r.statements) {
    if (s.model) {
      if (format == OutputFormat::Json) {
        nlohmann::ordered_json j;
        j["statement"] = s.index;
        j["model"] = s.model->name;
        j["algorithm"] = s.model->algorithm;
        if (const MetricRecord* m = s.model->reference_metrics()) j["accuracy"] = m->normalized_score;
        out += j.dump() + "\n";
      } else if (format == OutputFormat::Table) {
        out += model_line(*s.model);
      }
    } else if (s.result && s.table) {
      out += render_rows(*s.table, format);
    }
  }
  return out;
}

std::string render_diagnostics(const RunReport& r) {
  std::string out;
  for (const auto& d : r.all_diagnostics()) out += d.render() + "\n";
  return out;
}

std::string render_artifacts(const RunReport& r) {
  std::string out;
  for (const auto& a : r.artifacts()) out += "wrote: " + a.path.string() + "\n";
  return out;
}

}  // namespace mql
