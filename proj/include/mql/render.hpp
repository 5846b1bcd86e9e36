#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "mql/planner.hpp"
#include "mql/table.hpp"

namespace mql {

enum class OutputFormat { Table, Csv, Json };

std::optional<OutputFormat> parse_output_format(std::string_view s);

// Table: fixed-width with a header. Csv: as written to disk. Json: one object
// per row, missing cells as null.
std::string render_rows(const Table& t, OutputFormat format);

// Standard-output text for a run: per-statement tables and model summaries.
// Diagnostics and artifact lines are rendered separately.
std::string render_outcomes(const RunReport& r, OutputFormat format);

std::string render_diagnostics(const RunReport& r);

// One `wrote: <path>` line per artifact.
std::string render_artifacts(const RunReport& r);

}  // namespace mql
