#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mql/analyzer.hpp"
#include "mql/ast.hpp"
#include "mql/learn.hpp"
#include "mql/table.hpp"

namespace mql {

// Fully resolved description of one statement for script emission. The
// planner fills it from a validated Delta plus session state; the emitter
// only selects template sections and substitutes placeholders.
struct EmitPlan {
  StmtType kind = StmtType::Gen;
  ModelMode mode = ModelMode::Default;
  MlType ml_type = MlType::Pred;
  std::size_t statement_index = 1;

  std::string data_path;                 // FROM table as a CSV path
  std::optional<std::string> over_path;  // OVER table, when present
  Predicate where;

  std::vector<std::string> features;
  std::optional<std::string> target;  // prediction target or class column
  std::vector<std::string> class_labels;
  std::vector<std::string> label_columns;

  std::string algorithm;                // canonical registry name
  std::vector<std::string> candidates;  // best mode: registry order
  std::optional<double> accuracy;       // normalized threshold

  bool default_split = true;  // fraction split (GENERATE without counts)
  double test_fraction = 0.2;
  long long train_n = 0;
  long long test_m = 0;
  std::size_t k = 0;  // clustering

  std::uint64_t seed = 42;
  std::string missing = "zero";  // "zero" or "impute"
  Hyperparameters hyper;

  bool display = false;
  std::string plot_path;

  std::optional<std::string> model_name;
  std::optional<std::string> model_dir;   // CONSTRUCT: where the backend model is archived
  std::optional<std::string> model_file;  // stored GENERATE: archived backend model

  std::vector<InspectAction> actions;
  std::vector<std::string> categorical_columns;  // INSPECT: dtype at the time of each action
  std::string inspected_path;
};

// Script text for the plan. Throws UnsupportedForEmission when no template
// covers the requested combination.
std::string emit_script(const EmitPlan& plan);

// File extension of emitted scripts.
inline constexpr std::string_view kScriptExtension = "py";

// Parsed `# mql:key=value` header lines, in order.
std::vector<std::pair<std::string, std::string>> script_header(std::string_view script);

}  // namespace mql
