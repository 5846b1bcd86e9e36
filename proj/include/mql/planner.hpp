#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mql/analyzer.hpp"
#include "mql/ast.hpp"
#include "mql/learn.hpp"
#include "mql/result.hpp"
#include "mql/table.hpp"

namespace mql {

enum class MissingPolicy { Zero, Impute };
enum class Backend { Native, Emit };

std::string_view missing_policy_name(MissingPolicy p);  // "zero" / "impute"
std::optional<MissingPolicy> parse_missing_policy(std::string_view s);
std::string_view backend_name(Backend b);  // "native" / "emit"
std::optional<Backend> parse_backend(std::string_view s);

// A table made available under a name by an earlier INSPECT.
struct Binding {
  std::shared_ptr<const Table> table;
  std::filesystem::path path;  // where the table was written
};

// Models emitted (not trained) by CONSTRUCT under the emit backend.
struct EmittedModel {
  ModelInfo info;
  std::filesystem::path archive;
};

struct Session {
  std::filesystem::path data_dir = ".";
  std::filesystem::path out_dir = "mql-out";
  std::filesystem::path store_dir = "mql-models";
  std::uint64_t seed = 42;
  MissingPolicy missing = MissingPolicy::Zero;
  Backend backend = Backend::Native;
  bool replace = false;  // let CONSTRUCT overwrite a stored model
  Hyperparameters hyper;

  std::map<std::string, Binding, std::less<>> bindings;
  std::map<std::string, EmittedModel, std::less<>> emitted_models;
  std::size_t statement_counter = 0;  // continues across REPL inputs

  // Timestamp written into manifests. When unset, SOURCE_DATE_EPOCH is
  // honored before falling back to the wall clock.
  std::optional<std::string> fixed_time;

  std::string now() const;
};

enum class ArtifactKind { ResultCsv, Plot, Script, Model, InspectedCsv, WrangleLog };

struct Artifact {
  ArtifactKind kind;
  std::filesystem::path path;
};

struct StatementOutcome {
  std::size_t index = 0;
  StmtType type = StmtType::Gen;
  std::optional<ResultSet> result;  // GENERATE
  std::optional<Table> table;       // GENERATE result table or INSPECT output
  std::optional<Model> model;       // CONSTRUCT (native)
  std::optional<std::string> script;
  std::vector<Diagnostic> diagnostics;
  std::vector<Artifact> artifacts;

  bool ok() const;
};

struct RunReport {
  std::vector<StatementOutcome> statements;
  std::vector<Diagnostic> diagnostics;  // failures outside any statement (syntax)
  bool aborted = false;

  bool ok() const;
  std::vector<Diagnostic> all_diagnostics() const;
  std::vector<Artifact> artifacts() const;
};

// Executes statements in order. The first statement with an error
// diagnostic stops the run; earlier outputs are kept.
RunReport run_program(const Program& p, Session& s);

// Parses then runs. Syntax errors become a single diagnostic.
RunReport run_source(std::string_view text, Session& s);

// Catalog view of a session: bindings, data_dir CSVs, literal paths, and the
// model store (plus emitted models under the emit backend).
class SessionCatalog : public Catalog {
 public:
  explicit SessionCatalog(const Session& s) : s_(s) {}
  std::shared_ptr<const Table> table(std::string_view name) const override;
  std::optional<ModelInfo> model(std::string_view name) const override;

  // Path of the CSV behind a table name, or nullopt when unresolvable.
  std::optional<std::filesystem::path> table_path(std::string_view name) const;

 private:
  const Session& s_;
};

// Native statement executors over a validated Delta.
struct ConstructOutput {
  Model model;
  Table test;  // held-out rows
  std::vector<Diagnostic> warnings;
};

ConstructOutput execute_construct(const Delta& d, const Session& s, bool transient);
StatementOutcome execute_generate(const Delta& d, const Session& s);
StatementOutcome execute_inspect(const Delta& d, Session& s);

// Replaces missing feature cells per policy: zero, or the model's training
// medians.
Table resolve_missing(const Model& m, const Table& rows, MissingPolicy policy);

// "stmt03" style prefix for artifact names.
std::string statement_stem(std::size_t index);

}  // namespace mql
