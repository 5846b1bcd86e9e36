#include "mql/planner.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <set>

#include "mql/display.hpp"
#include "mql/emitter.hpp"
#include "mql/error.hpp"
#include "mql/model_store.hpp"
#include "mql/syntax.hpp"
#include "mql/wrangler.hpp"

namespace fs = std::filesystem;

namespace mql {

std::string_view missing_policy_name(MissingPolicy p) {
  return p == MissingPolicy::Zero ? "zero" : "impute";
}

std::optional<MissingPolicy> parse_missing_policy(std::string_view s) {
  if (s == "zero") return MissingPolicy::Zero;
  if (s == "impute") return MissingPolicy::Impute;
  return std::nullopt;
}

std::string_view backend_name(Backend b) { return b == Backend::Native ? "native" : "emit"; }

std::optional<Backend> parse_backend(std::string_view s) {
  if (s == "native") return Backend::Native;
  if (s == "emit") return Backend::Emit;
  return std::nullopt;
}

std::string Session::now() const {
  if (fixed_time) return *fixed_time;
  std::time_t t = 0;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  } else {
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool StatementOutcome::ok() const {
  return std::none_of(diagnostics.begin(), diagnostics.end(),
                      [](const Diagnostic& d) { return d.is_error(); });
}

bool RunReport::ok() const {
  auto all = all_diagnostics();
  return std::none_of(all.begin(), all.end(), [](const Diagnostic& d) { return d.is_error(); });
}

std::vector<Diagnostic> RunReport::all_diagnostics() const {
  std::vector<Diagnostic> out = diagnostics;
  for (const auto& s : statements) out.insert(out.end(), s.diagnostics.begin(), s.diagnostics.end());
  return out;
}

std::vector<Artifact> RunReport::artifacts() const {
  std::vector<Artifact> out;
  for (const auto& s : statements) out.insert(out.end(), s.artifacts.begin(), s.artifacts.end());
  return out;
}

std::string statement_stem(std::size_t index) { return fmt::format("stmt{:02}", index); }

// ---------------------------------------------------------------------------
// Catalog

std::optional<fs::path> SessionCatalog::table_path(std::string_view name) const {
  if (auto it = s_.bindings.find(name); it != s_.bindings.end()) return it->second.path;
  fs::path in_data = s_.data_dir / (std::string(name) + ".csv");
  if (fs::is_regular_file(in_data)) return in_data;
  fs::path as_named = s_.data_dir / std::string(name);
  if (fs::is_regular_file(as_named)) return as_named;
  fs::path literal{std::string(name)};
  if (fs::is_regular_file(literal)) return literal;
  return std::nullopt;
}

std::shared_ptr<const Table> SessionCatalog::table(std::string_view name) const {
  if (auto it = s_.bindings.find(name); it != s_.bindings.end()) return it->second.table;
  auto path = table_path(name);
  if (!path) return nullptr;
  return std::make_shared<const Table>(load_csv(*path, std::string(name)));
}

std::optional<ModelInfo> SessionCatalog::model(std::string_view name) const {
  if (s_.backend == Backend::Emit) {
    if (auto it = s_.emitted_models.find(name); it != s_.emitted_models.end()) return it->second.info;
  }
  if (!model_exists(name, s_.store_dir)) return std::nullopt;
  Model m = load_model(name, s_.store_dir);
  return ModelInfo{m.name, m.ml_type, m.algorithm, m.features, m.target};
}

namespace {

Diagnostic warning_diag(ErrorCode code, std::string clause, std::string message, std::size_t idx) {
  return {Severity::Warning, code, std::move(clause), std::move(message), idx};
}

Table require_table(const SessionCatalog& cat, const std::string& name) {
  auto t = cat.table(name);
  if (!t) throw Error(ErrorCode::UnknownTable, "table '" + name + "' not found");
  return *t;
}

// FROM table with WHERE applied.
Table from_rows(const Delta& d, const SessionCatalog& cat) {
  if (d.from_tables.empty()) throw Error(ErrorCode::MissingInput, "a FROM table is required");
  return apply_where(require_table(cat, d.from_tables.front()), d.where);
}

std::optional<std::string> class_column_of(const Delta& d, const Table& from) {
  if (d.ml_type != MlType::Class) return std::nullopt;
  return infer_class_column(from, d.class_labels, d.label_columns);
}

// Rows whose features (and target, when named) are all present.
Table complete_rows(const Table& t, std::span<const std::string> features,
                    const std::optional<std::string>& target) {
  std::vector<const Column*> cols;
  for (const auto& f : features) cols.push_back(&t.column(f));
  if (target && t.has_column(*target)) cols.push_back(&t.column(*target));
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < t.row_count(); ++r) {
    if (std::none_of(cols.begin(), cols.end(), [&](const Column* c) { return c->missing(r); })) {
      keep.push_back(r);
    }
  }
  return t.take_rows(keep);
}

std::string scores_text(const std::vector<std::pair<std::string, std::optional<double>>>& scores) {
  std::string out;
  for (const auto& [name, score] : scores) {
    if (!out.empty()) out += ", ";
    out += name + "=" + (score ? fmt::format("{:.6f}", *score) : std::string("failed"));
  }
  return out;
}

double reference_score(const Model& m) {
  const MetricRecord* r = m.reference_metrics();
  return r ? r->normalized_score : 0.0;
}

struct TrainingPlan {
  Table from;
  std::optional<std::string> target;
  std::vector<std::string> features;
  std::size_t clusters = 0;
  Split split;
};

TrainingPlan plan_training(const Delta& d, const Session& s) {
  SessionCatalog cat(s);
  TrainingPlan p{from_rows(d, cat), {}, {}, 0, {}};
  auto class_col = class_column_of(d, p.from);
  p.target = d.ml_type == MlType::Class ? class_col : d.target;
  p.features = expand_features(d, p.from, class_col);
  const auto rows = static_cast<long long>(p.from.row_count());
  if (d.ml_type == MlType::Clus) {
    long long k = evaluate(*d.k_expr, rows);
    if (k < 1) throw Error(ErrorCode::RangeError, "CLUSTER OF must be at least 1, got " + std::to_string(k));
    p.clusters = static_cast<std::size_t>(k);
  }

  long long n = 0, m = 0;
  if (d.train_n) {
    n = evaluate(*d.train_n, rows);
    m = d.test_m ? evaluate(*d.test_m, rows) : 0;
  } else if (d.ml_type == MlType::Clus) {
    n = rows;  // clustering reports on every row
  } else {
    std::tie(n, m) = default_split_counts(p.from.row_count());
  }
  if (rows == 0) throw Error(ErrorCode::EmptyTestSet, "FROM table '" + p.from.name() + "' has no rows");
  p.split = train_test_split(p.from, n, m, s.seed);
  return p;
}

Hyperparameters session_hyper(const Session& s) {
  Hyperparameters h = s.hyper;
  h.seed = s.seed;
  return h;
}

void attach_test_metrics(Model& m, const Table& test) {
  if (test.row_count() == 0) return;
  try {
    m.test_metrics = evaluate(m, test);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EmptyTestSet) throw;
    m.notes.push_back("no usable test rows; reference metrics come from training");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// CONSTRUCT

ConstructOutput execute_construct(const Delta& d, const Session& s, bool transient) {
  TrainingPlan plan = plan_training(d, s);
  ConstructOutput out;
  for (const auto& w : plan.split.warnings) {
    out.warnings.push_back(warning_diag(ErrorCode::RangeError, "TEST ON", w, d.statement_index));
  }
  const Hyperparameters hyper = session_hyper(s);
  auto train = [&](std::string_view algorithm) {
    Model m = train_algorithm(algorithm, d.ml_type, plan.split.train, plan.target, plan.features,
                              d.class_labels, plan.clusters, hyper);
    attach_test_metrics(m, plan.split.test);
    return m;
  };

  Model model;
  if (d.model == ModelMode::Best) {
    std::vector<std::pair<std::string, std::optional<double>>> scores;
    std::optional<Model> best;
    for (auto name : algorithms_for(d.ml_type)) {
      try {
        Model m = train(name);
        double score = reference_score(m);
        scores.emplace_back(std::string(name), score);
        if (!best || score > reference_score(*best)) best = std::move(m);
      } catch (const Error&) {
        scores.emplace_back(std::string(name), std::nullopt);
      }
    }
    const double threshold = d.accuracy.value_or(0.0);
    if (!best || reference_score(*best) < threshold) {
      throw Error(ErrorCode::BestBelowThreshold,
                  fmt::format("no algorithm reaches accuracy {}: {}", format_number(threshold),
                              scores_text(scores)));
    }
    model = std::move(*best);
    model.notes.push_back("best-model sweep: " + scores_text(scores));
  } else {
    std::string algorithm = d.model == ModelMode::Custom
                                ? std::string(find_algorithm(*d.alg_name)->name)
                                : std::string(default_algorithm(d.ml_type));
    model = train(algorithm);
    if (d.accuracy && reference_score(model) < *d.accuracy) {
      throw Error(ErrorCode::AccuracyBelowThreshold,
                  fmt::format("{} reaches accuracy {:.6f}, below the required {}", model.algorithm,
                              reference_score(model), format_number(*d.accuracy)));
    }
  }

  model.name = d.mod_name.value_or("transient");
  model.created_at = s.now();
  if (!transient) save_model(model, s.store_dir, s.replace);
  out.model = std::move(model);
  out.test = std::move(plan.split.test);
  return out;
}

// ---------------------------------------------------------------------------
// GENERATE

Table resolve_missing(const Model& m, const Table& rows, MissingPolicy policy) {
  Table out = rows;
  for (const auto& f : m.features) {
    if (!out.has_column(f.name)) continue;
    Column c = out.column(f.name);
    if (c.dtype != DataType::Numeric || c.missing_count() == 0) continue;
    const double fill = policy == MissingPolicy::Zero ? 0.0 : f.train_median.value_or(0.0);
    for (auto& cell : c.cells) {
      if (is_missing(cell)) cell = fill;
    }
    out = out.with_column(std::move(c));
  }
  return out;
}

namespace {

void write_plot(const ResultSet& r, const Delta& d, const Session& s, StatementOutcome& out) {
  std::string kind;
  std::string svg;
  try {
    switch (r.ml_type) {
      case MlType::Pred:
        kind = r.actuals ? "scatter" : "bar";
        svg = r.actuals ? render_scatter(r) : render_bar(r);
        break;
      case MlType::Class:
        kind = "classes";
        svg = render_class_counts(r);
        break;
      case MlType::Clus:
        kind = "clusters";
        svg = render_clusters(r);
        break;
    }
  } catch (const Error& e) {
    Diagnostic w = diagnostic_from(e, d.statement_index, "DISPLAY OF");
    w.severity = Severity::Warning;
    out.diagnostics.push_back(std::move(w));
    return;
  }
  fs::path path = s.out_dir / (statement_stem(d.statement_index) + "_" + kind + ".svg");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  f << svg;
  out.artifacts.push_back({ArtifactKind::Plot, path});
}

}  // namespace

StatementOutcome execute_generate(const Delta& d, const Session& s) {
  StatementOutcome out;
  out.index = d.statement_index;
  out.type = StmtType::Gen;
  SessionCatalog cat(s);

  Model model;
  Table rows;
  if (d.model == ModelMode::Stored) {
    model = load_model(*d.mod_name, s.store_dir);
    if (d.accuracy && reference_score(model) < *d.accuracy) {
      throw Error(ErrorCode::AccuracyBelowThreshold,
                  fmt::format("stored model '{}' has accuracy {:.6f}, below the required {}",
                              model.name, reference_score(model), format_number(*d.accuracy)));
    }
    rows = d.over_table ? require_table(cat, *d.over_table) : from_rows(d, cat);
    rows = resolve_missing(model, rows, s.missing);
  } else {
    ConstructOutput c = execute_construct(d, s, /*transient=*/true);
    out.diagnostics = std::move(c.warnings);
    model = std::move(c.model);
    if (d.over_table) {
      rows = resolve_missing(model, require_table(cat, *d.over_table), s.missing);
    } else if (model.ml_type == MlType::Clus) {
      rows = complete_rows(from_rows(d, cat), model.feature_names(), std::nullopt);
    } else {
      rows = complete_rows(c.test, model.feature_names(), model.target);
    }
  }

  ResultSet r = predict(model, rows);
  r.source_statement = d.statement_index;
  for (const auto& l : d.label_columns) r.labels.push_back(rows.column(l));

  fs::create_directories(s.out_dir);
  Table table = to_table(r);
  fs::path csv = s.out_dir / (statement_stem(d.statement_index) + "_result.csv");
  write_csv(table, csv);
  out.artifacts.push_back({ArtifactKind::ResultCsv, csv});
  if (d.display) write_plot(r, d, s, out);
  out.table = std::move(table);
  out.result = std::move(r);
  return out;
}

// ---------------------------------------------------------------------------
// INSPECT

namespace {

std::string table_stem(const std::string& name) {
  fs::path p{name};
  return p.has_extension() && p.extension() == ".csv" ? p.stem().string() : p.filename().string();
}

fs::path inspected_path(const Session& s, const std::string& from) {
  return s.out_dir / (table_stem(from) + ".inspected.csv");
}

}  // namespace

StatementOutcome execute_inspect(const Delta& d, Session& s) {
  StatementOutcome out;
  out.index = d.statement_index;
  out.type = StmtType::Ins;
  SessionCatalog cat(s);
  const std::string& from_name = d.from_tables.front();
  Table input = from_rows(d, cat);
  InspectStmt stmt{d.actions, d.from_tables, d.where};
  InspectResult res = inspect_execute(stmt, input);

  fs::create_directories(s.out_dir);
  const std::string stem = table_stem(from_name);
  fs::path csv = inspected_path(s, from_name);
  fs::path log = s.out_dir / (stem + ".wrangle.log");
  write_csv(res.table, csv);
  {
    std::ofstream f(log, std::ios::binary);
    if (!f) throw Error(ErrorCode::IoError, "cannot write '" + log.string() + "'");
    f << wrangle_log_text(from_name, res.log);
  }
  out.artifacts.push_back({ArtifactKind::InspectedCsv, csv});
  out.artifacts.push_back({ArtifactKind::WrangleLog, log});

  // Later statements see the wrangled table under both the original name and
  // the written file's stem.
  auto shared = std::make_shared<const Table>(res.table.renamed(from_name));
  s.bindings[from_name] = Binding{shared, csv};
  s.bindings[stem + ".inspected"] = Binding{shared, csv};
  out.table = res.table;
  return out;
}

// ---------------------------------------------------------------------------
// Emission

namespace {

// Emitted scripts may run from any directory.
std::string absolute_text(const fs::path& p) { return fs::absolute(p).lexically_normal().string(); }

EmitPlan build_emit_plan(const Delta& d, Session& s) {
  SessionCatalog cat(s);
  EmitPlan p;
  p.kind = d.st_type;
  p.mode = d.model;
  p.ml_type = d.ml_type;
  p.statement_index = d.statement_index;
  p.where = d.where;
  p.seed = s.seed;
  p.missing = std::string(missing_policy_name(s.missing));
  p.hyper = session_hyper(s);
  p.display = d.display;
  p.label_columns = d.label_columns;
  p.accuracy = d.accuracy;
  const std::string stem = statement_stem(d.statement_index);
  p.plot_path = absolute_text(s.out_dir / (stem + "_backend_plot.svg"));

  auto path_of = [&](const std::string& name) {
    auto path = cat.table_path(name);
    if (!path) throw Error(ErrorCode::UnknownTable, "table '" + name + "' not found");
    return absolute_text(*path);
  };
  if (!d.from_tables.empty()) p.data_path = path_of(d.from_tables.front());
  if (d.over_table) p.over_path = path_of(*d.over_table);

  if (d.st_type == StmtType::Ins) {
    p.actions = d.actions;
    p.inspected_path = absolute_text(inspected_path(s, d.from_tables.front()));
    Table input = require_table(cat, d.from_tables.front());
    std::set<std::string> categorical;
    for (const auto& c : input.columns()) {
      if (c.dtype == DataType::Categorical) categorical.insert(c.name);
    }
    for (const auto& a : d.actions) {
      if (std::holds_alternative<Impute>(a.action) && categorical.count(a.column)) {
        p.categorical_columns.push_back(a.column);
      }
      if (std::holds_alternative<Categorize>(a.action)) categorical.insert(a.column);
      if (std::holds_alternative<Numerize>(a.action)) categorical.erase(a.column);
    }
    return p;
  }

  if (d.model == ModelMode::Stored) {
    auto info = cat.model(*d.mod_name);
    if (!info) throw Error(ErrorCode::UnknownModel, "no stored model named '" + *d.mod_name + "'");
    p.ml_type = info->ml_type;
    p.algorithm = info->algorithm;
    for (const auto& f : info->features) p.features.push_back(f.name);
    p.target = info->target;
    p.model_name = info->name;
    auto it = s.emitted_models.find(*d.mod_name);
    p.model_file = absolute_text(it != s.emitted_models.end()
                                     ? it->second.archive
                                     : s.store_dir / info->name / "backend.joblib");
    if (p.data_path.empty()) p.data_path = p.over_path.value_or("");
    return p;
  }

  TrainingPlan plan = plan_training(d, s);
  p.features = plan.features;
  p.target = plan.target;
  p.class_labels = d.class_labels;
  std::sort(p.class_labels.begin(), p.class_labels.end());
  p.k = plan.clusters;
  p.algorithm = d.model == ModelMode::Custom ? std::string(find_algorithm(*d.alg_name)->name)
                                             : std::string(default_algorithm(d.ml_type));
  if (d.model == ModelMode::Best) {
    for (auto a : algorithms_for(d.ml_type)) p.candidates.emplace_back(a);
    if (d.ml_type == MlType::Clus) p.mode = ModelMode::Default;
  }
  p.default_split = !d.train_n;
  p.train_n = static_cast<long long>(plan.split.train.row_count());
  p.test_m = static_cast<long long>(plan.split.test.row_count());

  if (d.st_type == StmtType::Con) {
    fs::path dir = fs::absolute(s.store_dir / *d.mod_name).lexically_normal();
    p.model_name = *d.mod_name;
    p.model_dir = dir.string();
    std::vector<FeatureSpec> specs;
    for (const auto& f : p.features) specs.push_back({f, DataType::Numeric, std::nullopt});
    s.emitted_models[*d.mod_name] =
        EmittedModel{ModelInfo{*d.mod_name, d.ml_type, p.algorithm, specs, p.target},
                     dir / "backend.joblib"};
  }
  return p;
}

StatementOutcome emit_statement(const Delta& d, Session& s) {
  EmitPlan plan = build_emit_plan(d, s);
  StatementOutcome out;
  out.index = d.statement_index;
  out.type = d.st_type;
  if (d.st_type == StmtType::Ins) {
    // The wrangled table is also produced natively so that later statements
    // can be planned against it.
    out = execute_inspect(d, s);
  }
  std::string script = emit_script(plan);
  fs::create_directories(s.out_dir);
  fs::path path = s.out_dir / (statement_stem(d.statement_index) + "_backend." +
                               std::string(kScriptExtension));
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  f << script;
  out.artifacts.push_back({ArtifactKind::Script, path});
  out.script = std::move(script);
  return out;
}

std::string clause_for(const Delta& d) {
  switch (d.st_type) {
    case StmtType::Gen: return "GENERATE";
    case StmtType::Con: return "CONSTRUCT";
    case StmtType::Ins: return "INSPECT";
  }
  return {};
}

StatementOutcome run_statement(const Statement& stmt, Session& s) {
  const std::size_t idx = ++s.statement_counter;
  StatementOutcome out;
  out.index = idx;
  Delta d;
  try {
    d = gather(stmt, idx);
  } catch (const Error& e) {
    out.diagnostics.push_back(diagnostic_from(e, idx));
    return out;
  }
  out.type = d.st_type;
  SessionCatalog cat(s);
  std::vector<Diagnostic> diags;
  try {
    diags = validate(d, cat);
  } catch (const Error& e) {
    diags.push_back(diagnostic_from(e, idx));
  }
  const bool failed =
      std::any_of(diags.begin(), diags.end(), [](const Diagnostic& x) { return x.is_error(); });
  if (failed) {
    out.diagnostics = std::move(diags);
    return out;
  }

  try {
    StatementOutcome done;
    if (s.backend == Backend::Emit) {
      done = emit_statement(d, s);
    } else {
      switch (d.st_type) {
        case StmtType::Gen: done = execute_generate(d, s); break;
        case StmtType::Con: {
          ConstructOutput c = execute_construct(d, s, /*transient=*/false);
          done.diagnostics = std::move(c.warnings);
          done.artifacts.push_back({ArtifactKind::Model, s.store_dir / c.model.name});
          done.model = std::move(c.model);
          break;
        }
        case StmtType::Ins: done = execute_inspect(d, s); break;
      }
    }
    done.index = idx;
    done.type = d.st_type;
    diags.insert(diags.end(), done.diagnostics.begin(), done.diagnostics.end());
    done.diagnostics = std::move(diags);
    return done;
  } catch (const Error& e) {
    diags.push_back(diagnostic_from(e, idx, clause_for(d)));
    out.diagnostics = std::move(diags);
    return out;
  }
}

}  // namespace

RunReport run_program(const Program& p, Session& s) {
  RunReport report;
  for (const auto& stmt : p) {
    report.statements.push_back(run_statement(stmt, s));
    if (!report.statements.back().ok()) {
      report.aborted = &stmt != &p.back();
      break;
    }
  }
  return report;
}

RunReport run_source(std::string_view text, Session& s) {
  Program p;
  try {
    p = parse_program(text);
  } catch (const Error& e) {
    RunReport report;
    report.diagnostics.push_back(diagnostic_from(e, 0));
    report.aborted = true;
    return report;
  }
  return run_program(p, s);
}

}  // namespace mql
