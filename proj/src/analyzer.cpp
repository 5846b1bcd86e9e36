#include "mql/analyzer.hpp"

#include <algorithm>
#include <fmt/format.h>

#include "mql/syntax.hpp"

namespace mql {

std::string_view stmt_type_name(StmtType t) {
  switch (t) {
    case StmtType::Gen: return "gen";
    case StmtType::Con: return "con";
    case StmtType::Ins: return "ins";
  }
  return "gen";
}

std::string_view model_mode_name(ModelMode m) {
  switch (m) {
    case ModelMode::Stored: return "stored";
    case ModelMode::Custom: return "custom";
    case ModelMode::Default: return "default";
    case ModelMode::Best: return "best";
  }
  return "default";
}

NormalizedAccuracy normalize_accuracy(double p) {
  if (!(p > 0) || p > 100) {
    throw Error(ErrorCode::RangeError,
                "MODEL ACCURACY must lie in (0,1] or be a percentage in (1,100], got " + format_number(p));
  }
  if (p <= 1) return {p, false};
  return {p / 100.0, true};
}

namespace {

void copy_task(Delta& d, const TaskHead& task) {
  std::visit(
      [&](const auto& h) {
        using H = std::decay_t<decltype(h)>;
        if constexpr (std::is_same_v<H, PredictionHead>) {
          d.ml_type = MlType::Pred;
          d.target = h.target;
        } else if constexpr (std::is_same_v<H, ClassificationHead>) {
          d.ml_type = MlType::Class;
          d.class_labels = h.labels;
        } else {
          d.ml_type = MlType::Clus;
          d.k_expr = h.k;
        }
      },
      task);
}

void copy_accuracy(Delta& d, const std::optional<double>& raw) {
  d.accuracy_raw = raw;
  if (!raw) return;
  try {
    d.accuracy = normalize_accuracy(*raw).value;
  } catch (const Error&) {
    d.accuracy = raw;  // reported by validate
  }
}

}  // namespace

Delta gather(const Statement& s, std::size_t statement_index) {
  Delta d;
  d.statement_index = statement_index;
  std::visit(
      [&](const auto& st) {
        using S = std::decay_t<decltype(st)>;
        if constexpr (std::is_same_v<S, GenerateStmt>) {
          d.st_type = StmtType::Gen;
          copy_task(d, st.task);
          d.display = st.display;
          d.over_table = st.over;
          d.label = !st.labels.empty();
          d.label_columns = st.labels;
          d.features = st.features;
          d.from_tables = st.from;
          d.where = st.where;
          copy_accuracy(d, st.accuracy);
          if (const auto* m = std::get_if<StoredModelRef>(&st.model)) {
            d.model = ModelMode::Stored;
            d.mod_name = m->name;
          } else if (const auto* a = std::get_if<AlgorithmRef>(&st.model)) {
            d.model = ModelMode::Custom;
            d.alg_name = a->name;
          } else {
            d.model = st.accuracy ? ModelMode::Best : ModelMode::Default;
          }
        } else if constexpr (std::is_same_v<S, ConstructStmt>) {
          d.st_type = StmtType::Con;
          copy_task(d, st.task);
          d.mod_name = st.model_name;
          d.supervision = st.supervision;
          d.features = st.features;
          d.from_tables = st.from;
          d.where = st.where;
          d.train_n = st.train_n;
          d.test_m = st.test_m;
          copy_accuracy(d, st.accuracy);
          if (st.algorithm) {
            d.model = ModelMode::Custom;
            d.alg_name = st.algorithm;
          } else {
            d.model = st.accuracy ? ModelMode::Best : ModelMode::Default;
          }
        } else {
          d.st_type = StmtType::Ins;
          d.actions = st.actions;
          d.from_tables = st.from;
          d.where = st.where;
        }
      },
      s.body);
  return d;
}

std::string Diagnostic::render() const {
  std::string out = fmt::format("{}[{}]", severity == Severity::Error ? "error" : "warning",
                                error_code_id(code));
  if (statement_index > 0) out += fmt::format(" statement {}", statement_index);
  if (!clause.empty()) out += (statement_index > 0 ? ", " : " ") + clause;
  out += ": " + message;
  return out;
}

Diagnostic diagnostic_from(const Error& e, std::size_t statement_index, std::string clause) {
  // Syntax errors already carry their source position in the message.
  return {Severity::Error, e.code(), std::move(clause), e.what(), statement_index};
}

std::string infer_class_column(const Table& t, std::span<const std::string> labels,
                               std::span<const std::string> excluded) {
  std::vector<std::string> hits;
  for (const auto& c : t.columns()) {
    if (std::find(excluded.begin(), excluded.end(), c.name) != excluded.end()) continue;
    const auto tokens = c.distinct_tokens();
    if (std::all_of(labels.begin(), labels.end(), [&](const std::string& l) { return tokens.count(l) > 0; })) {
      hits.push_back(c.name);
    }
  }
  std::string label_text;
  for (const auto& l : labels) label_text += (label_text.empty() ? "" : ", ") + l;
  if (hits.empty()) {
    throw Error(ErrorCode::UnknownLabels, "no column of '" + t.name() +
                                              "' contains all classification labels {" + label_text + "}");
  }
  if (hits.size() > 1) {
    std::string names;
    for (const auto& h : hits) names += (names.empty() ? "" : ", ") + h;
    throw Error(ErrorCode::AmbiguousTarget, "labels {" + label_text + "} occur in several columns (" +
                                                names + "); list FEATURES explicitly to exclude all but one");
  }
  return hits.front();
}

std::vector<std::string> expand_features(const Delta& d, const Table& from,
                                         const std::optional<std::string>& class_column) {
  std::vector<std::string> out;
  if (!d.features) return out;
  auto reserved = [&](const std::string& name) {
    return (d.target && name == *d.target) || (class_column && name == *class_column) ||
           std::find(d.label_columns.begin(), d.label_columns.end(), name) != d.label_columns.end();
  };
  if (d.features->star) {
    for (const auto& name : from.column_names()) {
      if (!reserved(name)) out.push_back(name);
    }
    return out;
  }
  for (const auto& name : d.features->names) {
    if (class_column && name == *class_column) continue;
    out.push_back(name);
  }
  return out;
}

namespace {

class Validator {
 public:
  Validator(const Delta& d, const Catalog& c) : d_(d), catalog_(c) {}

  std::vector<Diagnostic> run() {
    check_accuracy();
    check_supervision();
    if (d_.st_type == StmtType::Ins) {
      check_inspect();
    } else if (d_.st_type == StmtType::Gen && d_.model == ModelMode::Stored) {
      check_stored();
    } else {
      check_training();
    }
    return std::move(out_);
  }

 private:
  void error(ErrorCode code, std::string clause, std::string message) {
    out_.push_back({Severity::Error, code, std::move(clause), std::move(message), d_.statement_index});
  }
  void warning(ErrorCode code, std::string clause, std::string message) {
    out_.push_back({Severity::Warning, code, std::move(clause), std::move(message), d_.statement_index});
  }

  std::shared_ptr<const Table> resolve(const std::string& name, const std::string& clause) {
    try {
      auto t = catalog_.table(name);
      if (!t) error(ErrorCode::UnknownTable, clause, "table '" + name + "' not found");
      return t;
    } catch (const Error& e) {
      out_.push_back(diagnostic_from(e, d_.statement_index, clause));
      return nullptr;
    }
  }

  // FROM must name exactly one table; returns it when resolvable.
  std::shared_ptr<const Table> from_table() {
    if (d_.from_tables.empty()) {
      error(ErrorCode::MissingInput, "FROM", "a FROM table is required");
      return nullptr;
    }
    if (d_.from_tables.size() > 1) {
      error(ErrorCode::Unsupported, "FROM",
            "only one FROM table is supported; join the tables into a single CSV first");
      return nullptr;
    }
    auto t = resolve(d_.from_tables.front(), "FROM");
    if (t && !d_.where.empty()) {
      try {
        (void)apply_where(t->take_rows({}), d_.where);
      } catch (const Error& e) {
        out_.push_back(diagnostic_from(e, d_.statement_index, "WHERE"));
      }
    }
    return t;
  }

  void check_accuracy() {
    if (!d_.accuracy_raw) return;
    try {
      auto n = normalize_accuracy(*d_.accuracy_raw);
      if (n.scaled) {
        warning(ErrorCode::RangeError, "WITH MODEL ACCURACY",
                "accuracy " + format_number(*d_.accuracy_raw) + " read as a percentage (" +
                    format_number(n.value) + ")");
      }
    } catch (const Error& e) {
      out_.push_back(diagnostic_from(e, d_.statement_index, "WITH MODEL ACCURACY"));
    }
  }

  void check_supervision() {
    if (!d_.supervision) return;
    const bool supervised = *d_.supervision == Supervision::Supervised;
    if (supervised && d_.ml_type == MlType::Clus) {
      error(ErrorCode::SupervisionMismatch, "AS SUPERVISED", "clustering is unsupervised");
    } else if (!supervised && d_.ml_type != MlType::Clus) {
      error(ErrorCode::SupervisionMismatch, "AS UNSUPERVISED",
            std::string(d_.ml_type == MlType::Pred ? "prediction" : "classification") +
                " is supervised");
    }
  }

  void check_columns_exist(const Table& t, std::span<const std::string> names, const std::string& clause) {
    for (const auto& n : names) {
      if (!t.has_column(n)) {
        error(ErrorCode::UnknownColumn, clause, "column '" + n + "' not found in '" + t.name() + "'");
      }
    }
  }

  // OVER must carry every feature with the training dtype, plus LABEL columns.
  void check_over(std::span<const FeatureSpec> features) {
    if (!d_.over_table) return;
    auto over = resolve(*d_.over_table, "OVER");
    if (!over) return;
    for (const auto& f : features) {
      auto idx = over->find(f.name);
      if (!idx) {
        error(ErrorCode::SchemaMismatch, "OVER",
              "feature '" + f.name + "' is missing from OVER table '" + over->name() + "'");
      } else if (over->columns()[*idx].dtype != f.dtype) {
        error(ErrorCode::SchemaMismatch, "OVER",
              "feature '" + f.name + "' is " + std::string(dtype_name(over->columns()[*idx].dtype)) +
                  " in '" + over->name() + "' but " + std::string(dtype_name(f.dtype)) + " in training");
      }
    }
    check_columns_exist(*over, d_.label_columns, "LABEL");
  }

  void check_stored() {
    auto info = catalog_.model(*d_.mod_name);
    if (!info) {
      error(ErrorCode::UnknownModel, "USING MODEL", "no stored model named '" + *d_.mod_name + "'");
      return;
    }
    if (info->ml_type != d_.ml_type) {
      error(ErrorCode::SchemaMismatch, "USING MODEL",
            "model '" + info->name + "' is a " + std::string(ml_type_name(info->ml_type)) +
                " model but the statement requests " + std::string(ml_type_name(d_.ml_type)));
    }
    if (d_.ml_type == MlType::Pred && d_.target && info->target && *d_.target != *info->target) {
      error(ErrorCode::SchemaMismatch, "PREDICTION",
            "model '" + info->name + "' predicts '" + *info->target + "', not '" + *d_.target + "'");
    }
    if (!d_.over_table && d_.from_tables.empty()) {
      error(ErrorCode::MissingInput, "OVER", "a stored model needs an OVER or FROM table to predict on");
      return;
    }
    if (d_.over_table) {
      check_over(info->features);
    } else if (auto from = from_table()) {
      for (const auto& f : info->features) {
        if (!from->has_column(f.name)) {
          error(ErrorCode::SchemaMismatch, "FROM",
                "feature '" + f.name + "' is missing from '" + from->name() + "'");
        }
      }
      check_columns_exist(*from, d_.label_columns, "LABEL");
    }
  }

  void check_training() {
    if (d_.model == ModelMode::Custom) {
      const AlgorithmInfo* a = find_algorithm(*d_.alg_name);
      if (!a || !a->supports(d_.ml_type)) {
        std::string valid;
        for (auto n : algorithms_for(d_.ml_type)) valid += (valid.empty() ? "" : ", ") + std::string(n);
        error(ErrorCode::UnknownAlgorithm, "ALGORITHM",
              "'" + *d_.alg_name + "' is not a " + std::string(ml_type_name(d_.ml_type)) +
                  " algorithm (available: " + valid + ")");
      }
    }
    if (!d_.features) {
      error(ErrorCode::MissingInput, "FEATURES", "FEATURES is required unless USING MODEL is given");
      return;
    }
    auto from = from_table();
    if (!from) return;

    std::optional<std::string> class_column;
    if (d_.target && !from->has_column(*d_.target)) {
      error(ErrorCode::UnknownColumn, "PREDICTION",
            "target '" + *d_.target + "' not found in '" + from->name() + "'");
      return;
    }
    if (d_.ml_type == MlType::Class) {
      try {
        class_column = infer_class_column(*from, d_.class_labels, d_.label_columns);
      } catch (const Error& e) {
        out_.push_back(diagnostic_from(e, d_.statement_index, "CLASSIFICATION INTO"));
        return;
      }
    }

    if (!d_.features->star) {
      check_columns_exist(*from, d_.features->names, "FEATURES");
      std::vector<std::string> seen;
      for (const auto& n : d_.features->names) {
        if (std::find(seen.begin(), seen.end(), n) != seen.end()) {
          error(ErrorCode::DuplicateColumn, "FEATURES", "feature '" + n + "' listed more than once");
        }
        seen.push_back(n);
        if (d_.target && n == *d_.target) {
          error(ErrorCode::TargetInFeatures, "FEATURES",
                "target '" + n + "' cannot also be a feature");
        }
        if (class_column && n == *class_column) {
          warning(ErrorCode::TargetInFeatures, "FEATURES",
                  "class column '" + n + "' is excluded from the features");
        }
      }
    }
    // With OVER the labels come from the OVER table (checked in check_over).
    if (!d_.over_table) check_columns_exist(*from, d_.label_columns, "LABEL");
    if (std::any_of(out_.begin(), out_.end(), [](const Diagnostic& x) { return x.is_error(); })) return;

    const auto features = expand_features(d_, *from, class_column);
    if (features.empty()) {
      error(ErrorCode::DegenerateDesign, "FEATURES", "no feature columns remain");
      return;
    }
    std::vector<FeatureSpec> specs;
    for (const auto& n : features) {
      const Column& c = from->column(n);
      if (c.dtype != DataType::Numeric) {
        error(ErrorCode::DatatypeFail, "FEATURES",
              "feature '" + n + "' is categorical; wrangle it with INSPECT " + quote_identifier(n) +
                  " NUMERIZE or CATEGORIZE before training");
      }
      specs.push_back({n, DataType::Numeric, std::nullopt});
    }
    if (d_.ml_type == MlType::Pred && from->column(*d_.target).dtype != DataType::Numeric) {
      error(ErrorCode::DatatypeFail, "PREDICTION",
            "target '" + *d_.target + "' is categorical; PREDICTION needs a numeric target");
    }
    if (d_.st_type == StmtType::Gen) check_over(specs);
  }

  void check_inspect() {
    auto from = from_table();
    if (!from) return;
    std::vector<std::string> seen;
    for (const auto& a : d_.actions) {
      if (!from->has_column(a.column)) {
        error(ErrorCode::UnknownColumn, "INSPECT",
              "column '" + a.column + "' not found in '" + from->name() + "'");
        continue;
      }
      if (std::holds_alternative<Categorize>(a.action) &&
          from->column(a.column).dtype != DataType::Numeric) {
        error(ErrorCode::NotNumeric, "CATEGORIZE", "column '" + a.column + "' is not numeric");
      }
    }
  }

  const Delta& d_;
  const Catalog& catalog_;
  std::vector<Diagnostic> out_;
};

}  // namespace

std::vector<Diagnostic> validate(const Delta& d, const Catalog& catalog) {
  return Validator(d, catalog).run();
}

}  // namespace mql
