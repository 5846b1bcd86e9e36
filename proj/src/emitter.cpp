#include "mql/emitter.hpp"

#include <algorithm>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "mql/error.hpp"
#include "mql/syntax.hpp"

namespace mql::detail {
extern const std::string_view kBackendTemplates;
}

namespace mql {
namespace {

using Vars = std::map<std::string, std::string>;

[[noreturn]] void unsupported(const std::string& what) {
  throw Error(ErrorCode::UnsupportedForEmission, what);
}

// Sections start at lines of the form `@@ name` and run to the next one.
const std::map<std::string, std::string, std::less<>>& sections() {
  static const auto parsed = [] {
    std::map<std::string, std::string, std::less<>> out;
    std::istringstream in{std::string(detail::kBackendTemplates)};
    std::string line;
    std::string* current = nullptr;
    while (std::getline(in, line)) {
      if (line.rfind("@@ ", 0) == 0) {
        current = &out[line.substr(3)];
      } else if (current) {
        *current += line;
        *current += '\n';
      }
    }
    return out;
  }();
  return parsed;
}

bool has_section(std::string_view name) { return sections().count(name) > 0; }

std::string section(std::string_view name, const Vars& vars) {
  auto it = sections().find(name);
  if (it == sections().end()) unsupported("no backend template section '" + std::string(name) + "'");
  const std::string& body = it->second;
  std::string out;
  std::size_t pos = 0;
  while (true) {
    std::size_t open = body.find("{{", pos);
    if (open == std::string::npos) {
      out.append(body, pos, std::string::npos);
      break;
    }
    std::size_t close = body.find("}}", open);
    out.append(body, pos, open - pos);
    std::string key = body.substr(open + 2, close - open - 2);
    auto v = vars.find(key);
    if (v == vars.end()) {
      unsupported("template section '" + std::string(name) + "' needs '" + key + "'");
    }
    out += v->second;
    pos = close + 2;
  }
  return out;
}

// Python string literal; JSON string syntax is a subset of Python's.
std::string py_str(std::string_view s) { return nlohmann::json(std::string(s)).dump(); }

std::string py_list(const std::vector<std::string>& items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += py_str(items[i]);
  }
  return out + "]";
}

std::string py_num(double v) { return format_number(v); }

std::string py_literal(const Literal& v) {
  if (const double* d = std::get_if<double>(&v)) return py_num(*d);
  return py_str(std::get<std::string>(v));
}

std::string py_op(CompareOp op) {
  switch (op) {
    case CompareOp::Eq: return "==";
    case CompareOp::Ne: return "!=";
    default: return std::string(compare_op_text(op));
  }
}

// Boolean row mask; a missing cell never satisfies a comparison.
std::string py_mask(const Predicate& p) {
  std::string out;
  for (std::size_t i = 0; i < p.terms.size(); ++i) {
    const auto& t = p.terms[i];
    std::string col = "df[" + py_str(t.column) + "]";
    if (i) out += " & ";
    out += "(" + col + ".notna() & (" + col + " " + py_op(t.op) + " " + py_literal(t.value) + "))";
  }
  return out;
}

// NUMERIZE expression over the scalar `x`.
std::string py_expr(const NumExpr& e) {
  switch (e.kind) {
    case NumExpr::Kind::Number: return py_num(e.number);
    case NumExpr::Kind::ColumnRef: return "x";
    case NumExpr::Kind::Negate: return "(-" + py_expr(e.operands.at(0)) + ")";
    case NumExpr::Kind::Binary:
      return "(" + py_expr(e.operands.at(0)) + " " + e.op + " " + py_expr(e.operands.at(1)) + ")";
    case NumExpr::Kind::Call: {
      static const std::map<std::string, std::string, std::less<>> fns = {
          {"log", "np.log"}, {"log10", "np.log10"}, {"exp", "np.exp"},
          {"abs", "abs"},    {"sqrt", "np.sqrt"}};
      auto it = fns.find(e.name);
      if (it == fns.end()) unsupported("function '" + e.name + "' has no backend equivalent");
      return it->second + "(" + py_expr(e.operands.at(0)) + ")";
    }
  }
  unsupported("unknown expression");
}

std::string paren_list(const std::vector<std::string>& items) {
  std::string out = "(";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += items[i];
  }
  return out + ")";
}

std::string algorithm_suffix(std::string_view algorithm, MlType t) {
  std::string a(algorithm);
  std::string typed = a + (t == MlType::Class ? "_class" : "_pred");
  return has_section("ctor_" + typed) ? typed : a;
}

std::string model_title(std::string_view algorithm) {
  static const std::map<std::string, std::string, std::less<>> titles = {
      {"LinearRegression", "linear regression"}, {"Ridge", "ridge regression"},
      {"DecisionTree", "decision tree"},         {"RandomForest", "random forest"},
      {"KNN", "k-nearest-neighbors"},            {"KMeans", "k-means"}};
  auto it = titles.find(algorithm);
  return it == titles.end() ? std::string(algorithm) : it->second;
}

Vars base_vars(const EmitPlan& p) {
  Vars v;
  v["index"] = std::to_string(p.statement_index);
  v["kind"] = std::string(stmt_type_name(p.kind));
  v["data_path_raw"] = p.data_path;
  v["data_path"] = py_str(p.data_path);
  v["over_path_raw"] = p.over_path.value_or("-");
  v["over_path"] = py_str(p.over_path.value_or(""));
  v["over_name"] = p.over_path.value_or("");
  v["seed"] = std::to_string(p.seed);
  v["missing"] = p.missing;
  v["features"] = py_list(p.features);
  v["feature_text"] = paren_list(p.features);
  v["target"] = py_str(p.target.value_or(""));
  v["target_text"] = p.target.value_or("");
  v["class_labels"] = py_list(p.class_labels);
  v["label_columns"] = py_list(p.label_columns);
  v["y_title"] = py_str(p.target.value_or("prediction"));
  v["label_title"] = py_str(p.label_columns.empty() ? std::string("row") : p.label_columns[0]);
  v["train_n"] = std::to_string(p.train_n);
  v["test_m"] = std::to_string(p.test_m);
  v["test_fraction"] = py_num(p.test_fraction);
  v["max_depth"] = std::to_string(p.hyper.max_depth);
  v["min_leaf"] = std::to_string(p.hyper.min_leaf);
  v["n_trees"] = std::to_string(p.hyper.n_trees);
  v["knn_k"] = std::to_string(p.hyper.knn_k);
  v["ridge_alpha"] = py_num(p.hyper.ridge_lambda);
  v["restarts"] = std::to_string(p.hyper.kmeans_restarts);
  v["max_iter"] = std::to_string(p.hyper.kmeans_max_iter);
  v["k"] = std::to_string(p.k);
  v["accuracy"] = p.accuracy ? py_num(*p.accuracy) : "0";
  v["plot_path"] = py_str(p.plot_path);
  v["model_name"] = py_str(p.model_name.value_or(""));
  v["model_name_text"] = p.model_name.value_or("");
  v["model_dir"] = py_str(p.model_dir.value_or(""));
  v["model_file"] = py_str(p.model_file.value_or(""));
  v["inspected_path"] = py_str(p.inspected_path);
  if (p.kind == StmtType::Ins) {
    v["algorithm"] = "none";
  } else if (p.mode == ModelMode::Best) {
    v["algorithm"] = "best";
  } else {
    v["algorithm"] = p.algorithm;
  }
  return v;
}

std::string type_suffix(MlType t) { return t == MlType::Class ? "class" : "pred"; }

std::string emit_inspect(const EmitPlan& p, Vars v) {
  std::string out;
  for (const auto& a : p.actions) {
    v["column"] = py_str(a.column);
    v["column_text"] = a.column;
    if (const auto* c = std::get_if<Categorize>(&a.action)) {
      v["bins"] = std::to_string(c->labels.size());
      v["labels"] = py_list(c->labels);
      out += section("inspect_categorize", v);
    } else if (std::holds_alternative<Impute>(a.action)) {
      bool categorical = std::find(p.categorical_columns.begin(), p.categorical_columns.end(),
                                   a.column) != p.categorical_columns.end();
      out += section(categorical ? "inspect_impute_categorical" : "inspect_impute_numeric", v);
    } else if (const auto* n = std::get_if<Numerize>(&a.action)) {
      v["expr"] = py_expr(n->expr);
      v["expr_text"] = to_text(n->expr);
      out += section("inspect_numerize", v);
    } else {
      out += section("inspect_deduplicate", v);
    }
  }
  out += section("inspect_save", v);
  return out;
}

// Prediction over OVER (or the FROM rows for stored models), then the
// per-row output lines.
std::string emit_outputs(const EmitPlan& p, Vars& v, bool stored) {
  std::string out;
  std::string frame = "X_train";
  if (p.over_path) {
    if (p.missing == "impute") {
      out += section(stored ? "over_stored_impute" : "over_impute", v);
      frame = stored ? "X_test_filled" : "X_test_imputed_df";
    } else {
      out += section("over_zero", v);
      frame = "X_test_filled";
    }
  } else if (p.ml_type != MlType::Clus) {
    out += section("holdout_predictions", v);
    frame = "X_test";
  }
  v["plot_frame"] = frame;
  switch (p.ml_type) {
    case MlType::Pred: out += section("pred_lines_numeric", v); break;
    case MlType::Class: out += section("pred_lines_label", v); break;
    case MlType::Clus: out += section("pred_lines_cluster", v); break;
  }
  if (!p.display) return out;

  out += section("plot_setup", v);
  switch (p.ml_type) {
    case MlType::Pred:
      if (p.over_path) {
        out += section(p.label_columns.empty() ? "plot_bar_index" : "plot_bar_labels", v);
      } else {
        v["x_title"] = py_str("actual " + p.target.value_or(""));
        v["y_title"] = py_str("predicted " + p.target.value_or(""));
        out += section("plot_scatter", v);
      }
      break;
    case MlType::Class: out += section("plot_class_counts", v); break;
    case MlType::Clus:
      if (p.features.size() < 2) {
        throw Error(ErrorCode::TooFewFeatures, "cluster plots need at least two features");
      }
      v["x_title"] = py_str(p.features[0]);
      v["y_title"] = py_str(p.features[1]);
      out += section("plot_clusters", v);
      break;
  }
  return out;
}

std::string emit_supervised(const EmitPlan& p, Vars v) {
  const std::string t = type_suffix(p.ml_type);
  bool best = p.mode == ModelMode::Best;
  std::vector<std::string> algos = best ? p.candidates : std::vector<std::string>{p.algorithm};
  if (algos.empty()) unsupported("best-model sweep without candidates");

  std::string imports;
  std::set<std::string> seen;
  for (const auto& a : algos) {
    std::string name = "import_" + algorithm_suffix(a, p.ml_type);
    if (!has_section(name)) {
      unsupported("algorithm '" + a + "' has no backend equivalent for " +
                  std::string(ml_type_name(p.ml_type)));
    }
    std::istringstream lines(section(name, v));
    std::string line;
    while (std::getline(lines, line)) {
      if (seen.insert(line).second) imports += line + "\n";
    }
  }
  if (!imports.empty()) imports.pop_back();
  v["model_imports"] = imports;

  std::string out = section("imports_" + t, v);
  out += section("extract_" + t, v);
  out += section(p.default_split ? "split_fraction" : "split_counts", v);
  out += section("drop_missing_" + t, v);

  if (best) {
    std::string candidates;
    for (const auto& a : algos) {
      Vars cv = v;
      cv["name"] = py_str(a);
      std::string ctor = section("ctor_" + algorithm_suffix(a, p.ml_type), v);
      cv["ctor"] = ctor.substr(0, ctor.size() - 1);
      candidates += section("candidate", cv);
    }
    if (!candidates.empty()) candidates.pop_back();
    v["candidates"] = candidates;
    v["candidate_score"] = p.ml_type == MlType::Class
                               ? "accuracy_score(y_test, candidate.predict(X_test))"
                               : "max(0.0, r2_score(y_test, candidate.predict(X_test)))";
    out += section("best_sweep", v);
  } else {
    std::string ctor = section("ctor_" + algorithm_suffix(p.algorithm, p.ml_type), v);
    v["ctor"] = ctor.substr(0, ctor.size() - 1);
    v["model_title"] = model_title(p.algorithm);
    out += section("model", v);
    out += section("fit", v);
  }
  out += section("predict_test", v);
  out += section("metric_" + t, v);
  if (!best && (p.algorithm == "LinearRegression" || p.algorithm == "Ridge")) {
    out += section("coefficients", v);
  }
  if (!best && p.accuracy) out += section("accuracy_check_" + t, v);

  if (p.kind == StmtType::Con) {
    out += section("save_model", v);
  } else {
    out += emit_outputs(p, v, false);
  }
  return out;
}

std::string emit_clustering(const EmitPlan& p, Vars v) {
  std::string out = section("clus_imports", v);
  out += section("clus_extract", v);
  out += section(p.default_split ? "clus_split_all" : "clus_split_counts", v);
  out += section("clus_fit", v);
  if (p.kind == StmtType::Con) {
    out += section("save_model", v);
  } else {
    out += emit_outputs(p, v, false);
  }
  return out;
}

}  // namespace

std::string emit_script(const EmitPlan& p) {
  Vars v = base_vars(p);
  std::string out = section("header", v);
  out += section("load", v);
  if (!p.where.empty()) {
    v["mask"] = py_mask(p.where);
    out += section("where", v);
  }

  if (p.kind == StmtType::Ins) return out + emit_inspect(p, v);

  if (p.mode == ModelMode::Stored) {
    if (p.kind != StmtType::Gen) unsupported("stored models are only used by GENERATE");
    if (!p.model_file) unsupported("stored model without an archive path");
    out += section("load_model", v);
    EmitPlan q = p;
    if (!q.over_path) q.over_path = q.data_path;
    Vars w = base_vars(q);
    return out + emit_outputs(q, w, true);
  }

  if (p.ml_type == MlType::Clus) return out + emit_clustering(p, v);
  return out + emit_supervised(p, v);
}

std::vector<std::pair<std::string, std::string>> script_header(std::string_view script) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in{std::string(script)};
  std::string line;
  constexpr std::string_view prefix = "# mql:";
  while (std::getline(in, line)) {
    if (line.rfind(prefix, 0) != 0) continue;
    std::string body = line.substr(prefix.size());
    auto eq = body.find('=');
    if (eq == std::string::npos) continue;
    out.emplace_back(body.substr(0, eq), body.substr(eq + 1));
  }
  return out;
}

}  // namespace mql
