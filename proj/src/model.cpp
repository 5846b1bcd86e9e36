#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include "mql/error.hpp"
#include "mql/learn.hpp"
#include "mql/result.hpp"

namespace mql {

std::string_view ml_type_name(MlType t) {
  switch (t) {
    case MlType::Pred: return "pred";
    case MlType::Class: return "class";
    case MlType::Clus: return "clus";
  }
  return "pred";
}

std::optional<MlType> parse_ml_type(std::string_view s) {
  if (s == "pred") return MlType::Pred;
  if (s == "class") return MlType::Class;
  if (s == "clus") return MlType::Clus;
  return std::nullopt;
}

std::vector<std::string> Model::feature_names() const {
  std::vector<std::string> out;
  out.reserve(features.size());
  for (const auto& f : features) out.push_back(f.name);
  return out;
}

const MetricRecord* Model::reference_metrics() const {
  if (test_metrics) return &*test_metrics;
  if (train_metrics) return &*train_metrics;
  return nullptr;
}

// ---------------------------------------------------------------------------
// Registry

namespace {

constexpr AlgorithmInfo kRegistry[] = {
    {"LinearRegression", true, false, false},
    {"Ridge", true, false, false},
    {"DecisionTree", true, true, false},
    {"RandomForest", true, true, false},
    {"KNN", true, true, false},
    {"KMeans", false, false, true},
};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace

std::span<const AlgorithmInfo> algorithm_registry() { return kRegistry; }

const AlgorithmInfo* find_algorithm(std::string_view name) {
  for (const auto& a : kRegistry) {
    if (iequals(a.name, name)) return &a;
  }
  return nullptr;
}

std::string_view default_algorithm(MlType t) {
  switch (t) {
    case MlType::Pred: return "LinearRegression";
    case MlType::Class: return "DecisionTree";
    case MlType::Clus: return "KMeans";
  }
  return "LinearRegression";
}

std::vector<std::string_view> algorithms_for(MlType t) {
  std::vector<std::string_view> out;
  for (const auto& a : kRegistry) {
    if (a.supports(t)) out.push_back(a.name);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Data extraction

namespace {

std::optional<std::size_t> class_index(std::span<const std::string> labels, const std::string& token) {
  auto it = std::lower_bound(labels.begin(), labels.end(), token);
  if (it == labels.end() || *it != token) return std::nullopt;
  return static_cast<std::size_t>(it - labels.begin());
}

std::vector<std::string> sorted_labels(std::span<const std::string> labels) {
  std::vector<std::string> out(labels.begin(), labels.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

TrainingData extract_training(const Table& t, std::span<const std::string> features,
                              const std::optional<std::string>& target, MlType type,
                              std::span<const std::string> class_labels) {
  std::vector<const Column*> cols;
  for (const auto& name : features) {
    const Column& c = t.column(name);
    if (c.dtype != DataType::Numeric) {
      throw Error(ErrorCode::NotNumeric, "feature '" + name + "' is categorical; learners need numeric features");
    }
    cols.push_back(&c);
  }
  const Column* tc = nullptr;
  if (target) {
    tc = &t.column(*target);
    if (type == MlType::Pred && tc->dtype != DataType::Numeric) {
      throw Error(ErrorCode::NotNumeric, "prediction target '" + *target + "' is categorical");
    }
  }

  TrainingData out;
  std::vector<std::size_t> keep;
  std::vector<double> y;
  for (std::size_t r = 0; r < t.row_count(); ++r) {
    bool ok = std::none_of(cols.begin(), cols.end(), [&](const Column* c) { return c->missing(r); });
    double yv = 0;
    if (ok && tc) {
      if (tc->missing(r)) {
        ok = false;
      } else if (type == MlType::Class) {
        auto idx = class_index(class_labels, cell_token(tc->cells[r]));
        if (idx) yv = static_cast<double>(*idx);
        else ok = false;
      } else {
        yv = tc->number(r);
      }
    }
    if (!ok) {
      ++out.dropped;
      continue;
    }
    keep.push_back(r);
    y.push_back(yv);
  }
  out.x = Matrix(keep.size(), cols.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) out.x(i, j) = cols[j]->number(keep[i]);
  }
  if (tc) out.y = std::move(y);
  return out;
}

// ---------------------------------------------------------------------------
// Table-level fitting

namespace {

Model base_model(const Table& train, std::span<const std::string> features, MlType type,
                 std::string algorithm) {
  Model m;
  m.ml_type = type;
  m.algorithm = std::move(algorithm);
  for (const auto& name : features) {
    const Column& c = train.column(name);
    m.features.push_back(FeatureSpec{name, c.dtype, std::nullopt});
  }
  return m;
}

// Medians over the rows actually used for fitting; the `impute` policy fills
// prediction inputs with these.
void set_medians(Model& m, const Matrix& x) {
  if (x.rows == 0) return;
  std::vector<double> col(x.rows);
  for (std::size_t j = 0; j < m.features.size(); ++j) {
    for (std::size_t i = 0; i < x.rows; ++i) col[i] = x(i, j);
    std::sort(col.begin(), col.end());
    const std::size_t h = x.rows / 2;
    m.features[j].train_median = x.rows % 2 == 1 ? col[h] : (col[h - 1] + col[h]) / 2;
  }
}

void note_dropped(Model& m, std::size_t dropped) {
  if (dropped > 0) {
    m.notes.push_back("dropped " + std::to_string(dropped) +
                      " training rows with missing or out-of-label cells");
  }
}

void finish(Model& m, const Table& train) { m.train_metrics = evaluate(m, train); }

}  // namespace

Model fit_linear(const Table& train, const std::string& target,
                 std::span<const std::string> features, double lambda) {
  Model m = base_model(train, features, MlType::Pred, lambda > 0 ? "Ridge" : "LinearRegression");
  m.target = target;
  TrainingData d = extract_training(train, features, target, MlType::Pred, {});
  LinearParams p = fit_linear_matrix(d.x, d.y, lambda);
  if (p.ridge_fallback) {
    m.notes.push_back("singular design; refit with ridge lambda " + format_number(p.lambda));
  }
  m.params = std::move(p);
  set_medians(m, d.x);
  note_dropped(m, d.dropped);
  finish(m, train);
  return m;
}

Model fit_tree(const Table& train, const std::string& target, std::span<const std::string> features,
               MlType type, std::span<const std::string> class_labels, const Hyperparameters& hyper) {
  Model m = base_model(train, features, type, "DecisionTree");
  m.target = target;
  m.hyper = hyper;
  if (type == MlType::Class) m.class_labels = sorted_labels(class_labels);
  TrainingData d = extract_training(train, features, target, type, m.class_labels);
  m.params = TreeParams{fit_tree_matrix(d.x, d.y, type, m.class_labels.size(), hyper, false,
                                        static_cast<std::uint32_t>(hyper.seed))};
  set_medians(m, d.x);
  note_dropped(m, d.dropped);
  finish(m, train);
  return m;
}

Model fit_forest(const Table& train, const std::string& target,
                 std::span<const std::string> features, MlType type,
                 std::span<const std::string> class_labels, const Hyperparameters& hyper) {
  Model m = base_model(train, features, type, "RandomForest");
  m.target = target;
  m.hyper = hyper;
  if (type == MlType::Class) m.class_labels = sorted_labels(class_labels);
  TrainingData d = extract_training(train, features, target, type, m.class_labels);
  m.params = ForestParams{fit_forest_matrix(d.x, d.y, type, m.class_labels.size(), hyper)};
  set_medians(m, d.x);
  note_dropped(m, d.dropped);
  finish(m, train);
  return m;
}

Model fit_knn(const Table& train, const std::string& target, std::span<const std::string> features,
              MlType type, std::span<const std::string> class_labels, int k) {
  Model m = base_model(train, features, type, "KNN");
  m.target = target;
  m.hyper.knn_k = k;
  if (type == MlType::Class) m.class_labels = sorted_labels(class_labels);
  TrainingData d = extract_training(train, features, target, type, m.class_labels);
  if (k < 1) throw Error(ErrorCode::RangeError, "KNN needs k >= 1");
  if (d.x.cols == 0) throw Error(ErrorCode::DegenerateDesign, "KNN needs at least one feature");
  if (static_cast<std::size_t>(k) > d.x.rows) {
    throw Error(ErrorCode::KTooLarge, "KNN k=" + std::to_string(k) + " exceeds the " +
                                          std::to_string(d.x.rows) + " usable training rows");
  }
  KnnParams p;
  p.k = k;
  p.standardizer = Standardizer::fit(d.x);
  p.points = p.standardizer.apply(d.x);
  p.targets = std::move(d.y);
  m.params = std::move(p);
  set_medians(m, d.x);
  note_dropped(m, d.dropped);
  finish(m, train);
  return m;
}

Model fit_kmeans(const Table& train, std::span<const std::string> features, std::size_t k,
                 const Hyperparameters& hyper) {
  Model m = base_model(train, features, MlType::Clus, "KMeans");
  m.hyper = hyper;
  m.cluster_count = k;
  TrainingData d = extract_training(train, features, std::nullopt, MlType::Clus, {});
  m.params = fit_kmeans_matrix(d.x, k, hyper);
  set_medians(m, d.x);
  note_dropped(m, d.dropped);
  finish(m, train);
  return m;
}

Model train_algorithm(std::string_view algorithm, MlType type, const Table& train,
                      const std::optional<std::string>& target,
                      std::span<const std::string> features,
                      std::span<const std::string> class_labels, std::size_t cluster_count,
                      const Hyperparameters& hyper) {
  const AlgorithmInfo* info = find_algorithm(algorithm);
  if (info == nullptr || !info->supports(type)) {
    std::string valid;
    for (auto name : algorithms_for(type)) valid += (valid.empty() ? "" : ", ") + std::string(name);
    throw Error(ErrorCode::UnknownAlgorithm,
                info == nullptr
                    ? "unknown algorithm '" + std::string(algorithm) + "' (known for " +
                          std::string(ml_type_name(type)) + ": " + valid + ")"
                    : "algorithm '" + std::string(info->name) + "' does not support " +
                          std::string(ml_type_name(type)) + " (use one of: " + valid + ")");
  }
  if (type != MlType::Clus && !target) {
    throw Error(ErrorCode::MissingInput, "supervised training needs a target column");
  }
  const std::string_view name = info->name;
  Model m;
  if (name == "LinearRegression") m = fit_linear(train, *target, features, 0.0);
  else if (name == "Ridge") m = fit_linear(train, *target, features, hyper.ridge_lambda);
  else if (name == "DecisionTree") m = fit_tree(train, *target, features, type, class_labels, hyper);
  else if (name == "RandomForest") m = fit_forest(train, *target, features, type, class_labels, hyper);
  else if (name == "KNN") m = fit_knn(train, *target, features, type, class_labels, hyper.knn_k);
  else m = fit_kmeans(train, features, cluster_count, hyper);
  m.hyper = hyper;
  return m;
}

// ---------------------------------------------------------------------------
// Prediction

Matrix feature_matrix(const Model& m, const Table& rows) {
  std::vector<const Column*> cols;
  for (const auto& f : m.features) {
    auto idx = rows.find(f.name);
    if (!idx) {
      throw Error(ErrorCode::SchemaMismatch, "model '" + m.name + "' needs column '" + f.name +
                                                 "' which is absent from table '" + rows.name() + "'");
    }
    const Column& c = rows.columns()[*idx];
    if (c.dtype != f.dtype) {
      throw Error(ErrorCode::SchemaMismatch, "column '" + f.name + "' is " +
                                                 std::string(dtype_name(c.dtype)) + " but the model expects " +
                                                 std::string(dtype_name(f.dtype)));
    }
    cols.push_back(&c);
  }
  Matrix x(rows.row_count(), cols.size());
  for (std::size_t r = 0; r < rows.row_count(); ++r) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (cols[j]->missing(r)) {
        throw Error(ErrorCode::SchemaMismatch, "column '" + cols[j]->name + "' has a missing cell in row " +
                                                   std::to_string(r + 1));
      }
      x(r, j) = cols[j]->number(r);
    }
  }
  return x;
}

namespace {

double predict_raw(const Model& m, std::span<const double> row) {
  const std::size_t n_classes = m.class_labels.size();
  return std::visit(
      [&](const auto& p) -> double {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, LinearParams>) {
          return predict_linear_row(p, row);
        } else if constexpr (std::is_same_v<P, TreeParams>) {
          return predict_tree_row(p.tree, row);
        } else if constexpr (std::is_same_v<P, ForestParams>) {
          if (m.ml_type == MlType::Class) {
            std::vector<std::size_t> votes(n_classes, 0);
            for (const auto& t : p.trees) ++votes[static_cast<std::size_t>(predict_tree_row(t, row))];
            return static_cast<double>(std::max_element(votes.begin(), votes.end()) - votes.begin());
          }
          double sum = 0;
          for (const auto& t : p.trees) sum += predict_tree_row(t, row);
          return sum / static_cast<double>(p.trees.size());
        } else if constexpr (std::is_same_v<P, KnnParams>) {
          return predict_knn_row(p, row, m.ml_type, n_classes);
        } else {
          return static_cast<double>(nearest_centroid(p, row));
        }
      },
      m.params);
}

}  // namespace

std::vector<Cell> predict_cells(const Model& m, const Table& rows) {
  const Matrix x = feature_matrix(m, rows);
  std::vector<Cell> out;
  out.reserve(x.rows);
  for (std::size_t r = 0; r < x.rows; ++r) {
    const double v = predict_raw(m, x.row(r));
    if (m.ml_type == MlType::Class) {
      out.emplace_back(m.class_labels.at(static_cast<std::size_t>(v)));
    } else {
      out.emplace_back(v);
    }
  }
  return out;
}

std::string ResultSet::output_column() const {
  switch (ml_type) {
    case MlType::Pred: return "prediction";
    case MlType::Class: return "class";
    case MlType::Clus: return "cluster";
  }
  return "prediction";
}

ResultSet predict(const Model& m, const Table& rows) {
  ResultSet r;
  r.ml_type = m.ml_type;
  r.feature_names = m.feature_names();
  r.features = feature_matrix(m, rows);
  r.outputs = predict_cells(m, rows);
  if (m.ml_type == MlType::Clus) {
    r.target_name = "cluster";
    if (const auto* p = std::get_if<KMeansParams>(&m.params)) r.centroids = p->centroids;
  } else {
    r.target_name = m.target.value_or("");
    if (m.target && rows.has_column(*m.target)) {
      const Column& c = rows.column(*m.target);
      std::vector<Cell> actual;
      actual.reserve(c.size());
      for (const auto& cell : c.cells) {
        if (m.ml_type == MlType::Class && !is_missing(cell)) actual.emplace_back(cell_token(cell));
        else actual.push_back(cell);
      }
      r.actuals = std::move(actual);
    }
  }
  return r;
}

Table to_table(const ResultSet& r) {
  std::vector<Column> cols = r.labels;
  Column out{r.output_column(),
             r.ml_type == MlType::Class ? DataType::Categorical : DataType::Numeric, r.outputs};
  cols.push_back(std::move(out));
  if (r.actuals) {
    bool numeric = std::all_of(r.actuals->begin(), r.actuals->end(), [](const Cell& c) {
      return !std::holds_alternative<std::string>(c);
    });
    cols.push_back(Column{"actual", numeric ? DataType::Numeric : DataType::Categorical, *r.actuals});
  }
  return Table("result", std::move(cols));
}

// ---------------------------------------------------------------------------
// Metrics

MetricRecord regression_metrics(std::span<const double> actual, std::span<const double> predicted) {
  MetricRecord rec;
  const std::size_t n = actual.size();
  rec.rows = n;
  if (n == 0) throw Error(ErrorCode::EmptyTestSet, "cannot evaluate on zero rows");
  double mean = 0;
  for (double v : actual) mean += v;
  mean /= static_cast<double>(n);
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ss_res += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
    ss_tot += (actual[i] - mean) * (actual[i] - mean);
  }
  rec.mse = ss_res / static_cast<double>(n);
  if (ss_tot == 0) rec.r2 = ss_res == 0 ? 1.0 : 0.0;
  else rec.r2 = 1.0 - ss_res / ss_tot;
  rec.normalized_score = normalized_score(MlType::Pred, rec);
  return rec;
}

double normalized_score(MlType type, const MetricRecord& r) {
  switch (type) {
    case MlType::Pred: return std::max(0.0, r.r2.value_or(0.0));
    case MlType::Class: return r.accuracy_fraction.value_or(0.0);
    case MlType::Clus: return (r.silhouette.value_or(0.0) + 1.0) / 2.0;
  }
  return 0;
}

MetricRecord evaluate(const Model& m, const Table& test) {
  TrainingData d = extract_training(test, m.feature_names(),
                                    m.ml_type == MlType::Clus ? std::nullopt : m.target, m.ml_type,
                                    m.class_labels);
  const std::size_t n = d.x.rows;
  if (n == 0) throw Error(ErrorCode::EmptyTestSet, "no usable rows to evaluate model '" + m.name + "' on");

  std::vector<double> pred(n);
  for (std::size_t i = 0; i < n; ++i) pred[i] = predict_raw(m, d.x.row(i));

  if (m.ml_type == MlType::Pred) return regression_metrics(d.y, pred);

  MetricRecord rec;
  rec.rows = n;
  if (m.ml_type == MlType::Class) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) hits += pred[i] == d.y[i] ? 1 : 0;
    rec.accuracy_fraction = static_cast<double>(hits) / static_cast<double>(n);
  } else {
    const auto& p = std::get<KMeansParams>(m.params);
    std::vector<std::size_t> assignment(n);
    for (std::size_t i = 0; i < n; ++i) assignment[i] = static_cast<std::size_t>(pred[i]);
    rec.silhouette = silhouette_score(p.standardizer.apply(d.x), assignment);
  }
  rec.normalized_score = normalized_score(m.ml_type, rec);
  return rec;
}

}  // namespace mql
