#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mql/table.hpp"

namespace mql {

enum class MlType { Pred, Class, Clus };

std::string_view ml_type_name(MlType t);  // "pred" / "class" / "clus"
std::optional<MlType> parse_ml_type(std::string_view s);

// Dense row-major matrix used by the learners.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

struct MetricRecord {
  std::size_t rows = 0;
  std::optional<double> mse;                // pred
  std::optional<double> r2;                 // pred
  std::optional<double> accuracy_fraction;  // class
  std::optional<double> silhouette;         // clus
  double normalized_score = 0;

  bool operator==(const MetricRecord&) const = default;
};

struct Hyperparameters {
  int max_depth = 10;
  int min_leaf = 2;
  int n_trees = 100;
  bool bootstrap = true;
  bool subsample_features = true;  // ceil(sqrt(d)) candidates per split
  int knn_k = 5;
  double ridge_lambda = 1.0;       // Ridge algorithm penalty
  int kmeans_max_iter = 300;
  int kmeans_restarts = 10;
  std::uint64_t seed = 42;

  bool operator==(const Hyperparameters&) const = default;
};

// Ridge penalty used when the OLS Gram matrix is numerically singular.
inline constexpr double kRidgeFallbackLambda = 1e-8;
// Reciprocal condition estimate below which the fallback engages.
inline constexpr double kSingularRcond = 1e-12;

struct LinearParams {
  double intercept = 0;
  std::vector<double> coef;
  double lambda = 0;
  bool ridge_fallback = false;

  bool operator==(const LinearParams&) const = default;
};

// Flat CART node arrays; feature < 0 marks a leaf. Samples with
// x[feature] <= threshold go left. For classifiers `value` is a class index.
struct TreeNodes {
  std::vector<int> feature;
  std::vector<double> threshold;
  std::vector<int> left;
  std::vector<int> right;
  std::vector<double> value;

  std::size_t size() const { return feature.size(); }
  int depth() const;
  bool operator==(const TreeNodes&) const = default;
};

struct TreeParams {
  TreeNodes tree;
  bool operator==(const TreeParams&) const = default;
};

struct ForestParams {
  std::vector<TreeNodes> trees;
  bool operator==(const ForestParams&) const = default;
};

struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;  // population std, 1 where the column is constant

  static Standardizer fit(const Matrix& x);
  Matrix apply(const Matrix& x) const;
  std::vector<double> apply_row(std::span<const double> row) const;
  bool operator==(const Standardizer&) const = default;
};

struct KnnParams {
  int k = 5;
  Standardizer standardizer;
  Matrix points;  // standardized training rows
  std::vector<double> targets;

  bool operator==(const KnnParams& o) const {
    return k == o.k && standardizer == o.standardizer && points.rows == o.points.rows &&
           points.cols == o.points.cols && points.data == o.points.data && targets == o.targets;
  }
};

struct KMeansParams {
  Standardizer standardizer;
  std::vector<std::vector<double>> centroids;  // raw feature units
  double inertia = 0;                          // raw feature units
  std::vector<double> inertia_history;         // standardized objective per Lloyd step
  int iterations = 0;

  bool operator==(const KMeansParams&) const = default;
};

using ModelParams = std::variant<LinearParams, TreeParams, ForestParams, KnnParams, KMeansParams>;

struct FeatureSpec {
  std::string name;
  DataType dtype = DataType::Numeric;
  std::optional<double> train_median;  // used by the `impute` missing policy

  bool operator==(const FeatureSpec&) const = default;
};

struct Model {
  std::string name;
  MlType ml_type = MlType::Pred;
  std::string algorithm;
  std::vector<FeatureSpec> features;
  std::optional<std::string> target;      // prediction target or class column
  std::vector<std::string> class_labels;  // sorted; class indices refer to this order
  std::size_t cluster_count = 0;
  ModelParams params;
  Hyperparameters hyper;
  std::optional<MetricRecord> train_metrics;
  std::optional<MetricRecord> test_metrics;
  std::string created_at;
  std::vector<std::string> notes;

  std::vector<std::string> feature_names() const;
  // Test metrics when present, training metrics otherwise.
  const MetricRecord* reference_metrics() const;
};

// ---------------------------------------------------------------------------
// Algorithm registry

struct AlgorithmInfo {
  std::string_view name;
  bool pred;
  bool cls;
  bool clus;

  bool supports(MlType t) const {
    return t == MlType::Pred ? pred : t == MlType::Class ? cls : clus;
  }
};

std::span<const AlgorithmInfo> algorithm_registry();
// Case-insensitive lookup returning the canonical entry.
const AlgorithmInfo* find_algorithm(std::string_view name);
std::string_view default_algorithm(MlType t);
std::vector<std::string_view> algorithms_for(MlType t);

// ---------------------------------------------------------------------------
// Splitting

struct Split {
  Table train;
  Table test;
  std::size_t unused = 0;
  std::vector<std::string> warnings;
};

// Rows are permuted with Rng(seed).permutation(rows); the first m permuted
// rows form the test set and the next n the training set. m is clamped to
// rows - n with a warning when n + m exceeds the row count.
Split train_test_split(const Table& t, long long n, long long m, std::uint64_t seed);

// Counts used when no TRAIN/TEST clause is given: test = ceil(0.2 * rows).
std::pair<long long, long long> default_split_counts(std::size_t rows);

// ---------------------------------------------------------------------------
// Matrix-level learners

LinearParams fit_linear_matrix(const Matrix& x, std::span<const double> y, double lambda);
TreeNodes fit_tree_matrix(const Matrix& x, std::span<const double> y, MlType type,
                          std::size_t n_classes, const Hyperparameters& hyper,
                          bool subsample_features, std::uint32_t seed);
std::vector<TreeNodes> fit_forest_matrix(const Matrix& x, std::span<const double> y, MlType type,
                                         std::size_t n_classes, const Hyperparameters& hyper);
KMeansParams fit_kmeans_matrix(const Matrix& x, std::size_t k, const Hyperparameters& hyper);

double predict_tree_row(const TreeNodes& tree, std::span<const double> row);
double predict_linear_row(const LinearParams& p, std::span<const double> row);
double predict_knn_row(const KnnParams& p, std::span<const double> row, MlType type,
                       std::size_t n_classes);
std::size_t nearest_centroid(const KMeansParams& p, std::span<const double> row);

// Mean silhouette over rows of `x` with the given assignments; 0 when fewer
// than two clusters are populated.
double silhouette_score(const Matrix& x, std::span<const std::size_t> assignment);

// ---------------------------------------------------------------------------
// Table-level training / prediction

struct TrainingData {
  Matrix x;
  std::vector<double> y;      // numeric target or class index
  std::size_t dropped = 0;    // rows dropped for missing cells / unknown classes
};

// Extracts features (and target when given) from a table, dropping rows with
// missing cells. Throws NotNumeric for categorical features.
TrainingData extract_training(const Table& t, std::span<const std::string> features,
                              const std::optional<std::string>& target, MlType type,
                              std::span<const std::string> class_labels);

Model fit_linear(const Table& train, const std::string& target,
                 std::span<const std::string> features, double lambda);
Model fit_tree(const Table& train, const std::string& target, std::span<const std::string> features,
               MlType type, std::span<const std::string> class_labels, const Hyperparameters& hyper);
Model fit_forest(const Table& train, const std::string& target,
                 std::span<const std::string> features, MlType type,
                 std::span<const std::string> class_labels, const Hyperparameters& hyper);
Model fit_knn(const Table& train, const std::string& target, std::span<const std::string> features,
              MlType type, std::span<const std::string> class_labels, int k);
Model fit_kmeans(const Table& train, std::span<const std::string> features, std::size_t k,
                 const Hyperparameters& hyper);

// Registry dispatch. `target` is the prediction target or class column.
Model train_algorithm(std::string_view algorithm, MlType type, const Table& train,
                      const std::optional<std::string>& target,
                      std::span<const std::string> features,
                      std::span<const std::string> class_labels, std::size_t cluster_count,
                      const Hyperparameters& hyper);

// Feature matrix for prediction; missing cells or absent columns throw
// SchemaMismatch.
Matrix feature_matrix(const Model& m, const Table& rows);

// Per-row outputs: prediction (double), class label (string) or cluster index
// (double).
std::vector<Cell> predict_cells(const Model& m, const Table& rows);

MetricRecord evaluate(const Model& m, const Table& test);

MetricRecord regression_metrics(std::span<const double> actual, std::span<const double> predicted);
double normalized_score(MlType type, const MetricRecord& r);

}  // namespace mql
