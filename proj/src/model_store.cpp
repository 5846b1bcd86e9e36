#include "mql/model_store.hpp"

#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "mql/error.hpp"

namespace mql {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

// Doubles travel as shortest round-trip decimal strings so that reloading
// reproduces every bit.
Json num(double v) { return format_number(v); }

double to_num(const Json& j) {
  if (!j.is_string()) throw Error(ErrorCode::CorruptManifest, "expected a decimal string");
  auto v = parse_number(j.get<std::string>());
  if (!v) throw Error(ErrorCode::CorruptManifest, "malformed number '" + j.get<std::string>() + "'");
  return *v;
}

Json nums(std::span<const double> v) {
  Json a = Json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

std::vector<double> to_nums(const Json& j) {
  std::vector<double> out;
  for (const auto& x : j) out.push_back(to_num(x));
  return out;
}

Json metrics_json(const std::optional<MetricRecord>& m) {
  if (!m) return nullptr;
  Json j;
  j["rows"] = m->rows;
  if (m->mse) j["mse"] = num(*m->mse);
  if (m->r2) j["r2"] = num(*m->r2);
  if (m->accuracy_fraction) j["accuracy_fraction"] = num(*m->accuracy_fraction);
  if (m->silhouette) j["silhouette"] = num(*m->silhouette);
  j["normalized_score"] = num(m->normalized_score);
  return j;
}

std::optional<MetricRecord> metrics_from(const Json& j) {
  if (j.is_null()) return std::nullopt;
  MetricRecord m;
  m.rows = j.at("rows").get<std::size_t>();
  if (j.contains("mse")) m.mse = to_num(j["mse"]);
  if (j.contains("r2")) m.r2 = to_num(j["r2"]);
  if (j.contains("accuracy_fraction")) m.accuracy_fraction = to_num(j["accuracy_fraction"]);
  if (j.contains("silhouette")) m.silhouette = to_num(j["silhouette"]);
  m.normalized_score = to_num(j.at("normalized_score"));
  return m;
}

Json tree_json(const TreeNodes& t) {
  return Json{{"feature", t.feature},
              {"threshold", nums(t.threshold)},
              {"left", t.left},
              {"right", t.right},
              {"value", nums(t.value)}};
}

TreeNodes tree_from(const Json& j) {
  TreeNodes t;
  t.feature = j.at("feature").get<std::vector<int>>();
  t.threshold = to_nums(j.at("threshold"));
  t.left = j.at("left").get<std::vector<int>>();
  t.right = j.at("right").get<std::vector<int>>();
  t.value = to_nums(j.at("value"));
  const std::size_t n = t.feature.size();
  if (n == 0 || t.threshold.size() != n || t.left.size() != n || t.right.size() != n ||
      t.value.size() != n) {
    throw Error(ErrorCode::CorruptManifest, "tree node arrays have inconsistent lengths");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (t.feature[i] >= 0 && (t.left[i] <= static_cast<int>(i) || t.right[i] <= static_cast<int>(i) ||
                              t.left[i] >= static_cast<int>(n) || t.right[i] >= static_cast<int>(n))) {
      throw Error(ErrorCode::CorruptManifest, "tree node links out of range");
    }
  }
  return t;
}

Json standardizer_json(const Standardizer& s) {
  return Json{{"mean", nums(s.mean)}, {"scale", nums(s.scale)}};
}

Standardizer standardizer_from(const Json& j) {
  return Standardizer{to_nums(j.at("mean")), to_nums(j.at("scale"))};
}

Json hyper_json(const Hyperparameters& h) {
  return Json{{"max_depth", h.max_depth},       {"min_leaf", h.min_leaf},
              {"n_trees", h.n_trees},           {"bootstrap", h.bootstrap},
              {"subsample_features", h.subsample_features},
              {"knn_k", h.knn_k},               {"ridge_lambda", num(h.ridge_lambda)},
              {"kmeans_max_iter", h.kmeans_max_iter},
              {"kmeans_restarts", h.kmeans_restarts},
              {"seed", h.seed}};
}

Hyperparameters hyper_from(const Json& j) {
  Hyperparameters h;
  h.max_depth = j.at("max_depth").get<int>();
  h.min_leaf = j.at("min_leaf").get<int>();
  h.n_trees = j.at("n_trees").get<int>();
  h.bootstrap = j.at("bootstrap").get<bool>();
  h.subsample_features = j.at("subsample_features").get<bool>();
  h.knn_k = j.at("knn_k").get<int>();
  h.ridge_lambda = to_num(j.at("ridge_lambda"));
  h.kmeans_max_iter = j.at("kmeans_max_iter").get<int>();
  h.kmeans_restarts = j.at("kmeans_restarts").get<int>();
  h.seed = j.at("seed").get<std::uint64_t>();
  return h;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::CorruptManifest, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + p.string());
}

void require_valid(std::string_view name) {
  if (!valid_model_name(name)) {
    throw Error(ErrorCode::RangeError, "invalid model name '" + std::string(name) +
                                           "' (use letters, digits, '_', '-' and '.')");
  }
}

std::string unique_suffix(std::string_view name) {
  return std::string(name) + "-" + std::to_string(::getpid());
}

}  // namespace

bool valid_model_name(std::string_view name) {
  if (name.empty() || name.front() == '.' || name.size() > 200) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

std::string manifest_json(const Model& m) {
  Json j;
  j["format_version"] = kModelFormatVersion;
  j["name"] = m.name;
  j["ml_type"] = std::string(ml_type_name(m.ml_type));
  j["algorithm"] = m.algorithm;
  Json feats = Json::array();
  for (const auto& f : m.features) {
    feats.push_back(Json{{"name", f.name},
                         {"dtype", std::string(dtype_name(f.dtype))},
                         {"train_median", f.train_median ? num(*f.train_median) : Json(nullptr)}});
  }
  j["features"] = feats;
  j["target"] = m.target ? Json(*m.target) : Json(nullptr);
  j["class_labels"] = m.class_labels;
  j["cluster_count"] = m.cluster_count;
  j["seed"] = m.hyper.seed;
  j["hyperparameters"] = hyper_json(m.hyper);
  j["train_metrics"] = metrics_json(m.train_metrics);
  j["test_metrics"] = metrics_json(m.test_metrics);
  j["created_at"] = m.created_at;
  j["notes"] = m.notes;
  return j.dump(2) + "\n";
}

std::string params_json(const Model& m) {
  Json j = std::visit(
      [](const auto& p) -> Json {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, LinearParams>) {
          return Json{{"kind", "linear"},
                      {"intercept", num(p.intercept)},
                      {"coef", nums(p.coef)},
                      {"lambda", num(p.lambda)},
                      {"ridge_fallback", p.ridge_fallback}};
        } else if constexpr (std::is_same_v<P, TreeParams>) {
          return Json{{"kind", "tree"}, {"tree", tree_json(p.tree)}};
        } else if constexpr (std::is_same_v<P, ForestParams>) {
          Json trees = Json::array();
          for (const auto& t : p.trees) trees.push_back(tree_json(t));
          return Json{{"kind", "forest"}, {"trees", trees}};
        } else if constexpr (std::is_same_v<P, KnnParams>) {
          return Json{{"kind", "knn"},
                      {"k", p.k},
                      {"standardizer", standardizer_json(p.standardizer)},
                      {"rows", p.points.rows},
                      {"cols", p.points.cols},
                      {"points", nums(p.points.data)},
                      {"targets", nums(p.targets)}};
        } else {
          Json cents = Json::array();
          for (const auto& c : p.centroids) cents.push_back(nums(c));
          return Json{{"kind", "kmeans"},
                      {"standardizer", standardizer_json(p.standardizer)},
                      {"centroids", cents},
                      {"inertia", num(p.inertia)},
                      {"inertia_history", nums(p.inertia_history)},
                      {"iterations", p.iterations}};
        }
      },
      m.params);
  return j.dump(2) + "\n";
}

Model model_from_json(std::string_view manifest_text, std::string_view params_text) {
  try {
    const Json j = Json::parse(manifest_text);
    const Json p = Json::parse(params_text);
    if (j.at("format_version").get<int>() != kModelFormatVersion) {
      throw Error(ErrorCode::CorruptManifest, "unsupported format_version " + j["format_version"].dump());
    }
    Model m;
    m.name = j.at("name").get<std::string>();
    auto type = parse_ml_type(j.at("ml_type").get<std::string>());
    if (!type) throw Error(ErrorCode::CorruptManifest, "unknown ml_type");
    m.ml_type = *type;
    m.algorithm = j.at("algorithm").get<std::string>();
    for (const auto& f : j.at("features")) {
      FeatureSpec s;
      s.name = f.at("name").get<std::string>();
      s.dtype = f.at("dtype").get<std::string>() == "numeric" ? DataType::Numeric : DataType::Categorical;
      if (!f.at("train_median").is_null()) s.train_median = to_num(f["train_median"]);
      m.features.push_back(std::move(s));
    }
    if (!j.at("target").is_null()) m.target = j["target"].get<std::string>();
    m.class_labels = j.at("class_labels").get<std::vector<std::string>>();
    m.cluster_count = j.at("cluster_count").get<std::size_t>();
    m.hyper = hyper_from(j.at("hyperparameters"));
    m.train_metrics = metrics_from(j.at("train_metrics"));
    m.test_metrics = metrics_from(j.at("test_metrics"));
    m.created_at = j.at("created_at").get<std::string>();
    m.notes = j.at("notes").get<std::vector<std::string>>();

    const std::string kind = p.at("kind").get<std::string>();
    const std::size_t d = m.features.size();
    if (kind == "linear") {
      LinearParams lp{to_num(p.at("intercept")), to_nums(p.at("coef")), to_num(p.at("lambda")),
                      p.at("ridge_fallback").get<bool>()};
      if (lp.coef.size() != d) throw Error(ErrorCode::CorruptManifest, "coefficient count mismatch");
      m.params = std::move(lp);
    } else if (kind == "tree") {
      m.params = TreeParams{tree_from(p.at("tree"))};
    } else if (kind == "forest") {
      ForestParams fp;
      for (const auto& t : p.at("trees")) fp.trees.push_back(tree_from(t));
      if (fp.trees.empty()) throw Error(ErrorCode::CorruptManifest, "forest without trees");
      m.params = std::move(fp);
    } else if (kind == "knn") {
      KnnParams kp;
      kp.k = p.at("k").get<int>();
      kp.standardizer = standardizer_from(p.at("standardizer"));
      kp.points.rows = p.at("rows").get<std::size_t>();
      kp.points.cols = p.at("cols").get<std::size_t>();
      kp.points.data = to_nums(p.at("points"));
      kp.targets = to_nums(p.at("targets"));
      if (kp.points.cols != d || kp.points.data.size() != kp.points.rows * d ||
          kp.targets.size() != kp.points.rows) {
        throw Error(ErrorCode::CorruptManifest, "neighbour matrix shape mismatch");
      }
      m.params = std::move(kp);
    } else if (kind == "kmeans") {
      KMeansParams kp;
      kp.standardizer = standardizer_from(p.at("standardizer"));
      for (const auto& c : p.at("centroids")) {
        kp.centroids.push_back(to_nums(c));
        if (kp.centroids.back().size() != d) throw Error(ErrorCode::CorruptManifest, "centroid width mismatch");
      }
      kp.inertia = to_num(p.at("inertia"));
      kp.inertia_history = to_nums(p.at("inertia_history"));
      kp.iterations = p.at("iterations").get<int>();
      m.params = std::move(kp);
    } else {
      throw Error(ErrorCode::CorruptManifest, "unknown parameter kind '" + kind + "'");
    }
    return m;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::CorruptManifest, std::string("malformed model files: ") + e.what());
  }
}

bool model_exists(std::string_view name, const fs::path& store) {
  if (!valid_model_name(name)) return false;
  std::error_code ec;
  return fs::is_regular_file(store / std::string(name) / "manifest.json", ec);
}

fs::path save_model(const Model& m, const fs::path& store, bool replace) {
  require_valid(m.name);
  const fs::path target = store / m.name;
  std::error_code ec;
  if (fs::exists(target, ec) && !replace) {
    throw Error(ErrorCode::NameCollision,
                "model '" + m.name + "' already exists in " + store.string() + " (use --replace)");
  }
  try {
    fs::create_directories(store);
    const fs::path tmp = store / (".tmp-" + unique_suffix(m.name));
    fs::remove_all(tmp);
    fs::create_directory(tmp);
    write_file(tmp / "manifest.json", manifest_json(m));
    write_file(tmp / "params.json", params_json(m));
    if (fs::exists(target)) {
      const fs::path old = store / (".old-" + unique_suffix(m.name));
      fs::remove_all(old);
      fs::rename(target, old);
      fs::rename(tmp, target);
      fs::remove_all(old);
    } else {
      fs::rename(tmp, target);
    }
  } catch (const fs::filesystem_error& e) {
    throw Error(ErrorCode::IoError, std::string("saving model failed: ") + e.what());
  }
  return target;
}

Model load_model(std::string_view name, const fs::path& store) {
  if (!model_exists(name, store)) {
    throw Error(ErrorCode::UnknownModel, "no stored model named '" + std::string(name) + "' in " +
                                             store.string());
  }
  const fs::path dir = store / std::string(name);
  return model_from_json(read_file(dir / "manifest.json"), read_file(dir / "params.json"));
}

std::vector<ModelSummary> list_models(const fs::path& store) {
  std::vector<ModelSummary> out;
  std::error_code ec;
  if (!fs::is_directory(store, ec)) return out;
  for (const auto& entry : fs::directory_iterator(store)) {
    const std::string name = entry.path().filename().string();
    if (!entry.is_directory() || !valid_model_name(name)) continue;
    const fs::path manifest = entry.path() / "manifest.json";
    if (!fs::is_regular_file(manifest)) continue;
    try {
      const Json j = Json::parse(read_file(manifest));
      ModelSummary s;
      s.name = j.at("name").get<std::string>();
      s.ml_type = parse_ml_type(j.at("ml_type").get<std::string>()).value_or(MlType::Pred);
      s.algorithm = j.at("algorithm").get<std::string>();
      s.created_at = j.at("created_at").get<std::string>();
      const Json& ref = !j.at("test_metrics").is_null() ? j["test_metrics"] : j.at("train_metrics");
      if (!ref.is_null()) s.score = to_num(ref.at("normalized_score"));
      out.push_back(std::move(s));
    } catch (const std::exception&) {
      out.push_back(ModelSummary{name, MlType::Pred, "(corrupt manifest)", "", std::nullopt});
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  return out;
}

void delete_model(std::string_view name, const fs::path& store) {
  if (!valid_model_name(name) || !fs::is_directory(store / std::string(name))) {
    throw Error(ErrorCode::UnknownModel, "no stored model named '" + std::string(name) + "'");
  }
  fs::remove_all(store / std::string(name));
}

}  // namespace mql
