#include <doctest.h>

#include <nlohmann/json.hpp>

#include "mql/error.hpp"
#include "mql/model_store.hpp"
#include "test_support.hpp"

using namespace mql;
using mql::test::fixtures;
using mql::test::read_file;
using mql::test::TempDir;
using mql::test::write_file;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an mql::Error");
  return ErrorCode::Usage;
}

Model trained(const std::string& algorithm, MlType type) {
  Table t = type == MlType::Class ? load_csv(fixtures() / "Flowers.csv") : load_csv(fixtures() / "bostonHomes.csv");
  Hyperparameters h;
  h.n_trees = 8;
  Model m;
  if (type == MlType::Class) {
    std::vector<std::string> f{"PetalLength", "PetalWidth"}, labels{"setosa", "versicolor", "virginica"};
    m = train_algorithm(algorithm, type, t, std::string("Species"), f, labels, 0, h);
  } else if (type == MlType::Clus) {
    std::vector<std::string> f{"RM", "LSTAT"};
    m = train_algorithm(algorithm, type, t, std::nullopt, f, {}, 3, h);
  } else {
    std::vector<std::string> f{"CRIM", "ZN", "NOX", "DIS", "TAX", "PTRATIO"};
    m = train_algorithm(algorithm, type, t, std::string("MEDV"), f, {}, 0, h);
  }
  m.name = "m_" + algorithm;
  m.created_at = "2024-01-01T00:00:00Z";
  m.test_metrics = evaluate(m, t);
  return m;
}

}  // namespace

TEST_SUITE("store") {

TEST_CASE("save writes manifest and params") {
  TempDir dir;
  Model m = trained("RandomForest", MlType::Pred);
  m.name = "epsilonPred";
  auto path = save_model(m, dir.path());
  CHECK(path == dir.path() / "epsilonPred");
  CHECK(std::filesystem::exists(path / "manifest.json"));
  CHECK(std::filesystem::exists(path / "params.json"));
  std::size_t entries = 0;
  for (auto& e : std::filesystem::directory_iterator(dir.path())) entries += e.is_directory();
  CHECK(entries == 1);
  auto manifest = nlohmann::json::parse(read_file(path / "manifest.json"));
  CHECK(manifest["format_version"] == 1);
  CHECK(manifest["name"] == "epsilonPred");
  CHECK(manifest["algorithm"] == "RandomForest");
}

TEST_CASE("round trip keeps parameters and predictions bit-equal for every algorithm") {
  TempDir dir;
  const std::pair<const char*, MlType> cases[] = {
      {"LinearRegression", MlType::Pred}, {"Ridge", MlType::Pred},        {"DecisionTree", MlType::Pred},
      {"RandomForest", MlType::Pred},     {"KNN", MlType::Pred},          {"DecisionTree", MlType::Class},
      {"RandomForest", MlType::Class},    {"KNN", MlType::Class},         {"KMeans", MlType::Clus}};
  for (const auto& [alg, type] : cases) {
    CAPTURE(alg);
    Model m = trained(alg, type);
    m.name += std::string("_") + std::string(ml_type_name(type));
    save_model(m, dir.path());
    Model back = load_model(m.name, dir.path());
    CHECK(back.params == m.params);
    CHECK(back.features == m.features);
    CHECK(back.test_metrics == m.test_metrics);
    CHECK(back.class_labels == m.class_labels);
    Table probe = type == MlType::Class ? load_csv(fixtures() / "Flowers.csv") : load_csv(fixtures() / "bostonHomes.csv");
    CHECK(predict_cells(back, probe) == predict_cells(m, probe));
    CHECK(manifest_json(back) == manifest_json(m));
    CHECK(params_json(back) == params_json(m));
  }
}

TEST_CASE("name collisions need replace") {
  TempDir dir;
  Model m = trained("LinearRegression", MlType::Pred);
  save_model(m, dir.path());
  CHECK(code_of([&] { save_model(m, dir.path()); }) == ErrorCode::NameCollision);
  m.created_at = "2025-01-01T00:00:00Z";
  save_model(m, dir.path(), true);
  CHECK(load_model(m.name, dir.path()).created_at == "2025-01-01T00:00:00Z");
}

TEST_CASE("unknown and corrupt models") {
  TempDir dir;
  CHECK(code_of([&] { load_model("RandonForest", dir.path()); }) == ErrorCode::UnknownModel);
  Model m = trained("LinearRegression", MlType::Pred);
  auto path = save_model(m, dir.path());
  std::string params = read_file(path / "params.json");
  write_file(path / "params.json", params.substr(0, params.size() / 2));
  CHECK(code_of([&] { load_model(m.name, dir.path()); }) == ErrorCode::CorruptManifest);
  write_file(path / "manifest.json", "{\"format_version\": 99}");
  CHECK(code_of([&] { load_model(m.name, dir.path()); }) == ErrorCode::CorruptManifest);
}

TEST_CASE("list and delete") {
  TempDir dir;
  CHECK(list_models(dir.path()).empty());
  CHECK(list_models(dir.path() / "absent").empty());
  Model a = trained("LinearRegression", MlType::Pred);
  a.name = "b_model";
  save_model(a, dir.path());
  auto one = list_models(dir.path());
  REQUIRE(one.size() == 1);
  CHECK(one[0].name == "b_model");
  CHECK(one[0].algorithm == "LinearRegression");
  CHECK(one[0].score.has_value());
  a.name = "a_model";
  save_model(a, dir.path());
  auto two = list_models(dir.path());
  REQUIRE(two.size() == 2);
  CHECK(two[0].name == "a_model");
  delete_model("b_model", dir.path());
  CHECK(code_of([&] { load_model("b_model", dir.path()); }) == ErrorCode::UnknownModel);
  CHECK(code_of([&] { delete_model("b_model", dir.path()); }) == ErrorCode::UnknownModel);
  CHECK(list_models(dir.path()).size() == 1);
}

TEST_CASE("model names stay inside the store") {
  CHECK(valid_model_name("epsilonPred"));
  CHECK(valid_model_name("m-1.v2"));
  CHECK_FALSE(valid_model_name(""));
  CHECK_FALSE(valid_model_name(".hidden"));
  CHECK_FALSE(valid_model_name("../escape"));
  CHECK_FALSE(valid_model_name("a/b"));
  TempDir dir;
  Model m = trained("LinearRegression", MlType::Pred);
  m.name = "../escape";
  CHECK_THROWS_AS(save_model(m, dir.path() / "store"), Error);
  CHECK_FALSE(std::filesystem::exists(dir.path() / "escape"));
}

}  // TEST_SUITE
