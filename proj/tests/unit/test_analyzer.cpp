#include <doctest.h>

#include <algorithm>
#include <map>

#include "mql/analyzer.hpp"
#include "mql/syntax.hpp"
#include "reference_queries.hpp"
#include "test_support.hpp"

using namespace mql;
using mql::test::fixtures;

namespace {

class MapCatalog : public Catalog {
 public:
  void add(const std::string& name, const std::string& file) {
    tables_[name] = std::make_shared<const Table>(load_csv(fixtures() / file, name));
  }
  void add(const std::string& name, Table t) { tables_[name] = std::make_shared<const Table>(std::move(t)); }
  void add_model(ModelInfo m) { models_[m.name] = std::move(m); }

  std::shared_ptr<const Table> table(std::string_view name) const override {
    auto it = tables_.find(std::string(name));
    return it == tables_.end() ? nullptr : it->second;
  }
  std::optional<ModelInfo> model(std::string_view name) const override {
    auto it = models_.find(std::string(name));
    if (it == models_.end()) return std::nullopt;
    return it->second;
  }

 private:
  std::map<std::string, std::shared_ptr<const Table>> tables_;
  std::map<std::string, ModelInfo> models_;
};

Delta delta(std::string_view text) { return gather(parse_program(text).at(0), 1); }

std::vector<ErrorCode> error_codes(const std::vector<Diagnostic>& ds) {
  std::vector<ErrorCode> out;
  for (const auto& d : ds)
    if (d.is_error()) out.push_back(d.code);
  return out;
}

bool has(const std::vector<ErrorCode>& v, ErrorCode c) { return std::find(v.begin(), v.end(), c) != v.end(); }

MapCatalog housing() {
  MapCatalog c;
  c.add("bostonHomes", "bostonHomes.csv");
  c.add("homesNew", "homesNew.csv");
  return c;
}

}  // namespace

TEST_SUITE("analyzer") {

TEST_CASE("gather on the home value query") {
  Delta d = delta(test::kReferenceQueries[0].text);
  CHECK(d.st_type == StmtType::Gen);
  CHECK(d.model == ModelMode::Default);
  CHECK(d.ml_type == MlType::Pred);
  CHECK(d.display);
  CHECK(d.label);
  CHECK(d.label_columns == std::vector<std::string>{"HomeNo"});
  REQUIRE(d.features);
  CHECK(d.features->names.size() == 6);
  CHECK(d.target == "MEDV");
  CHECK(d.over_table == "homesNew");
}

TEST_CASE("custom algorithm with percentage accuracy") {
  Delta d = delta(test::kReferenceQueries[3].text);
  CHECK(d.model == ModelMode::Custom);
  CHECK(d.alg_name == "LinearRegression");
  REQUIRE(d.accuracy);
  CHECK(*d.accuracy == doctest::Approx(0.80));
  CHECK(d.accuracy_raw == 80);
}

TEST_CASE("accuracy without a model clause selects the best model") {
  Delta d = delta("GENERATE PREDICTION y OVER t WITH MODEL ACCURACY 0.9 FEATURES x FROM d");
  CHECK(d.model == ModelMode::Best);
  CHECK(*d.accuracy == doctest::Approx(0.9));
}

TEST_CASE("stored, construct and inspect descriptors") {
  Delta s = delta(test::kReferenceQueries[4].text);
  CHECK(s.model == ModelMode::Stored);
  CHECK(s.mod_name == "RandonForest");
  Delta c = delta(test::kReferenceQueries[2].text);
  CHECK(c.st_type == StmtType::Con);
  CHECK(c.mod_name == "epsilonPred");
  CHECK(c.model == ModelMode::Custom);
  CHECK(c.train_n);
  Delta i = delta(test::kReferenceQueries[1].text);
  CHECK(i.st_type == StmtType::Ins);
  CHECK(i.actions.size() == 1);
  CHECK(i.from_tables == std::vector<std::string>{"High_Extinction.csv"});
  Delta k = delta("GENERATE CLUSTER OF 3 FEATURES u, v FROM Blobs");
  CHECK(k.ml_type == MlType::Clus);
  CHECK(k.k_expr);
  Delta cls = delta("GENERATE CLASSIFICATION INTO setosa, virginica FEATURES a FROM f");
  CHECK(cls.ml_type == MlType::Class);
  CHECK(cls.class_labels.size() == 2);
}

TEST_CASE("property: exactly one model mode, consistent with the clauses") {
  const char* texts[] = {
      "GENERATE PREDICTION y USING MODEL m",
      "GENERATE PREDICTION y USING ALGORITHM KNN FEATURES x FROM t",
      "GENERATE PREDICTION y WITH MODEL ACCURACY 50 FEATURES x FROM t",
      "GENERATE PREDICTION y FEATURES x FROM t",
      "GENERATE PREDICTION y USING MODEL m WITH MODEL ACCURACY 0.5",
  };
  for (const char* t : texts) {
    Delta d = delta(t);
    CHECK((d.model == ModelMode::Stored) == d.mod_name.has_value());
    CHECK((d.model == ModelMode::Custom) == d.alg_name.has_value());
    if (d.model == ModelMode::Best) CHECK(d.accuracy.has_value());
  }
}

TEST_CASE("gather does not depend on WHERE term order") {
  Delta a = delta("GENERATE PREDICTION y FEATURES x FROM t WHERE x > 1 AND z = 'q'");
  Delta b = delta("generate prediction y features x from t where z = 'q' and x > 1");
  auto sorted = [](Predicate p) {
    std::sort(p.terms.begin(), p.terms.end(), [](const Comparison& l, const Comparison& r) {
      return l.column < r.column;
    });
    return p;
  };
  CHECK(sorted(a.where) == sorted(b.where));
  CHECK(a.features == b.features);
  CHECK(a.model == b.model);
}

TEST_CASE("normalize_accuracy") {
  CHECK(normalize_accuracy(80).value == doctest::Approx(0.80));
  CHECK(normalize_accuracy(80).scaled);
  CHECK(normalize_accuracy(0.5).value == 0.5);
  CHECK_FALSE(normalize_accuracy(0.5).scaled);
  CHECK(normalize_accuracy(1).value == 1);
  CHECK(normalize_accuracy(100).value == 1);
  for (double bad : {0.0, -1.0, 100.5}) {
    try {
      normalize_accuracy(bad);
      FAIL("expected RangeError for " << bad);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::RangeError);
    }
  }
}

TEST_CASE("validate accepts the home value query") {
  MapCatalog c = housing();
  auto ds = validate(delta(test::kReferenceQueries[0].text), c);
  CHECK(error_codes(ds).empty());
}

TEST_CASE("validate rejects self-prediction") {
  MapCatalog c = housing();
  auto ds = validate(delta("GENERATE PREDICTION MEDV FEATURES CRIM, MEDV FROM bostonHomes"), c);
  CHECK(has(error_codes(ds), ErrorCode::TargetInFeatures));
}

TEST_CASE("categorical feature with regression fails without INSPECT") {
  MapCatalog c;
  c.add("Solvents", "Solvents.csv");
  auto ds = validate(delta("GENERATE PREDICTION y FEATURES x1, Polarity FROM Solvents"), c);
  CHECK(has(error_codes(ds), ErrorCode::DatatypeFail));
  auto con = validate(
      delta("CONSTRUCT m FOR PREDICTION y TRAIN ON 40 TEST ON 10 FEATURES * FROM Solvents"), c);
  CHECK(has(error_codes(con), ErrorCode::DatatypeFail));
}

TEST_CASE("unknown names") {
  MapCatalog c = housing();
  CHECK(has(error_codes(validate(delta("GENERATE PREDICTION MEDV FEATURES CRIM FROM nope"), c)),
            ErrorCode::UnknownTable));
  CHECK(has(error_codes(validate(delta("GENERATE PREDICTION MEDV FEATURES ZZ FROM bostonHomes"), c)),
            ErrorCode::UnknownColumn));
  CHECK(has(error_codes(validate(delta("GENERATE PREDICTION QQ FEATURES CRIM FROM bostonHomes"), c)),
            ErrorCode::UnknownColumn));
  CHECK(has(error_codes(validate(delta("GENERATE PREDICTION MEDV OVER homesNew USING MODEL LipidGnn"), c)),
            ErrorCode::UnknownModel));
  CHECK(has(error_codes(validate(
                delta("GENERATE PREDICTION MEDV USING ALGORITHM KMeans FEATURES CRIM FROM bostonHomes"), c)),
            ErrorCode::UnknownAlgorithm));
  CHECK(has(error_codes(validate(
                delta("GENERATE PREDICTION MEDV USING ALGORITHM Magic FEATURES CRIM FROM bostonHomes"), c)),
            ErrorCode::UnknownAlgorithm));
}

TEST_CASE("supervision mismatches") {
  MapCatalog c;
  c.add("Blobs", "Blobs.csv");
  c.add("Flowers", "Flowers.csv");
  CHECK(has(error_codes(validate(
                delta("CONSTRUCT m AS SUPERVISED FOR CLUSTER OF 3 TRAIN ON 100 TEST ON 20 FEATURES * FROM Blobs"),
                c)),
            ErrorCode::SupervisionMismatch));
  CHECK(has(error_codes(validate(delta("CONSTRUCT m AS UNSUPERVISED FOR CLASSIFICATION INTO setosa, virginica "
                                       "TRAIN ON 60 TEST ON 30 FEATURES * FROM Flowers"),
                                 c)),
            ErrorCode::SupervisionMismatch));
}

TEST_CASE("stored model schema must match the OVER table") {
  MapCatalog c = housing();
  ModelInfo m;
  m.name = "rooms";
  m.algorithm = "LinearRegression";
  m.features = {{"RM", DataType::Numeric, std::nullopt}};
  m.target = "MEDV";
  c.add_model(m);
  CHECK(has(error_codes(validate(delta("GENERATE PREDICTION MEDV OVER homesNew USING MODEL rooms"), c)),
            ErrorCode::SchemaMismatch));
  CHECK(error_codes(validate(delta("GENERATE PREDICTION MEDV OVER bostonHomes USING MODEL rooms"), c)).empty());
}

TEST_CASE("classification target inference") {
  Table t = load_csv(fixtures() / "Flowers.csv");
  std::vector<std::string> labels{"setosa", "virginica"};
  CHECK(infer_class_column(t, labels) == "Species");
  std::vector<std::string> none{"rose"};
  try {
    infer_class_column(t, none);
    FAIL("expected UnknownLabels");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownLabels);
  }
  Table twin = parse_csv("a,b,x\nlo,lo,1\nhi,hi,2\n", "twin");
  std::vector<std::string> lohi{"lo", "hi"};
  try {
    infer_class_column(twin, lohi);
    FAIL("expected AmbiguousTarget");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AmbiguousTarget);
  }
  std::vector<std::string> excluded{"a"};
  CHECK(infer_class_column(twin, lohi, excluded) == "b");
}

TEST_CASE("star features exclude target and label columns") {
  Table dye = load_csv(fixtures() / "TestData.csv", "TestData");
  Delta d = delta("GENERATE PREDICTION MolWt LABEL Tag FEATURES * FROM TestData");
  auto f = expand_features(d, dye, std::nullopt);
  CHECK(std::find(f.begin(), f.end(), "MolWt") == f.end());
  CHECK(std::find(f.begin(), f.end(), "Tag") == f.end());
  CHECK(f.size() == dye.column_count() - 2);
}

TEST_CASE("validate does not mutate the descriptor") {
  MapCatalog c = housing();
  Delta d = delta(test::kReferenceQueries[0].text);
  Delta before = d;
  validate(d, c);
  CHECK(d.features == before.features);
  CHECK(d.label_columns == before.label_columns);
  CHECK(d.where == before.where);
  CHECK(d.accuracy == before.accuracy);
}

TEST_CASE("diagnostic rendering") {
  Diagnostic d{Severity::Error, ErrorCode::TargetInFeatures, "FEATURES", "oops", 2};
  std::string text = d.render();
  CHECK(text.rfind("error[MQL-", 0) == 0);
  CHECK(text.find("statement 2, FEATURES: oops") != std::string::npos);
  Diagnostic w{Severity::Warning, ErrorCode::RangeError, "", "note", 0};
  CHECK(w.render().rfind("warning[MQL-", 0) == 0);
}

}  // TEST_SUITE
