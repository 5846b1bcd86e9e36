// Runs every primary acceptance criterion and prints one PASS/FAIL line each.
#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>

#include "mql/emitter.hpp"
#include "mql/error.hpp"
#include "mql/learn.hpp"
#include "mql/model_store.hpp"
#include "mql/planner.hpp"
#include "mql/syntax.hpp"
#include "reference_queries.hpp"
#include "test_support.hpp"

using namespace mql;
using mql::test::fixtures;
using mql::test::golden;
using mql::test::read_file;
using mql::test::TempDir;
using mql::test::write_file;

namespace {

// Thrown by `expect` with a description of the first unmet condition.
struct Unmet {
  std::string what;
};

void expect(bool cond, const std::string& what) {
  if (!cond) throw Unmet{what};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Session session(const TempDir& dir, std::filesystem::path data = fixtures()) {
  Session s;
  s.data_dir = std::move(data);
  s.out_dir = dir / "out";
  s.store_dir = dir / "models";
  s.fixed_time = "2024-01-01T00:00:00Z";
  return s;
}

bool has_error(const RunReport& r, ErrorCode code) {
  for (const auto& d : r.all_diagnostics())
    if (d.is_error() && d.code == code) return true;
  return false;
}

void expect_clean(const RunReport& r) {
  for (const auto& d : r.all_diagnostics()) expect(!d.is_error(), d.render());
}

std::vector<double> outputs(const RunReport& r, std::size_t i) {
  std::vector<double> v;
  for (const auto& c : r.statements.at(i).result.value().outputs) v.push_back(std::get<double>(c));
  return v;
}

std::string snapshot(const std::filesystem::path& dir) {
  std::string out;
  if (!std::filesystem::exists(dir)) return out;
  std::vector<std::filesystem::path> files;
  for (auto& e : std::filesystem::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) out += f.lexically_relative(dir).string() + "\n" + read_file(f) + "\n";
  return out;
}

void parse_suite() {
  auto t0 = std::chrono::steady_clock::now();
  for (const auto& q : test::kReferenceQueries) {
    Program p = parse_program(q.text);
    expect(!p.empty(), std::string(q.name) + ": no statements");
    std::string printed = pretty_print(p);
    expect(parse_program(printed) == p, std::string(q.name) + ": round trip differs");
    expect(pretty_print(parse_program(printed)) == printed, std::string(q.name) + ": printing not stable");
  }
  expect(seconds_since(t0) < 1.0, "slower than 1 s");
}

void home_pipeline() {
  auto t0 = std::chrono::steady_clock::now();
  const std::string q = read_file(fixtures() / "home_values.mql");
  TempDir a, b;
  Session zero = session(a), imp = session(b);
  imp.missing = MissingPolicy::Impute;
  RunReport rz = run_source(q, zero);
  RunReport ri = run_source(q, imp);
  expect_clean(rz);
  expect_clean(ri);
  auto z = outputs(rz, 0), m = outputs(ri, 0);
  expect(z.size() == 4 && m.size() == 4, "expected 4 predictions");
  expect(std::filesystem::exists(a / "out/stmt01_result.csv"), "no result CSV");
  expect(std::filesystem::exists(a / "out/stmt01_bar.svg"), "no bar SVG");
  expect(std::abs(z[0] - m[0]) <= 1e-9, "row 1 changed under impute");
  for (int i = 1; i < 4; ++i) expect(std::abs(z[i] - m[i]) > 1e-9, fmt::format("row {} unchanged", i + 1));
  expect(seconds_since(t0) < 5.0, "slower than 5 s");
}

void ols() {
  std::mt19937 gen(1);
  std::uniform_real_distribution<double> u(-5, 5);
  Column x1{"x1", DataType::Numeric, {}}, x2{"x2", DataType::Numeric, {}}, y{"y", DataType::Numeric, {}};
  for (int i = 0; i < 200; ++i) {
    double a = u(gen), b = u(gen);
    x1.cells.emplace_back(a);
    x2.cells.emplace_back(b);
    y.cells.emplace_back(3 + 2 * a - b);
  }
  Table t("lin", {x1, x2, y});
  std::vector<std::string> f{"x1", "x2"};
  Model m = fit_linear(t, "y", f, 0);
  const auto p = std::get<LinearParams>(m.params);
  expect(std::abs(p.intercept - 3) < 1e-6 && std::abs(p.coef[0] - 2) < 1e-6 && std::abs(p.coef[1] + 1) < 1e-6,
         fmt::format("coefficients ({}, {}, {})", p.intercept, p.coef[0], p.coef[1]));
  expect(std::abs(evaluate(m, t).r2.value() - 1) < 1e-9, "r2 != 1");
  auto mse = [&](std::vector<double> b) {
    double s = 0;
    for (std::size_t i = 0; i < t.row_count(); ++i) {
      double r = t.column("y").number(i) - (b[0] + b[1] * t.column("x1").number(i) + b[2] * t.column("x2").number(i));
      s += r * r;
    }
    return s / double(t.row_count());
  };
  const std::vector<double> b{p.intercept, p.coef[0], p.coef[1]};
  for (int j = 0; j < 3; ++j) {
    auto plus = b, minus = b;
    plus[j] += 1e-4;
    minus[j] -= 1e-4;
    double g = (mse(plus) - mse(minus)) / 2e-4;
    expect(std::abs(g) < 1e-8, fmt::format("finite-difference gradient {} for coefficient {}", g, j));
  }
}

void split_contract() {
  Table dye = load_csv(fixtures() / "DyeData.csv");
  expect(dye.row_count() == 8802, "DyeData is not 8802 rows");
  Split s = train_test_split(dye, 7040, 1760, 42);
  expect(s.train.row_count() == 7040 && s.test.row_count() == 1760 && s.unused == 2, "7040/1760/2 violated");
  Table boston = load_csv(fixtures() / "bostonHomes.csv");
  Split c = train_test_split(boston, 500, 100, 42);
  expect(c.train.row_count() == 500 && c.test.row_count() == 6, "clamp to (500, 6) violated");
  expect(c.warnings.size() == 1, "clamp did not warn");
}

double two_means_optimum(const std::vector<double>& x) {
  double best = INFINITY;
  const std::size_t n = x.size();
  for (std::uint32_t mask = 1; mask + 1 < (1u << n); ++mask) {
    double total = 0;
    for (int side = 0; side < 2; ++side) {
      double sum = 0;
      int cnt = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (int((mask >> i) & 1u) == side) sum += x[i], ++cnt;
      const double mean = sum / cnt;
      for (std::size_t i = 0; i < n; ++i)
        if (int((mask >> i) & 1u) == side) total += (x[i] - mean) * (x[i] - mean);
    }
    best = std::min(best, total);
  }
  return best;
}

void kmeans_oracle() {
  std::size_t checked = 0;
  for (auto& e : std::filesystem::directory_iterator(fixtures() / "kmeans1d")) {
    Table t = load_csv(e.path());
    if (t.row_count() > 12) continue;
    std::vector<double> x;
    for (std::size_t r = 0; r < t.row_count(); ++r) x.push_back(t.column("x").number(r));
    std::vector<std::string> f{"x"};
    auto p = std::get<KMeansParams>(fit_kmeans(t, f, 2, Hyperparameters{}).params);
    const double opt = two_means_optimum(x);
    expect(std::abs(p.inertia - opt) <= 1e-9 * std::max(1.0, opt),
           fmt::format("{}: inertia {} vs optimum {}", e.path().filename().string(), p.inertia, opt));
    for (std::size_t s = 1; s < p.inertia_history.size(); ++s)
      expect(p.inertia_history[s] <= p.inertia_history[s - 1] + 1e-12, "inertia increased");
    ++checked;
  }
  expect(checked > 0, "no instances found");
  Table blobs = load_csv(fixtures() / "Blobs.csv");
  std::vector<std::string> f{"u", "v"};
  for (std::uint64_t seed : {1u, 2u, 42u}) {
    Hyperparameters h;
    h.seed = seed;
    auto p = std::get<KMeansParams>(fit_kmeans(blobs, f, 3, h).params);
    for (std::size_t s = 1; s < p.inertia_history.size(); ++s)
      expect(p.inertia_history[s] <= p.inertia_history[s - 1] + 1e-12, "inertia increased on Blobs");
  }
}

void write_regression(const TempDir& dir, const std::string& name, bool noise) {
  std::mt19937 gen(noise ? 99 : 17);
  std::uniform_real_distribution<double> u(-3, 3);
  std::string csv = "x1,x2,x3,y\n";
  for (int i = 0; i < 200; ++i) {
    double a = u(gen), b = u(gen), c = u(gen);
    double y = noise ? u(gen) : 1.5 + 2 * a - 0.5 * b + 0.25 * c;
    csv += fmt::format("{},{},{},{}\n", format_number(a), format_number(b), format_number(c), format_number(y));
  }
  write_file(dir / (name + ".csv"), csv);
}

void best_model() {
  TempDir dir;
  write_regression(dir, "clean", false);
  write_regression(dir, "noise", true);
  Session s = session(dir, dir.path());
  RunReport r = run_source("GENERATE PREDICTION y WITH MODEL ACCURACY 0.9 FEATURES x1, x2, x3 FROM clean;", s);
  expect_clean(r);
  RunReport c = run_source("CONSTRUCT best FOR PREDICTION y WITH MODEL ACCURACY 0.9 TRAIN ON 160 TEST ON 40 FEATURES x1, x2, x3 FROM clean;", s);
  expect_clean(c);
  const Model& m = c.statements.at(0).model.value();
  expect(m.algorithm == "LinearRegression" || m.algorithm == "Ridge", "selected " + m.algorithm);
  expect(m.reference_metrics()->normalized_score >= 0.999, "score below 0.999");

  RunReport n = run_source("GENERATE PREDICTION y WITH MODEL ACCURACY 0.9 FEATURES x1, x2, x3 FROM noise;", s);
  expect(has_error(n, ErrorCode::BestBelowThreshold), "noise did not raise BestBelowThreshold");
  const std::string msg = n.all_diagnostics().front().message;
  for (const char* name : {"LinearRegression=", "Ridge=", "DecisionTree=", "RandomForest=", "KNN="})
    expect(msg.find(name) != std::string::npos, std::string("missing score for ") + name);
}

void dependency_semantics() {
  TempDir dir;
  Session s = session(dir);
  std::filesystem::create_directories(s.store_dir);
  const std::string empty = snapshot(s.store_dir);
  RunReport t = run_source(
      "GENERATE PREDICTION MEDV FEATURES CRIM, RM FROM bostonHomes;"
      "GENERATE PREDICTION MEDV WITH MODEL ACCURACY 0.1 FEATURES CRIM, RM FROM bostonHomes;"
      "GENERATE CLUSTER OF 3 FEATURES u, v FROM Blobs;",
      s);
  expect_clean(t);
  expect(snapshot(s.store_dir) == empty, "transient model persisted");

  RunReport fail = run_source("CONSTRUCT pol FOR PREDICTION y TRAIN ON 40 TEST ON 10 FEATURES * FROM Solvents;", s);
  expect(has_error(fail, ErrorCode::DatatypeFail), "construct without INSPECT did not FAIL");
  expect(!model_exists("pol", s.store_dir), "failed construct stored a model");

  expect_clean(run_source(
      "CONSTRUCT rooms FOR PREDICTION MEDV TRAIN ON 400 TEST ON 106 FEATURES RM FROM bostonHomes;", s));
  const std::string before = snapshot(s.store_dir);
  s.fixed_time = "2031-01-01T00:00:00Z";
  expect_clean(run_source("GENERATE PREDICTION MEDV OVER bostonHomes USING MODEL rooms;", s));
  expect(snapshot(s.store_dir) == before, "stored model changed after USING MODEL");
}

std::string full_suite() {
  std::string program = read_file(fixtures() / "dye_study.mql");
  program += read_file(fixtures() / "home_values.mql");
  program +=
      "GENERATE DISPLAY OF PREDICTION MEDV FEATURES CRIM, RM FROM bostonHomes;"
      "GENERATE DISPLAY OF CLUSTER OF 3 FEATURES u, v FROM Blobs;"
      "GENERATE DISPLAY OF CLASSIFICATION INTO setosa, versicolor, virginica FEATURES PetalLength, "
      "PetalWidth FROM Flowers;"
      "CONSTRUCT flowers FOR CLASSIFICATION INTO setosa, versicolor, virginica TRAIN ON 60 TEST ON 30 "
      "FEATURES PetalLength, PetalWidth FROM Flowers;";
  return program;
}

void determinism() {
  TempDir a, b;
  Session sa = session(a), sb = session(b);
  RunReport ra = run_source(full_suite(), sa);
  RunReport rb = run_source(full_suite(), sb);
  expect_clean(ra);
  expect_clean(rb);
  expect(snapshot(a / "out") == snapshot(b / "out"), "outputs differ");
  expect(snapshot(a / "models") == snapshot(b / "models"), "manifests differ");
}

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  for (std::size_t p = s.find(from); p != std::string::npos; p = s.find(from, p + to.size())) s.replace(p, from.size(), to);
  return s;
}

void emission_golden() {
  TempDir dir;
  Session s = session(dir);
  s.backend = Backend::Emit;
  s.missing = MissingPolicy::Impute;
  RunReport r = run_source(read_file(fixtures() / "home_values.mql"), s);
  expect_clean(r);
  std::string script = r.statements.at(0).script.value();
  script = replace_all(script, fixtures().string(), "<FIXTURES>");
  script = replace_all(script, (dir / "out").string(), "<OUT>");
  expect(script == read_file(golden() / "home_values_impute.py"), "script differs from golden file");
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void()>>> criteria{
      {"parse suite: published statements round-trip in under 1 s", parse_suite},
      {"home value pipeline: zero and impute policies in under 5 s", home_pipeline},
      {"OLS: exact coefficients, r2 = 1, zero gradient", ols},
      {"split contract: 7040/1760/2 and clamp to (500, 6)", split_contract},
      {"k-means: exhaustive optimum and monotone inertia", kmeans_oracle},
      {"best-model search: linear winner and full score listing", best_model},
      {"dependency semantics: transient, FAIL without INSPECT, read-only USING MODEL", dependency_semantics},
      {"determinism: byte-identical artifacts across runs", determinism},
      {"emission: home value script equals the golden file", emission_golden},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    std::string problem;
    try {
      fn();
    } catch (const Unmet& u) {
      problem = u.what;
    } catch (const std::exception& e) {
      problem = std::string("exception: ") + e.what();
    }
    if (problem.empty()) {
      std::cout << "PASS  " << name << "\n";
    } else {
      std::cout << "FAIL  " << name << " (" << problem << ")\n";
      ++failed;
    }
  }
  std::cout << "SKIP  cross-backend agreement (needs the Python conformance harness, not run here)\n";
  std::cout << (failed == 0 ? "all primary criteria passed\n" : fmt::format("{} primary criteria failed\n", failed));
  return failed == 0 ? 0 : 1;
}
