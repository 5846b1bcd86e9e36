#include <doctest.h>

#include "mql/display.hpp"
#include "mql/error.hpp"
#include "mql/render.hpp"
#include "test_support.hpp"

using namespace mql;
using mql::test::count_of;
using mql::test::xml_well_formed;

namespace {

ResultSet predictions(std::vector<double> out, bool labeled) {
  ResultSet r;
  r.target_name = "MEDV";
  for (double v : out) r.outputs.emplace_back(v);
  if (labeled) {
    Column c{"HomeNo", DataType::Numeric, {}};
    for (std::size_t i = 0; i < out.size(); ++i) c.cells.emplace_back(double(i + 1));
    r.labels.push_back(c);
  }
  return r;
}

ResultSet clusters(std::size_t k, std::size_t features) {
  ResultSet r;
  r.ml_type = MlType::Clus;
  r.target_name = "cluster";
  r.features = Matrix(8, features);
  for (std::size_t i = 0; i < 8; ++i) {
    const std::size_t c = i % k;
    for (std::size_t j = 0; j < features; ++j) r.features(i, j) = 10.0 * c + 0.1 * i + j;
    r.outputs.emplace_back(double(c));
  }
  for (std::size_t c = 0; c < k; ++c) r.centroids.push_back(std::vector<double>(features, 10.0 * c));
  for (std::size_t j = 0; j < features; ++j) r.feature_names.push_back("f" + std::to_string(j));
  return r;
}

// Bars are the filled rectangles after the white background.
std::size_t bars(const std::string& svg) { return count_of(svg, "<rect ") - 1; }

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an mql::Error");
  return ErrorCode::Usage;
}

}  // namespace

TEST_SUITE("display") {

TEST_CASE("bar chart has one bar per labeled prediction") {
  std::string svg = render_bar(predictions({29.08, 71.54, 59.52, 63.19}, true));
  CHECK(xml_well_formed(svg));
  CHECK(bars(svg) == 4);
  for (const char* label : {">1<", ">2<", ">3<", ">4<"}) CHECK(svg.find(label) != std::string::npos);
  CHECK(svg.find("width=\"") != std::string::npos);
  CHECK(svg.find("height=\"") != std::string::npos);
}

TEST_CASE("single bar and empty results") {
  CHECK(bars(render_bar(predictions({3}, false))) == 1);
  CHECK(code_of([] { render_bar(predictions({}, false)); }) == ErrorCode::EmptyResult);
}

TEST_CASE("bar axis starts at zero for positive values") {
  std::string svg = render_bar(predictions({50, 60}, false));
  CHECK(svg.find(">0</text>") != std::string::npos);
}

TEST_CASE("scatter draws every point and the reference line") {
  ResultSet r = predictions({1, 2, 3}, false);
  r.actuals = r.outputs;
  std::string svg = render_scatter(r);
  CHECK(xml_well_formed(svg));
  CHECK(count_of(svg, "<circle ") == 3);
  CHECK(svg.find("stroke-dasharray") != std::string::npos);
  CHECK(code_of([] { render_scatter(predictions({1}, false)); }) == ErrorCode::MissingActuals);
}

TEST_CASE("cluster scatter colors by cluster and marks centroids") {
  std::string two = render_clusters(clusters(2, 2));
  CHECK(xml_well_formed(two));
  CHECK(count_of(two, "<circle ") == 8);
  CHECK(count_of(two, "stroke-width=\"2.50\"") == 4);  // two crosses, two strokes each
  std::string one = render_clusters(clusters(1, 3));
  CHECK(count_of(one, "#ff7f0e") == 0);
  CHECK(code_of([] { render_clusters(clusters(2, 1)); }) == ErrorCode::TooFewFeatures);
}

TEST_CASE("class counts") {
  ResultSet r;
  r.ml_type = MlType::Class;
  for (const char* c : {"b", "a", "b"}) r.outputs.emplace_back(std::string(c));
  std::string svg = render_class_counts(r);
  CHECK(xml_well_formed(svg));
  CHECK(bars(svg) == 2);
}

TEST_CASE("rendering is byte-deterministic and escapes text") {
  ResultSet r = predictions({1.5, -2.25}, false);
  r.target_name = "a<b & \"c\"";
  CHECK(render_bar(r) == render_bar(r));
  CHECK(xml_well_formed(render_bar(r)));
  CHECK(render_bar(r).find("a&lt;b &amp;") != std::string::npos);
}

TEST_CASE("text and json rows") {
  Table t("t", {Column{"HomeNo", DataType::Numeric, {Cell(1.0), Cell(2.0)}},
                Column{"prediction", DataType::Numeric, {Cell(29.081812), Cell()}}});
  std::string text = render_text_table(t);
  CHECK(text.find("HomeNo") != std::string::npos);
  CHECK(text.find("29.0818") != std::string::npos);
  CHECK(render_rows(t, OutputFormat::Json) ==
        "{\"HomeNo\":1.0,\"prediction\":29.081812}\n{\"HomeNo\":2.0,\"prediction\":null}\n");
  CHECK(render_rows(t, OutputFormat::Csv) == to_csv(t));
}

}  // TEST_SUITE
