#include <doctest.h>

#include <cstdlib>
#include <random>
#include <sstream>

#include "mql/cli.hpp"
#include "mql/error.hpp"
#include "test_support.hpp"

using namespace mql;
using mql::test::fixtures;
using mql::test::read_file;
using mql::test::TempDir;
using mql::test::write_file;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args, const std::string& input = "") {
  std::istringstream in(input);
  std::ostringstream out, err;
  int code = run_cli(args, in, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> base(const TempDir& dir) {
  return {"--data-dir", fixtures().string(), "--out-dir", (dir / "out").string(), "--model-store",
          (dir / "models").string()};
}

std::vector<std::string> with(std::vector<std::string> a, std::initializer_list<std::string> more) {
  a.insert(a.end(), more);
  return a;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("run exits 0 and lists written files") {
  TempDir dir;
  Run r = cli(with(base(dir), {"run", (fixtures() / "home_values.mql").string()}));
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("29.0818") != std::string::npos);
  CHECK(r.out.find("wrote: " + (dir / "out/stmt01_result.csv").string()) != std::string::npos);
  CHECK(r.out.find("wrote: " + (dir / "out/stmt01_bar.svg").string()) != std::string::npos);
  CHECK(r.err.empty());
}

TEST_CASE("diagnostics exit 1") {
  TempDir dir;
  write_file(dir / "bad.mql", "GENERATE PREDICTION MEDV OVER homesNew USING MODEL RandonForest;");
  Run r = cli(with(base(dir), {"run", (dir / "bad.mql").string()}));
  CHECK(r.code == kExitDiagnostics);
  CHECK(r.err.find(error_code_id(ErrorCode::UnknownModel)) != std::string::npos);

  write_file(dir / "syntax.mql", "GENERATE PREDICTION FROM;");
  CHECK(cli(with(base(dir), {"run", (dir / "syntax.mql").string()})).code == kExitDiagnostics);
}

TEST_CASE("usage problems exit 2") {
  TempDir dir;
  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"frobnicate"}).code == kExitUsage);
  CHECK(cli(with(base(dir), {"run", (dir / "missing.mql").string()})).code == kExitUsage);
  CHECK(cli(with(base(dir), {"--missing", "median", "run", (fixtures() / "home_values.mql").string()})).code ==
        kExitUsage);
  CHECK(cli(with(base(dir), {"--backend", "gpu", "repl"})).code == kExitUsage);
  CHECK(cli({"--help"}).code == kExitOk);
}

TEST_CASE("models list on an empty store") {
  TempDir dir;
  Run r = cli(with(base(dir), {"models", "list"}));
  CHECK(r.code == kExitOk);
  CHECK(r.err.empty());
  Run j = cli(with(base(dir), {"--format", "json", "models", "list"}));
  CHECK(j.code == kExitOk);
  CHECK(j.out.empty());
}

TEST_CASE("models list and delete after construct") {
  TempDir dir;
  write_file(dir / "c.mql",
             "CONSTRUCT rooms FOR PREDICTION MEDV TRAIN ON 400 TEST ON 106 FEATURES RM FROM bostonHomes;");
  REQUIRE(cli(with(base(dir), {"run", (dir / "c.mql").string()})).code == kExitOk);
  Run j = cli(with(base(dir), {"--format", "json", "models", "list"}));
  CHECK(j.out.find("\"name\":\"rooms\"") != std::string::npos);
  CHECK(j.out.find("\"algorithm\":\"LinearRegression\"") != std::string::npos);
  CHECK(cli(with(base(dir), {"models", "delete", "rooms"})).code == kExitOk);
  CHECK(cli(with(base(dir), {"models", "delete", "rooms"})).code == kExitDiagnostics);
}

TEST_CASE("MQL_HOME supplies default output and store directories") {
  TempDir dir;
  ::setenv("MQL_HOME", dir.path().c_str(), 1);
  Run r = cli({"--data-dir", fixtures().string(), "run", (fixtures() / "home_values.mql").string()});
  ::unsetenv("MQL_HOME");
  CHECK(r.code == kExitOk);
  CHECK(std::filesystem::exists(dir / "out/stmt01_result.csv"));
}

TEST_CASE("json output format") {
  TempDir dir;
  Run r = cli(with(base(dir), {"--format", "json", "run", (fixtures() / "home_values.mql").string()}));
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("{\"HomeNo\":1") != std::string::npos);
}

TEST_CASE("repl settings apply to later statements") {
  TempDir dir;
  const std::string q = read_file(fixtures() / "home_values.mql");
  Run zero = cli(with(base(dir), {"repl"}), q);
  Run imp = cli(with(base(dir), {"repl"}), "\\set missing impute\n" + q);
  CHECK(zero.code == kExitOk);
  CHECK(imp.code == kExitOk);
  CHECK(zero.out.find("71.542") != std::string::npos);
  CHECK(imp.out.find("49.409") != std::string::npos);
  CHECK(imp.out.find("71.542") == std::string::npos);
}

TEST_CASE("repl reports errors and keeps going") {
  TempDir dir;
  Run r = cli(with(base(dir), {"repl"}),
              "GENERATE PREDICTION FROM;\n\\set nonsense 1\nGENERATE CLUSTER OF 2 FEATURES u, v FROM Blobs;\n\\q\n"
              "GENERATE CLUSTER OF 3 FEATURES u, v FROM Blobs;\n");
  CHECK(r.code == kExitOk);
  CHECK(r.err.find(error_code_id(ErrorCode::ParseError)) != std::string::npos);
  CHECK(r.err.find("unknown setting") != std::string::npos);
  CHECK(r.out.find("stmt01_result.csv") != std::string::npos);
  CHECK(r.out.find("stmt02") == std::string::npos);
}

TEST_CASE("repl and batch write the same files") {
  TempDir a, b;
  const std::string program = read_file(fixtures() / "dye_study.mql");
  write_file(a / "p.mql", program);
  REQUIRE(cli(with(base(a), {"run", (a / "p.mql").string()})).code == kExitOk);
  REQUIRE(cli(with(base(b), {"repl"}), program).code == kExitOk);
  for (auto& e : std::filesystem::directory_iterator(a / "out")) {
    CAPTURE(e.path());
    auto other = b / "out" / e.path().filename();
    REQUIRE(std::filesystem::exists(other));
    if (e.path().extension() != ".json") CHECK(read_file(e.path()) == read_file(other));
  }
}

TEST_CASE("malformed programs never crash") {
  const std::vector<std::string> pieces{"GENERATE", "CONSTRUCT", "INSPECT", "PREDICTION", "FROM",  "FEATURES",
                                        "OVER",     "*",         ",",       ";",          "'x",    "Blobs",
                                        "u",        "(",         "COUNT",   "42",         "-1e99", "\"q\"",
                                        "WHERE",    "<>",        "LABEL",   "CLUSTER OF", "\x01",  "WITH MODEL"};
  std::mt19937 gen(5);
  TempDir dir;
  for (int i = 0; i < 60; ++i) {
    std::string text;
    std::uniform_int_distribution<int> len(1, 10), pick(0, int(pieces.size()) - 1);
    for (int n = len(gen); n > 0; --n) text += pieces[pick(gen)] + " ";
    write_file(dir / "p.mql", text);
    Run r = cli(with(base(dir), {"run", (dir / "p.mql").string()}));
    CAPTURE(text);
    CHECK((r.code == kExitOk || r.code == kExitDiagnostics));
  }
}

}  // TEST_SUITE
