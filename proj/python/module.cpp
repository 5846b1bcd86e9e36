#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mql/error.hpp"
#include "mql/learn.hpp"
#include "mql/planner.hpp"
#include "mql/rng.hpp"
#include "mql/syntax.hpp"

namespace py = pybind11;

namespace {

py::object cell_to_py(const mql::Cell& c) {
  if (mql::is_missing(c)) return py::none();
  if (const double* d = std::get_if<double>(&c)) return py::float_(*d);
  return py::str(std::get<std::string>(c));
}

py::dict table_to_py(const mql::Table& t) {
  py::dict out;
  for (const auto& c : t.columns()) {
    py::list cells;
    for (const auto& cell : c.cells) cells.append(cell_to_py(cell));
    out[py::str(c.name)] = cells;
  }
  return out;
}

py::dict diagnostic_to_py(const mql::Diagnostic& d) {
  py::dict out;
  out["severity"] = d.is_error() ? "error" : "warning";
  out["code"] = mql::error_code_id(d.code);
  out["name"] = std::string(mql::error_code_name(d.code));
  out["clause"] = d.clause;
  out["message"] = d.message;
  out["statement"] = d.statement_index;
  out["text"] = d.render();
  return out;
}

py::dict run(const std::string& source, const std::string& data_dir, const std::string& out_dir,
             const std::string& model_store, std::uint64_t seed, const std::string& missing,
             const std::string& backend, bool replace) {
  mql::Session s;
  s.data_dir = data_dir;
  s.out_dir = out_dir;
  s.store_dir = model_store;
  s.seed = seed;
  auto policy = mql::parse_missing_policy(missing);
  if (!policy) throw py::value_error("missing must be 'zero' or 'impute'");
  auto b = mql::parse_backend(backend);
  if (!b) throw py::value_error("backend must be 'native' or 'emit'");
  s.missing = *policy;
  s.backend = *b;
  s.replace = replace;

  mql::RunReport r;
  {
    py::gil_scoped_release release;
    r = mql::run_source(source, s);
  }

  py::list statements;
  for (const auto& st : r.statements) {
    py::dict d;
    d["index"] = st.index;
    d["type"] = std::string(mql::stmt_type_name(st.type));
    d["ok"] = st.ok();
    if (st.table) d["table"] = table_to_py(*st.table);
    if (st.model) {
      d["model"] = st.model->name;
      d["algorithm"] = st.model->algorithm;
      if (const auto* m = st.model->reference_metrics()) d["accuracy"] = m->normalized_score;
    }
    if (st.script) d["script"] = *st.script;
    py::list artifacts;
    for (const auto& a : st.artifacts) artifacts.append(a.path.string());
    d["artifacts"] = artifacts;
    statements.append(d);
  }
  py::list diags;
  for (const auto& d : r.all_diagnostics()) diags.append(diagnostic_to_py(d));

  py::dict out;
  out["ok"] = r.ok();
  out["aborted"] = r.aborted;
  out["statements"] = statements;
  out["diagnostics"] = diags;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "MQL engine bindings";

  static py::exception<mql::Error> error(m, "MqlError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const mql::Error& e) {
      std::string msg = mql::error_code_id(e.code()) + " " +
                        std::string(mql::error_code_name(e.code())) + ": " + e.what();
      PyErr_SetString(error.ptr(), msg.c_str());
    }
  });

  m.def(
      "parse",
      [](const std::string& text) {
        std::vector<std::string> out;
        for (const auto& s : mql::parse_program(text)) out.push_back(mql::pretty_print(s));
        return out;
      },
      py::arg("text"), "Parse a program; returns the canonical text of each statement.");

  m.def(
      "pretty", [](const std::string& text) { return mql::pretty_print(mql::parse_program(text)); },
      py::arg("text"), "Canonical text of a whole program.");

  m.def("run", &run, py::arg("source"), py::kw_only(), py::arg("data_dir") = ".",
        py::arg("out_dir") = "mql-out", py::arg("model_store") = "mql-models",
        py::arg("seed") = 42, py::arg("missing") = "zero", py::arg("backend") = "native",
        py::arg("replace") = false, "Run a program and return its outcomes.");

  m.def(
      "permutation",
      [](std::size_t n, std::uint32_t seed) { return mql::Rng(seed).permutation(n); },
      py::arg("n"), py::arg("seed"), "Row permutation used by train/test splitting.");

  m.def(
      "split_counts", [](std::size_t rows) { return mql::default_split_counts(rows); },
      py::arg("rows"), "(train, test) counts used without TRAIN ON / TEST ON.");

  m.def(
      "fit_linear",
      [](const std::vector<std::vector<double>>& x, const std::vector<double>& y, double lambda) {
        mql::Matrix mx(x.size(), x.empty() ? 0 : x.front().size());
        for (std::size_t r = 0; r < x.size(); ++r) {
          if (x[r].size() != mx.cols) throw py::value_error("ragged feature rows");
          for (std::size_t c = 0; c < mx.cols; ++c) mx(r, c) = x[r][c];
        }
        auto p = mql::fit_linear_matrix(mx, y, lambda);
        return py::make_tuple(p.intercept, p.coef);
      },
      py::arg("x"), py::arg("y"), py::arg("ridge") = 0.0,
      "Least-squares fit; returns (intercept, coefficients).");
}
