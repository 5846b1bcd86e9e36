#include "mql/cli.hpp"

#include <fmt/format.h>
#include <unistd.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "mql/error.hpp"
#include "mql/model_store.hpp"

namespace fs = std::filesystem;

namespace mql {
namespace {

void print_report(const RunReport& r, OutputFormat format, std::ostream& out, std::ostream& err) {
  out << render_outcomes(r, format);
  err << render_diagnostics(r);
  out << render_artifacts(r);
  out.flush();
  err.flush();
}

void print_models(const fs::path& store, OutputFormat format, std::ostream& out) {
  auto models = list_models(store);
  if (format == OutputFormat::Json) {
    for (const auto& m : models) {
      nlohmann::ordered_json j;
      j["name"] = m.name;
      j["type"] = std::string(ml_type_name(m.ml_type));
      j["algorithm"] = m.algorithm;
      j["created_at"] = m.created_at;
      j["accuracy"] = m.score ? nlohmann::ordered_json(*m.score) : nlohmann::ordered_json(nullptr);
      out << j.dump() << "\n";
    }
    return;
  }
  std::vector<Column> cols(5);
  cols[0] = {"name", DataType::Categorical, {}};
  cols[1] = {"type", DataType::Categorical, {}};
  cols[2] = {"algorithm", DataType::Categorical, {}};
  cols[3] = {"created_at", DataType::Categorical, {}};
  cols[4] = {"accuracy", DataType::Numeric, {}};
  for (const auto& m : models) {
    cols[0].cells.emplace_back(m.name);
    cols[1].cells.emplace_back(std::string(ml_type_name(m.ml_type)));
    cols[2].cells.emplace_back(m.algorithm);
    cols[3].cells.emplace_back(m.created_at);
    cols[4].cells.push_back(m.score ? Cell(*m.score) : Cell());
  }
  out << render_rows(Table("models", std::move(cols)), format);
}

// True when `buffer` ends with a `;` outside quoted text.
bool statement_complete(std::string_view buffer) {
  char quote = 0;
  bool complete = false;
  for (char c : buffer) {
    if (quote) {
      if (c == quote) quote = 0;
      continue;
    }
    if (c == '\'' || c == '"') {
      quote = c;
      complete = false;
    } else if (c == ';') {
      complete = true;
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      complete = false;
    }
  }
  return complete && !quote;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Applies `\set key value`; returns an error message or empty on success.
std::string apply_setting(Session& s, OutputFormat& format, const std::string& key,
                          const std::string& value) {
  if (key == "missing") {
    auto p = parse_missing_policy(value);
    if (!p) return "missing must be zero or impute";
    s.missing = *p;
  } else if (key == "backend") {
    auto b = parse_backend(value);
    if (!b) return "backend must be native or emit";
    s.backend = *b;
  } else if (key == "format") {
    auto f = parse_output_format(value);
    if (!f) return "format must be table, csv or json";
    format = *f;
  } else if (key == "seed") {
    try {
      std::size_t used = 0;
      unsigned long long v = std::stoull(value, &used);
      if (used != value.size()) return "seed must be a non-negative integer";
      s.seed = v;
    } catch (const std::exception&) {
      return "seed must be a non-negative integer";
    }
  } else if (key == "data-dir") {
    s.data_dir = value;
  } else if (key == "out-dir") {
    s.out_dir = value;
  } else if (key == "model-store") {
    s.store_dir = value;
  } else if (key == "replace") {
    if (value != "on" && value != "off") return "replace must be on or off";
    s.replace = value == "on";
  } else {
    return "unknown setting '" + key +
           "' (missing, backend, format, seed, data-dir, out-dir, model-store, replace)";
  }
  return {};
}

}  // namespace

void repl_loop(Session& session, OutputFormat& format, std::istream& in, std::ostream& out,
               std::ostream& err, bool interactive) {
  std::string buffer;
  std::string line;
  auto prompt = [&] {
    if (interactive) out << (buffer.empty() ? "mql> " : "...> ") << std::flush;
  };
  prompt();
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (buffer.empty() && !t.empty() && t.front() == '\\') {
      std::istringstream words(t);
      std::string cmd, key, value;
      words >> cmd >> key >> value;
      if (cmd == "\\q") return;
      if (cmd == "\\models") {
        try {
          print_models(session.store_dir, format, out);
        } catch (const Error& e) {
          err << diagnostic_from(e, 0).render() << "\n";
        }
      } else if (cmd == "\\set") {
        std::string problem = apply_setting(session, format, key, value);
        if (!problem.empty()) err << "error: " << problem << "\n";
      } else {
        err << "error: unknown command " << cmd << " (\\q, \\models, \\set key value)\n";
      }
      prompt();
      continue;
    }
    if (buffer.empty() && t.empty()) {
      prompt();
      continue;
    }
    buffer += line;
    buffer += '\n';
    if (statement_complete(buffer)) {
      RunReport r = run_source(buffer, session);
      print_report(r, format, out, err);
      buffer.clear();
    }
    prompt();
  }
  if (!trim(buffer).empty()) {
    RunReport r = run_source(buffer, session);
    print_report(r, format, out, err);
  }
}

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Declarative machine-learning queries over CSV tables", "mql"};
  app.fallthrough();
  app.require_subcommand(1, 1);

  std::string data_dir = ".";
  std::string out_dir = "mql-out";
  std::string store_dir = "mql-models";
  std::uint64_t seed = 42;
  std::string missing = "zero";
  std::string backend = "native";
  std::string format_name = "table";
  bool replace = false;

  app.add_option("--data-dir", data_dir, "Directory searched for <table>.csv");
  auto* out_opt = app.add_option("--out-dir", out_dir, "Directory for results, plots and scripts");
  auto* store_opt = app.add_option("--model-store", store_dir, "Directory of stored models");
  app.add_option("--seed", seed, "Random seed for splits and learners");
  app.add_option("--missing", missing, "Missing OVER cells: zero or impute")
      ->check(CLI::IsMember({"zero", "impute"}));
  app.add_option("--backend", backend, "native execution or script emission")
      ->check(CLI::IsMember({"native", "emit"}));
  app.add_option("--format", format_name, "Standard-output format")
      ->check(CLI::IsMember({"table", "csv", "json"}));
  app.add_flag("--replace", replace, "Let CONSTRUCT overwrite an existing model");

  std::string program_file;
  auto* run = app.add_subcommand("run", "Run an MQL program file");
  run->add_option("file", program_file, "Program file")->required();
  auto* repl = app.add_subcommand("repl", "Interactive statement loop");
  auto* models = app.add_subcommand("models", "Inspect the model store");
  models->require_subcommand(1, 1);
  auto* list = models->add_subcommand("list", "List stored models");
  std::string delete_name;
  auto* del = models->add_subcommand("delete", "Delete a stored model");
  del->add_option("name", delete_name, "Model name")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "mql: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  Session session;
  session.data_dir = data_dir;
  session.out_dir = out_dir;
  session.store_dir = store_dir;
  if (const char* home = std::getenv("MQL_HOME"); home && *home) {
    if (out_opt->count() == 0) session.out_dir = fs::path(home) / "out";
    if (store_opt->count() == 0) session.store_dir = fs::path(home) / "models";
  }
  session.seed = seed;
  session.missing = *parse_missing_policy(missing);
  session.backend = *parse_backend(backend);
  session.replace = replace;
  OutputFormat format = *parse_output_format(format_name);

  try {
    if (run->parsed()) {
      std::ifstream f(program_file, std::ios::binary);
      if (!f || fs::is_directory(program_file)) {
        err << "mql: cannot read program file '" << program_file << "'\n\n" << app.help();
        return kExitUsage;
      }
      std::stringstream text;
      text << f.rdbuf();
      RunReport r = run_source(text.str(), session);
      print_report(r, format, out, err);
      return r.ok() ? kExitOk : kExitDiagnostics;
    }
    if (repl->parsed()) {
      const bool interactive = &in == &std::cin && isatty(STDIN_FILENO);
      repl_loop(session, format, in, out, err, interactive);
      return kExitOk;
    }
    if (list->parsed()) {
      print_models(session.store_dir, format, out);
      return kExitOk;
    }
    if (del->parsed()) {
      delete_model(delete_name, session.store_dir);
      out << "deleted: " << delete_name << "\n";
      return kExitOk;
    }
  } catch (const Error& e) {
    err << diagnostic_from(e, 0).render() << "\n";
    return kExitDiagnostics;
  } catch (const std::exception& e) {
    err << "mql: " << e.what() << "\n";
    return kExitDiagnostics;
  }
  err << app.help();
  return kExitUsage;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cin, std::cout, std::cerr);
}

}  // namespace mql
