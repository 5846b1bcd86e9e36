#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mql/planner.hpp"
#include "mql/render.hpp"

namespace mql {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDiagnostics = 1;
inline constexpr int kExitUsage = 2;

// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err);
int run_cli(int argc, char** argv);

// Reads `;`-terminated statements from `in` and runs each as soon as it is
// complete. Backslash commands: \q, \models, \set key value.
void repl_loop(Session& session, OutputFormat& format, std::istream& in, std::ostream& out,
               std::ostream& err, bool interactive);

}  // namespace mql
