// Copyright 2026 the fql project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// fql: command line front end for the functional query language.

#include <CLI11.hpp>

#include <unistd.h>

#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "fql/engine.hpp"
#include "fql/error.hpp"
#include "fql/persist.hpp"
#include "fql/runner.hpp"
#include "fql/syntax.hpp"

namespace {

using fql::surface::Status;

int code(Status s) { return static_cast<int>(s); }

std::optional<std::shared_ptr<fql::engine::Store>> open_store(const std::string& path,
                                                              bool required, int& status) {
  try {
    if (path.empty()) {
      if (required) fql::fail(fql::ErrorKind::IoError, "no database given (--db)");
      return std::make_shared<fql::engine::Store>();
    }
    return std::make_shared<fql::engine::Store>(fql::persist::load_file(path));
  } catch (const fql::Error& e) {
    std::cerr << path << ": " << fql::surface::describe(e) << "\n";
    status = code(fql::surface::status_of(e));
    return std::nullopt;
  }
}

std::optional<std::string> read_script(const std::string& path, int& status) {
  try {
    return fql::persist::read_text(path);
  } catch (const fql::Error& e) {
    std::cerr << fql::surface::describe(e) << "\n";
    status = code(Status::IoError);
    return std::nullopt;
  }
}

int run_script(const std::string& script, const std::string& db, fql::engine::Evaluation how,
               fql::surface::Mode mode) {
  int status = 0;
  auto text = read_script(script, status);
  if (!text) return status;
  auto store = open_store(db, true, status);
  if (!store) return status;
  fql::surface::Runner runner(*store, std::cout, how, mode);
  Status s = runner.run(*text, std::cerr);
  std::cout.flush();
  return code(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fql: functional query language"};
  app.require_subcommand(1);

  std::string db;
  std::string script;
  bool no_opt = false;

  auto* repl = app.add_subcommand("repl", "interactive session");
  repl->add_option("--db", db, "database file (.fdb)");

  auto* run = app.add_subcommand("run", "run a script");
  run->add_option("script", script, "script file")->required();
  run->add_option("--db", db, "database file (.fdb)")->required();
  run->add_flag("--no-opt", no_opt, "evaluate without rewriting");

  auto* explain = app.add_subcommand("explain", "print the optimizer plan of each query");
  explain->add_option("script", script, "script file")->required();
  explain->add_option("--db", db, "database file (.fdb)")->required();

  auto* fmt = app.add_subcommand("fmt", "print a script in canonical form");
  fmt->add_option("script", script, "script file")->required();

  auto* oracle = app.add_subcommand("oracle-eval", "run a script on the naive evaluator");
  oracle->add_option("script", script, "script file")->required();
  oracle->add_option("--db", db, "database file (.fdb)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : code(Status::ParseError);
  }

  using fql::engine::Evaluation;
  using fql::surface::Mode;

  if (*run) {
    return run_script(script, db, no_opt ? Evaluation::Direct : Evaluation::Optimized, Mode::Execute);
  }
  if (*explain) return run_script(script, db, Evaluation::Optimized, Mode::Explain);
  if (*oracle) return run_script(script, db, Evaluation::Oracle, Mode::Execute);
  if (*fmt) {
    int status = 0;
    auto text = read_script(script, status);
    if (!text) return status;
    try {
      std::cout << fql::syntax::print(fql::syntax::parse_script(*text));
    } catch (const fql::Error& e) {
      std::cerr << fql::surface::describe(e) << "\n";
      return code(fql::surface::status_of(e));
    }
    return 0;
  }
  int status = 0;
  auto store = open_store(db, false, status);
  if (!store) return status;
  fql::surface::Runner runner(*store, std::cout);
  runner.repl(std::cin, std::cerr, isatty(STDIN_FILENO) != 0);
  return 0;
}
