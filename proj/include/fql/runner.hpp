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

#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <string>

#include "fql/engine.hpp"
#include "fql/syntax.hpp"

namespace fql::surface {

/// Process exit status for a failed statement or script.
enum class Status : int { Ok = 0, EvalError = 1, ParseError = 2, IoError = 3 };

Status status_of(const Error& e);

/// One-line diagnostic: "parse error at 3:7: ..." or "WriteConflict: ...".
std::string describe(const Error& e);

/// Tables for relations, "== name ==" sections for databases, literals for
/// scalars. Columns are key parameters then attributes in name order.
std::string render(const Value& v, const Context& ctx);

enum class Mode {
  Execute,
  /// show and expression statements print the optimizer plan instead of a
  /// value; everything else runs normally.
  Explain,
};

class Runner {
 public:
  Runner(std::shared_ptr<engine::Store> store, std::ostream& out,
         engine::Evaluation how = engine::Evaluation::Optimized, Mode mode = Mode::Execute);

  /// Runs one statement. Expression statements print their value only when
  /// `echo` is set (the REPL).
  void execute(const syntax::Statement& s, bool echo = false);

  /// Parses and runs a whole script, stopping at the first error, which is
  /// reported on `err` with its line.
  Status run(std::string_view text, std::ostream& err);

  /// Reads statements from `in` until EOF; errors are reported and the loop
  /// continues. A statement may span lines while brackets are open.
  void repl(std::istream& in, std::ostream& err, bool prompt = true);

  Value evaluate(const ExprPtr& e);
  engine::Session& session() { return session_; }
  const Bindings& bindings() const { return bindings_; }

 private:
  struct Target {
    bool catalog = false;
    std::string binding;  // when !catalog
    engine::Path path;    // navigation below the root (catalog) or binding
    Key key;
  };

  ExprPtr resolve(const ExprPtr& e) const;
  std::optional<engine::Path> catalog_path(const ExprPtr& e) const;
  Target target(const ExprPtr& e) const;
  void bind(const std::string& name, const ExprPtr& e, const Value* value);
  void assign(const syntax::Statement::Assign& a);
  void remove(const ExprPtr& e);
  void add(const syntax::Statement::Add& a);
  void show(const ExprPtr& e);
  void explain(const ExprPtr& e);

  engine::Session session_;
  std::ostream& out_;
  engine::Evaluation how_;
  Mode mode_;
  Bindings bindings_;
  std::map<std::string, engine::Path> aliases_;
  bool shown_ = false;
};

}  // namespace fql::surface
