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

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fql/error.hpp"
#include "fql/expr.hpp"

namespace fql::syntax {

enum class TokenKind {
  Ident,
  Int,
  Float,
  String,
  Punct,
  Newline,
  End,
};

struct Token {
  TokenKind kind = TokenKind::End;
  std::string lexeme;  // decoded text for strings
  SourcePos pos;
};

/// Splits source text into tokens. Newlines inside (), [] and {} are
/// dropped so calls may span lines. Throws ParseError.
std::vector<Token> tokenize(std::string_view text);

// ---------------------------------------------------------------------------
// Scripts
// ---------------------------------------------------------------------------

struct Statement {
  /// `e`: evaluated for its errors; the REPL prints the value.
  struct Eval {
    ExprPtr expr;
  };
  /// `a = e` or `a, b = e1, e2`; an optional `: Type` annotation is ignored.
  struct Bind {
    std::vector<std::string> names;
    std::vector<ExprPtr> values;
  };
  /// `target = e`, `target += e`, `target -= e` for a non-name target:
  /// DB.name, binding.member, e[k], e[k][attr].
  struct Assign {
    ExprPtr target;
    std::string op;  // "=", "+=", "-="
    ExprPtr value;
  };
  struct Delete {
    ExprPtr target;  // e[k]
  };
  struct Add {
    ExprPtr relation;
    ExprPtr value;
  };
  struct Begin {};
  struct Commit {};
  struct Rollback {};
  struct Show {
    ExprPtr expr;
  };
  struct Explain {
    ExprPtr expr;
  };
  struct Load {
    std::string path;
  };
  struct Save {
    std::string path;
  };

  std::variant<Eval, Bind, Assign, Delete, Add, Begin, Commit, Rollback, Show, Explain, Load, Save>
      node;
  int line = 0;
};

struct Script {
  std::vector<Statement> statements;
};

Script parse_script(std::string_view text);

/// Parses exactly one expression (surrounding blank lines and comments
/// allowed).
ExprPtr parse_expr(std::string_view text);

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

/// Canonical surface text: parse_expr(print(e)) == e for every expression
/// the parser can produce.
std::string print(const Expr& e);
std::string print(const Statement& s);
std::string print(const Script& s);

bool is_identifier(std::string_view s);

}  // namespace fql::syntax
