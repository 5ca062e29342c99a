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

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fql/catalog.hpp"
#include "fql/expr.hpp"

namespace fql::optimizer {

/// What every row of a stored relation is known to carry.
struct AttrInfo {
  enum class Kind { Int, Float, Number, Text, Bool, Other };
  Kind kind = Kind::Other;
  uint64_t max_abs = 0;  // over the integer values
};

struct RelationSchema {
  std::map<std::string, AttrInfo> attrs;  // present in every row
  std::set<std::string> all_attrs;        // present in some row
  std::vector<std::string> key_params;
  bool uniform = true;                    // every row has the same attribute names
  size_t rows = 0;
};

/// Facts about the snapshot a rewrite may rely on. Names shadowed by session
/// bindings are left out, since they no longer resolve to the catalog.
struct Schema {
  std::map<std::string, RelationSchema> relations;
  std::map<std::string, Level> entries;  // stored, unshadowed functions
  std::set<std::string> stored;          // every stored entry, shadowed or not
  std::vector<RelationshipDecl> relationships;
  bool db_visible = false;
  bool dynamic_views = false;

  const RelationSchema* relation(const std::string& name) const;
};

Schema build_schema(const Snapshot& snapshot, const std::set<std::string>& shadowed = {});

struct Step {
  std::string rule;
  uint64_t before = 0;
  uint64_t after = 0;
};

struct Plan {
  ExprPtr expr;
  std::vector<Step> trace;
  bool budget_exceeded = false;
};

inline constexpr size_t kRewriteBudget = 64;

/// Applies rewrite rules one at a time, outermost first, until none applies
/// or the budget runs out. Without a schema only rules that hold on every
/// database are used.
Plan rewrite(const ExprPtr& e, const Schema* schema = nullptr);

/// FNV-1a over the canonical text.
uint64_t digest(const Expr& e);

/// Human-readable plan: the rewritten expression and one line per step.
std::string explain(const Plan& plan);

}  // namespace fql::optimizer
