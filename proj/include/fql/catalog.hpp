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
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fql/expr.hpp"
#include "fql/function.hpp"

namespace fql {

/// A relationship function `function` whose i-th parameter shares its domain
/// with parameter participants[i].second of function participants[i].first.
struct RelationshipDecl {
  std::string name;
  std::vector<std::pair<std::string, std::string>> participants;
  std::string function;
  bool is_predicate = false;

  friend bool operator==(const RelationshipDecl&, const RelationshipDecl&) = default;
};

/// A named expression bound into the database function. Dynamic views are
/// evaluated on every access; materialized ones were deep-copied once and
/// their contents live in Catalog::entries.
struct ViewDef {
  std::string name;
  ExprPtr expr;
  bool materialized = false;
};

/// The name of the database function's parameter.
inline constexpr const char* kRelNameParam = "rel_name";
/// The name under which the database function itself is visible.
inline constexpr const char* kDatabaseName = "DB";

struct Catalog {
  std::map<std::string, Value> entries;
  std::map<std::string, ViewDef> views;
  std::vector<RelationshipDecl> relationships;

  bool has(const std::string& name) const;
  bool is_dynamic_view(const std::string& name) const;
  /// All names the database function maps, ascending.
  std::vector<std::string> names() const;

  /// Checks every relationship against the stored relation functions: each
  /// participant parameter exists and its constraint equals the matching
  /// parameter of the relationship function. Throws DomainError.
  void validate_relationships() const;

  /// The database function DB(rel_name). Stored entries are extensional
  /// mappings; each dynamic view is a computed case guarded on its name.
  FunctionRef build_root() const;
};

/// An immutable version of the store. All reads through one Snapshot observe
/// the same catalog.
class Snapshot {
 public:
  Snapshot(int64_t version, std::shared_ptr<const Catalog> catalog);

  int64_t version() const { return version_; }
  const Catalog& catalog() const { return *catalog_; }
  const std::shared_ptr<const Catalog>& catalog_ptr() const { return catalog_; }
  const FunctionRef& root() const { return root_; }

 private:
  int64_t version_;
  std::shared_ptr<const Catalog> catalog_;
  FunctionRef root_;
};

std::shared_ptr<const Snapshot> make_snapshot(Catalog catalog, int64_t version = 0);

}  // namespace fql
