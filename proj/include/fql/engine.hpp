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

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "fql/catalog.hpp"
#include "fql/eval.hpp"
#include "fql/optimizer.hpp"

namespace fql::engine {

/// Versioned database store. Versions are immutable once appended; commits
/// are serialized and validated first-committer-wins.
class Store {
 public:
  explicit Store(Catalog initial = {});

  std::shared_ptr<const Snapshot> head() const;
  int64_t head_version() const { return head()->version(); }
  std::shared_ptr<const Snapshot> at(int64_t version) const;

  /// Appends `next` as a new version if the head is still `base_version`.
  /// Throws WriteConflict otherwise.
  std::shared_ptr<const Snapshot> commit(int64_t base_version, Catalog next);

 private:
  mutable std::mutex mutex_;
  std::vector<std::shared_ptr<const Snapshot>> versions_;
};

enum class TxState { Idle, Active, Aborted };

/// A path from the catalog to a stored function: the first key is the
/// catalog name, the rest are applied in turn.
using Path = std::vector<Key>;

/// How evaluation is carried out by read().
enum class Evaluation { Optimized, Direct, Oracle };

class Session {
 public:
  explicit Session(std::shared_ptr<Store> store);

  void begin();
  void commit();
  void rollback();

  TxState state() const { return state_; }
  /// Working copy while a transaction is active, else the current head.
  std::shared_ptr<const Snapshot> snapshot() const;
  const std::shared_ptr<Store>& store() const { return store_; }

  Value read(const ExprPtr& e, const Bindings& bindings = {},
             Evaluation how = Evaluation::Optimized) const;
  optimizer::Plan plan(const ExprPtr& e, const Bindings& bindings = {}) const;

  /// Inserts or replaces the mapping at `key` of the function at `path`.
  void set(const Path& path, const Key& key, const Value& value);
  /// Removes the mapping at `key`; UndefinedInput if absent.
  void remove(const Path& path, const Key& key);
  /// Inserts under max(Int key) + 1 (1 if none) and returns that key.
  Value add(const Path& path, const Value& value);
  /// Binds `name` in the catalog. A dynamic view keeps `e` and re-evaluates
  /// it on every access; a materialized one stores a deep copy of its value.
  void assign(const std::string& name, const ExprPtr& e, bool materialize,
              const Bindings& bindings = {});
  /// Replaces the whole catalog, as after loading a document.
  void replace(Catalog catalog);

 private:
  template <typename F>
  void write(F&& change);
  void require_usable() const;

  std::shared_ptr<Store> store_;
  TxState state_ = TxState::Idle;
  std::shared_ptr<const Snapshot> base_;
  std::shared_ptr<const Snapshot> work_;
  bool dirty_ = false;
};

/// Functional update of a nested extensional function: the mapping at `key`
/// of the function reached through `path` is set (or removed when `value`
/// is empty). Intermediate functions are rebuilt; the input is unchanged.
Value updated(const Value& root, const std::vector<Key>& path, const Key& key,
              const std::optional<Value>& value, const Context& ctx);

/// Next auto-increment key of a unary function.
Value next_key(const FunctionValue& f);

/// Names a view expression depends on; "DB" alone stands for every view.
std::set<std::string> view_dependencies(const Expr& e);

}  // namespace fql::engine
