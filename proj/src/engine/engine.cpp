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

#include "fql/engine.hpp"

#include <functional>

#include "fql/error.hpp"
#include "fql/ops.hpp"
#include "fql/oracle.hpp"

namespace fql::engine {

// ---------------------------------------------------------------------------
// Store
// ---------------------------------------------------------------------------

Store::Store(Catalog initial) { versions_.push_back(make_snapshot(std::move(initial), 0)); }

std::shared_ptr<const Snapshot> Store::head() const {
  std::lock_guard lock(mutex_);
  return versions_.back();
}

std::shared_ptr<const Snapshot> Store::at(int64_t version) const {
  std::lock_guard lock(mutex_);
  if (version < 0 || version >= static_cast<int64_t>(versions_.size())) {
    fail(ErrorKind::UndefinedInput, "no version " + std::to_string(version));
  }
  return versions_[static_cast<size_t>(version)];
}

std::shared_ptr<const Snapshot> Store::commit(int64_t base_version, Catalog next) {
  std::lock_guard lock(mutex_);
  int64_t head = versions_.back()->version();
  if (head != base_version) {
    fail(ErrorKind::WriteConflict, "the store advanced to version " + std::to_string(head) +
                                       " after this transaction began at version " +
                                       std::to_string(base_version));
  }
  versions_.push_back(make_snapshot(std::move(next), head + 1));
  return versions_.back();
}

// ---------------------------------------------------------------------------
// Functional updates
// ---------------------------------------------------------------------------

Value next_key(const FunctionValue& f) {
  if (f.arity() != 1) {
    fail(ErrorKind::ArityError, "add needs a function of one parameter, this one has " +
                                    std::to_string(f.arity()));
  }
  if (!f.is_extensional()) fail(ErrorKind::ReadOnlyTarget, "cannot add to a computed function");
  std::optional<int64_t> max;
  for (const auto& [k, v] : f.mappings()) {
    if (k[0].is_int() && (!max || k[0].as_int() > *max)) max = k[0].as_int();
  }
  if (!max) return Value(1);
  if (*max == INT64_MAX) fail(ErrorKind::EvalError, "integer overflow allocating a key");
  return Value(*max + 1);
}

Value updated(const Value& root, const std::vector<Key>& path, const Key& key,
              const std::optional<Value>& value, const Context& ctx) {
  if (!root.is_function()) {
    fail(ErrorKind::TypeMismatch, std::string("cannot update inside a ") + type_name(root.type()));
  }
  const FunctionValue& f = *root.as_function();
  if (!f.is_extensional()) fail(ErrorKind::ReadOnlyTarget, "cannot modify a computed function");
  Mappings m = f.mappings();
  if (!path.empty()) {
    auto it = m.find(path.front());
    if (it == m.end()) fail(ErrorKind::UndefinedInput, "no mapping for " + debug_string(path.front()));
    it->second = updated(it->second, std::vector<Key>(path.begin() + 1, path.end()), key, value, ctx);
    return Value(make_extensional_unchecked(f.sig, f.codomain, std::move(m), f.level));
  }
  if (key.size() != f.arity()) {
    fail(ErrorKind::ArityError, "key " + debug_string(key) + " does not match " +
                                    std::to_string(f.arity()) + " parameters");
  }
  if (!value) {
    if (!m.erase(key)) fail(ErrorKind::UndefinedInput, "no mapping for " + debug_string(key));
  } else {
    for (size_t i = 0; i < key.size(); ++i) {
      if (!contains(f.sig[i].constraint, key[i], &ctx)) {
        fail(ErrorKind::DomainError, debug_string(key[i]) + " is outside the domain of '" +
                                         f.sig[i].name + "'");
      }
    }
    if (!contains(f.codomain, *value, &ctx)) {
      fail(ErrorKind::DomainError, debug_string(*value) + " is outside the codomain");
    }
    m[key] = *value;
  }
  return Value(make_extensional_unchecked(f.sig, f.codomain, std::move(m), f.level));
}

std::set<std::string> view_dependencies(const Expr& e) {
  std::set<std::string> out;
  std::function<void(const Expr&)> walk = [&](const Expr& x) {
    if (auto* r = x.as<Expr::Ref>()) {
      if (r->path[0] == kDatabaseName && r->path.size() > 1) {
        out.insert(r->path[1]);
      } else {
        out.insert(r->path[0]);
      }
      return;
    }
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Expr::Apply>) {
            walk(*n.fn);
            for (const auto& a : n.args) walk(*a);
          } else if constexpr (std::is_same_v<T, Expr::Lambda>) {
            walk(*n.body);
          } else if constexpr (std::is_same_v<T, Expr::Binary>) {
            walk(*n.lhs);
            walk(*n.rhs);
          } else if constexpr (std::is_same_v<T, Expr::Not>) {
            walk(*n.operand);
          } else if constexpr (std::is_same_v<T, Expr::In>) {
            walk(*n.needle);
            walk(*n.haystack);
          } else if constexpr (std::is_same_v<T, Expr::Record>) {
            for (const auto& f : n.fields) walk(*f.second);
          } else if constexpr (std::is_same_v<T, Expr::SetLit>) {
            for (const auto& i : n.items) walk(*i);
          } else if constexpr (std::is_same_v<T, Expr::Op>) {
            for (const auto& i : n.inputs) walk(*i);
          }
        },
        x.node);
  };
  walk(e);
  return out;
}

namespace {

void check_acyclic(const Catalog& c, const std::string& start) {
  std::set<std::string> dynamic;
  for (const auto& [name, v] : c.views) {
    if (!v.materialized) dynamic.insert(name);
  }
  auto deps = [&](const std::string& view) {
    auto names = view_dependencies(*c.views.at(view).expr);
    if (names.count(kDatabaseName)) return dynamic;
    std::set<std::string> out;
    for (const auto& n : names) {
      if (dynamic.count(n)) out.insert(n);
    }
    return out;
  };
  std::set<std::string> done;
  std::vector<std::string> stack;
  std::function<void(const std::string&)> visit = [&](const std::string& v) {
    if (std::find(stack.begin(), stack.end(), v) != stack.end()) {
      std::string cycle;
      for (auto it = std::find(stack.begin(), stack.end(), v); it != stack.end(); ++it) {
        cycle += *it + " -> ";
      }
      fail(ErrorKind::CyclicView, "view cycle " + cycle + v);
    }
    if (done.count(v)) return;
    stack.push_back(v);
    for (const auto& d : deps(v)) visit(d);
    stack.pop_back();
    done.insert(v);
  };
  visit(start);
}

std::string catalog_name(const Path& path) {
  if (path.empty() || path[0].size() != 1 || !path[0][0].is_text()) {
    fail(ErrorKind::TypeMismatch, "mutation target must start at a catalog name");
  }
  return path[0][0].as_text();
}

}  // namespace

// ---------------------------------------------------------------------------
// Session
// ---------------------------------------------------------------------------

Session::Session(std::shared_ptr<Store> store) : store_(std::move(store)) {}

void Session::begin() {
  if (state_ != TxState::Idle) fail(ErrorKind::TxStateError, "a transaction is already open");
  base_ = store_->head();
  work_ = base_;
  dirty_ = false;
  state_ = TxState::Active;
}

void Session::commit() {
  if (state_ == TxState::Idle) fail(ErrorKind::TxStateError, "no transaction to commit");
  if (state_ == TxState::Aborted) {
    fail(ErrorKind::TxStateError, "the transaction was aborted; roll it back");
  }
  if (dirty_) {
    try {
      store_->commit(base_->version(), work_->catalog());
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::WriteConflict) state_ = TxState::Aborted;
      throw;
    }
  }
  state_ = TxState::Idle;
  base_.reset();
  work_.reset();
}

void Session::rollback() {
  if (state_ == TxState::Idle) fail(ErrorKind::TxStateError, "no transaction to roll back");
  state_ = TxState::Idle;
  base_.reset();
  work_.reset();
}

void Session::require_usable() const {
  if (state_ == TxState::Aborted) {
    fail(ErrorKind::TxStateError, "the transaction was aborted; roll it back");
  }
}

std::shared_ptr<const Snapshot> Session::snapshot() const {
  require_usable();
  return state_ == TxState::Active ? work_ : store_->head();
}

optimizer::Plan Session::plan(const ExprPtr& e, const Bindings& bindings) const {
  auto snap = snapshot();
  std::set<std::string> shadowed;
  for (const auto& [name, v] : bindings) shadowed.insert(name);
  optimizer::Schema schema = optimizer::build_schema(*snap, shadowed);
  return optimizer::rewrite(e, &schema);
}

Value Session::read(const ExprPtr& e, const Bindings& bindings, Evaluation how) const {
  auto snap = snapshot();
  switch (how) {
    case Evaluation::Optimized: {
      std::set<std::string> shadowed;
      for (const auto& [name, v] : bindings) shadowed.insert(name);
      optimizer::Schema schema = optimizer::build_schema(*snap, shadowed);
      return interpreter().evaluate(*optimizer::rewrite(e, &schema).expr, bindings, *snap);
    }
    case Evaluation::Direct:
      return interpreter().evaluate(*e, bindings, *snap);
    case Evaluation::Oracle:
      return oracle::eval_naive(*e, *snap, bindings);
  }
  return Value();
}

template <typename F>
void Session::write(F&& change) {
  require_usable();
  if (state_ == TxState::Idle) {
    auto head = store_->head();
    Catalog next = head->catalog();
    change(next, *head);
    store_->commit(head->version(), std::move(next));
    return;
  }
  Catalog next = work_->catalog();
  change(next, *work_);
  work_ = make_snapshot(std::move(next), base_->version());
  dirty_ = true;
}

namespace {

void mutate(Catalog& c, const Snapshot& snap, const Path& path, const Key& key,
            const std::optional<Value>& value) {
  std::string name = catalog_name(path);
  if (c.is_dynamic_view(name)) {
    fail(ErrorKind::ReadOnlyTarget, "'" + name + "' is a dynamic view and cannot be modified");
  }
  auto it = c.entries.find(name);
  if (it == c.entries.end()) fail(ErrorKind::NameError, "unknown relation '" + name + "'");
  Context ctx{snap, interpreter()};
  it->second = updated(it->second, std::vector<Key>(path.begin() + 1, path.end()), key, value, ctx);
}

}  // namespace

void Session::set(const Path& path, const Key& key, const Value& value) {
  write([&](Catalog& c, const Snapshot& snap) { mutate(c, snap, path, key, value); });
}

void Session::remove(const Path& path, const Key& key) {
  write([&](Catalog& c, const Snapshot& snap) { mutate(c, snap, path, key, std::nullopt); });
}

Value Session::add(const Path& path, const Value& value) {
  Value key;
  write([&](Catalog& c, const Snapshot& snap) {
    std::string name = catalog_name(path);
    if (c.is_dynamic_view(name)) {
      fail(ErrorKind::ReadOnlyTarget, "'" + name + "' is a dynamic view and cannot be modified");
    }
    auto it = c.entries.find(name);
    if (it == c.entries.end()) fail(ErrorKind::NameError, "unknown relation '" + name + "'");
    Value target = it->second;
    for (size_t i = 1; i < path.size(); ++i) {
      if (!target.is_function() || !target.as_function()->is_extensional()) {
        fail(ErrorKind::ReadOnlyTarget, "cannot modify a computed function");
      }
      const auto& m = target.as_function()->mappings();
      auto step = m.find(path[i]);
      if (step == m.end()) fail(ErrorKind::UndefinedInput, "no mapping for " + debug_string(path[i]));
      target = step->second;
    }
    if (!target.is_function()) {
      fail(ErrorKind::TypeMismatch, std::string("cannot add to a ") + type_name(target.type()));
    }
    key = next_key(*target.as_function());
    mutate(c, snap, path, {key}, value);
  });
  return key;
}

void Session::assign(const std::string& name, const ExprPtr& e, bool materialize,
                     const Bindings& bindings) {
  if (name == kDatabaseName) fail(ErrorKind::NameError, "'DB' cannot be reassigned");
  if (materialize) {
    Value v = ops::deep_copy(read(e, bindings));
    write([&](Catalog& c, const Snapshot&) {
      c.views[name] = ViewDef{name, e, true};
      c.entries[name] = v;
    });
    return;
  }
  for (const auto& n : free_names(*e)) {
    if (bindings.count(n)) {
      fail(ErrorKind::NameError, "dynamic view '" + name + "' cannot refer to the session value '" +
                                     n + "'; materialize it with copy() instead");
    }
  }
  write([&](Catalog& c, const Snapshot&) {
    c.entries.erase(name);
    c.views[name] = ViewDef{name, e, false};
    check_acyclic(c, name);
  });
}

void Session::replace(Catalog catalog) {
  write([&](Catalog& c, const Snapshot&) { c = std::move(catalog); });
}

}  // namespace fql::engine
