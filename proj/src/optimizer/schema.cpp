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

#include <cstdlib>

#include "fql/optimizer.hpp"

namespace fql::optimizer {

namespace {

AttrInfo::Kind kind_of(const Value& v) {
  switch (v.type()) {
    case ValueType::Int: return AttrInfo::Kind::Int;
    case ValueType::Float: return AttrInfo::Kind::Float;
    case ValueType::Text: return AttrInfo::Kind::Text;
    case ValueType::Bool: return AttrInfo::Kind::Bool;
    default: return AttrInfo::Kind::Other;
  }
}

bool numeric(AttrInfo::Kind k) {
  return k == AttrInfo::Kind::Int || k == AttrInfo::Kind::Float || k == AttrInfo::Kind::Number;
}

AttrInfo::Kind merge(AttrInfo::Kind a, AttrInfo::Kind b) {
  if (a == b) return a;
  if (numeric(a) && numeric(b)) return AttrInfo::Kind::Number;
  return AttrInfo::Kind::Other;
}

uint64_t magnitude(int64_t x) {
  return x < 0 ? uint64_t{0} - static_cast<uint64_t>(x) : static_cast<uint64_t>(x);
}

/// Rows must all be extensional tuples over text attribute names.
std::optional<RelationSchema> relation_schema(const FunctionValue& f) {
  if (!f.is_extensional() || f.level == Level::Database) return std::nullopt;
  RelationSchema s;
  for (const auto& p : f.sig) s.key_params.push_back(p.name);
  bool first = true;
  for (const auto& [key, row] : f.mappings()) {
    if (!row.is_function()) return std::nullopt;
    const FunctionValue& t = *row.as_function();
    if (!t.is_extensional() || t.arity() != 1) return std::nullopt;
    std::map<std::string, AttrInfo> attrs;
    for (const auto& [k, v] : t.mappings()) {
      if (k.size() != 1 || !k[0].is_text()) return std::nullopt;
      AttrInfo info{kind_of(v), v.is_int() ? magnitude(v.as_int()) : 0};
      attrs.emplace(k[0].as_text(), info);
      s.all_attrs.insert(k[0].as_text());
    }
    if (first) {
      s.attrs = std::move(attrs);
      first = false;
    } else {
      if (attrs.size() != s.attrs.size()) s.uniform = false;
      for (auto it = s.attrs.begin(); it != s.attrs.end();) {
        auto other = attrs.find(it->first);
        if (other == attrs.end()) {
          s.uniform = false;
          it = s.attrs.erase(it);
          continue;
        }
        it->second.kind = merge(it->second.kind, other->second.kind);
        it->second.max_abs = std::max(it->second.max_abs, other->second.max_abs);
        ++it;
      }
    }
    ++s.rows;
  }
  return s;
}

}  // namespace

const RelationSchema* Schema::relation(const std::string& name) const {
  auto it = relations.find(name);
  return it == relations.end() ? nullptr : &it->second;
}

Schema build_schema(const Snapshot& snapshot, const std::set<std::string>& shadowed) {
  const Catalog& catalog = snapshot.catalog();
  Schema s;
  s.db_visible = !shadowed.count(kDatabaseName);
  s.relationships = catalog.relationships;
  for (const auto& [name, view] : catalog.views) {
    if (!view.materialized) s.dynamic_views = true;
  }
  for (const auto& [name, value] : catalog.entries) {
    s.stored.insert(name);
    if (shadowed.count(name) || !value.is_function()) continue;
    if (auto v = catalog.views.find(name); v != catalog.views.end() && !v->second.materialized) {
      continue;
    }
    const FunctionValue& f = *value.as_function();
    s.entries[name] = f.level;
    if (auto rel = relation_schema(f)) s.relations[name] = std::move(*rel);
  }
  return s;
}

}  // namespace fql::optimizer
