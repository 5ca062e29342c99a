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

#include "fql/catalog.hpp"

#include <algorithm>

#include "fql/error.hpp"

namespace fql {

bool Catalog::has(const std::string& name) const {
  return entries.count(name) > 0 || is_dynamic_view(name);
}

bool Catalog::is_dynamic_view(const std::string& name) const {
  auto it = views.find(name);
  return it != views.end() && !it->second.materialized;
}

std::vector<std::string> Catalog::names() const {
  std::vector<std::string> out;
  for (const auto& [name, v] : entries) out.push_back(name);
  for (const auto& [name, view] : views) {
    if (!view.materialized) out.push_back(name);
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

const FunctionValue* stored_function(const Catalog& c, const std::string& name) {
  auto it = c.entries.find(name);
  if (it == c.entries.end() || !it->second.is_function()) return nullptr;
  return it->second.as_function().get();
}

}  // namespace

void Catalog::validate_relationships() const {
  for (const auto& rel : relationships) {
    const FunctionValue* rf = stored_function(*this, rel.function);
    if (!rf) {
      fail(ErrorKind::DomainError, "relationship '" + rel.name + "' names unknown function '" +
                                       rel.function + "'");
    }
    if (rel.participants.size() != rf->arity()) {
      fail(ErrorKind::DomainError, "relationship '" + rel.name + "' lists " +
                                       std::to_string(rel.participants.size()) +
                                       " participants for a function of arity " +
                                       std::to_string(rf->arity()));
    }
    for (size_t i = 0; i < rel.participants.size(); ++i) {
      const auto& [fname, pname] = rel.participants[i];
      const FunctionValue* pf = stored_function(*this, fname);
      if (!pf) {
        fail(ErrorKind::DomainError, "relationship '" + rel.name + "' names unknown function '" +
                                         fname + "'");
      }
      auto it = std::find_if(pf->sig.begin(), pf->sig.end(),
                             [&](const Param& p) { return p.name == pname; });
      if (it == pf->sig.end()) {
        fail(ErrorKind::DomainError, "relationship '" + rel.name + "': '" + fname +
                                         "' has no parameter '" + pname + "'");
      }
      if (!(it->constraint == rf->sig[i].constraint)) {
        fail(ErrorKind::DomainError, "relationship '" + rel.name + "': domain of " + fname + "." +
                                         pname + " differs from " + rel.function + "." +
                                         rf->sig[i].name);
      }
    }
  }
}

FunctionRef Catalog::build_root() const {
  ParamSig sig = text_sig(kRelNameParam);
  Mappings stored;
  for (const auto& [name, value] : entries) stored.emplace(Key{Value(name)}, value);

  bool any_dynamic = std::any_of(views.begin(), views.end(),
                                 [](const auto& kv) { return !kv.second.materialized; });
  if (!any_dynamic) {
    return make_extensional_unchecked(std::move(sig), DomainConstraint::any(), std::move(stored),
                                      Level::Database);
  }
  std::vector<Case> cases;
  std::vector<ExprPtr> stored_names;
  for (const auto& [name, value] : entries) stored_names.push_back(lit(Value(name)));
  cases.push_back(Case{in(param(kRelNameParam), set_lit(std::move(stored_names))),
                       Extensional{std::move(stored)}});
  for (const auto& [name, view] : views) {
    if (view.materialized) continue;
    cases.push_back(Case{binary(BinaryOp::Eq, param(kRelNameParam), lit(Value(name))),
                         Computed{view.expr, {}}});
  }
  return make_piecewise(std::move(sig), DomainConstraint::any(), std::move(cases), std::nullopt, {},
                        Level::Database);
}

Snapshot::Snapshot(int64_t version, std::shared_ptr<const Catalog> catalog)
    : version_(version), catalog_(std::move(catalog)), root_(catalog_->build_root()) {}

std::shared_ptr<const Snapshot> make_snapshot(Catalog catalog, int64_t version) {
  return std::make_shared<const Snapshot>(version,
                                          std::make_shared<const Catalog>(std::move(catalog)));
}

}  // namespace fql
