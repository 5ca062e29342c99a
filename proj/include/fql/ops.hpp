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

#include <optional>
#include <string>
#include <vector>

#include "fql/catalog.hpp"
#include "fql/expr.hpp"
#include "fql/function.hpp"

/// FQL operators: each maps function values to a function value.
///
/// Every operator first materializes its inputs in canonical order (members
/// by name, keys ascending, attributes ascending) and only then computes, so
/// the first error raised for an invalid input is deterministic. The naive
/// oracle follows the same order.
namespace fql::ops {

/// Input rows in key order: enumerate_domain then apply.
std::vector<std::pair<Key, Value>> materialize(const FunctionValue& f, const Context& ctx);

/// Keeps the mappings for which pred is true. A database-level input binds
/// pred to a key/value pair function (kv[0], kv.key, kv[1], kv.value); any
/// other input binds pred to the mapped value.
FunctionRef filter(const Value& pred, const FunctionValue& input, const Context& ctx);

/// The pair function passed to database-level filter predicates.
FunctionRef key_value_pair(const Key& key, const Value& value);

/// Database function from group key to the relation of that group's
/// original mappings. Either `by` attributes or a key function.
FunctionRef group(const std::vector<std::string>& by, const Value* key_fn,
                  const FunctionValue& input, const Context& ctx);

/// Relation keyed by group key; each tuple carries the key attributes plus
/// one attribute per AggSpec.
FunctionRef aggregate(const std::vector<AggSpec>& specs, const FunctionValue& groups,
                      const Context& ctx);

/// aggregate(specs, group(by, input)) without building the grouping.
FunctionRef group_and_aggregate(const std::vector<std::string>& by, const Value* key_fn,
                                const std::vector<AggSpec>& specs, const FunctionValue& input,
                                const Context& ctx);

/// Database function mapping each member name to its own grouped aggregate.
FunctionRef grouping_sets(const std::vector<GroupingMember>& members, const FunctionValue& input,
                          const Context& ctx);

/// Joins all member relations of a database function into one relation.
/// Conditions come from `on` or, when absent, from the catalog's
/// relationships. The output key has one parameter per class of key
/// parameters equated by the conditions; attributes colliding across members
/// are prefixed "relation.attribute".
FunctionRef join(const FunctionValue& dbf, const std::optional<std::vector<JoinPair>>& on,
                 const Catalog& catalog, const Context& ctx);

/// Marked relations become {"inner": participating, "outer": the rest}.
FunctionRef outer_mark(const std::vector<std::string>& outer, const FunctionValue& dbf,
                       const Catalog& catalog, const Context& ctx);

/// Keeps in each member exactly the tuples that take part in at least one
/// complete join result (semi-join reduction to fixpoint; exact enumeration
/// when the relationship graph has a cycle).
FunctionRef reduce_db(const FunctionValue& dbf, const Catalog& catalog, const Context& ctx);

/// Union / Intersect / Minus / Difference applied per relation name.
/// Difference maps each changed key to the set of its differing versions.
FunctionRef set_op(OperatorKind kind, const FunctionValue& a, const FunctionValue& b,
                   const Context& ctx);

/// Structurally equal, physically independent copy. Computed bodies are
/// shared (immutable); captured values are copied.
FunctionRef deep_copy(const FunctionValue& f);
Value deep_copy(const Value& v);

}  // namespace fql::ops
