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
#include <random>

#include "fql/catalog.hpp"
#include "fql/expr.hpp"

namespace fql::testing {

using Rng = std::mt19937_64;

/// FQL_SEED when set, else `fallback`.
uint64_t base_seed(uint64_t fallback = 20261018);

struct DbShape {
  int max_relations = 4;
  int max_tuples = 32;
  int max_attributes = 4;
};

/// Relations r0..r3 keyed by `id` (sometimes a second key `k`), attributes
/// drawn from a..d with mixed scalar types, occasional missing attributes,
/// and sometimes a link relation with a declared relationship.
Catalog random_catalog(Rng& rng, const DbShape& shape = {});

/// One relation in the same style, for single-relation laws.
Value random_relation(Rng& rng, const DbShape& shape = {});

/// A copy of `c` with a few inserts, updates and deletes.
Catalog perturbed(Rng& rng, const Catalog& c);

/// Queries over the random_catalog naming scheme. They are biased towards
/// the shapes the optimizer rewrites and include invalid ones (missing
/// attributes, type errors, overflow, division by zero).
ExprPtr random_query(Rng& rng);

/// Arbitrary expressions in the printable fragment of the AST.
ExprPtr random_ast(Rng& rng, int depth = 4);

}  // namespace fql::testing
