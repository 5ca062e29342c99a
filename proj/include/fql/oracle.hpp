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

#include "fql/catalog.hpp"
#include "fql/expr.hpp"
#include "fql/function.hpp"

/// Reference evaluator: direct recursive interpretation with no rewrites,
/// nested-loop joins and full materialization. It shares only the data model
/// with the engine; operator bodies and scalar rules are written separately.
namespace fql::oracle {

class NaiveEvaluator final : public Evaluator {
 public:
  Value evaluate(const Expr& expr, const Bindings& bindings,
                 const Snapshot& snapshot) const override;
};

const NaiveEvaluator& naive();

Value eval_naive(const Expr& e, const Snapshot& snapshot, const Bindings& bindings = {});

}  // namespace fql::oracle
