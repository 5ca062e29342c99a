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
#include <optional>
#include <string>

#include "fql/catalog.hpp"
#include "fql/expr.hpp"
#include "fql/function.hpp"

namespace fql {

/// Evaluation environment: the snapshot being read plus session bindings.
/// Lookup resolves bindings before catalog names.
struct Env {
  std::shared_ptr<const Snapshot> snapshot;
  Bindings bindings;
};

/// Resolves a builtin function by name (currently rnd_str).
std::optional<Value> builtin_function(const std::string& name);

/// The engine's expression interpreter. Operator nodes run the fql-ops
/// implementations; application runs the model's apply.
class Interpreter final : public Evaluator {
 public:
  Value evaluate(const Expr& expr, const Bindings& bindings,
                 const Snapshot& snapshot) const override;
};

const Interpreter& interpreter();

/// eval(e, env): deterministic, side-effect free.
Value eval(const Expr& e, const Env& env);

/// Scalar semantics shared by the interpreter and constant folding.
namespace scalar {

/// + - * / : Int arithmetic is overflow-checked (EvalError); mixed numeric
/// promotes to Float; '/' always yields Float; text + text concatenates;
/// division by zero is an EvalError.
Value arithmetic(BinaryOp op, const Value& a, const Value& b);

/// == and != never fail: numeric operands compare by value, anything else
/// by structural equality. Ordering comparisons need two numbers, two texts
/// or two bools, else TypeMismatch.
bool comparison(BinaryOp op, const Value& a, const Value& b);

bool loose_equal(const Value& a, const Value& b);

}  // namespace scalar

}  // namespace fql
