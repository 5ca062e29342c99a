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

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fql/value.hpp"

namespace fql {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

class Snapshot;

using Bindings = std::map<std::string, Value>;
using Key = ValueList;
using Mappings = std::map<Key, Value, KeyLess>;

/// Evaluates expression bodies on behalf of the model. The engine's
/// interpreter and the naive oracle each provide one.
class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual Value evaluate(const Expr& expr, const Bindings& bindings,
                         const Snapshot& snapshot) const = 0;
};

/// Everything needed to apply a computed function.
struct Context {
  const Snapshot& snapshot;
  const Evaluator& evaluator;
};

// ---------------------------------------------------------------------------
// Domain constraints
// ---------------------------------------------------------------------------

enum class BaseType { Int, Float, Text, Bool, Function, Any };

const char* base_type_name(BaseType type);

struct DomainConstraint {
  struct Unconstrained {};
  struct FiniteSet {
    ValueList values;  // ascending, distinct
  };
  struct Interval {
    Value lo;
    Value hi;
  };
  /// Membership decided by a boolean expression over one free parameter.
  struct Predicate {
    std::string param;
    ExprPtr body;
  };

  BaseType base = BaseType::Any;
  std::variant<Unconstrained, FiniteSet, Interval, Predicate> form;

  static DomainConstraint any(BaseType base = BaseType::Any);
  /// Throws DomainError if a value does not have `base`.
  static DomainConstraint finite(BaseType base, ValueList values);
  /// Throws DomainError unless `base` is numeric and lo <= hi.
  static DomainConstraint interval(BaseType base, Value lo, Value hi);
  static DomainConstraint predicate(BaseType base, std::string param, ExprPtr body);

  bool is_unconstrained() const { return std::holds_alternative<Unconstrained>(form); }
};

int compare(const DomainConstraint& a, const DomainConstraint& b);
inline bool operator==(const DomainConstraint& a, const DomainConstraint& b) {
  return compare(a, b) == 0;
}

bool has_base_type(BaseType base, const Value& v);

/// True iff `v` has the constraint's base type and is admissible under its
/// form. Predicate forms need a context; a raising predicate is reported as
/// PredicateError.
bool contains(const DomainConstraint& c, const Value& v, const Context* ctx = nullptr);

// ---------------------------------------------------------------------------
// Function values
// ---------------------------------------------------------------------------

struct Param {
  std::string name;
  DomainConstraint constraint;
};

using ParamSig = std::vector<Param>;

/// Which level of the data model a function plays. Operators choose their
/// parameter binding from it (a database filter binds key/value pairs).
enum class Level { Generic, Tuple, Relation, Database };

const char* level_name(Level level);

struct Extensional {
  Mappings mappings;
};

struct Computed {
  ExprPtr body;
  Bindings captured;
};

struct Case {
  ExprPtr guard;
  std::variant<Extensional, Computed> body;
};

struct Piecewise {
  std::vector<Case> cases;
  std::optional<Computed> fallback;
  Bindings captured;  // visible to guards
};

/// Host-implemented function (builtins). Compared by name.
struct Native {
  std::string name;
  std::function<Value(const ValueList&)> fn;
};

using Body = std::variant<Extensional, Computed, Piecewise, Native>;

struct FunctionValue {
  ParamSig sig;
  DomainConstraint codomain;
  Level level = Level::Generic;
  Body body;

  size_t arity() const { return sig.size(); }
  bool is_extensional() const { return std::holds_alternative<Extensional>(body); }
  const Mappings& mappings() const { return std::get<Extensional>(body).mappings; }
};

int compare(const FunctionValue& a, const FunctionValue& b);

/// Builds an extensional function. Throws UniqueViolation on a repeated input
/// tuple and DomainError when a key or value violates the constraints.
FunctionRef make_extensional(ParamSig sig, DomainConstraint codomain,
                             std::vector<std::pair<Key, Value>> mappings,
                             Level level = Level::Generic, const Context* ctx = nullptr);

/// Same as make_extensional but takes an already-unique map and skips checks.
/// Operators use it when the keys come from an existing function.
FunctionRef make_extensional_unchecked(ParamSig sig, DomainConstraint codomain, Mappings mappings,
                                       Level level);

FunctionRef make_computed(ParamSig sig, DomainConstraint codomain, ExprPtr body,
                          Bindings captured = {}, Level level = Level::Generic);

FunctionRef make_piecewise(ParamSig sig, DomainConstraint codomain, std::vector<Case> cases,
                           std::optional<Computed> fallback, Bindings captured = {},
                           Level level = Level::Generic);

FunctionRef make_native(ParamSig sig, DomainConstraint codomain, std::string name,
                        std::function<Value(const ValueList&)> fn);

/// Tuple function over attribute names: sig (attr: text), codomain any.
FunctionRef make_tuple(std::vector<std::pair<std::string, Value>> attributes);

ParamSig text_sig(const std::string& name);

/// Applies f to args. Extensional lookup, then ordered piecewise guards, then
/// the fallback. Errors: ArityError, DomainError, UndefinedInput.
Value apply(const FunctionValue& f, const ValueList& args, const Context& ctx);
Value apply(const Value& f, const ValueList& args, const Context& ctx);

/// Deterministic ascending list of admissible, defined inputs. Throws
/// NotEnumerable for bodies over infinite domains.
std::vector<Key> enumerate_domain(const FunctionValue& f, const Context* ctx = nullptr);

/// Upper bound on the domain size enumerate_domain will expand from
/// finite constraints.
inline constexpr size_t kMaxEnumeration = 1u << 20;

/// Eight lowercase characters derived from one splitmix64 step on `seed`,
/// five bits per character, low bits first, each reduced modulo 26.
std::string rnd_str(int64_t seed);

}  // namespace fql
