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
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fql/function.hpp"
#include "fql/value.hpp"

namespace fql {

enum class BinaryOp { Add, Sub, Mul, Div, Lt, Le, Gt, Ge, Eq, Ne, And, Or };

const char* binary_op_symbol(BinaryOp op);
bool is_comparison(BinaryOp op);
bool is_arithmetic(BinaryOp op);

enum class OperatorKind {
  Filter,
  Group,
  Aggregate,
  GroupAndAggregate,
  GroupingSets,
  Join,
  OuterMark,
  ReduceDB,
  Union,
  Intersect,
  Minus,
  Difference,
  DeepCopy,
  Copy,
};

/// Surface name of an operator ("filter", "reduce_DB", ...). OuterMark is
/// spelled "subdatabase".
const char* operator_name(OperatorKind kind);
std::optional<OperatorKind> operator_from_name(std::string_view name);

enum class AggKind { Count, Sum, Min, Max, Avg };

const char* agg_name(AggKind kind);

struct AggSpec {
  std::string out_name;
  AggKind kind = AggKind::Count;
  std::string attribute;  // empty for Count

  friend bool operator==(const AggSpec&, const AggSpec&) = default;
};

struct GroupingMember {
  std::vector<std::string> by;
  std::vector<AggSpec> aggs;
  std::string name;

  friend bool operator==(const GroupingMember&, const GroupingMember&) = default;
};

struct JoinEndpoint {
  std::string relation;
  std::string name;  // key parameter or attribute

  friend bool operator==(const JoinEndpoint&, const JoinEndpoint&) = default;
};

struct JoinPair {
  JoinEndpoint left;
  JoinEndpoint right;

  friend bool operator==(const JoinPair&, const JoinPair&) = default;
};

/// Operator configuration. Which fields are meaningful depends on the kind:
///   Group, GroupAndAggregate: by / by_lambda (+ aggs)
///   Aggregate: aggs
///   GroupingSets: sets
///   Join: on (absent = follow catalog relationships)
///   OuterMark: outer
struct OpConfig {
  std::vector<std::string> by;
  bool by_lambda = false;
  std::vector<AggSpec> aggs;
  std::vector<GroupingMember> sets;
  std::optional<std::vector<JoinPair>> on;
  std::vector<std::string> outer;

  friend bool operator==(const OpConfig&, const OpConfig&) = default;
};

struct Expr {
  struct Lit {
    Value value;
  };
  /// Catalog or session name, with dot-sugar steps: Ref([DB, customers]).
  struct Ref {
    std::vector<std::string> path;
  };
  /// A lambda-bound parameter.
  struct Param {
    std::string name;
  };
  struct Apply {
    ExprPtr fn;
    std::vector<ExprPtr> args;
  };
  struct Lambda {
    std::vector<std::string> params;
    ExprPtr body;
  };
  struct Binary {
    BinaryOp op;
    ExprPtr lhs;
    ExprPtr rhs;
  };
  struct Not {
    ExprPtr operand;
  };
  struct In {
    ExprPtr needle;
    ExprPtr haystack;
  };
  /// {"name": e, ...}: an extensional function over text inputs.
  struct Record {
    std::vector<std::pair<std::string, ExprPtr>> fields;
  };
  /// [e, ...]: a finite set value.
  struct SetLit {
    std::vector<ExprPtr> items;
  };
  /// Operator node. Filter/Group(by lambda) carry the lambda as inputs[0].
  struct Op {
    OperatorKind kind;
    OpConfig config;
    std::vector<ExprPtr> inputs;
  };

  std::variant<Lit, Ref, Param, Apply, Lambda, Binary, Not, In, Record, SetLit, Op> node;

  template <typename T>
  const T* as() const {
    return std::get_if<T>(&node);
  }
};

// Builders.
ExprPtr lit(Value v);
ExprPtr ref(std::vector<std::string> path);
ExprPtr param(std::string name);
ExprPtr call(ExprPtr fn, std::vector<ExprPtr> args);
ExprPtr lambda(std::vector<std::string> params, ExprPtr body);
ExprPtr binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs);
ExprPtr not_(ExprPtr operand);
ExprPtr in(ExprPtr needle, ExprPtr haystack);
ExprPtr record(std::vector<std::pair<std::string, ExprPtr>> fields);
ExprPtr set_lit(std::vector<ExprPtr> items);
ExprPtr op(OperatorKind kind, OpConfig config, std::vector<ExprPtr> inputs);
/// p("attr") for a lambda parameter p.
ExprPtr attr(const std::string& param_name, const std::string& attribute);

/// Structural comparison (total order) and equality.
int compare(const Expr& a, const Expr& b);
bool operator==(const Expr& a, const Expr& b);
bool same(const ExprPtr& a, const ExprPtr& b);

/// Head names of every Ref in the tree (the names resolved against session
/// bindings and the catalog).
std::set<std::string> free_names(const Expr& e);

/// Names of Param nodes not bound by an enclosing lambda inside `e`.
std::set<std::string> free_params(const Expr& e);

/// Replaces free Param(name) occurrences by `replacement`. Lambdas that would
/// capture a free parameter of the replacement are renamed.
ExprPtr substitute(const ExprPtr& e, const std::string& name, const ExprPtr& replacement);

/// Number of nodes, for generators and budgets.
size_t node_count(const Expr& e);

}  // namespace fql
