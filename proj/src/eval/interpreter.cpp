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

#include "fql/error.hpp"
#include "fql/eval.hpp"
#include "fql/ops.hpp"

namespace fql {

namespace {

int level_rank(const Value& v) {
  if (!v.is_function()) return 0;
  switch (v.as_function()->level) {
    case Level::Tuple: return 1;
    case Level::Relation: return 2;
    case Level::Database: return 3;
    case Level::Generic: return 0;
  }
  return 0;
}

Level record_level(const std::vector<std::pair<Key, Value>>& fields) {
  int lowest = 3;
  for (const auto& [k, v] : fields) lowest = std::min(lowest, level_rank(v));
  if (fields.empty()) lowest = 0;
  switch (lowest) {
    case 0: return Level::Tuple;
    case 1: return Level::Relation;
    default: return Level::Database;
  }
}

const FunctionValue& as_function_input(const Value& v, OperatorKind kind) {
  if (!v.is_function()) {
    fail(ErrorKind::TypeMismatch, std::string(operator_name(kind)) + " expects a function, got " +
                                      type_name(v.type()));
  }
  return *v.as_function();
}

class Evaluation {
 public:
  Evaluation(const Snapshot& snapshot, const Interpreter& self)
      : snapshot_(snapshot), ctx_{snapshot, self} {}

  Value run(const Expr& e, const Bindings& b) {
    return std::visit([&](const auto& node) { return visit(node, b); }, e.node);
  }

 private:
  Value visit(const Expr::Lit& n, const Bindings&) { return n.value; }

  Value visit(const Expr::Param& n, const Bindings& b) {
    auto it = b.find(n.name);
    if (it == b.end()) fail(ErrorKind::NameError, "unbound parameter '" + n.name + "'");
    return it->second;
  }

  Value resolve_head(const std::string& name, const Bindings& b) {
    if (auto it = b.find(name); it != b.end()) return it->second;
    if (name == kDatabaseName) return Value(snapshot_.root());
    if (snapshot_.catalog().has(name)) return apply(*snapshot_.root(), {Value(name)}, ctx_);
    if (auto fn = builtin_function(name)) return *fn;
    fail(ErrorKind::NameError, "unknown name '" + name + "'");
  }

  Value visit(const Expr::Ref& n, const Bindings& b) {
    Value v = resolve_head(n.path.front(), b);
    for (size_t i = 1; i < n.path.size(); ++i) v = apply(v, {Value(n.path[i])}, ctx_);
    return v;
  }

  Value visit(const Expr::Apply& n, const Bindings& b) {
    Value fn = run(*n.fn, b);
    ValueList args;
    args.reserve(n.args.size());
    for (const auto& a : n.args) args.push_back(run(*a, b));
    return apply(fn, args, ctx_);
  }

  Value visit(const Expr::Lambda& n, const Bindings& b) {
    Bindings captured;
    Expr whole{n};
    for (const auto& name : free_params(whole)) {
      if (auto it = b.find(name); it != b.end()) captured.insert(*it);
    }
    for (const auto& name : free_names(*n.body)) {
      if (auto it = b.find(name); it != b.end()) captured.insert(*it);
    }
    ParamSig sig;
    for (const auto& p : n.params) sig.push_back(Param{p, DomainConstraint::any()});
    return Value(make_computed(std::move(sig), DomainConstraint::any(), n.body, std::move(captured)));
  }

  Value visit(const Expr::Binary& n, const Bindings& b) {
    if (n.op == BinaryOp::And || n.op == BinaryOp::Or) {
      Value lhs = run(*n.lhs, b);
      if (!lhs.is_bool()) {
        fail(ErrorKind::TypeMismatch, std::string("'") + binary_op_symbol(n.op) +
                                          "' expects bool operands");
      }
      if (n.op == BinaryOp::And && !lhs.as_bool()) return Value(false);
      if (n.op == BinaryOp::Or && lhs.as_bool()) return Value(true);
      Value rhs = run(*n.rhs, b);
      if (!rhs.is_bool()) {
        fail(ErrorKind::TypeMismatch, std::string("'") + binary_op_symbol(n.op) +
                                          "' expects bool operands");
      }
      return rhs;
    }
    Value lhs = run(*n.lhs, b);
    Value rhs = run(*n.rhs, b);
    if (is_comparison(n.op)) return Value(scalar::comparison(n.op, lhs, rhs));
    return scalar::arithmetic(n.op, lhs, rhs);
  }

  Value visit(const Expr::Not& n, const Bindings& b) {
    Value v = run(*n.operand, b);
    if (!v.is_bool()) fail(ErrorKind::TypeMismatch, "'not' expects a bool operand");
    return Value(!v.as_bool());
  }

  Value visit(const Expr::In& n, const Bindings& b) {
    Value needle = run(*n.needle, b);
    Value hay = run(*n.haystack, b);
    if (hay.is_set()) {
      for (const auto& item : hay.as_set()) {
        if (scalar::loose_equal(needle, item)) return Value(true);
      }
      return Value(false);
    }
    if (hay.is_function()) {
      const FunctionValue& f = *hay.as_function();
      if (f.arity() != 1) fail(ErrorKind::TypeMismatch, "'in' needs a unary function");
      if (!contains(f.sig[0].constraint, needle, &ctx_)) return Value(false);
      if (f.is_extensional()) return Value(f.mappings().count(Key{needle}) > 0);
      try {
        apply(f, {needle}, ctx_);
        return Value(true);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::UndefinedInput) return Value(false);
        throw;
      }
    }
    fail(ErrorKind::TypeMismatch, std::string("'in' is not defined for ") + type_name(hay.type()));
  }

  Value visit(const Expr::Record& n, const Bindings& b) {
    std::vector<std::pair<Key, Value>> fields;
    for (const auto& [name, e] : n.fields) fields.push_back({Key{Value(name)}, run(*e, b)});
    Level level = record_level(fields);
    return Value(make_extensional(text_sig("attr"), DomainConstraint::any(), std::move(fields),
                                  level));
  }

  Value visit(const Expr::SetLit& n, const Bindings& b) {
    ValueList items;
    for (const auto& e : n.items) items.push_back(run(*e, b));
    return Value::set(std::move(items));
  }

  Value visit(const Expr::Op& n, const Bindings& b) {
    const auto& cfg = n.config;
    switch (n.kind) {
      case OperatorKind::Filter: {
        Value pred = run(*n.inputs[0], b);
        Value input = run(*n.inputs[1], b);
        return Value(ops::filter(pred, as_function_input(input, n.kind), ctx_));
      }
      case OperatorKind::Group:
      case OperatorKind::GroupAndAggregate: {
        std::optional<Value> key_fn;
        size_t at = 0;
        if (cfg.by_lambda) key_fn = run(*n.inputs[at++], b);
        Value input = run(*n.inputs[at], b);
        const auto& f = as_function_input(input, n.kind);
        const Value* kf = key_fn ? &*key_fn : nullptr;
        if (n.kind == OperatorKind::Group) return Value(ops::group(cfg.by, kf, f, ctx_));
        return Value(ops::group_and_aggregate(cfg.by, kf, cfg.aggs, f, ctx_));
      }
      case OperatorKind::Aggregate: {
        Value groups = run(*n.inputs[0], b);
        return Value(ops::aggregate(cfg.aggs, as_function_input(groups, n.kind), ctx_));
      }
      case OperatorKind::GroupingSets: {
        Value input = run(*n.inputs[0], b);
        return Value(ops::grouping_sets(cfg.sets, as_function_input(input, n.kind), ctx_));
      }
      case OperatorKind::Join: {
        Value dbf = run(*n.inputs[0], b);
        return Value(
            ops::join(as_function_input(dbf, n.kind), cfg.on, snapshot_.catalog(), ctx_));
      }
      case OperatorKind::OuterMark: {
        Value dbf = run(*n.inputs[0], b);
        return Value(ops::outer_mark(cfg.outer, as_function_input(dbf, n.kind),
                                     snapshot_.catalog(), ctx_));
      }
      case OperatorKind::ReduceDB: {
        Value dbf = run(*n.inputs[0], b);
        return Value(ops::reduce_db(as_function_input(dbf, n.kind), snapshot_.catalog(), ctx_));
      }
      case OperatorKind::Union:
      case OperatorKind::Intersect:
      case OperatorKind::Minus:
      case OperatorKind::Difference: {
        Value lhs = run(*n.inputs[0], b);
        Value rhs = run(*n.inputs[1], b);
        const auto& fa = as_function_input(lhs, n.kind);
        const auto& fb = as_function_input(rhs, n.kind);
        return Value(ops::set_op(n.kind, fa, fb, ctx_));
      }
      case OperatorKind::DeepCopy:
      case OperatorKind::Copy:
        return ops::deep_copy(run(*n.inputs[0], b));
    }
    fail(ErrorKind::EvalError, "unknown operator");
  }

  const Snapshot& snapshot_;
  Context ctx_;
};

}  // namespace

Value Interpreter::evaluate(const Expr& expr, const Bindings& bindings,
                            const Snapshot& snapshot) const {
  Evaluation ev(snapshot, *this);
  return ev.run(expr, bindings);
}

const Interpreter& interpreter() {
  static const Interpreter instance;
  return instance;
}

Value eval(const Expr& e, const Env& env) {
  return interpreter().evaluate(e, env.bindings, *env.snapshot);
}

}  // namespace fql
