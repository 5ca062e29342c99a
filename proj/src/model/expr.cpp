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

#include "fql/expr.hpp"

#include <algorithm>

#include "fql/error.hpp"

namespace fql {

const char* binary_op_symbol(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::Eq: return "==";
    case BinaryOp::Ne: return "!=";
    case BinaryOp::And: return "and";
    case BinaryOp::Or: return "or";
  }
  return "?";
}

bool is_comparison(BinaryOp op) {
  switch (op) {
    case BinaryOp::Lt:
    case BinaryOp::Le:
    case BinaryOp::Gt:
    case BinaryOp::Ge:
    case BinaryOp::Eq:
    case BinaryOp::Ne:
      return true;
    default:
      return false;
  }
}

bool is_arithmetic(BinaryOp op) {
  return op == BinaryOp::Add || op == BinaryOp::Sub || op == BinaryOp::Mul || op == BinaryOp::Div;
}

namespace {

struct OperatorNameEntry {
  OperatorKind kind;
  const char* name;
};

constexpr OperatorNameEntry kOperatorNames[] = {
    {OperatorKind::Filter, "filter"},
    {OperatorKind::Group, "group"},
    {OperatorKind::Aggregate, "aggregate"},
    {OperatorKind::GroupAndAggregate, "group_and_aggregate"},
    {OperatorKind::GroupingSets, "grouping_sets"},
    {OperatorKind::Join, "join"},
    {OperatorKind::OuterMark, "subdatabase"},
    {OperatorKind::ReduceDB, "reduce_DB"},
    {OperatorKind::Union, "union"},
    {OperatorKind::Intersect, "intersect"},
    {OperatorKind::Minus, "minus"},
    {OperatorKind::Difference, "difference"},
    {OperatorKind::DeepCopy, "deep_copy"},
    {OperatorKind::Copy, "copy"},
};

}  // namespace

const char* operator_name(OperatorKind kind) {
  for (const auto& e : kOperatorNames) {
    if (e.kind == kind) return e.name;
  }
  return "?";
}

std::optional<OperatorKind> operator_from_name(std::string_view name) {
  for (const auto& e : kOperatorNames) {
    if (name == e.name) return e.kind;
  }
  return std::nullopt;
}

const char* agg_name(AggKind kind) {
  switch (kind) {
    case AggKind::Count: return "Count";
    case AggKind::Sum: return "Sum";
    case AggKind::Min: return "Min";
    case AggKind::Max: return "Max";
    case AggKind::Avg: return "Avg";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

namespace {
template <typename T>
ExprPtr make(T node) {
  return std::make_shared<const Expr>(Expr{std::move(node)});
}
}  // namespace

ExprPtr lit(Value v) { return make(Expr::Lit{std::move(v)}); }
ExprPtr ref(std::vector<std::string> path) { return make(Expr::Ref{std::move(path)}); }
ExprPtr param(std::string name) { return make(Expr::Param{std::move(name)}); }
ExprPtr call(ExprPtr fn, std::vector<ExprPtr> args) {
  return make(Expr::Apply{std::move(fn), std::move(args)});
}
ExprPtr lambda(std::vector<std::string> params, ExprPtr body) {
  return make(Expr::Lambda{std::move(params), std::move(body)});
}
ExprPtr binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs) {
  return make(Expr::Binary{op, std::move(lhs), std::move(rhs)});
}
ExprPtr not_(ExprPtr operand) { return make(Expr::Not{std::move(operand)}); }
ExprPtr in(ExprPtr needle, ExprPtr haystack) {
  return make(Expr::In{std::move(needle), std::move(haystack)});
}
ExprPtr record(std::vector<std::pair<std::string, ExprPtr>> fields) {
  return make(Expr::Record{std::move(fields)});
}
ExprPtr set_lit(std::vector<ExprPtr> items) { return make(Expr::SetLit{std::move(items)}); }
ExprPtr op(OperatorKind kind, OpConfig config, std::vector<ExprPtr> inputs) {
  return make(Expr::Op{kind, std::move(config), std::move(inputs)});
}
ExprPtr attr(const std::string& param_name, const std::string& attribute) {
  return call(param(param_name), {lit(Value(attribute))});
}

// ---------------------------------------------------------------------------
// Comparison
// ---------------------------------------------------------------------------

namespace {

template <typename T>
int three_way(const T& a, const T& b) {
  if (a < b) return -1;
  if (b < a) return 1;
  return 0;
}

int cmp_str(const std::string& a, const std::string& b) {
  int c = a.compare(b);
  return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

int cmp_strs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  size_t n = std::min(a.size(), b.size());
  for (size_t i = 0; i < n; ++i) {
    if (int c = cmp_str(a[i], b[i])) return c;
  }
  return three_way(a.size(), b.size());
}

int cmp_exprs(const std::vector<ExprPtr>& a, const std::vector<ExprPtr>& b) {
  size_t n = std::min(a.size(), b.size());
  for (size_t i = 0; i < n; ++i) {
    if (int c = compare(*a[i], *b[i])) return c;
  }
  return three_way(a.size(), b.size());
}

int cmp_aggs(const std::vector<AggSpec>& a, const std::vector<AggSpec>& b) {
  size_t n = std::min(a.size(), b.size());
  for (size_t i = 0; i < n; ++i) {
    if (int c = cmp_str(a[i].out_name, b[i].out_name)) return c;
    if (int c = three_way(static_cast<int>(a[i].kind), static_cast<int>(b[i].kind))) return c;
    if (int c = cmp_str(a[i].attribute, b[i].attribute)) return c;
  }
  return three_way(a.size(), b.size());
}

int cmp_endpoint(const JoinEndpoint& a, const JoinEndpoint& b) {
  if (int c = cmp_str(a.relation, b.relation)) return c;
  return cmp_str(a.name, b.name);
}

int cmp_config(const OpConfig& a, const OpConfig& b) {
  if (int c = cmp_strs(a.by, b.by)) return c;
  if (int c = three_way(a.by_lambda, b.by_lambda)) return c;
  if (int c = cmp_aggs(a.aggs, b.aggs)) return c;
  if (int c = three_way(a.sets.size(), b.sets.size())) return c;
  for (size_t i = 0; i < a.sets.size(); ++i) {
    if (int c = cmp_strs(a.sets[i].by, b.sets[i].by)) return c;
    if (int c = cmp_aggs(a.sets[i].aggs, b.sets[i].aggs)) return c;
    if (int c = cmp_str(a.sets[i].name, b.sets[i].name)) return c;
  }
  if (int c = three_way(a.on.has_value(), b.on.has_value())) return c;
  if (a.on) {
    if (int c = three_way(a.on->size(), b.on->size())) return c;
    for (size_t i = 0; i < a.on->size(); ++i) {
      if (int c = cmp_endpoint((*a.on)[i].left, (*b.on)[i].left)) return c;
      if (int c = cmp_endpoint((*a.on)[i].right, (*b.on)[i].right)) return c;
    }
  }
  return cmp_strs(a.outer, b.outer);
}

}  // namespace

int compare(const Expr& a, const Expr& b) {
  if (&a == &b) return 0;
  if (a.node.index() != b.node.index()) return three_way(a.node.index(), b.node.index());
  return std::visit(
      [&](const auto& x) -> int {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, Expr::Lit>) {
          return compare(x.value, y.value);
        } else if constexpr (std::is_same_v<T, Expr::Ref>) {
          return cmp_strs(x.path, y.path);
        } else if constexpr (std::is_same_v<T, Expr::Param>) {
          return cmp_str(x.name, y.name);
        } else if constexpr (std::is_same_v<T, Expr::Apply>) {
          if (int c = compare(*x.fn, *y.fn)) return c;
          return cmp_exprs(x.args, y.args);
        } else if constexpr (std::is_same_v<T, Expr::Lambda>) {
          if (int c = cmp_strs(x.params, y.params)) return c;
          return compare(*x.body, *y.body);
        } else if constexpr (std::is_same_v<T, Expr::Binary>) {
          if (int c = three_way(static_cast<int>(x.op), static_cast<int>(y.op))) return c;
          if (int c = compare(*x.lhs, *y.lhs)) return c;
          return compare(*x.rhs, *y.rhs);
        } else if constexpr (std::is_same_v<T, Expr::Not>) {
          return compare(*x.operand, *y.operand);
        } else if constexpr (std::is_same_v<T, Expr::In>) {
          if (int c = compare(*x.needle, *y.needle)) return c;
          return compare(*x.haystack, *y.haystack);
        } else if constexpr (std::is_same_v<T, Expr::Record>) {
          if (int c = three_way(x.fields.size(), y.fields.size())) return c;
          for (size_t i = 0; i < x.fields.size(); ++i) {
            if (int c = cmp_str(x.fields[i].first, y.fields[i].first)) return c;
            if (int c = compare(*x.fields[i].second, *y.fields[i].second)) return c;
          }
          return 0;
        } else if constexpr (std::is_same_v<T, Expr::SetLit>) {
          return cmp_exprs(x.items, y.items);
        } else {
          if (int c = three_way(static_cast<int>(x.kind), static_cast<int>(y.kind))) return c;
          if (int c = cmp_config(x.config, y.config)) return c;
          return cmp_exprs(x.inputs, y.inputs);
        }
      },
      a.node);
}

bool operator==(const Expr& a, const Expr& b) { return compare(a, b) == 0; }

bool same(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}

// ---------------------------------------------------------------------------
// Traversal
// ---------------------------------------------------------------------------

namespace {

template <typename F>
void for_each_child(const Expr& e, F&& f) {
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Expr::Apply>) {
          f(*x.fn);
          for (const auto& a : x.args) f(*a);
        } else if constexpr (std::is_same_v<T, Expr::Lambda>) {
          f(*x.body);
        } else if constexpr (std::is_same_v<T, Expr::Binary>) {
          f(*x.lhs);
          f(*x.rhs);
        } else if constexpr (std::is_same_v<T, Expr::Not>) {
          f(*x.operand);
        } else if constexpr (std::is_same_v<T, Expr::In>) {
          f(*x.needle);
          f(*x.haystack);
        } else if constexpr (std::is_same_v<T, Expr::Record>) {
          for (const auto& [n, v] : x.fields) f(*v);
        } else if constexpr (std::is_same_v<T, Expr::SetLit>) {
          for (const auto& v : x.items) f(*v);
        } else if constexpr (std::is_same_v<T, Expr::Op>) {
          for (const auto& v : x.inputs) f(*v);
        }
      },
      e.node);
}

void collect_free_names(const Expr& e, std::set<std::string>& out) {
  if (auto* r = e.as<Expr::Ref>()) {
    if (!r->path.empty()) out.insert(r->path.front());
    return;
  }
  for_each_child(e, [&](const Expr& c) { collect_free_names(c, out); });
}

void collect_free_params(const Expr& e, std::set<std::string>& bound, std::set<std::string>& out) {
  if (auto* p = e.as<Expr::Param>()) {
    if (!bound.count(p->name)) out.insert(p->name);
    return;
  }
  if (auto* l = e.as<Expr::Lambda>()) {
    std::vector<std::string> added;
    for (const auto& name : l->params) {
      if (bound.insert(name).second) added.push_back(name);
    }
    collect_free_params(*l->body, bound, out);
    for (const auto& name : added) bound.erase(name);
    return;
  }
  for_each_child(e, [&](const Expr& c) { collect_free_params(c, bound, out); });
}

std::string fresh_name(const std::string& base, const std::set<std::string>& avoid) {
  for (int i = 1;; ++i) {
    std::string candidate = base + std::to_string(i);
    if (!avoid.count(candidate)) return candidate;
  }
}

ExprPtr rebuild_children(const ExprPtr& e, const std::function<ExprPtr(const ExprPtr&)>& f) {
  return std::visit(
      [&](const auto& x) -> ExprPtr {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Expr::Apply>) {
          std::vector<ExprPtr> args;
          for (const auto& a : x.args) args.push_back(f(a));
          return call(f(x.fn), std::move(args));
        } else if constexpr (std::is_same_v<T, Expr::Binary>) {
          return binary(x.op, f(x.lhs), f(x.rhs));
        } else if constexpr (std::is_same_v<T, Expr::Not>) {
          return not_(f(x.operand));
        } else if constexpr (std::is_same_v<T, Expr::In>) {
          return in(f(x.needle), f(x.haystack));
        } else if constexpr (std::is_same_v<T, Expr::Record>) {
          std::vector<std::pair<std::string, ExprPtr>> fields;
          for (const auto& [n, v] : x.fields) fields.emplace_back(n, f(v));
          return record(std::move(fields));
        } else if constexpr (std::is_same_v<T, Expr::SetLit>) {
          std::vector<ExprPtr> items;
          for (const auto& v : x.items) items.push_back(f(v));
          return set_lit(std::move(items));
        } else if constexpr (std::is_same_v<T, Expr::Op>) {
          std::vector<ExprPtr> inputs;
          for (const auto& v : x.inputs) inputs.push_back(f(v));
          return op(x.kind, x.config, std::move(inputs));
        } else {
          return e;
        }
      },
      e->node);
}

}  // namespace

std::set<std::string> free_names(const Expr& e) {
  std::set<std::string> out;
  collect_free_names(e, out);
  return out;
}

std::set<std::string> free_params(const Expr& e) {
  std::set<std::string> bound;
  std::set<std::string> out;
  collect_free_params(e, bound, out);
  return out;
}

ExprPtr substitute(const ExprPtr& e, const std::string& name, const ExprPtr& replacement) {
  if (auto* p = e->as<Expr::Param>()) return p->name == name ? replacement : e;
  if (auto* l = e->as<Expr::Lambda>()) {
    if (std::find(l->params.begin(), l->params.end(), name) != l->params.end()) return e;
    auto repl_free = free_params(*replacement);
    std::vector<std::string> params = l->params;
    ExprPtr body = l->body;
    for (auto& p : params) {
      if (!repl_free.count(p)) continue;
      std::set<std::string> avoid = repl_free;
      auto body_free = free_params(*body);
      avoid.insert(body_free.begin(), body_free.end());
      avoid.insert(params.begin(), params.end());
      std::string renamed = fresh_name(p, avoid);
      body = substitute(body, p, fql::param(renamed));
      p = renamed;
    }
    return lambda(std::move(params), substitute(body, name, replacement));
  }
  return rebuild_children(e, [&](const ExprPtr& c) { return substitute(c, name, replacement); });
}

size_t node_count(const Expr& e) {
  size_t n = 1;
  for_each_child(e, [&](const Expr& c) { n += node_count(c); });
  return n;
}

}  // namespace fql
