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

#include <cmath>
#include <cstdio>
#include <functional>

#include "fql/error.hpp"
#include "fql/eval.hpp"
#include "fql/optimizer.hpp"
#include "fql/syntax.hpp"

namespace fql::optimizer {

namespace {

using I128 = __int128;
constexpr I128 kIntMax = INT64_MAX;

std::vector<ExprPtr> children(const Expr& e) {
  return std::visit(
      [](const auto& x) -> std::vector<ExprPtr> {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Expr::Apply>) {
          std::vector<ExprPtr> out{x.fn};
          out.insert(out.end(), x.args.begin(), x.args.end());
          return out;
        } else if constexpr (std::is_same_v<T, Expr::Lambda>) {
          return {x.body};
        } else if constexpr (std::is_same_v<T, Expr::Binary>) {
          return {x.lhs, x.rhs};
        } else if constexpr (std::is_same_v<T, Expr::Not>) {
          return {x.operand};
        } else if constexpr (std::is_same_v<T, Expr::In>) {
          return {x.needle, x.haystack};
        } else if constexpr (std::is_same_v<T, Expr::Record>) {
          std::vector<ExprPtr> out;
          for (const auto& f : x.fields) out.push_back(f.second);
          return out;
        } else if constexpr (std::is_same_v<T, Expr::SetLit>) {
          return x.items;
        } else if constexpr (std::is_same_v<T, Expr::Op>) {
          return x.inputs;
        } else {
          return {};
        }
      },
      e.node);
}

ExprPtr with_children(const Expr& e, std::vector<ExprPtr> c) {
  return std::visit(
      [&](const auto& x) -> ExprPtr {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Expr::Apply>) {
          return call(c[0], std::vector<ExprPtr>(c.begin() + 1, c.end()));
        } else if constexpr (std::is_same_v<T, Expr::Lambda>) {
          return lambda(x.params, c[0]);
        } else if constexpr (std::is_same_v<T, Expr::Binary>) {
          return binary(x.op, c[0], c[1]);
        } else if constexpr (std::is_same_v<T, Expr::Not>) {
          return not_(c[0]);
        } else if constexpr (std::is_same_v<T, Expr::In>) {
          return in(c[0], c[1]);
        } else if constexpr (std::is_same_v<T, Expr::Record>) {
          auto fields = x.fields;
          for (size_t i = 0; i < fields.size(); ++i) fields[i].second = c[i];
          return record(std::move(fields));
        } else if constexpr (std::is_same_v<T, Expr::SetLit>) {
          return set_lit(std::move(c));
        } else if constexpr (std::is_same_v<T, Expr::Op>) {
          return op(x.kind, x.config, std::move(c));
        } else {
          return std::make_shared<const Expr>(e);
        }
      },
      e.node);
}

// ---------------------------------------------------------------------------
// Raise-free analysis
// ---------------------------------------------------------------------------

/// Static type of an expression that is known not to raise.
struct Type {
  enum Kind { Unknown, Int, Float, Number, Text, Bool, Set, Row, Kv };
  Kind kind = Unknown;
  I128 bound = 0;  // magnitude bound for Int and Number
  const RelationSchema* row = nullptr;
};

using Scope = std::map<std::string, Type>;

bool numeric(Type::Kind k) { return k == Type::Int || k == Type::Float || k == Type::Number; }

Type from_attr(const AttrInfo& a) {
  switch (a.kind) {
    case AttrInfo::Kind::Int: return {Type::Int, static_cast<I128>(a.max_abs), nullptr};
    case AttrInfo::Kind::Float: return {Type::Float, 0, nullptr};
    case AttrInfo::Kind::Number: return {Type::Number, static_cast<I128>(a.max_abs), nullptr};
    case AttrInfo::Kind::Text: return {Type::Text, 0, nullptr};
    case AttrInfo::Kind::Bool: return {Type::Bool, 0, nullptr};
    case AttrInfo::Kind::Other: break;
  }
  return {};
}

Type of_value(const Value& v) {
  switch (v.type()) {
    case ValueType::Int: {
      I128 x = v.as_int();
      return {Type::Int, x < 0 ? -x : x, nullptr};
    }
    case ValueType::Float: return {Type::Float, 0, nullptr};
    case ValueType::Text: return {Type::Text, 0, nullptr};
    case ValueType::Bool: return {Type::Bool, 0, nullptr};
    case ValueType::Set: return {Type::Set, 0, nullptr};
    default: return {};
  }
}

bool nonzero_number(const Expr& e) {
  auto* l = e.as<Expr::Lit>();
  return l && l->value.is_numeric() && l->value.as_number() != 0.0;
}

/// The type of `e` if evaluating it under `scope` can never raise.
std::optional<Type> analyze(const Expr& e, const Scope& scope) {
  if (auto* l = e.as<Expr::Lit>()) return of_value(l->value);
  if (auto* p = e.as<Expr::Param>()) {
    auto it = scope.find(p->name);
    if (it == scope.end()) return std::nullopt;
    return it->second;
  }
  if (e.as<Expr::Lambda>()) return Type{};
  if (auto* a = e.as<Expr::Apply>()) {
    if (a->args.size() != 1) return std::nullopt;
    auto* p = a->fn->as<Expr::Param>();
    auto* l = a->args[0]->as<Expr::Lit>();
    if (!p || !l) return std::nullopt;
    auto it = scope.find(p->name);
    if (it == scope.end()) return std::nullopt;
    const Type& t = it->second;
    if (t.kind == Type::Row && l->value.is_text()) {
      auto at = t.row->attrs.find(l->value.as_text());
      if (at != t.row->attrs.end()) return from_attr(at->second);
    }
    if (t.kind == Type::Kv) {
      const Value& k = l->value;
      if ((k.is_int() && (k.as_int() == 0 || k.as_int() == 1)) ||
          (k.is_text() && (k.as_text() == "key" || k.as_text() == "value"))) {
        return Type{};
      }
    }
    return std::nullopt;
  }
  if (auto* b = e.as<Expr::Binary>()) {
    auto l = analyze(*b->lhs, scope);
    if (!l) return std::nullopt;
    auto r = analyze(*b->rhs, scope);
    if (!r) return std::nullopt;
    switch (b->op) {
      case BinaryOp::And:
      case BinaryOp::Or:
        if (l->kind == Type::Bool && r->kind == Type::Bool) return Type{Type::Bool};
        return std::nullopt;
      case BinaryOp::Eq:
      case BinaryOp::Ne:
        return Type{Type::Bool};
      case BinaryOp::Lt:
      case BinaryOp::Le:
      case BinaryOp::Gt:
      case BinaryOp::Ge:
        if ((numeric(l->kind) && numeric(r->kind)) ||
            (l->kind == r->kind && (l->kind == Type::Text || l->kind == Type::Bool))) {
          return Type{Type::Bool};
        }
        return std::nullopt;
      case BinaryOp::Div:
        if (numeric(l->kind) && nonzero_number(*b->rhs)) return Type{Type::Float};
        return std::nullopt;
      case BinaryOp::Add:
        if (l->kind == Type::Text && r->kind == Type::Text) return Type{Type::Text};
        [[fallthrough]];
      case BinaryOp::Sub:
      case BinaryOp::Mul: {
        if (!numeric(l->kind) || !numeric(r->kind)) return std::nullopt;
        if (l->kind == Type::Float || r->kind == Type::Float) return Type{Type::Float};
        I128 bound = b->op == BinaryOp::Mul ? l->bound * r->bound : l->bound + r->bound;
        if (bound > kIntMax) return std::nullopt;
        Type::Kind k = l->kind == Type::Int && r->kind == Type::Int ? Type::Int : Type::Number;
        return Type{k, bound, nullptr};
      }
    }
    return std::nullopt;
  }
  if (auto* n = e.as<Expr::Not>()) {
    auto t = analyze(*n->operand, scope);
    if (t && t->kind == Type::Bool) return t;
    return std::nullopt;
  }
  if (auto* in = e.as<Expr::In>()) {
    if (!analyze(*in->needle, scope)) return std::nullopt;
    auto h = analyze(*in->haystack, scope);
    if (h && h->kind == Type::Set) return Type{Type::Bool};
    return std::nullopt;
  }
  if (auto* s = e.as<Expr::SetLit>()) {
    for (const auto& item : s->items) {
      if (!analyze(*item, scope)) return std::nullopt;
    }
    return Type{Type::Set};
  }
  return std::nullopt;
}

/// True if `e` yields a bool whenever it does not raise.
bool returns_bool(const Expr& e) {
  if (auto* l = e.as<Expr::Lit>()) return l->value.is_bool();
  if (e.as<Expr::Not>() || e.as<Expr::In>()) return true;
  if (auto* b = e.as<Expr::Binary>()) return !is_arithmetic(b->op);
  return false;
}

bool safe_predicate(const Expr::Lambda& p, const Type& element, const Scope& scope) {
  if (element.kind == Type::Row && element.row->rows == 0) return true;
  Scope inner = scope;
  inner[p.params[0]] = element;
  auto t = analyze(*p.body, inner);
  return t && t->kind == Type::Bool;
}

// ---------------------------------------------------------------------------
// Shapes
// ---------------------------------------------------------------------------

struct Ctx {
  const Schema* schema;
  Scope scope;  // enclosing lambda parameters
};

/// Catalog entry a Ref denotes without evaluating anything that may raise.
std::optional<std::string> entry_ref(const Expr& e, const Ctx& c) {
  auto* r = e.as<Expr::Ref>();
  if (!c.schema || !r) return std::nullopt;
  if (r->path.size() == 1 && c.schema->entries.count(r->path[0])) return r->path[0];
  if (r->path.size() == 2 && r->path[0] == kDatabaseName && c.schema->db_visible &&
      c.schema->stored.count(r->path[1])) {
    auto it = c.schema->entries.find(r->path[1]);
    if (it != c.schema->entries.end()) return r->path[1];
  }
  return std::nullopt;
}

bool unique_fields(const Expr::Record& r) {
  std::set<std::string> seen;
  for (const auto& f : r.fields) {
    if (!seen.insert(f.first).second) return false;
  }
  return true;
}

/// Record whose fields are all stored relations or databases, so the
/// record itself is a database function.
bool database_record(const Expr::Record& r, const Ctx& c) {
  if (r.fields.empty() || !unique_fields(r)) return false;
  for (const auto& [name, v] : r.fields) {
    auto n = entry_ref(*v, c);
    if (!n) return false;
    Level l = c.schema->entries.at(*n);
    if (l != Level::Relation && l != Level::Database) return false;
  }
  return true;
}

/// What a filter over `e` hands to its predicate.
Type element(const Expr& e, const Ctx& c) {
  if (auto n = entry_ref(e, c)) {
    if (auto* rel = c.schema->relation(*n)) return Type{Type::Row, 0, rel};
    if (c.schema->entries.at(*n) == Level::Database) return Type{Type::Kv};
    return {};
  }
  if (auto* r = e.as<Expr::Ref>()) {
    if (c.schema && c.schema->db_visible && r->path.size() == 1 && r->path[0] == kDatabaseName) {
      return Type{Type::Kv};
    }
    return {};
  }
  if (auto* o = e.as<Expr::Op>()) {
    if (o->kind == OperatorKind::Filter) return element(*o->inputs[1], c);
    if (o->kind == OperatorKind::Group || o->kind == OperatorKind::GroupingSets) return Type{Type::Kv};
    return {};
  }
  if (auto* r = e.as<Expr::Record>(); r && database_record(*r, c)) return Type{Type::Kv};
  return {};
}

/// Evaluating `e` cannot raise.
bool inert(const Expr& e, const Ctx& c) {
  if (e.as<Expr::Lit>() || e.as<Expr::Lambda>()) return true;
  if (auto* p = e.as<Expr::Param>()) return c.scope.count(p->name) > 0;
  if (entry_ref(e, c)) return true;
  if (auto* r = e.as<Expr::Ref>()) {
    return c.schema && c.schema->db_visible && r->path.size() == 1 && r->path[0] == kDatabaseName;
  }
  if (auto* s = e.as<Expr::SetLit>()) {
    for (const auto& item : s->items) {
      if (!inert(*item, c)) return false;
    }
    return true;
  }
  return false;
}

/// Attributes read through `t`, provided every use of `t` is t("name").
std::optional<std::set<std::string>> attribute_uses(const Expr& e, const std::string& t) {
  std::set<std::string> out;
  bool ok = true;
  std::function<void(const Expr&)> walk = [&](const Expr& x) {
    if (!ok) return;
    if (auto* a = x.as<Expr::Apply>(); a && a->args.size() == 1) {
      auto* p = a->fn->as<Expr::Param>();
      auto* l = a->args[0]->as<Expr::Lit>();
      if (p && p->name == t) {
        if (l && l->value.is_text()) {
          out.insert(l->value.as_text());
        } else {
          ok = false;
        }
        return;
      }
    }
    if (auto* p = x.as<Expr::Param>()) {
      if (p->name == t) ok = false;
      return;
    }
    if (auto* l = x.as<Expr::Lambda>()) {
      for (const auto& n : l->params) {
        if (n == t) return;
      }
    }
    for (const auto& child : children(x)) walk(*child);
  };
  walk(e);
  if (!ok) return std::nullopt;
  return out;
}


// ---------------------------------------------------------------------------
// Rules
// ---------------------------------------------------------------------------

const Expr::Op* as_op(const ExprPtr& e, OperatorKind kind) {
  auto* o = e->as<Expr::Op>();
  return o && o->kind == kind ? o : nullptr;
}

const Expr::Lambda* unary_lambda(const ExprPtr& e) {
  auto* l = e->as<Expr::Lambda>();
  return l && l->params.size() == 1 ? l : nullptr;
}

ExprPtr fuse_filters(const ExprPtr& e, const Ctx& c) {
  auto* outer = as_op(e, OperatorKind::Filter);
  if (!outer) return nullptr;
  auto* inner = as_op(outer->inputs[1], OperatorKind::Filter);
  if (!inner) return nullptr;
  auto* p = unary_lambda(outer->inputs[0]);
  auto* q = unary_lambda(inner->inputs[0]);
  if (!p || !q || !returns_bool(*q->body)) return nullptr;
  if (!safe_predicate(*p, element(*inner->inputs[1], c), c.scope)) return nullptr;

  std::set<std::string> avoid = free_params(*outer->inputs[0]);
  for (const auto& n : free_params(*inner->inputs[0])) avoid.insert(n);
  for (const auto& n : free_names(*p->body)) avoid.insert(n);
  for (const auto& n : free_names(*q->body)) avoid.insert(n);
  std::string t = q->params[0];
  for (int i = 1; avoid.count(t); ++i) t = "t" + std::to_string(i);
  ExprPtr qb = substitute(q->body, q->params[0], param(t));
  ExprPtr pb = substitute(p->body, p->params[0], param(t));
  return op(OperatorKind::Filter, outer->config,
            {lambda({t}, binary(BinaryOp::And, qb, pb)), inner->inputs[1]});
}

ExprPtr fuse_group_aggregate(const ExprPtr& e, const Ctx&) {
  auto* agg = as_op(e, OperatorKind::Aggregate);
  if (!agg) return nullptr;
  auto* g = as_op(agg->inputs[0], OperatorKind::Group);
  if (!g) return nullptr;
  OpConfig cfg;
  cfg.by = g->config.by;
  cfg.by_lambda = g->config.by_lambda;
  cfg.aggs = agg->config.aggs;
  return op(OperatorKind::GroupAndAggregate, cfg, g->inputs);
}

bool spec_raise_free(const AggSpec& s, const RelationSchema& rel) {
  if (s.kind == AggKind::Count) return true;
  auto it = rel.attrs.find(s.attribute);
  if (it == rel.attrs.end()) return false;
  const AttrInfo& a = it->second;
  switch (s.kind) {
    case AggKind::Sum:
      if (a.kind == AttrInfo::Kind::Float) return true;
      if (a.kind != AttrInfo::Kind::Int && a.kind != AttrInfo::Kind::Number) return false;
      return static_cast<I128>(a.max_abs) * static_cast<I128>(rel.rows) <= kIntMax;
    case AggKind::Avg:
      return a.kind == AttrInfo::Kind::Int || a.kind == AttrInfo::Kind::Float ||
             a.kind == AttrInfo::Kind::Number;
    default:
      return a.kind != AttrInfo::Kind::Other;
  }
}

/// filter(p, group_and_aggregate(by, specs, X)) with p reading only `by`
/// attributes keeps whole groups, so it can run on X instead.
ExprPtr push_filter_below_aggregate(const ExprPtr& e, const Ctx& c) {
  auto* f = as_op(e, OperatorKind::Filter);
  if (!f) return nullptr;
  auto* ga = as_op(f->inputs[1], OperatorKind::GroupAndAggregate);
  if (!ga || ga->config.by_lambda || ga->config.by.empty()) return nullptr;
  auto* p = unary_lambda(f->inputs[0]);
  if (!p) return nullptr;
  auto used = attribute_uses(*p->body, p->params[0]);
  if (!used) return nullptr;
  std::set<std::string> by(ga->config.by.begin(), ga->config.by.end());
  for (const auto& a : *used) {
    if (!by.count(a)) return nullptr;
  }
  const ExprPtr& x = ga->inputs[0];
  Type el = element(*x, c);
  if (el.kind != Type::Row) return nullptr;
  const RelationSchema& rel = *el.row;
  if (rel.rows > 0) {
    for (const auto& b : ga->config.by) {
      if (!rel.attrs.count(b)) return nullptr;
    }
    for (const auto& s : ga->config.aggs) {
      if (!spec_raise_free(s, rel)) return nullptr;
    }
    if (!safe_predicate(*p, el, c.scope)) return nullptr;
  }
  return op(OperatorKind::GroupAndAggregate, ga->config,
            {op(OperatorKind::Filter, f->config, {f->inputs[0], x})});
}

/// Names a join of `members` may compare on member `m`.
std::vector<std::string> endpoint_names(const std::string& m, const OpConfig& cfg,
                                        const std::set<std::string>& members, const Schema& s) {
  std::vector<std::string> out;
  if (cfg.on) {
    for (const auto& pair : *cfg.on) {
      if (pair.left.relation == m) out.push_back(pair.left.name);
      if (pair.right.relation == m) out.push_back(pair.right.name);
    }
    return out;
  }
  for (const auto& rel : s.relationships) {
    if (!members.count(rel.function)) continue;
    for (const auto& [name, attr] : rel.participants) {
      if (name == m) out.push_back(attr);
    }
  }
  return out;
}

/// filter(p, join({..., m: R, ...})) with p reading only attributes that
/// come from m alone: the filter can run on R before the join.
ExprPtr push_filter_into_join(const ExprPtr& e, const Ctx& c) {
  if (!c.schema) return nullptr;
  auto* f = as_op(e, OperatorKind::Filter);
  if (!f) return nullptr;
  auto* j = as_op(f->inputs[1], OperatorKind::Join);
  if (!j) return nullptr;
  auto* rec = j->inputs[0]->as<Expr::Record>();
  if (!rec || rec->fields.empty() || !unique_fields(*rec)) return nullptr;
  auto* p = unary_lambda(f->inputs[0]);
  if (!p) return nullptr;
  auto used = attribute_uses(*p->body, p->params[0]);
  if (!used || used->empty()) return nullptr;

  std::vector<const RelationSchema*> rels;
  std::set<std::string> names;
  for (const auto& [name, v] : rec->fields) {
    Type el = element(*v, c);
    if (el.kind != Type::Row) return nullptr;
    for (const auto& a : el.row->all_attrs) {
      if (a.find('.') != std::string::npos) return nullptr;
    }
    rels.push_back(el.row);
    names.insert(name);
  }
  std::optional<size_t> owner;
  for (const auto& a : *used) {
    for (size_t i = 0; i < rels.size(); ++i) {
      if (!rels[i]->all_attrs.count(a)) continue;
      if (owner && *owner != i) return nullptr;
      owner = i;
    }
    if (!owner) return nullptr;
    for (size_t i = 0; i < rels.size(); ++i) {
      if (i != *owner && rels[i]->all_attrs.count(a)) return nullptr;
    }
  }
  const RelationSchema& m = *rels[*owner];
  const std::string& m_name = rec->fields[*owner].first;
  if (!m.uniform) return nullptr;
  for (const auto& a : *used) {
    if (!m.attrs.count(a)) return nullptr;
  }
  for (const auto& n : endpoint_names(m_name, j->config, names, *c.schema)) {
    bool key = std::find(m.key_params.begin(), m.key_params.end(), n) != m.key_params.end();
    if (!key && !m.attrs.count(n)) return nullptr;
  }
  if (!safe_predicate(*p, Type{Type::Row, 0, &m}, c.scope)) return nullptr;

  auto fields = rec->fields;
  fields[*owner].second = op(OperatorKind::Filter, f->config, {f->inputs[0], fields[*owner].second});
  return op(OperatorKind::Join, j->config, {record(std::move(fields))});
}

/// fn(kv) => kv[0] in [lits]: the literal names, or nullopt.
std::optional<std::vector<Value>> name_selection(const ExprPtr& pred) {
  auto* l = unary_lambda(pred);
  if (!l) return std::nullopt;
  auto* in_e = l->body->as<Expr::In>();
  if (!in_e) return std::nullopt;
  auto* a = in_e->needle->as<Expr::Apply>();
  if (!a || a->args.size() != 1) return std::nullopt;
  auto* p = a->fn->as<Expr::Param>();
  auto* k = a->args[0]->as<Expr::Lit>();
  if (!p || p->name != l->params[0] || !k) return std::nullopt;
  bool key = (k->value.is_int() && k->value.as_int() == 0) ||
             (k->value.is_text() && k->value.as_text() == "key");
  if (!key) return std::nullopt;
  std::vector<Value> out;
  if (auto* s = in_e->haystack->as<Expr::SetLit>()) {
    for (const auto& item : s->items) {
      auto* li = item->as<Expr::Lit>();
      if (!li) return std::nullopt;
      out.push_back(li->value);
    }
    return out;
  }
  if (auto* li = in_e->haystack->as<Expr::Lit>(); li && li->value.is_set()) {
    return std::vector<Value>(li->value.as_set().begin(), li->value.as_set().end());
  }
  return std::nullopt;
}

bool selected(const std::string& name, const std::vector<Value>& names) {
  for (const auto& v : names) {
    if (scalar::loose_equal(Value(name), v)) return true;
  }
  return false;
}

ExprPtr drop_unreachable_members(const ExprPtr& e, const Ctx& c) {
  // {a: x, b: y}("a") -> x
  if (auto* a = e->as<Expr::Apply>(); a && a->args.size() == 1) {
    auto* rec = a->fn->as<Expr::Record>();
    auto* l = a->args[0]->as<Expr::Lit>();
    if (rec && l && l->value.is_text() && unique_fields(*rec)) {
      ExprPtr chosen;
      for (const auto& [name, v] : rec->fields) {
        if (name == l->value.as_text()) {
          chosen = v;
        } else if (!inert(*v, c)) {
          return nullptr;
        }
      }
      return chosen;
    }
    return nullptr;
  }
  // filter(fn(kv) => kv[0] in [...], {a: R, b: S}) -> {a: R}
  if (auto* f = as_op(e, OperatorKind::Filter)) {
    auto* rec = f->inputs[1]->as<Expr::Record>();
    if (!rec || !database_record(*rec, c)) return nullptr;
    auto names = name_selection(f->inputs[0]);
    if (!names) return nullptr;
    std::vector<std::pair<std::string, ExprPtr>> kept;
    for (const auto& field : rec->fields) {
      if (selected(field.first, *names)) kept.push_back(field);
    }
    if (kept.empty()) return nullptr;
    return record(std::move(kept));
  }
  // join(filter(fn(kv) => kv[0] in [...], DB)) -> join({a: DB.a, ...})
  if (auto* j = as_op(e, OperatorKind::Join)) {
    if (!c.schema || !c.schema->db_visible || c.schema->dynamic_views) return nullptr;
    auto* f = as_op(j->inputs[0], OperatorKind::Filter);
    if (!f) return nullptr;
    auto* r = f->inputs[1]->as<Expr::Ref>();
    if (!r || r->path.size() != 1 || r->path[0] != kDatabaseName) return nullptr;
    auto names = name_selection(f->inputs[0]);
    if (!names) return nullptr;
    std::vector<std::pair<std::string, ExprPtr>> fields;
    for (const auto& n : c.schema->stored) {
      if (selected(n, *names)) fields.emplace_back(n, ref({kDatabaseName, n}));
    }
    return op(OperatorKind::Join, j->config, {record(std::move(fields))});
  }
  return nullptr;
}

ExprPtr constant_fold(const ExprPtr& e, const Ctx&) {
  if (auto* n = e->as<Expr::Not>()) {
    auto* l = n->operand->as<Expr::Lit>();
    if (l && l->value.is_bool()) return lit(Value(!l->value.as_bool()));
    return nullptr;
  }
  auto* b = e->as<Expr::Binary>();
  if (!b) return nullptr;
  auto* l = b->lhs->as<Expr::Lit>();
  if (!l) return nullptr;
  if (b->op == BinaryOp::And || b->op == BinaryOp::Or) {
    if (!l->value.is_bool()) return nullptr;
    bool short_circuit = b->op == BinaryOp::And ? !l->value.as_bool() : l->value.as_bool();
    if (short_circuit) return lit(l->value);
    auto* r = b->rhs->as<Expr::Lit>();
    if (r && r->value.is_bool()) return lit(r->value);
    return nullptr;
  }
  auto* r = b->rhs->as<Expr::Lit>();
  if (!r) return nullptr;
  try {
    Value v = is_arithmetic(b->op) ? scalar::arithmetic(b->op, l->value, r->value)
                                   : Value(scalar::comparison(b->op, l->value, r->value));
    if (v.is_float() && !std::isfinite(v.as_float())) return nullptr;
    return lit(v);
  } catch (const Error&) {
    return nullptr;
  }
}

struct Rule {
  const char* name;
  ExprPtr (*apply)(const ExprPtr&, const Ctx&);
};

constexpr Rule kRules[] = {
    {"constant-fold", constant_fold},
    {"drop-unreachable-members", drop_unreachable_members},
    {"fuse-group-aggregate", fuse_group_aggregate},
    {"fuse-filters", fuse_filters},
    {"push-filter-below-aggregate", push_filter_below_aggregate},
    {"push-filter-into-join", push_filter_into_join},
};

/// One rule application at the first node (pre-order) where any applies.
ExprPtr step(const ExprPtr& e, Ctx& c, const char*& fired) {
  for (const auto& rule : kRules) {
    if (ExprPtr out = rule.apply(e, c)) {
      fired = rule.name;
      return out;
    }
  }
  std::vector<std::string> added;
  if (auto* l = e->as<Expr::Lambda>()) {
    for (const auto& p : l->params) {
      if (!c.scope.count(p)) added.push_back(p);
    }
  }
  std::map<std::string, Type> saved;
  if (auto* l = e->as<Expr::Lambda>()) {
    for (const auto& p : l->params) {
      if (auto it = c.scope.find(p); it != c.scope.end()) saved.insert(*it);
      c.scope[p] = Type{};
    }
  }
  auto kids = children(*e);
  ExprPtr result;
  for (size_t i = 0; i < kids.size() && !result; ++i) {
    if (ExprPtr out = step(kids[i], c, fired)) {
      kids[i] = out;
      result = with_children(*e, std::move(kids));
    }
  }
  for (const auto& p : added) c.scope.erase(p);
  for (const auto& [k, v] : saved) c.scope[k] = v;
  return result;
}

}  // namespace

uint64_t digest(const Expr& e) {
  uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : syntax::print(e)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

Plan rewrite(const ExprPtr& e, const Schema* schema) {
  Plan plan{e, {}, false};
  Ctx c{schema, {}};
  for (size_t i = 0; i <= kRewriteBudget; ++i) {
    const char* fired = nullptr;
    ExprPtr next = step(plan.expr, c, fired);
    if (!next) break;
    if (i == kRewriteBudget) {
      plan.budget_exceeded = true;
      break;
    }
    plan.trace.push_back(Step{fired, digest(*plan.expr), digest(*next)});
    plan.expr = next;
  }
  return plan;
}

std::string explain(const Plan& plan) {
  std::string out = "plan: " + syntax::print(*plan.expr) + "\n";
  if (plan.trace.empty()) return out + "no rewrites\n";
  char buf[64];
  for (size_t i = 0; i < plan.trace.size(); ++i) {
    const Step& s = plan.trace[i];
    std::snprintf(buf, sizeof(buf), " %016llx -> %016llx\n",
                  static_cast<unsigned long long>(s.before), static_cast<unsigned long long>(s.after));
    out += std::to_string(i + 1) + ". " + s.rule + buf;
  }
  if (plan.budget_exceeded) out += "rewrite budget exceeded\n";
  return out;
}

}  // namespace fql::optimizer
