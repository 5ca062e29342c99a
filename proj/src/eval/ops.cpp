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

#include "fql/ops.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <set>

#include "fql/error.hpp"

namespace fql::ops {

std::vector<std::pair<Key, Value>> materialize(const FunctionValue& f, const Context& ctx) {
  std::vector<std::pair<Key, Value>> out;
  if (f.is_extensional()) {
    out.assign(f.mappings().begin(), f.mappings().end());
    return out;
  }
  for (auto& k : enumerate_domain(f, &ctx)) {
    Value v = apply(f, k, ctx);
    out.emplace_back(std::move(k), std::move(v));
  }
  return out;
}

namespace {

const FunctionValue& expect_function(const Value& v, const std::string& what) {
  if (!v.is_function()) {
    fail(ErrorKind::TypeMismatch, what + " must be a function, got " + type_name(v.type()));
  }
  return *v.as_function();
}

bool predicate_holds(const Value& pred, const Value& arg, const Context& ctx) {
  Value r = apply(pred, {arg}, ctx);
  if (!r.is_bool()) fail(ErrorKind::PredicateError, "filter predicate returned a non-bool");
  return r.as_bool();
}

void check_unique_names(const std::vector<std::string>& names, const std::string& what) {
  std::set<std::string> seen;
  for (const auto& n : names) {
    if (!seen.insert(n).second) fail(ErrorKind::UniqueViolation, "duplicate " + what + " '" + n + "'");
  }
}

}  // namespace

FunctionRef key_value_pair(const Key& key, const Value& value) {
  Value k = key.size() == 1 ? key[0] : Value::set(key);
  std::vector<std::pair<Key, Value>> m{{{Value(0)}, k},
                                       {{Value(1)}, value},
                                       {{Value("key")}, k},
                                       {{Value("value")}, value}};
  return make_extensional(ParamSig{Param{"i", DomainConstraint::any()}}, DomainConstraint::any(),
                          std::move(m), Level::Generic);
}

FunctionRef filter(const Value& pred, const FunctionValue& input, const Context& ctx) {
  auto rows = materialize(input, ctx);
  Mappings kept;
  for (auto& [k, v] : rows) {
    Value arg = input.level == Level::Database ? Value(key_value_pair(k, v)) : v;
    if (predicate_holds(pred, arg, ctx)) kept.emplace(std::move(k), std::move(v));
  }
  return make_extensional_unchecked(input.sig, input.codomain, std::move(kept), input.level);
}

// ---------------------------------------------------------------------------
// Grouping and aggregation
// ---------------------------------------------------------------------------

namespace {

using Buckets = std::map<Key, Mappings, KeyLess>;

ParamSig group_sig(const std::vector<std::string>& by, const Value* key_fn) {
  ParamSig sig;
  if (key_fn) {
    sig.push_back(Param{"key", DomainConstraint::any()});
  } else {
    for (const auto& b : by) sig.push_back(Param{b, DomainConstraint::any()});
  }
  return sig;
}

Buckets bucket(const std::vector<std::string>& by, const Value* key_fn, const FunctionValue& input,
               const Context& ctx) {
  if (!key_fn) check_unique_names(by, "group attribute");
  auto rows = materialize(input, ctx);
  Buckets out;
  for (auto& [k, v] : rows) {
    Key g;
    if (key_fn) {
      g.push_back(apply(*key_fn, {v}, ctx));
    } else {
      for (const auto& b : by) g.push_back(apply(v, {Value(b)}, ctx));
    }
    out[g].emplace(std::move(k), std::move(v));
  }
  return out;
}

void check_specs(const std::vector<AggSpec>& specs, const ParamSig& key_sig) {
  std::set<std::string> seen;
  for (const auto& p : key_sig) seen.insert(p.name);
  for (const auto& s : specs) {
    if (!seen.insert(s.out_name).second) {
      fail(ErrorKind::UniqueViolation, "aggregate output '" + s.out_name + "' is not unique");
    }
  }
}

int scalar_order(const Value& a, const Value& b) {
  if (a.is_numeric() && b.is_numeric()) {
    if (a.is_int() && b.is_int()) return a.as_int() < b.as_int() ? -1 : (b.as_int() < a.as_int());
    double x = a.as_number(), y = b.as_number();
    return x < y ? -1 : (y < x ? 1 : 0);
  }
  if (a.is_text() && b.is_text()) return a.as_text().compare(b.as_text()) < 0 ? -1 : (a.as_text() == b.as_text() ? 0 : 1);
  if (a.is_bool() && b.is_bool()) return static_cast<int>(a.as_bool()) - static_cast<int>(b.as_bool());
  fail(ErrorKind::TypeMismatch, std::string("cannot order ") + type_name(a.type()) + " and " +
                                    type_name(b.type()) + " in Min/Max");
}

Value fold(const AggSpec& spec, const Mappings& rows, const Context& ctx) {
  if (spec.kind == AggKind::Count) return Value(static_cast<int64_t>(rows.size()));
  ValueList xs;
  xs.reserve(rows.size());
  for (const auto& [k, v] : rows) xs.push_back(apply(v, {Value(spec.attribute)}, ctx));
  switch (spec.kind) {
    case AggKind::Sum:
    case AggKind::Avg: {
      int64_t isum = 0;
      double fsum = 0;
      bool is_float = spec.kind == AggKind::Avg;
      for (const auto& x : xs) {
        if (!x.is_numeric()) {
          fail(ErrorKind::TypeMismatch, std::string(agg_name(spec.kind)) + " over a " +
                                            type_name(x.type()) + " value");
        }
        if (!is_float && x.is_int()) {
          if (__builtin_add_overflow(isum, x.as_int(), &isum)) {
            fail(ErrorKind::EvalError, "integer overflow in Sum");
          }
          continue;
        }
        if (!is_float) {
          is_float = true;
          fsum = static_cast<double>(isum);
        }
        fsum += x.as_number();
      }
      if (spec.kind == AggKind::Avg) {
        if (xs.empty()) fail(ErrorKind::EmptyAggregate, "Avg over an empty group");
        return Value(fsum / static_cast<double>(xs.size()));
      }
      return is_float ? Value(fsum) : Value(isum);
    }
    case AggKind::Min:
    case AggKind::Max: {
      if (xs.empty()) fail(ErrorKind::EmptyAggregate, std::string(agg_name(spec.kind)) + " over an empty group");
      size_t best = 0;
      for (size_t i = 0; i < xs.size(); ++i) {
        if (xs[i].is_function() || xs[i].is_set()) {
          fail(ErrorKind::TypeMismatch, std::string(agg_name(spec.kind)) + " over a non-scalar value");
        }
        if (i == 0) continue;
        int c = scalar_order(xs[i], xs[best]);
        if (spec.kind == AggKind::Min ? c < 0 : c > 0) best = i;
      }
      return xs[best];
    }
    case AggKind::Count: break;
  }
  return Value(static_cast<int64_t>(rows.size()));
}

Value aggregate_group(const std::vector<AggSpec>& specs, const ParamSig& key_sig, const Key& key,
                      const Mappings& rows, const Context& ctx) {
  std::vector<std::pair<std::string, Value>> attrs;
  for (size_t i = 0; i < key_sig.size(); ++i) attrs.emplace_back(key_sig[i].name, key[i]);
  for (const auto& s : specs) attrs.emplace_back(s.out_name, fold(s, rows, ctx));
  return Value(make_tuple(std::move(attrs)));
}

}  // namespace

FunctionRef group(const std::vector<std::string>& by, const Value* key_fn,
                  const FunctionValue& input, const Context& ctx) {
  Buckets buckets = bucket(by, key_fn, input, ctx);
  Mappings out;
  for (auto& [g, rows] : buckets) {
    Level level = input.level == Level::Generic ? Level::Relation : input.level;
    out.emplace(g, Value(make_extensional_unchecked(input.sig, input.codomain, std::move(rows), level)));
  }
  return make_extensional_unchecked(group_sig(by, key_fn), DomainConstraint::any(), std::move(out),
                                    Level::Database);
}

FunctionRef aggregate(const std::vector<AggSpec>& specs, const FunctionValue& groups,
                      const Context& ctx) {
  check_specs(specs, groups.sig);
  Mappings out;
  for (auto& [g, members] : materialize(groups, ctx)) {
    const FunctionValue& rel = expect_function(members, "a group");
    auto rows = materialize(rel, ctx);
    Mappings m(rows.begin(), rows.end());
    out.emplace(g, aggregate_group(specs, groups.sig, g, m, ctx));
  }
  return make_extensional_unchecked(groups.sig, DomainConstraint::any(), std::move(out),
                                    Level::Relation);
}

FunctionRef group_and_aggregate(const std::vector<std::string>& by, const Value* key_fn,
                                const std::vector<AggSpec>& specs, const FunctionValue& input,
                                const Context& ctx) {
  Buckets buckets = bucket(by, key_fn, input, ctx);
  ParamSig sig = group_sig(by, key_fn);
  check_specs(specs, sig);
  Mappings out;
  for (const auto& [g, rows] : buckets) out.emplace(g, aggregate_group(specs, sig, g, rows, ctx));
  return make_extensional_unchecked(std::move(sig), DomainConstraint::any(), std::move(out),
                                    Level::Relation);
}

FunctionRef grouping_sets(const std::vector<GroupingMember>& members, const FunctionValue& input,
                          const Context& ctx) {
  std::vector<std::string> names;
  for (const auto& m : members) names.push_back(m.name);
  check_unique_names(names, "grouping set name");
  Mappings out;
  for (const auto& m : members) {
    out.emplace(Key{Value(m.name)},
                Value(group_and_aggregate(m.by, nullptr, m.aggs, input, ctx)));
  }
  return make_extensional_unchecked(text_sig("name"), DomainConstraint::any(), std::move(out),
                                    Level::Database);
}

// ---------------------------------------------------------------------------
// Joins
// ---------------------------------------------------------------------------

namespace {

struct Row {
  Key key;
  Value value;
  std::map<std::string, Value> attrs;
};

struct Member {
  std::string name;
  Value value;
  const FunctionValue* fn = nullptr;
  std::vector<Row> rows;
};

struct Endpoint {
  size_t member = 0;
  bool is_key = false;
  size_t key_index = 0;
  std::string attr;
};

struct Condition {
  Endpoint left;
  Endpoint right;
};

const Value& value_at(const Row& row, const Endpoint& e) {
  return e.is_key ? row.key[e.key_index] : row.attrs.at(e.attr);
}

std::vector<Member> load_members(const FunctionValue& dbf, const Context& ctx) {
  std::vector<Member> members;
  for (auto& [k, v] : materialize(dbf, ctx)) {
    if (k.size() != 1 || !k[0].is_text()) {
      fail(ErrorKind::TypeMismatch, "database member names must be text, got " + debug_string(k));
    }
    members.push_back(Member{k[0].as_text(), std::move(v), nullptr, {}});
  }
  for (auto& m : members) {
    m.fn = &expect_function(m.value, "member '" + m.name + "'");
    for (auto& [k, v] : materialize(*m.fn, ctx)) {
      Row row{k, v, {}};
      if (v.is_function()) {
        for (auto& [ak, av] : materialize(*v.as_function(), ctx)) {
          if (ak.size() != 1 || !ak[0].is_text()) {
            fail(ErrorKind::TypeMismatch, "tuple attribute names must be text in '" + m.name + "'");
          }
          row.attrs.emplace(ak[0].as_text(), std::move(av));
        }
      } else if (!(v.is_bool() && v.as_bool())) {
        fail(ErrorKind::TypeMismatch, "row " + debug_string(k) + " of '" + m.name +
                                          "' is neither a tuple function nor true");
      }
      m.rows.push_back(std::move(row));
    }
  }
  return members;
}

std::optional<size_t> member_index(const std::vector<Member>& members, const std::string& name) {
  for (size_t i = 0; i < members.size(); ++i) {
    if (members[i].name == name) return i;
  }
  return std::nullopt;
}

Endpoint resolve(const std::vector<Member>& members, size_t m, const std::string& name) {
  Endpoint e;
  e.member = m;
  const auto& sig = members[m].fn->sig;
  for (size_t i = 0; i < sig.size(); ++i) {
    if (sig[i].name == name) {
      e.is_key = true;
      e.key_index = i;
      return e;
    }
  }
  e.attr = name;
  return e;
}

std::vector<Condition> conditions(const std::vector<Member>& members,
                                  const std::optional<std::vector<JoinPair>>& on,
                                  const Catalog& catalog) {
  std::vector<Condition> out;
  if (on) {
    for (const auto& pair : *on) {
      auto l = member_index(members, pair.left.relation);
      auto r = member_index(members, pair.right.relation);
      if (!l || !r) {
        const auto& bad = l ? pair.right.relation : pair.left.relation;
        fail(ErrorKind::UnresolvableCondition, "join condition names '" + bad +
                                                   "', which is not in the database function");
      }
      out.push_back({resolve(members, *l, pair.left.name), resolve(members, *r, pair.right.name)});
    }
    return out;
  }
  for (const auto& rel : catalog.relationships) {
    auto f = member_index(members, rel.function);
    if (!f) continue;
    const auto& sig = members[*f].fn->sig;
    for (size_t i = 0; i < rel.participants.size() && i < sig.size(); ++i) {
      auto p = member_index(members, rel.participants[i].first);
      if (!p) continue;
      out.push_back({resolve(members, *f, sig[i].name),
                     resolve(members, *p, rel.participants[i].second)});
    }
  }
  return out;
}

struct UnionFind {
  std::vector<size_t> parent;
  explicit UnionFind(size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  size_t find(size_t x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
  void unite(size_t a, size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

void check_connected(const std::vector<Member>& members, const std::vector<Condition>& conds) {
  UnionFind uf(members.size());
  for (const auto& c : conds) uf.unite(c.left.member, c.right.member);
  for (size_t i = 1; i < members.size(); ++i) {
    if (uf.find(i) != uf.find(0)) {
      fail(ErrorKind::DisconnectedSchema, "'" + members[i].name + "' is not connected to '" +
                                              members[0].name + "' by any join condition");
    }
  }
}

void check_attributes(const std::vector<Member>& members, const std::vector<Condition>& conds) {
  for (const auto& c : conds) {
    for (const Endpoint* e : {&c.left, &c.right}) {
      if (e->is_key) continue;
      for (const auto& row : members[e->member].rows) {
        if (!row.attrs.count(e->attr)) {
          fail(ErrorKind::UndefinedInput, "row " + debug_string(row.key) + " of '" +
                                              members[e->member].name + "' has no attribute '" +
                                              e->attr + "'");
        }
      }
    }
  }
}

/// Validated join problem: members, conditions, connectivity and attribute
/// presence checked in that order.
struct Problem {
  std::vector<Member> members;
  std::vector<Condition> conds;
};

Problem prepare(std::vector<Member> members, const std::optional<std::vector<JoinPair>>& on,
                const Catalog& catalog) {
  Problem p{std::move(members), {}};
  p.conds = conditions(p.members, on, catalog);
  check_connected(p.members, p.conds);
  check_attributes(p.members, p.conds);
  return p;
}

bool self_ok(const Row& row, size_t m, const std::vector<Condition>& conds) {
  for (const auto& c : conds) {
    if (c.left.member == m && c.right.member == m && value_at(row, c.left) != value_at(row, c.right)) {
      return false;
    }
  }
  return true;
}

/// Calls visit(rows) for every combination (one row index per member)
/// satisfying all conditions. Members are added in BFS order with a hash
/// index on the conditions linking each to the already placed ones.
void for_each_result(const Problem& p, const std::function<void(const std::vector<size_t>&)>& visit) {
  const size_t n = p.members.size();
  std::vector<size_t> order{0};
  std::vector<bool> placed(n, false);
  placed[0] = true;
  for (size_t i = 0; i < order.size(); ++i) {
    std::set<size_t> next;
    for (const auto& c : p.conds) {
      if (c.left.member == order[i] && !placed[c.right.member]) next.insert(c.right.member);
      if (c.right.member == order[i] && !placed[c.left.member]) next.insert(c.left.member);
    }
    for (size_t m : next) {
      if (!placed[m]) {
        placed[m] = true;
        order.push_back(m);
      }
    }
  }

  struct Step {
    size_t member;
    std::vector<std::pair<Endpoint, Endpoint>> links;  // (own side, placed side)
    std::map<Key, std::vector<size_t>, KeyLess> index;
  };
  std::vector<Step> steps;
  std::vector<bool> before(n, false);
  for (size_t m : order) {
    Step s{m, {}, {}};
    for (const auto& c : p.conds) {
      if (c.left.member == m && c.right.member != m && before[c.right.member]) s.links.push_back({c.left, c.right});
      if (c.right.member == m && c.left.member != m && before[c.left.member]) s.links.push_back({c.right, c.left});
    }
    const auto& rows = p.members[m].rows;
    for (size_t r = 0; r < rows.size(); ++r) {
      if (!self_ok(rows[r], m, p.conds)) continue;
      Key probe;
      for (const auto& [own, other] : s.links) probe.push_back(value_at(rows[r], own));
      s.index[probe].push_back(r);
    }
    steps.push_back(std::move(s));
    before[m] = true;
  }

  std::vector<size_t> chosen(n, 0);
  std::function<void(size_t)> extend = [&](size_t depth) {
    if (depth == steps.size()) {
      visit(chosen);
      return;
    }
    const Step& s = steps[depth];
    Key probe;
    for (const auto& [own, other] : s.links) {
      probe.push_back(value_at(p.members[other.member].rows[chosen[other.member]], other));
    }
    auto it = s.index.find(probe);
    if (it == s.index.end()) return;
    for (size_t r : it->second) {
      chosen[s.member] = r;
      extend(depth + 1);
    }
  };
  extend(0);
}

/// Rows per member that take part in at least one complete result.
std::vector<std::vector<bool>> participation(const Problem& p) {
  const size_t n = p.members.size();
  std::vector<std::vector<bool>> alive(n);
  for (size_t m = 0; m < n; ++m) {
    alive[m].assign(p.members[m].rows.size(), false);
    for (size_t r = 0; r < alive[m].size(); ++r) alive[m][r] = self_ok(p.members[m].rows[r], m, p.conds);
  }

  std::map<std::pair<size_t, size_t>, std::vector<std::pair<Endpoint, Endpoint>>> edges;
  for (const auto& c : p.conds) {
    if (c.left.member == c.right.member) continue;
    if (c.left.member < c.right.member) {
      edges[{c.left.member, c.right.member}].push_back({c.left, c.right});
    } else {
      edges[{c.right.member, c.left.member}].push_back({c.right, c.left});
    }
  }

  if (edges.size() + 1 != n) {
    std::vector<std::vector<bool>> hit(n);
    for (size_t m = 0; m < n; ++m) hit[m].assign(p.members[m].rows.size(), false);
    for_each_result(p, [&](const std::vector<size_t>& rows) {
      for (size_t m = 0; m < n; ++m) hit[m][rows[m]] = true;
    });
    return hit;
  }

  // Acyclic: semi-join reduction along every edge until nothing changes.
  auto semi = [&](size_t keep, size_t other, bool keep_is_first,
                  const std::vector<std::pair<Endpoint, Endpoint>>& links) {
    std::set<Key, KeyLess> present;
    for (size_t r = 0; r < p.members[other].rows.size(); ++r) {
      if (!alive[other][r]) continue;
      Key k;
      for (const auto& [a, b] : links) k.push_back(value_at(p.members[other].rows[r], keep_is_first ? b : a));
      present.insert(std::move(k));
    }
    bool changed = false;
    for (size_t r = 0; r < p.members[keep].rows.size(); ++r) {
      if (!alive[keep][r]) continue;
      Key k;
      for (const auto& [a, b] : links) k.push_back(value_at(p.members[keep].rows[r], keep_is_first ? a : b));
      if (!present.count(k)) {
        alive[keep][r] = false;
        changed = true;
      }
    }
    return changed;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [pair, links] : edges) {
      changed |= semi(pair.first, pair.second, true, links);
      changed |= semi(pair.second, pair.first, false, links);
    }
  }
  return alive;
}

FunctionRef restrict_rows(const Member& m, const std::vector<bool>& keep) {
  Mappings out;
  for (size_t r = 0; r < m.rows.size(); ++r) {
    if (keep[r]) out.emplace(m.rows[r].key, m.rows[r].value);
  }
  return make_extensional_unchecked(m.fn->sig, m.fn->codomain, std::move(out), m.fn->level);
}

}  // namespace

FunctionRef join(const FunctionValue& dbf, const std::optional<std::vector<JoinPair>>& on,
                 const Catalog& catalog, const Context& ctx) {
  auto members = load_members(dbf, ctx);
  if (members.empty()) fail(ErrorKind::DisconnectedSchema, "join of an empty database function");
  if (members.size() == 1 && !on) return members[0].value.as_function();
  Problem p = prepare(std::move(members), on, catalog);
  const size_t n = p.members.size();

  // Key parameters equated by conditions share one output parameter.
  std::vector<size_t> base(n, 0);
  size_t total = 0;
  for (size_t m = 0; m < n; ++m) {
    base[m] = total;
    total += p.members[m].fn->arity();
  }
  UnionFind uf(total);
  for (const auto& c : p.conds) {
    if (c.left.is_key && c.right.is_key) {
      uf.unite(base[c.left.member] + c.left.key_index, base[c.right.member] + c.right.key_index);
    }
  }
  struct OutParam {
    size_t member;
    size_t index;
  };
  std::vector<OutParam> out_params;
  std::map<size_t, size_t> class_slot;
  for (size_t m = 0; m < n; ++m) {
    for (size_t i = 0; i < p.members[m].fn->arity(); ++i) {
      size_t root = uf.find(base[m] + i);
      if (class_slot.emplace(root, out_params.size()).second) out_params.push_back({m, i});
    }
  }
  std::map<std::string, int> param_uses;
  for (const auto& op : out_params) param_uses[p.members[op.member].fn->sig[op.index].name]++;
  ParamSig sig;
  for (const auto& op : out_params) {
    const auto& param = p.members[op.member].fn->sig[op.index];
    std::string name = param_uses[param.name] > 1 ? p.members[op.member].name + "." + param.name
                                                  : param.name;
    sig.push_back(Param{name, param.constraint});
  }

  std::map<std::string, int> attr_uses;
  std::vector<std::set<std::string>> member_attrs(n);
  for (size_t m = 0; m < n; ++m) {
    for (const auto& row : p.members[m].rows) {
      for (const auto& [a, v] : row.attrs) member_attrs[m].insert(a);
    }
    for (const auto& a : member_attrs[m]) attr_uses[a]++;
  }

  Mappings out;
  for_each_result(p, [&](const std::vector<size_t>& rows) {
    Key key;
    for (const auto& op : out_params) key.push_back(p.members[op.member].rows[rows[op.member]].key[op.index]);
    std::vector<std::pair<std::string, Value>> attrs;
    for (size_t m = 0; m < n; ++m) {
      for (const auto& [a, v] : p.members[m].rows[rows[m]].attrs) {
        attrs.emplace_back(attr_uses[a] > 1 ? p.members[m].name + "." + a : a, v);
      }
    }
    out.emplace(std::move(key), Value(make_tuple(std::move(attrs))));
  });
  return make_extensional_unchecked(std::move(sig), DomainConstraint::any(), std::move(out),
                                    Level::Relation);
}

FunctionRef outer_mark(const std::vector<std::string>& outer, const FunctionValue& dbf,
                       const Catalog& catalog, const Context& ctx) {
  auto members = load_members(dbf, ctx);
  for (const auto& name : outer) {
    if (!member_index(members, name)) {
      fail(ErrorKind::UnknownRelation, "'" + name + "' is not a member of the database function");
    }
  }
  std::vector<std::vector<bool>> alive;
  Problem p{std::move(members), {}};
  if (p.members.size() > 1) {
    p = prepare(std::move(p.members), std::nullopt, catalog);
    alive = participation(p);
  } else {
    for (const auto& m : p.members) alive.emplace_back(m.rows.size(), true);
  }
  std::set<std::string> marked(outer.begin(), outer.end());
  Mappings out;
  for (size_t m = 0; m < p.members.size(); ++m) {
    const Member& mem = p.members[m];
    if (!marked.count(mem.name)) {
      out.emplace(Key{Value(mem.name)}, mem.value);
      continue;
    }
    std::vector<bool> rest(alive[m].size());
    for (size_t r = 0; r < rest.size(); ++r) rest[r] = !alive[m][r];
    Mappings parts;
    parts.emplace(Key{Value("inner")}, Value(restrict_rows(mem, alive[m])));
    parts.emplace(Key{Value("outer")}, Value(restrict_rows(mem, rest)));
    ParamSig sig{Param{"part", DomainConstraint::finite(BaseType::Text, {Value("inner"), Value("outer")})}};
    out.emplace(Key{Value(mem.name)},
                Value(make_extensional_unchecked(std::move(sig), DomainConstraint::any(),
                                                 std::move(parts), Level::Database)));
  }
  return make_extensional_unchecked(dbf.sig, dbf.codomain, std::move(out), Level::Database);
}

FunctionRef reduce_db(const FunctionValue& dbf, const Catalog& catalog, const Context& ctx) {
  auto members = load_members(dbf, ctx);
  Mappings out;
  if (members.size() <= 1) {
    for (const auto& m : members) out.emplace(Key{Value(m.name)}, m.value);
    return make_extensional_unchecked(dbf.sig, dbf.codomain, std::move(out), Level::Database);
  }
  Problem p = prepare(std::move(members), std::nullopt, catalog);
  auto alive = participation(p);
  for (size_t m = 0; m < p.members.size(); ++m) {
    out.emplace(Key{Value(p.members[m].name)}, Value(restrict_rows(p.members[m], alive[m])));
  }
  return make_extensional_unchecked(dbf.sig, dbf.codomain, std::move(out), Level::Database);
}

// ---------------------------------------------------------------------------
// Set operations
// ---------------------------------------------------------------------------

namespace {

bool same_sig(const ParamSig& x, const ParamSig& y) {
  if (x.size() != y.size()) return false;
  for (size_t i = 0; i < x.size(); ++i) {
    if (x[i].name != y[i].name || compare(x[i].constraint, y[i].constraint) != 0) return false;
  }
  return true;
}

/// The left signature when both sides agree, else the left names unconstrained.
ParamSig merged_sig(const ParamSig& x, const ParamSig* y) {
  if (!y || same_sig(x, *y)) return x;
  ParamSig out;
  for (const auto& p : x) out.push_back(Param{p.name, DomainConstraint::any()});
  return out;
}

}  // namespace

FunctionRef set_op(OperatorKind kind, const FunctionValue& a, const FunctionValue& b,
                   const Context& ctx) {
  if (a.arity() != b.arity()) {
    fail(ErrorKind::ArityError, std::string(operator_name(kind)) + " of databases keyed by " +
                                    std::to_string(a.arity()) + " and " + std::to_string(b.arity()) + " names");
  }
  auto load = [&](const FunctionValue& db) {
    std::map<Key, std::pair<FunctionRef, Mappings>, KeyLess> out;
    for (auto& [name, rel] : materialize(db, ctx)) {
      const FunctionValue& f = expect_function(rel, "relation " + debug_string(name));
      auto rows = materialize(f, ctx);
      out.emplace(name, std::make_pair(rel.as_function(), Mappings(rows.begin(), rows.end())));
    }
    return out;
  };
  auto left = load(a);
  auto right = load(b);
  std::set<Key, KeyLess> names;
  for (const auto& [n, r] : left) names.insert(n);
  for (const auto& [n, r] : right) names.insert(n);

  static const Mappings kEmpty;
  Mappings out;
  for (const auto& name : names) {
    auto li = left.find(name);
    auto ri = right.find(name);
    const FunctionRef& tmpl = li != left.end() ? li->second.first : ri->second.first;
    const Mappings& l = li != left.end() ? li->second.second : kEmpty;
    const Mappings& r = ri != right.end() ? ri->second.second : kEmpty;
    const FunctionValue* other = nullptr;
    if (li != left.end() && ri != right.end()) {
      other = ri->second.first.get();
      if (other->arity() != tmpl->arity()) {
        fail(ErrorKind::ArityError, std::string(operator_name(kind)) + " of " + debug_string(name) +
                                        " pairs relations of arity " + std::to_string(tmpl->arity()) +
                                        " and " + std::to_string(other->arity()));
      }
    }
    Mappings rel;
    switch (kind) {
      case OperatorKind::Union:
        rel = l;
        for (const auto& [k, v] : r) {
          auto [it, inserted] = rel.emplace(k, v);
          if (!inserted && it->second != v) {
            fail(ErrorKind::UniqueViolation, "union maps key " + debug_string(k) + " of " +
                                                 debug_string(name) + " to two different values");
          }
        }
        break;
      case OperatorKind::Intersect:
        for (const auto& [k, v] : l) {
          auto it = r.find(k);
          if (it != r.end() && it->second == v) rel.emplace(k, v);
        }
        break;
      case OperatorKind::Minus:
        for (const auto& [k, v] : l) {
          auto it = r.find(k);
          if (it == r.end() || it->second != v) rel.emplace(k, v);
        }
        break;
      case OperatorKind::Difference: {
        for (const auto& [k, v] : l) {
          auto it = r.find(k);
          if (it == r.end()) {
            rel.emplace(k, Value::set({v}));
          } else if (it->second != v) {
            rel.emplace(k, Value::set({v, it->second}));
          }
        }
        for (const auto& [k, v] : r) {
          if (!l.count(k)) rel.emplace(k, Value::set({v}));
        }
        break;
      }
      default:
        fail(ErrorKind::EvalError, std::string(operator_name(kind)) + " is not a set operation");
    }
    DomainConstraint codomain = tmpl->codomain;
    if (kind == OperatorKind::Difference || (other && compare(codomain, other->codomain) != 0)) {
      codomain = DomainConstraint::any();
    }
    out.emplace(name, Value(make_extensional_unchecked(merged_sig(tmpl->sig, other ? &other->sig : nullptr),
                                                       std::move(codomain), std::move(rel), tmpl->level)));
  }
  return make_extensional_unchecked(merged_sig(a.sig, &b.sig), DomainConstraint::any(), std::move(out),
                                    Level::Database);
}

// ---------------------------------------------------------------------------

namespace {

Bindings copy_bindings(const Bindings& b) {
  Bindings out;
  for (const auto& [k, v] : b) out.emplace(k, deep_copy(v));
  return out;
}

Mappings copy_mappings(const Mappings& m) {
  Mappings out;
  for (const auto& [k, v] : m) out.emplace_hint(out.end(), k, deep_copy(v));
  return out;
}

}  // namespace

FunctionRef deep_copy(const FunctionValue& f) {
  auto out = std::make_shared<FunctionValue>();
  out->sig = f.sig;
  out->codomain = f.codomain;
  out->level = f.level;
  out->body = std::visit(
      [](const auto& body) -> Body {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, Extensional>) {
          return Extensional{copy_mappings(body.mappings)};
        } else if constexpr (std::is_same_v<T, Computed>) {
          return Computed{body.body, copy_bindings(body.captured)};
        } else if constexpr (std::is_same_v<T, Piecewise>) {
          Piecewise pw;
          for (const auto& c : body.cases) {
            if (auto* ext = std::get_if<Extensional>(&c.body)) {
              pw.cases.push_back(Case{c.guard, Extensional{copy_mappings(ext->mappings)}});
            } else {
              const auto& comp = std::get<Computed>(c.body);
              pw.cases.push_back(Case{c.guard, Computed{comp.body, copy_bindings(comp.captured)}});
            }
          }
          if (body.fallback) pw.fallback = Computed{body.fallback->body, copy_bindings(body.fallback->captured)};
          pw.captured = copy_bindings(body.captured);
          return pw;
        } else {
          return body;
        }
      },
      f.body);
  return out;
}

Value deep_copy(const Value& v) {
  if (v.is_function()) return Value(deep_copy(*v.as_function()));
  if (v.is_set()) {
    ValueList items;
    for (const auto& item : v.as_set()) items.push_back(deep_copy(item));
    return Value::set(std::move(items));
  }
  return v;
}

}  // namespace fql::ops
