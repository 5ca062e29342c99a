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

#include "fql/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "fql/error.hpp"

namespace fql::oracle {

namespace {

// ---------------------------------------------------------------------------
// Scalars
// ---------------------------------------------------------------------------

[[noreturn]] void bad_operands(const char* what) { fail(ErrorKind::TypeMismatch, what); }

bool numeric(const Value& v) { return v.type() == ValueType::Int || v.type() == ValueType::Float; }

double widen(const Value& v) {
  return v.type() == ValueType::Int ? static_cast<double>(v.as_int()) : v.as_float();
}

bool same_value(const Value& a, const Value& b) {
  if (numeric(a) && numeric(b)) {
    if (a.type() == ValueType::Int && b.type() == ValueType::Int) return a.as_int() == b.as_int();
    return widen(a) == widen(b);
  }
  return compare(a, b) == 0;
}

/// -1/0/1, or 2 when unordered (NaN).
int order(const Value& a, const Value& b) {
  if (numeric(a) && numeric(b)) {
    if (a.type() == ValueType::Int && b.type() == ValueType::Int) {
      return (a.as_int() > b.as_int()) - (a.as_int() < b.as_int());
    }
    double x = widen(a), y = widen(b);
    if (x != x || y != y) return 2;
    return (x > y) - (x < y);
  }
  if (a.type() == ValueType::Text && b.type() == ValueType::Text) {
    const auto& x = a.as_text();
    const auto& y = b.as_text();
    return (x > y) - (x < y);
  }
  if (a.type() == ValueType::Bool && b.type() == ValueType::Bool) {
    return static_cast<int>(a.as_bool()) - static_cast<int>(b.as_bool());
  }
  bad_operands("comparison between incompatible types");
}

Value binop(BinaryOp op, const Value& a, const Value& b) {
  switch (op) {
    case BinaryOp::Eq: return Value(same_value(a, b));
    case BinaryOp::Ne: return Value(!same_value(a, b));
    case BinaryOp::Lt: { int c = order(a, b); return Value(c != 2 && c < 0); }
    case BinaryOp::Le: { int c = order(a, b); return Value(c != 2 && c <= 0); }
    case BinaryOp::Gt: { int c = order(a, b); return Value(c == 1); }
    case BinaryOp::Ge: { int c = order(a, b); return Value(c == 0 || c == 1); }
    default: break;
  }
  if (op == BinaryOp::Add && a.type() == ValueType::Text && b.type() == ValueType::Text) {
    return Value(a.as_text() + b.as_text());
  }
  if (!numeric(a) || !numeric(b)) bad_operands("arithmetic on non-numbers");
  if (op == BinaryOp::Div) {
    double d = widen(b);
    if (d == 0.0) fail(ErrorKind::EvalError, "division by zero");
    return Value(widen(a) / d);
  }
  if (a.type() == ValueType::Float || b.type() == ValueType::Float) {
    double x = widen(a), y = widen(b);
    return Value(op == BinaryOp::Add ? x + y : op == BinaryOp::Sub ? x - y : x * y);
  }
  // 128-bit arithmetic, then range check.
  __int128 x = a.as_int(), y = b.as_int();
  __int128 r = op == BinaryOp::Add ? x + y : op == BinaryOp::Sub ? x - y : x * y;
  if (r > INT64_MAX || r < INT64_MIN) fail(ErrorKind::EvalError, "integer overflow");
  return Value(static_cast<int64_t>(r));
}

// ---------------------------------------------------------------------------
// Relations as plain row lists
// ---------------------------------------------------------------------------

using Rows = std::vector<std::pair<Key, Value>>;

Rows rows_of(const FunctionValue& f, const Context& ctx) {
  Rows out;
  for (const auto& k : enumerate_domain(f, &ctx)) out.push_back({k, apply(f, k, ctx)});
  return out;
}

const FunctionValue& fn_of(const Value& v) {
  if (v.type() != ValueType::Function) bad_operands("expected a function value");
  return *v.as_function();
}

FunctionRef build(const ParamSig& sig, const DomainConstraint& codomain, const Rows& rows,
                  Level level) {
  Mappings m;
  for (const auto& [k, v] : rows) m[k] = v;
  return make_extensional_unchecked(sig, codomain, std::move(m), level);
}

Value tuple_of(const std::vector<std::pair<std::string, Value>>& attrs) {
  return Value(make_tuple(attrs));
}

void no_duplicates(const std::vector<std::string>& names) {
  for (size_t i = 0; i < names.size(); ++i) {
    for (size_t j = 0; j < i; ++j) {
      if (names[i] == names[j]) fail(ErrorKind::UniqueViolation, "duplicate name " + names[i]);
    }
  }
}

// filter ---------------------------------------------------------------------

Value pair_value(const Key& k, const Value& v) {
  Value key = k.size() == 1 ? k[0] : Value::set(k);
  return Value(make_extensional(ParamSig{Param{"i", DomainConstraint::any()}},
                                DomainConstraint::any(),
                                {{{Value("value")}, v}, {{Value("key")}, key}, {{Value(1)}, v},
                                 {{Value(0)}, key}}));
}

FunctionRef do_filter(const Value& pred, const FunctionValue& in, const Context& ctx) {
  Rows all = rows_of(in, ctx);
  Rows kept;
  for (const auto& [k, v] : all) {
    Value r = apply(pred, {in.level == Level::Database ? pair_value(k, v) : v}, ctx);
    if (r.type() != ValueType::Bool) fail(ErrorKind::PredicateError, "non-bool predicate");
    if (r.as_bool()) kept.push_back({k, v});
  }
  return build(in.sig, in.codomain, kept, in.level);
}

// grouping -------------------------------------------------------------------

struct Grouped {
  ParamSig sig;
  std::vector<std::pair<Key, Rows>> groups;  // ascending by key
};

Grouped do_bucket(const std::vector<std::string>& by, const Value* key_fn, const FunctionValue& in,
                  const Context& ctx) {
  Grouped g;
  if (key_fn) {
    g.sig.push_back(Param{"key", DomainConstraint::any()});
  } else {
    no_duplicates(by);
    for (const auto& b : by) g.sig.push_back(Param{b, DomainConstraint::any()});
  }
  for (const auto& [k, v] : rows_of(in, ctx)) {
    Key gk;
    if (key_fn) {
      gk = {apply(*key_fn, {v}, ctx)};
    } else {
      for (const auto& b : by) gk.push_back(apply(v, {Value(b)}, ctx));
    }
    auto it = std::find_if(g.groups.begin(), g.groups.end(),
                           [&](const auto& e) { return compare(e.first, gk) == 0; });
    if (it == g.groups.end()) {
      g.groups.push_back({gk, {}});
      it = g.groups.end() - 1;
    }
    it->second.push_back({k, v});
  }
  std::sort(g.groups.begin(), g.groups.end(),
            [](const auto& a, const auto& b) { return compare(a.first, b.first) < 0; });
  return g;
}

void check_outputs(const ParamSig& sig, const std::vector<AggSpec>& specs) {
  std::vector<std::string> names;
  for (const auto& p : sig) names.push_back(p.name);
  for (const auto& s : specs) names.push_back(s.out_name);
  no_duplicates(names);
}

Value one_aggregate(const AggSpec& s, const Rows& rows, const Context& ctx) {
  if (s.kind == AggKind::Count) return Value(static_cast<int64_t>(rows.size()));
  ValueList xs;
  for (const auto& [k, v] : rows) xs.push_back(apply(v, {Value(s.attribute)}, ctx));
  if (s.kind == AggKind::Min || s.kind == AggKind::Max) {
    if (xs.empty()) fail(ErrorKind::EmptyAggregate, "empty group");
    Value best = xs[0];
    for (size_t i = 0; i < xs.size(); ++i) {
      if (xs[i].type() == ValueType::Function || xs[i].type() == ValueType::Set) {
        bad_operands("Min/Max over a non-scalar");
      }
      if (i == 0) continue;
      int c = order(xs[i], best);
      if (c == 2) c = 0;
      if ((s.kind == AggKind::Min && c < 0) || (s.kind == AggKind::Max && c > 0)) best = xs[i];
    }
    return best;
  }
  // Sum / Avg: integer sum until the first float, float afterwards.
  bool as_float = s.kind == AggKind::Avg;
  __int128 exact = 0;
  double approx = 0.0;
  for (const auto& x : xs) {
    if (!numeric(x)) bad_operands("Sum/Avg over a non-number");
    if (!as_float && x.type() == ValueType::Int) {
      exact += x.as_int();
      if (exact > INT64_MAX || exact < INT64_MIN) fail(ErrorKind::EvalError, "integer overflow");
    } else {
      if (!as_float) approx = static_cast<double>(static_cast<int64_t>(exact));
      as_float = true;
      approx += widen(x);
    }
  }
  if (s.kind == AggKind::Avg) {
    if (xs.empty()) fail(ErrorKind::EmptyAggregate, "empty group");
    return Value(approx / static_cast<double>(xs.size()));
  }
  if (as_float) return Value(approx);
  return Value(static_cast<int64_t>(exact));
}

Rows aggregate_rows(const std::vector<AggSpec>& specs, const ParamSig& sig,
                    const std::vector<std::pair<Key, Rows>>& groups, const Context& ctx) {
  Rows out;
  for (const auto& [gk, members] : groups) {
    std::vector<std::pair<std::string, Value>> attrs;
    for (size_t i = 0; i < sig.size(); ++i) attrs.push_back({sig[i].name, gk[i]});
    for (const auto& s : specs) attrs.push_back({s.out_name, one_aggregate(s, members, ctx)});
    out.push_back({gk, tuple_of(attrs)});
  }
  return out;
}

FunctionRef do_group(const std::vector<std::string>& by, const Value* key_fn,
                     const FunctionValue& in, const Context& ctx) {
  Grouped g = do_bucket(by, key_fn, in, ctx);
  Rows out;
  Level inner = in.level == Level::Generic ? Level::Relation : in.level;
  for (const auto& [gk, members] : g.groups) {
    out.push_back({gk, Value(build(in.sig, in.codomain, members, inner))});
  }
  return build(g.sig, DomainConstraint::any(), out, Level::Database);
}

FunctionRef do_aggregate(const std::vector<AggSpec>& specs, const FunctionValue& groups,
                         const Context& ctx) {
  check_outputs(groups.sig, specs);
  std::vector<std::pair<Key, Rows>> gs;
  Rows out;
  for (const auto& [gk, rel] : rows_of(groups, ctx)) {
    Rows members = rows_of(fn_of(rel), ctx);
    Rows one = aggregate_rows(specs, groups.sig, {{gk, members}}, ctx);
    out.push_back(one[0]);
  }
  return build(groups.sig, DomainConstraint::any(), out, Level::Relation);
}

FunctionRef do_group_aggregate(const std::vector<std::string>& by, const Value* key_fn,
                               const std::vector<AggSpec>& specs, const FunctionValue& in,
                               const Context& ctx) {
  Grouped g = do_bucket(by, key_fn, in, ctx);
  check_outputs(g.sig, specs);
  return build(g.sig, DomainConstraint::any(), aggregate_rows(specs, g.sig, g.groups, ctx),
               Level::Relation);
}

// joins ----------------------------------------------------------------------

struct Rel {
  std::string name;
  Value value;
  Rows rows;
  std::vector<std::vector<std::pair<std::string, Value>>> attrs;  // per row
};

struct Side {
  size_t rel;
  int key = -1;  // key position, or -1 for an attribute
  std::string attr;
};

std::vector<Rel> load(const FunctionValue& dbf, const Context& ctx) {
  std::vector<Rel> rels;
  for (const auto& [k, v] : rows_of(dbf, ctx)) {
    if (k.size() != 1 || k[0].type() != ValueType::Text) bad_operands("member name is not text");
    rels.push_back(Rel{k[0].as_text(), v, {}, {}});
  }
  for (auto& r : rels) {
    r.rows = rows_of(fn_of(r.value), ctx);
    for (const auto& [k, v] : r.rows) {
      std::vector<std::pair<std::string, Value>> attrs;
      if (v.type() == ValueType::Function) {
        for (const auto& [ak, av] : rows_of(*v.as_function(), ctx)) {
          if (ak.size() != 1 || ak[0].type() != ValueType::Text) bad_operands("attribute name");
          attrs.push_back({ak[0].as_text(), av});
        }
      } else if (v.type() != ValueType::Bool || !v.as_bool()) {
        bad_operands("row is not a tuple");
      }
      r.attrs.push_back(std::move(attrs));
    }
  }
  return rels;
}

int find_rel(const std::vector<Rel>& rels, const std::string& name) {
  for (size_t i = 0; i < rels.size(); ++i) {
    if (rels[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

Side side(const std::vector<Rel>& rels, size_t r, const std::string& name) {
  const auto& sig = fn_of(rels[r].value).sig;
  for (size_t i = 0; i < sig.size(); ++i) {
    if (sig[i].name == name) return Side{r, static_cast<int>(i), ""};
  }
  return Side{r, -1, name};
}

const Value* lookup(const std::vector<Rel>& rels, const Side& s, size_t row) {
  if (s.key >= 0) return &rels[s.rel].rows[row].first[s.key];
  for (const auto& [a, v] : rels[s.rel].attrs[row]) {
    if (a == s.attr) return &v;
  }
  return nullptr;
}

using Cond = std::pair<Side, Side>;

std::vector<Cond> make_conditions(const std::vector<Rel>& rels,
                                  const std::optional<std::vector<JoinPair>>& on,
                                  const Catalog& catalog) {
  std::vector<Cond> out;
  if (on) {
    for (const auto& jp : *on) {
      int l = find_rel(rels, jp.left.relation);
      int r = find_rel(rels, jp.right.relation);
      if (l < 0 || r < 0) fail(ErrorKind::UnresolvableCondition, "unknown relation in condition");
      out.push_back({side(rels, l, jp.left.name), side(rels, r, jp.right.name)});
    }
    return out;
  }
  for (const auto& decl : catalog.relationships) {
    int f = find_rel(rels, decl.function);
    if (f < 0) continue;
    const auto& sig = fn_of(rels[f].value).sig;
    for (size_t i = 0; i < decl.participants.size() && i < sig.size(); ++i) {
      int p = find_rel(rels, decl.participants[i].first);
      if (p < 0) continue;
      out.push_back({side(rels, f, sig[i].name), side(rels, p, decl.participants[i].second)});
    }
  }
  return out;
}

void validate(const std::vector<Rel>& rels, const std::vector<Cond>& conds) {
  // Reachability from the first member.
  std::vector<bool> seen(rels.size(), false);
  seen[0] = true;
  for (bool grew = true; grew;) {
    grew = false;
    for (const auto& [a, b] : conds) {
      if (seen[a.rel] != seen[b.rel]) {
        seen[a.rel] = seen[b.rel] = true;
        grew = true;
      }
    }
  }
  for (size_t i = 0; i < rels.size(); ++i) {
    if (!seen[i]) fail(ErrorKind::DisconnectedSchema, "member not connected: " + rels[i].name);
  }
  for (const auto& [a, b] : conds) {
    for (const Side& s : {a, b}) {
      if (s.key >= 0) continue;
      for (size_t row = 0; row < rels[s.rel].rows.size(); ++row) {
        if (!lookup(rels, s, row)) fail(ErrorKind::UndefinedInput, "missing attribute " + s.attr);
      }
    }
  }
}

/// Every full combination, by nested loops over members in name order.
std::vector<std::vector<size_t>> all_results(const std::vector<Rel>& rels,
                                             const std::vector<Cond>& conds) {
  std::vector<std::vector<size_t>> out;
  std::vector<size_t> pick(rels.size(), 0);
  auto consistent = [&](size_t upto) {
    for (const auto& [a, b] : conds) {
      if (a.rel > upto || b.rel > upto) continue;
      if (a.rel != upto && b.rel != upto) continue;
      if (compare(*lookup(rels, a, pick[a.rel]), *lookup(rels, b, pick[b.rel])) != 0) return false;
    }
    return true;
  };
  std::function<void(size_t)> loop = [&](size_t i) {
    if (i == rels.size()) {
      out.push_back(pick);
      return;
    }
    for (size_t row = 0; row < rels[i].rows.size(); ++row) {
      pick[i] = row;
      if (consistent(i)) loop(i + 1);
    }
  };
  loop(0);
  return out;
}

FunctionRef do_join(const FunctionValue& dbf, const std::optional<std::vector<JoinPair>>& on,
                    const Catalog& catalog, const Context& ctx) {
  auto rels = load(dbf, ctx);
  if (rels.empty()) fail(ErrorKind::DisconnectedSchema, "nothing to join");
  if (rels.size() == 1 && !on) return rels[0].value.as_function();
  auto conds = make_conditions(rels, on, catalog);
  validate(rels, conds);

  // Output key: key positions closed under key-key equalities, one
  // parameter per class, in order of first appearance.
  std::vector<std::pair<size_t, size_t>> positions;
  for (size_t r = 0; r < rels.size(); ++r) {
    for (size_t i = 0; i < fn_of(rels[r].value).arity(); ++i) positions.push_back({r, i});
  }
  auto same_class = [&](std::pair<size_t, size_t> x, std::pair<size_t, size_t> y) {
    std::set<std::pair<size_t, size_t>> reach{x};
    for (bool grew = true; grew;) {
      grew = false;
      for (const auto& [a, b] : conds) {
        if (a.key < 0 || b.key < 0) continue;
        std::pair<size_t, size_t> pa{a.rel, a.key}, pb{b.rel, b.key};
        if (reach.count(pa) != reach.count(pb)) {
          reach.insert(pa);
          reach.insert(pb);
          grew = true;
        }
      }
    }
    return reach.count(y) > 0;
  };
  std::vector<std::pair<size_t, size_t>> reps;
  for (const auto& pos : positions) {
    bool covered = false;
    for (const auto& rep : reps) covered = covered || same_class(rep, pos);
    if (!covered) reps.push_back(pos);
  }
  ParamSig sig;
  for (const auto& [r, i] : reps) {
    const Param& p = fn_of(rels[r].value).sig[i];
    int uses = 0;
    for (const auto& [r2, i2] : reps) uses += fn_of(rels[r2].value).sig[i2].name == p.name;
    sig.push_back(Param{uses > 1 ? rels[r].name + "." + p.name : p.name, p.constraint});
  }
  auto owners = [&](const std::string& attr) {
    int n = 0;
    for (const auto& rel : rels) {
      bool has = false;
      for (const auto& row : rel.attrs) {
        for (const auto& [a, v] : row) has = has || a == attr;
      }
      n += has;
    }
    return n;
  };

  Rows out;
  for (const auto& pick : all_results(rels, conds)) {
    Key k;
    for (const auto& [r, i] : reps) k.push_back(rels[r].rows[pick[r]].first[i]);
    std::vector<std::pair<std::string, Value>> attrs;
    for (size_t r = 0; r < rels.size(); ++r) {
      for (const auto& [a, v] : rels[r].attrs[pick[r]]) {
        attrs.push_back({owners(a) > 1 ? rels[r].name + "." + a : a, v});
      }
    }
    out.push_back({k, tuple_of(attrs)});
  }
  return build(sig, DomainConstraint::any(), out, Level::Relation);
}

/// used[r][row]: whether the row appears in some full result.
std::vector<std::vector<bool>> used_rows(const std::vector<Rel>& rels, const Catalog& catalog) {
  std::vector<std::vector<bool>> used;
  for (const auto& r : rels) used.emplace_back(r.rows.size(), rels.size() == 1);
  if (rels.size() <= 1) return used;
  auto conds = make_conditions(rels, std::nullopt, catalog);
  validate(rels, conds);
  for (const auto& pick : all_results(rels, conds)) {
    for (size_t r = 0; r < rels.size(); ++r) used[r][pick[r]] = true;
  }
  return used;
}

Value keep_rows(const Rel& rel, const std::vector<bool>& used, bool want) {
  Rows rows;
  for (size_t i = 0; i < rel.rows.size(); ++i) {
    if (used[i] == want) rows.push_back(rel.rows[i]);
  }
  const FunctionValue& f = fn_of(rel.value);
  return Value(build(f.sig, f.codomain, rows, f.level));
}

FunctionRef do_reduce(const FunctionValue& dbf, const Catalog& catalog, const Context& ctx) {
  auto rels = load(dbf, ctx);
  Rows out;
  if (rels.size() <= 1) {
    for (const auto& r : rels) out.push_back({{Value(r.name)}, r.value});
    return build(dbf.sig, dbf.codomain, out, Level::Database);
  }
  auto used = used_rows(rels, catalog);
  for (size_t r = 0; r < rels.size(); ++r) out.push_back({{Value(rels[r].name)}, keep_rows(rels[r], used[r], true)});
  return build(dbf.sig, dbf.codomain, out, Level::Database);
}

FunctionRef do_outer(const std::vector<std::string>& marked, const FunctionValue& dbf,
                     const Catalog& catalog, const Context& ctx) {
  auto rels = load(dbf, ctx);
  for (const auto& m : marked) {
    if (find_rel(rels, m) < 0) fail(ErrorKind::UnknownRelation, "unknown relation " + m);
  }
  auto used = used_rows(rels, catalog);
  Rows out;
  for (size_t r = 0; r < rels.size(); ++r) {
    if (std::find(marked.begin(), marked.end(), rels[r].name) == marked.end()) {
      out.push_back({{Value(rels[r].name)}, rels[r].value});
      continue;
    }
    Rows parts{{{Value("inner")}, keep_rows(rels[r], used[r], true)},
               {{Value("outer")}, keep_rows(rels[r], used[r], false)}};
    ParamSig sig{Param{"part", DomainConstraint::finite(BaseType::Text, {Value("outer"), Value("inner")})}};
    out.push_back({{Value(rels[r].name)}, Value(build(sig, DomainConstraint::any(), parts, Level::Database))});
  }
  return build(dbf.sig, dbf.codomain, out, Level::Database);
}

// set operations ---------------------------------------------------------------

// Signatures that differ anywhere lose their constraints.
ParamSig joint_sig(const ParamSig& x, const ParamSig& y) {
  bool same = x.size() == y.size();
  for (size_t i = 0; same && i < x.size(); ++i) {
    same = x[i].name == y[i].name && x[i].constraint == y[i].constraint;
  }
  if (same) return x;
  ParamSig out;
  for (const auto& p : x) out.push_back(Param{p.name, DomainConstraint::any()});
  return out;
}

FunctionRef do_set(OperatorKind kind, const FunctionValue& a, const FunctionValue& b,
                   const Context& ctx) {
  if (a.arity() != b.arity()) fail(ErrorKind::ArityError, "set operation on databases of different arity");
  struct Side {
    Key name;
    Value rel;
    Rows rows;
  };
  auto gather = [&](const FunctionValue& db) {
    std::vector<Side> out;
    for (const auto& [k, v] : rows_of(db, ctx)) out.push_back({k, v, rows_of(fn_of(v), ctx)});
    return out;
  };
  auto left = gather(a);
  auto right = gather(b);
  auto find = [](const std::vector<Side>& s, const Key& n) -> const Side* {
    for (const auto& x : s) {
      if (compare(x.name, n) == 0) return &x;
    }
    return nullptr;
  };
  auto row = [](const Rows& rows, const Key& k) -> const Value* {
    for (const auto& [rk, v] : rows) {
      if (compare(rk, k) == 0) return &v;
    }
    return nullptr;
  };
  std::vector<Key> names;
  for (const auto& s : left) names.push_back(s.name);
  for (const auto& s : right) {
    if (!find(left, s.name)) names.push_back(s.name);
  }
  std::sort(names.begin(), names.end(), [](const Key& x, const Key& y) { return compare(x, y) < 0; });

  Rows out;
  const Rows none;
  for (const auto& n : names) {
    const Side* l = find(left, n);
    const Side* r = find(right, n);
    const Rows& lr = l ? l->rows : none;
    const Rows& rr = r ? r->rows : none;
    if (l && r && fn_of(l->rel).arity() != fn_of(r->rel).arity()) {
      fail(ErrorKind::ArityError, "set operation on relations of different arity");
    }
    Rows res;
    if (kind == OperatorKind::Union) {
      res = lr;
      for (const auto& [k, v] : rr) {
        const Value* mine = row(lr, k);
        if (!mine) {
          res.push_back({k, v});
        } else if (compare(*mine, v) != 0) {
          fail(ErrorKind::UniqueViolation, "conflicting union");
        }
      }
    } else if (kind == OperatorKind::Intersect || kind == OperatorKind::Minus) {
      for (const auto& [k, v] : lr) {
        const Value* other = row(rr, k);
        bool equal = other && compare(*other, v) == 0;
        if (equal == (kind == OperatorKind::Intersect)) res.push_back({k, v});
      }
    } else if (kind == OperatorKind::Difference) {
      for (const auto& [k, v] : lr) {
        const Value* other = row(rr, k);
        if (!other) res.push_back({k, Value::set({v})});
        else if (compare(*other, v) != 0) res.push_back({k, Value::set({*other, v})});
      }
      for (const auto& [k, v] : rr) {
        if (!row(lr, k)) res.push_back({k, Value::set({v})});
      }
    } else {
      fail(ErrorKind::EvalError, "not a set operation");
    }
    const FunctionValue& t = fn_of(l ? l->rel : r->rel);
    const FunctionValue* u = l && r ? &fn_of(r->rel) : nullptr;
    bool keep_codomain = kind != OperatorKind::Difference && (!u || compare(t.codomain, u->codomain) == 0);
    out.push_back({n, Value(build(u ? joint_sig(t.sig, u->sig) : t.sig,
                                  keep_codomain ? t.codomain : DomainConstraint::any(), res, t.level))});
  }
  return build(joint_sig(a.sig, b.sig), DomainConstraint::any(), out, Level::Database);
}

// copying ----------------------------------------------------------------------

Value copy_value(const Value& v);

Bindings copy_all(const Bindings& b) {
  Bindings out;
  for (const auto& [k, v] : b) out[k] = copy_value(v);
  return out;
}

Extensional copy_ext(const Extensional& e) {
  Extensional out;
  for (const auto& [k, v] : e.mappings) out.mappings[k] = copy_value(v);
  return out;
}

Value copy_value(const Value& v) {
  if (v.type() == ValueType::Set) {
    ValueList items;
    for (const auto& x : v.as_set()) items.push_back(copy_value(x));
    return Value::set(items);
  }
  if (v.type() != ValueType::Function) return v;
  const FunctionValue& f = *v.as_function();
  FunctionValue c;
  c.sig = f.sig;
  c.codomain = f.codomain;
  c.level = f.level;
  if (auto* e = std::get_if<Extensional>(&f.body)) {
    c.body = copy_ext(*e);
  } else if (auto* comp = std::get_if<Computed>(&f.body)) {
    c.body = Computed{comp->body, copy_all(comp->captured)};
  } else if (auto* pw = std::get_if<Piecewise>(&f.body)) {
    Piecewise p;
    p.captured = copy_all(pw->captured);
    for (const auto& cs : pw->cases) {
      if (auto* ce = std::get_if<Extensional>(&cs.body)) {
        p.cases.push_back(Case{cs.guard, copy_ext(*ce)});
      } else {
        const auto& cc = std::get<Computed>(cs.body);
        p.cases.push_back(Case{cs.guard, Computed{cc.body, copy_all(cc.captured)}});
      }
    }
    if (pw->fallback) p.fallback = Computed{pw->fallback->body, copy_all(pw->fallback->captured)};
    c.body = std::move(p);
  } else {
    c.body = f.body;
  }
  return Value(std::make_shared<const FunctionValue>(std::move(c)));
}

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

Value run(const Expr& e, const Bindings& b, const Context& ctx);

Value resolve(const std::string& name, const Bindings& b, const Context& ctx) {
  auto it = b.find(name);
  if (it != b.end()) return it->second;
  if (name == kDatabaseName) return Value(ctx.snapshot.root());
  if (ctx.snapshot.catalog().has(name)) return apply(*ctx.snapshot.root(), {Value(name)}, ctx);
  if (name == "rnd_str") {
    return Value(make_native({Param{"seed", DomainConstraint::any(BaseType::Int)}},
                             DomainConstraint::any(BaseType::Text), "rnd_str",
                             [](const ValueList& a) { return Value(rnd_str(a[0].as_int())); }));
  }
  fail(ErrorKind::NameError, "unknown name " + name);
}

bool truth(const Value& v) {
  if (v.type() != ValueType::Bool) bad_operands("expected bool");
  return v.as_bool();
}

Value run_op(const Expr::Op& n, const Bindings& b, const Context& ctx) {
  auto arg = [&](size_t i) { return run(*n.inputs[i], b, ctx); };
  const OpConfig& c = n.config;
  switch (n.kind) {
    case OperatorKind::Filter: {
      Value pred = arg(0);
      Value in = arg(1);
      return Value(do_filter(pred, fn_of(in), ctx));
    }
    case OperatorKind::Group:
    case OperatorKind::GroupAndAggregate: {
      Value key_fn = c.by_lambda ? arg(0) : Value();
      Value in = arg(c.by_lambda ? 1 : 0);
      const Value* kf = c.by_lambda ? &key_fn : nullptr;
      if (n.kind == OperatorKind::Group) return Value(do_group(c.by, kf, fn_of(in), ctx));
      return Value(do_group_aggregate(c.by, kf, c.aggs, fn_of(in), ctx));
    }
    case OperatorKind::Aggregate: {
      Value g = arg(0);
      return Value(do_aggregate(c.aggs, fn_of(g), ctx));
    }
    case OperatorKind::GroupingSets: {
      Value in = arg(0);
      std::vector<std::string> names;
      for (const auto& m : c.sets) names.push_back(m.name);
      no_duplicates(names);
      Rows out;
      for (const auto& m : c.sets) {
        out.push_back({{Value(m.name)}, Value(do_group_aggregate(m.by, nullptr, m.aggs, fn_of(in), ctx))});
      }
      return Value(build(text_sig("name"), DomainConstraint::any(), out, Level::Database));
    }
    case OperatorKind::Join: {
      Value d = arg(0);
      return Value(do_join(fn_of(d), c.on, ctx.snapshot.catalog(), ctx));
    }
    case OperatorKind::OuterMark: {
      Value d = arg(0);
      return Value(do_outer(c.outer, fn_of(d), ctx.snapshot.catalog(), ctx));
    }
    case OperatorKind::ReduceDB: {
      Value d = arg(0);
      return Value(do_reduce(fn_of(d), ctx.snapshot.catalog(), ctx));
    }
    case OperatorKind::Union:
    case OperatorKind::Intersect:
    case OperatorKind::Minus:
    case OperatorKind::Difference: {
      Value x = arg(0);
      Value y = arg(1);
      const FunctionValue& fx = fn_of(x);
      const FunctionValue& fy = fn_of(y);
      return Value(do_set(n.kind, fx, fy, ctx));
    }
    case OperatorKind::DeepCopy:
    case OperatorKind::Copy:
      return copy_value(arg(0));
  }
  fail(ErrorKind::EvalError, "unknown operator");
}

Value run(const Expr& e, const Bindings& b, const Context& ctx) {
  if (auto* n = e.as<Expr::Lit>()) return n->value;
  if (auto* n = e.as<Expr::Param>()) {
    auto it = b.find(n->name);
    if (it == b.end()) fail(ErrorKind::NameError, "unbound parameter " + n->name);
    return it->second;
  }
  if (auto* n = e.as<Expr::Ref>()) {
    Value v = resolve(n->path[0], b, ctx);
    for (size_t i = 1; i < n->path.size(); ++i) v = apply(v, {Value(n->path[i])}, ctx);
    return v;
  }
  if (auto* n = e.as<Expr::Apply>()) {
    Value f = run(*n->fn, b, ctx);
    ValueList args;
    for (const auto& a : n->args) args.push_back(run(*a, b, ctx));
    return apply(f, args, ctx);
  }
  if (auto* n = e.as<Expr::Lambda>()) {
    std::set<std::string> wanted = free_params(e);
    for (const auto& name : free_names(*n->body)) wanted.insert(name);
    Bindings captured;
    for (const auto& name : wanted) {
      if (b.count(name)) captured[name] = b.at(name);
    }
    ParamSig sig;
    for (const auto& p : n->params) sig.push_back(Param{p, DomainConstraint::any()});
    return Value(make_computed(sig, DomainConstraint::any(), n->body, captured));
  }
  if (auto* n = e.as<Expr::Binary>()) {
    if (n->op == BinaryOp::And) return Value(truth(run(*n->lhs, b, ctx)) && truth(run(*n->rhs, b, ctx)));
    if (n->op == BinaryOp::Or) return Value(truth(run(*n->lhs, b, ctx)) || truth(run(*n->rhs, b, ctx)));
    Value l = run(*n->lhs, b, ctx);
    Value r = run(*n->rhs, b, ctx);
    return binop(n->op, l, r);
  }
  if (auto* n = e.as<Expr::Not>()) return Value(!truth(run(*n->operand, b, ctx)));
  if (auto* n = e.as<Expr::In>()) {
    Value x = run(*n->needle, b, ctx);
    Value h = run(*n->haystack, b, ctx);
    if (h.type() == ValueType::Set) {
      for (const auto& item : h.as_set()) {
        if (same_value(x, item)) return Value(true);
      }
      return Value(false);
    }
    if (h.type() != ValueType::Function) bad_operands("'in' needs a set or function");
    const FunctionValue& f = *h.as_function();
    if (f.arity() != 1) bad_operands("'in' needs a unary function");
    if (!contains(f.sig[0].constraint, x, &ctx)) return Value(false);
    try {
      apply(f, {x}, ctx);
    } catch (const Error& err) {
      if (err.kind() == ErrorKind::UndefinedInput) return Value(false);
      throw;
    }
    return Value(true);
  }
  if (auto* n = e.as<Expr::Record>()) {
    std::vector<std::pair<Key, Value>> fields;
    int lowest = 3;
    for (const auto& [name, fe] : n->fields) {
      Value v = run(*fe, b, ctx);
      int rank = 0;
      if (v.type() == ValueType::Function) {
        Level l = v.as_function()->level;
        rank = l == Level::Tuple ? 1 : l == Level::Relation ? 2 : l == Level::Database ? 3 : 0;
      }
      lowest = std::min(lowest, rank);
      fields.push_back({{Value(name)}, v});
    }
    if (fields.empty()) lowest = 0;
    Level level = lowest == 0 ? Level::Tuple : lowest == 1 ? Level::Relation : Level::Database;
    return Value(make_extensional(text_sig("attr"), DomainConstraint::any(), fields, level));
  }
  if (auto* n = e.as<Expr::SetLit>()) {
    ValueList items;
    for (const auto& i : n->items) items.push_back(run(*i, b, ctx));
    return Value::set(items);
  }
  return run_op(std::get<Expr::Op>(e.node), b, ctx);
}

}  // namespace

Value NaiveEvaluator::evaluate(const Expr& expr, const Bindings& bindings,
                               const Snapshot& snapshot) const {
  Context ctx{snapshot, *this};
  return run(expr, bindings, ctx);
}

const NaiveEvaluator& naive() {
  static const NaiveEvaluator instance;
  return instance;
}

Value eval_naive(const Expr& e, const Snapshot& snapshot, const Bindings& bindings) {
  return naive().evaluate(e, bindings, snapshot);
}

}  // namespace fql::oracle
