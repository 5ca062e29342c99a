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

#include "checks.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "fixtures.hpp"
#include "fql/engine.hpp"
#include "fql/error.hpp"
#include "fql/eval.hpp"
#include "fql/ops.hpp"
#include "fql/optimizer.hpp"
#include "fql/oracle.hpp"
#include "fql/persist.hpp"
#include "fql/runner.hpp"
#include "fql/syntax.hpp"
#include "generators.hpp"

namespace fql::testing {

namespace {

using syntax::parse_expr;

/// A value or the kind of error that replaced it.
struct Result {
  std::optional<Value> value;
  std::optional<ErrorKind> error;

  bool operator==(const Result& o) const {
    if (error || o.error) return error == o.error;
    return *value == *o.value;
  }
  std::string str() const {
    return error ? std::string("error ") + error_name(*error) : debug_string(*value);
  }
};

template <typename F>
Result attempt(F&& f) {
  try {
    return Result{f(), std::nullopt};
  } catch (const Error& e) {
    return Result{std::nullopt, e.kind()};
  }
}

Result run(const ExprPtr& e, const Snapshot& snap, const Bindings& b = {}) {
  return attempt([&] { return interpreter().evaluate(*e, b, snap); });
}

Result run_naive(const ExprPtr& e, const Snapshot& snap, const Bindings& b = {}) {
  return attempt([&] { return oracle::eval_naive(*e, snap, b); });
}

std::set<Value, ValueLess> keys_of(const Value& f) {
  std::set<Value, ValueLess> out;
  for (const auto& [k, v] : f.as_function()->mappings()) out.insert(k.size() == 1 ? k[0] : Value::set(k));
  return out;
}

std::set<Value, ValueLess> ints(std::initializer_list<int> xs) {
  std::set<Value, ValueLess> out;
  for (int x : xs) out.insert(Value(x));
  return out;
}

std::string show_keys(const std::set<Value, ValueLess>& ks) {
  std::string s = "{";
  for (const auto& k : ks) s += (s.size() > 1 ? "," : "") + debug_string(k);
  return s + "}";
}

/// A database function over the catalog's stored relations.
Value as_database(const Catalog& c) {
  Mappings m;
  for (const auto& [name, v] : c.entries) m.emplace(Key{Value(name)}, v);
  return Value(make_extensional_unchecked(text_sig("name"), DomainConstraint::any(), std::move(m),
                                          Level::Database));
}

bool all_members_empty(const Value& db) {
  for (const auto& [k, v] : db.as_function()->mappings()) {
    if (!v.as_function()->mappings().empty()) return false;
  }
  return true;
}

}  // namespace

// ---------------------------------------------------------------------------

Outcome check_example_functions() {
  Outcome o;
  ExampleFunctions f = example_functions();
  auto snap = make_snapshot(example_catalog());
  Context ctx{*snap, interpreter()};
  auto get = [&](const Value& fn, const ValueList& args) { return apply(fn, args, ctx); };

  if (get(f.t1, {Value("foo")}) != Value(12)) o.fail("t1(\"foo\") != 12");
  if (get(get(f.R4, {Value(3)}), {Value("foo")}) != Value(25)) o.fail("R4(3)(\"foo\") != 25");
  Value r10 = get(get(f.R4, {Value(10)}), {Value("foo")});
  if (!r10.is_int() || r10.as_int() != 420) o.fail("R4(10)(\"foo\") = " + debug_string(r10));
  Result r1 = attempt([&] { return get(f.R1, {Value(2)}); });
  if (r1.error != ErrorKind::UndefinedInput) o.fail("R1(2) gave " + r1.str());

  // The same through the query language, on both evaluators.
  Bindings b = f.bindings();
  std::vector<std::pair<std::string, Result>> queries = {
      {"t1.foo", Result{Value(12), {}}},
      {"R4(3).foo", Result{Value(25), {}}},
      {"R4(10).foo", Result{Value(420), {}}},
      {"R1(2)", Result{std::nullopt, ErrorKind::UndefinedInput}},
      {"R2(25).name", Result{Value("Bob"), {}}},
  };
  for (const auto& [text, expected] : queries) {
    ExprPtr e = parse_expr(text);
    Result a = run(e, *snap, b), n = run_naive(e, *snap, b);
    if (!(a == expected) || !(n == expected)) {
      o.fail(text + ": engine " + a.str() + ", oracle " + n.str());
    }
  }
  if (o.pass) o.detail = "t1(foo)=12, R4(3)(foo)=25, R4(10)(foo)=420, R1(2) UndefinedInput";
  return o;
}

// ---------------------------------------------------------------------------

Outcome check_optimizer_soundness(uint64_t seed, int expressions, int databases, bool require_coverage) {
  Outcome o;
  Rng qrng(seed), drng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<ExprPtr> queries;
  for (int i = 0; i < expressions; ++i) queries.push_back(random_query(qrng));
  // one fixed shape per pushdown rule, on top of the random ones
  for (const char* probe : {"filter(fn(t) => t.w >= 1, group_and_aggregate(by=[\"w\"], n=Count(), link))",
                            "filter(fn(t) => t.w == 2, join({\"r0\": r0, \"link\": link}, on=[[r0.id, link.x]]))"}) {
    queries.push_back(parse_expr(probe));
  }

  std::map<std::string, int> fired;
  int rewritten = 0, errors = 0, values = 0, mismatches = 0;
  for (int d = 0; d < databases; ++d) {
    auto snap = make_snapshot(random_catalog(drng));
    optimizer::Schema schema = optimizer::build_schema(*snap);
    for (const auto& e : queries) {
      optimizer::Plan plan = optimizer::rewrite(e, &schema);
      if (!plan.trace.empty()) ++rewritten;
      for (const auto& s : plan.trace) ++fired[s.rule];
      Result got = run(plan.expr, *snap);
      Result want = run_naive(e, *snap);
      (want.error ? errors : values)++;
      if (!(got == want)) {
        if (++mismatches <= 3) {
          o.fail("db " + std::to_string(d) + ": " + syntax::print(*e) + " -> " +
                 syntax::print(*plan.expr) + ": engine " + got.str() + ", oracle " + want.str());
        }
      }
    }
  }
  for (const char* rule : {"constant-fold", "drop-unreachable-members", "fuse-group-aggregate",
                           "fuse-filters", "push-filter-below-aggregate", "push-filter-into-join"}) {
    if (require_coverage && !fired.count(rule)) o.fail(std::string("rule never fired: ") + rule);
  }
  if (values == 0 || errors == 0) o.fail("generator produced only values or only errors");
  if (mismatches > 3) o.fail(std::to_string(mismatches) + " mismatches in total");
  if (o.pass) {
    std::ostringstream s;
    s << expressions << " random and 2 fixed expressions x " << databases << " databases: " << values << " values and "
      << errors << " errors agree; " << rewritten << " plans rewritten (";
    bool first = true;
    for (const auto& [rule, n] : fired) {
      s << (first ? "" : ", ") << rule << " " << n;
      first = false;
    }
    s << ")";
    o.detail = s.str();
  }
  return o;
}

// ---------------------------------------------------------------------------

Outcome check_fusion_law(uint64_t seed, int relations) {
  Outcome o;
  Rng rng(seed);
  auto snap = make_snapshot(Catalog{});
  const std::vector<std::string> attrs = {"a", "b", "c", "d"};
  int compared_values = 0;
  for (int i = 0; i < relations; ++i) {
    Value r = random_relation(rng);
    // mostly attributes every tuple has, so that most cases produce values
    std::vector<std::string> common;
    for (const auto& a : attrs) {
      bool everywhere = true;
      for (const auto& [k, row] : r.as_function()->mappings()) {
        everywhere = everywhere && row.as_function()->mappings().count(Key{Value(a)});
      }
      if (everywhere || std::bernoulli_distribution(0.1)(rng)) common.push_back(a);
    }
    if (common.empty()) common.push_back("a");
    auto some_attr = [&] { return common[std::uniform_int_distribution<size_t>(0, common.size() - 1)(rng)]; };
    OpConfig group_cfg, agg_cfg, fused;
    for (const auto& a : common) {
      if (std::bernoulli_distribution(0.4)(rng)) group_cfg.by.push_back(a);
    }
    int n = std::uniform_int_distribution<int>(1, 4)(rng);
    for (int k = 0; k < n; ++k) {
      auto kind = static_cast<AggKind>(std::uniform_int_distribution<int>(0, 4)(rng));
      std::string attribute = kind == AggKind::Count ? "" : some_attr();
      agg_cfg.aggs.push_back(AggSpec{"o" + std::to_string(k), kind, attribute});
    }
    fused.by = group_cfg.by;
    fused.aggs = agg_cfg.aggs;
    ExprPtr stepwise = op(OperatorKind::Aggregate, agg_cfg, {op(OperatorKind::Group, group_cfg, {ref({"R"})})});
    ExprPtr one_step = op(OperatorKind::GroupAndAggregate, fused, {ref({"R"})});
    Bindings b{{"R", r}};
    Result a = run(stepwise, *snap, b), f = run(one_step, *snap, b), n1 = run_naive(one_step, *snap, b);
    if (!(a == f) || !(f == n1)) {
      o.fail(syntax::print(*one_step) + " on relation " + std::to_string(i) + ": stepwise " + a.str() +
             ", fused " + f.str() + ", oracle " + n1.str());
      break;
    }
    if (!a.error) ++compared_values;
  }
  if (compared_values == 0) o.fail("no relation produced a value");
  if (o.pass) {
    o.detail = std::to_string(relations) + " relations, " + std::to_string(compared_values) +
               " equal values, the rest equal errors";
  }
  return o;
}

// ---------------------------------------------------------------------------

namespace {

Catalog random_shop(Rng& rng) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  Catalog c;
  std::vector<std::pair<Key, Value>> customers, products, orders;
  std::set<int> cids, pids;
  for (int i = pick(0, 10); i > 0; --i) cids.insert(pick(1, 12));
  for (int i = pick(0, 10); i > 0; --i) pids.insert(10 * pick(1, 12));
  for (int id : cids) {
    customers.push_back({{Value(id)}, Value(make_tuple({{"age", Value(pick(20, 60))}}))});
  }
  for (int id : pids) {
    products.push_back({{Value(id)}, Value(make_tuple({{"price", Value(pick(1, 99))}}))});
  }
  std::set<std::pair<int, int>> pairs;
  for (int i = pick(0, 12); i > 0; --i) pairs.insert({pick(1, 13), 10 * pick(1, 13)});
  for (auto [cid, pid] : pairs) {
    orders.push_back({{Value(cid), Value(pid)}, Value(make_tuple({{"qty", Value(pick(1, 5))}}))});
  }
  auto rel = [](ParamSig sig, std::vector<std::pair<Key, Value>> rows) {
    return Value(make_extensional(std::move(sig), DomainConstraint::any(), std::move(rows), Level::Relation));
  };
  c.entries["customers"] = rel({Param{"id", DomainConstraint::any(BaseType::Int)}}, customers);
  c.entries["products"] = rel({Param{"id", DomainConstraint::any(BaseType::Int)}}, products);
  c.entries["order"] = rel({Param{"c_id", DomainConstraint::any(BaseType::Int)},
                            Param{"p_id", DomainConstraint::any(BaseType::Int)}},
                           orders);
  c.relationships.push_back(RelationshipDecl{"order", {{"customers", "id"}, {"products", "id"}}, "order", false});
  return c;
}

}  // namespace

Outcome check_subdatabase_pipeline(uint64_t seed, int databases) {
  Outcome o;
  auto snap = make_snapshot(shop_catalog());
  auto eval = [&](const std::string& text) {
    Result r = run(parse_expr(text), *snap);
    Result n = run_naive(parse_expr(text), *snap);
    if (!(r == n)) o.fail(text + ": engine " + r.str() + ", oracle " + n.str());
    if (r.error) {
      o.fail(text + " raised " + r.str());
      return Value(0);
    }
    return *r.value;
  };
  Value reduced = eval("reduce_DB(DB)");
  if (!o.pass) return o;
  Context ctx{*snap, interpreter()};
  auto member = [&](const Value& db, const char* n) { return apply(db, {Value(n)}, ctx); };
  if (keys_of(member(reduced, "customers")) != ints({1, 3})) {
    o.fail("reduced customers " + show_keys(keys_of(member(reduced, "customers"))));
  }
  if (keys_of(member(reduced, "products")) != ints({10, 20})) {
    o.fail("reduced products " + show_keys(keys_of(member(reduced, "products"))));
  }
  Value joined = eval("join(DB)");
  if (joined.is_function() && joined.as_function()->mappings().size() != 2) {
    o.fail("join has " + std::to_string(joined.as_function()->mappings().size()) + " tuples");
  }
  if (eval("join(reduce_DB(DB))") != joined) o.fail("join(reduce_DB(D)) != join(D)");
  Value marked = eval("subdatabase(outer=[\"products\"], DB)");
  if (o.pass) {
    Value products = member(marked, "products");
    if (keys_of(member(products, "inner")) != ints({10, 20})) o.fail("inner products differ");
    if (keys_of(member(products, "outer")) != ints({30})) o.fail("outer products differ");
  }
  if (!o.pass) return o;

  // inner and outer partition every marked relation; inner is what reduce keeps
  Rng rng(seed);
  for (int i = 0; i < databases && o.pass; ++i) {
    auto s = make_snapshot(random_shop(rng));
    Context c{*s, interpreter()};
    std::vector<std::string> outer = {"products"};
    if (i % 2) outer.push_back("customers");
    if (i % 5 == 0) outer = {"order"};
    OpConfig cfg;
    cfg.outer = outer;
    ExprPtr e = op(OperatorKind::OuterMark, cfg, {ref({"DB"})});
    Result m = run(e, *s), mn = run_naive(e, *s);
    Result red = run(parse_expr("reduce_DB(DB)"), *s);
    if (!(m == mn) || m.error || red.error) {
      o.fail("database " + std::to_string(i) + ": " + m.str() + " / " + mn.str() + " / " + red.str());
      break;
    }
    for (const auto& name : {"customers", "order", "products"}) {
      Value original = s->catalog().entries.at(name);
      Value got = apply(*m.value, {Value(name)}, c);
      if (std::find(outer.begin(), outer.end(), name) == outer.end()) {
        if (got != original) o.fail(std::string("unmarked ") + name + " changed");
        continue;
      }
      const Mappings& in_rows = apply(got, {Value("inner")}, c).as_function()->mappings();
      const Mappings& out_rows = apply(got, {Value("outer")}, c).as_function()->mappings();
      Mappings merged = in_rows;
      for (const auto& [k, v] : out_rows) {
        if (!merged.emplace(k, v).second) o.fail(std::string("inner and outer overlap in ") + name);
      }
      if (merged != original.as_function()->mappings()) o.fail(std::string("inner + outer != ") + name);
      if (in_rows != apply(*red.value, {Value(name)}, c).as_function()->mappings()) {
        o.fail(std::string("inner != reduce_DB for ") + name);
      }
    }
    if (!o.pass) o.detail += " (database " + std::to_string(i) + ")";
  }
  if (o.pass) {
    o.detail = "reduce_DB: customers {1,3}, products {10,20}; join: 2 tuples, join(reduce_DB(D)) == join(D); "
               "products inner {10,20}, outer {30}; partition law on " +
               std::to_string(databases) + " databases";
  }
  return o;
}

// ---------------------------------------------------------------------------

namespace {

/// Every value reachable from v, functions expanded.
void scan(const Value& v, const Context& ctx, int& seen, Outcome& o) {
  ++seen;
  switch (v.type()) {
    case ValueType::Int:
    case ValueType::Float:
    case ValueType::Text:
    case ValueType::Bool: return;
    case ValueType::Set:
      for (const auto& x : v.as_set()) scan(x, ctx, seen, o);
      return;
    case ValueType::Function:
      for (const auto& [k, x] : ops::materialize(*v.as_function(), ctx)) {
        for (const auto& part : k) scan(part, ctx, seen, o);
        scan(x, ctx, seen, o);
      }
      return;
  }
  o.fail("value of unknown type");
}

// The value type has exactly these alternatives; none of them is a null.
static_assert(static_cast<int>(ValueType::Int) == 0 && static_cast<int>(ValueType::Set) == 5);

}  // namespace

Outcome check_grouping_sets() {
  Outcome o;
  auto snap = make_snapshot(shop_catalog());
  Context ctx{*snap, interpreter()};
  const std::string text =
      "grouping_sets((by=[\"age\"], count=Count(), name=\"age_cc\"),"
      " (by=[\"age\", \"name\"], count=Count(), name=\"age_name_cc\"),"
      " (by=[], min=Min(\"age\"), name=\"global_min\"), customers)";
  ExprPtr e = parse_expr(text);
  Result r = run(e, *snap), n = run_naive(e, *snap);
  if (r.error || !(r == n)) {
    o.fail("grouping sets: engine " + r.str() + ", oracle " + n.str());
    return o;
  }
  std::set<std::string> names;
  for (const auto& [k, v] : r.value->as_function()->mappings()) names.insert(k[0].as_text());
  if (names != std::set<std::string>{"age_cc", "age_name_cc", "global_min"}) o.fail("member names differ");

  const std::map<std::string, std::string> standalone = {
      {"age_cc", "group_and_aggregate(by=[\"age\"], count=Count(), customers)"},
      {"age_name_cc", "group_and_aggregate(by=[\"age\", \"name\"], count=Count(), customers)"},
      {"global_min", "group_and_aggregate(by=[], min=Min(\"age\"), customers)"},
  };
  const std::map<std::string, std::set<std::string>> columns = {
      {"age_cc", {"age", "count"}}, {"age_name_cc", {"age", "name", "count"}}, {"global_min", {"min"}}};
  for (const auto& [name, q] : standalone) {
    Value got = apply(*r.value, {Value(name)}, ctx);
    Result alone = run(parse_expr(q), *snap);
    if (alone.error || got != *alone.value) o.fail(name + " differs from " + q);
    for (const auto& [k, row] : got.as_function()->mappings()) {
      std::set<std::string> attrs;
      for (const auto& [ak, av] : row.as_function()->mappings()) attrs.insert(ak[0].as_text());
      if (attrs != columns.at(name)) o.fail(name + " row has padded or missing attributes");
    }
  }
  int seen = 0;
  scan(*r.value, ctx, seen, o);
  if (o.pass) {
    o.detail = "members {age_cc, age_name_cc, global_min}, each equal to its standalone query; " +
               std::to_string(seen) + " values scanned, none null-like";
  }
  return o;
}

// ---------------------------------------------------------------------------

Outcome check_set_operations(uint64_t seed, int pairs) {
  Outcome o;
  {
    auto snap = make_snapshot(shop_catalog());
    Context ctx{*snap, interpreter()};
    Value copy = *run(parse_expr("deep_copy(DB)"), *snap).value;
    Bindings b{{"C", copy}};
    Result d = run(parse_expr("difference(DB, C)"), *snap, b);
    if (d.error || !all_members_empty(*d.value)) o.fail("difference(DB, deep_copy(DB)) not empty: " + d.str());
    b["C"] = engine::updated(copy, engine::Path{Key{Value("customers")}, Key{Value(2)}}, Key{Value("age")}, Value(31), ctx);
    d = run(parse_expr("difference(DB, C)"), *snap, b);
    if (d.error) {
      o.fail("difference after update: " + d.str());
    } else {
      for (const auto& [k, rel] : d.value->as_function()->mappings()) {
        auto ks = keys_of(rel);
        bool expect_key = k[0].as_text() == "customers";
        if (expect_key ? ks != ints({2}) : !ks.empty()) {
          o.fail("difference after update has " + k[0].as_text() + " " + show_keys(ks));
        }
      }
    }
  }

  Rng rng(seed);
  auto snap = make_snapshot(Catalog{});
  int conflicts = 0;
  for (int i = 0; i < pairs && o.pass; ++i) {
    Catalog ca = random_catalog(rng);
    Catalog cb = perturbed(rng, ca);
    Bindings b{{"A", as_database(ca)}, {"B", as_database(cb)}};
    auto q = [&](const std::string& text) { return run(parse_expr(text), *snap, b); };
    auto same = [&](const std::string& x, const std::string& y) {
      Result rx = q(x), ry = q(y);
      if (rx.error || !(rx == ry)) o.fail(x + " = " + rx.str() + " but " + y + " = " + ry.str());
    };
    auto empty = [&](const std::string& x) {
      Result r = q(x);
      if (r.error || !all_members_empty(*r.value)) o.fail(x + " is not empty: " + r.str());
    };
    empty("minus(A, A)");
    empty("difference(A, A)");
    same("intersect(A, A)", "A");
    same("union(A, A)", "A");
    same("intersect(A, B)", "intersect(B, A)");
    same("union(minus(A, B), intersect(A, B))", "A");
    same("union(minus(B, A), intersect(A, B))", "B");
    same("minus(A, minus(A, B))", "intersect(A, B)");

    Result d = q("difference(A, B)"), ab = q("minus(A, B)"), ba = q("minus(B, A)");
    if (d.error || ab.error || ba.error) {
      o.fail("difference or minus raised");
      break;
    }
    Context ctx{*snap, interpreter()};
    bool equal_dbs = b["A"] == b["B"];
    if (all_members_empty(*d.value) != equal_dbs) o.fail("difference empty iff equal violated");
    for (const auto& [k, rel] : d.value->as_function()->mappings()) {
      auto expected = keys_of(apply(*ab.value, {k[0]}, ctx));
      for (const auto& x : keys_of(apply(*ba.value, {k[0]}, ctx))) expected.insert(x);
      if (keys_of(rel) != expected) o.fail("difference keys != minus keys both ways in " + k[0].as_text());
    }

    bool conflict = false;
    for (const auto& [name, rel] : ca.entries) {
      auto it = cb.entries.find(name);
      if (it == cb.entries.end()) continue;
      for (const auto& [key, row] : rel.as_function()->mappings()) {
        auto other = it->second.as_function()->mappings().find(key);
        if (other != it->second.as_function()->mappings().end() && other->second != row) conflict = true;
      }
    }
    Result u = q("union(A, B)");
    if (conflict) {
      ++conflicts;
      if (u.error != ErrorKind::UniqueViolation) o.fail("conflicting union gave " + u.str());
    } else {
      same("union(A, B)", "union(B, A)");
      same("minus(union(A, B), A)", "minus(B, A)");
    }
    if (!o.pass) o.detail += " (pair " + std::to_string(i) + ")";
  }
  if (o.pass) {
    o.detail = "difference(DB, deep_copy(DB)) empty; one update shows exactly customers {2}; identities on " +
               std::to_string(pairs) + " pairs (" + std::to_string(conflicts) +
               " with conflicting unions raising UniqueViolation)";
  }
  return o;
}

// ---------------------------------------------------------------------------

Outcome check_transactions(uint64_t seed) {
  Outcome o;
  using engine::Session;
  using engine::Store;
  auto balance = [](const Session& s, int id) {
    return s.read(parse_expr("accounts[" + std::to_string(id) + "].balance")).as_int();
  };

  {
    auto store = std::make_shared<Store>(bank_catalog());
    std::ostringstream out, err;
    surface::Runner runner(store, out);
    auto status = runner.run(
        "begin()\naccounts: RelationF = DB.accounts\naccounts[42]['balance'] -= 100\n"
        "accounts[84]['balance'] += 100\ncommit()\n",
        err);
    Session s(store);
    if (status != surface::Status::Ok) o.fail("transfer script: " + err.str());
    if (balance(s, 42) != 400 || balance(s, 84) != 300) {
      o.fail("transfer left " + std::to_string(balance(s, 42)) + "/" + std::to_string(balance(s, 84)));
    }
  }

  // concurrent transfers with retry
  Rng rng(seed);
  int threads = std::uniform_int_distribution<int>(2, 8)(rng);
  const int transfers = 100;
  const int accounts = 5;
  Catalog c;
  std::vector<std::pair<Key, Value>> rows;
  for (int i = 0; i < accounts; ++i) {
    rows.push_back({{Value(i)}, Value(make_tuple({{"balance", Value(1000)}}))});
  }
  c.entries["accounts"] = Value(make_extensional({Param{"id", DomainConstraint::any(BaseType::Int)}},
                                                 DomainConstraint::any(), rows, Level::Relation));
  auto store = std::make_shared<Store>(c);
  int64_t start_version = store->head_version();
  std::atomic<int> next{0}, conflicts{0}, failures{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      Rng local(seed + 1 + t);
      Session s(store);
      for (int n = next++; n < transfers; n = next++) {
        int from = std::uniform_int_distribution<int>(0, accounts - 1)(local);
        int to = (from + std::uniform_int_distribution<int>(1, accounts - 1)(local)) % accounts;
        int amount = std::uniform_int_distribution<int>(1, 50)(local);
        while (true) {
          try {
            s.begin();
            int64_t a = balance(s, from), b = balance(s, to);
            std::this_thread::yield();
            s.set(engine::Path{Key{Value("accounts")}, Key{Value(from)}}, Key{Value("balance")}, Value(a - amount));
            s.set(engine::Path{Key{Value("accounts")}, Key{Value(to)}}, Key{Value("balance")}, Value(b + amount));
            s.commit();
            break;
          } catch (const Error& e) {
            if (e.kind() != ErrorKind::WriteConflict) {
              ++failures;
              return;
            }
            ++conflicts;
            s.rollback();
          }
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  Session reader(store);
  int64_t total = 0;
  for (int i = 0; i < accounts; ++i) total += balance(reader, i);
  if (failures) o.fail("a transfer failed with something other than WriteConflict");
  if (total != 1000 * accounts) o.fail("total became " + std::to_string(total));
  if (store->head_version() - start_version != transfers) {
    o.fail(std::to_string(store->head_version() - start_version) + " commits for " +
           std::to_string(transfers) + " transfers");
  }

  // rollback and conflict leave the stored text unchanged
  {
    auto bank = std::make_shared<Store>(bank_catalog());
    auto text = [&] { return persist::store_fdb(bank->head()->catalog()); };
    std::string before = text();
    Session a(bank), b(bank);
    a.begin();
    a.set(engine::Path{Key{Value("accounts")}, Key{Value(42)}}, Key{Value("balance")}, Value(0));
    a.rollback();
    if (text() != before) o.fail("rollback changed the store");
    a.begin();
    b.begin();
    a.set(engine::Path{Key{Value("accounts")}, Key{Value(42)}}, Key{Value("balance")}, Value(1));
    b.set(engine::Path{Key{Value("accounts")}, Key{Value(84)}}, Key{Value("balance")}, Value(2));
    a.commit();
    std::string after_a = text();
    Result r = attempt([&] {
      b.commit();
      return Value(true);
    });
    if (r.error != ErrorKind::WriteConflict) o.fail("second committer got " + r.str());
    if (text() != after_a) o.fail("conflicting commit changed the store");
    if (after_a == before) o.fail("first commit did not land");
  }
  if (o.pass) {
    o.detail = "transfer 500/200 -> 400/300; " + std::to_string(threads) + " sessions, " +
               std::to_string(transfers) + " transfers, " + std::to_string(conflicts.load()) +
               " conflicts retried, total conserved; rollback and conflict leave store_fdb unchanged";
  }
  return o;
}

// ---------------------------------------------------------------------------

Outcome check_views() {
  Outcome o;
  auto store = std::make_shared<engine::Store>(shop_catalog());
  engine::Session s(store);
  s.assign("older", parse_expr("filter(fn(p) => p.age > 42, customers)"), false);
  s.assign("older_copy", parse_expr("copy(filter(fn(p) => p.age > 42, customers))"), true);
  s.set(engine::Path{Key{Value("customers")}}, Key{Value(4)}, Value(make_tuple({{"age", Value(70)}, {"name", Value("Dan")}})));
  auto keys = [&](const char* n) { return keys_of(s.read(parse_expr(n))); };
  if (keys("older") != ints({1, 3, 4})) o.fail("dynamic view shows " + show_keys(keys("older")));
  if (keys("older_copy") != ints({1, 3})) o.fail("materialized view shows " + show_keys(keys("older_copy")));
  Result cyc = attempt([&] {
    s.assign("loop", parse_expr("filter(fn(p) => true, loop)"), false);
    return Value(true);
  });
  if (cyc.error != ErrorKind::CyclicView) o.fail("self-reference gave " + cyc.str());
  if (o.pass) o.detail = "dynamic view sees the insert, materialized view does not, self-reference is CyclicView";
  return o;
}

// ---------------------------------------------------------------------------

Outcome check_surface(uint64_t seed, const std::string& tests_dir, int asts) {
  namespace fs = std::filesystem;
  Outcome o;
  Rng rng(seed);
  for (int i = 0; i < asts && o.pass; ++i) {
    ExprPtr e = random_ast(rng);
    std::string text = syntax::print(*e);
    try {
      ExprPtr back = parse_expr(text);
      if (!(*back == *e)) o.fail("parse(print(e)) != e for " + text + " (reparsed as " + syntax::print(*back) + ")");
    } catch (const Error& err) {
      o.fail("printed text does not parse: " + text + ": " + err.what());
    }
  }

  int scripts = 0;
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(fs::path(tests_dir) / "scripts")) {
    if (entry.path().extension() == ".fql") paths.push_back(entry.path());
  }
  std::sort(paths.begin(), paths.end());
  for (const auto& p : paths) {
    std::string stem = p.stem().string();
    fs::path db = fs::path(tests_dir) / "data" / (stem == "transfer" ? "bank.fdb" : "shop.fdb");
    auto store = std::make_shared<engine::Store>(persist::load_file(db.string()));
    std::ostringstream out, err;
    surface::Runner runner(store, out);
    auto status = runner.run(persist::read_text(p.string()), err);
    fs::path golden = p;
    golden.replace_extension(".out");
    if (status != surface::Status::Ok) o.fail(stem + ": " + err.str());
    if (!fs::exists(golden) || out.str() != persist::read_text(golden.string())) {
      o.fail(stem + ": stdout differs from the golden file");
    }
    ++scripts;
  }
  if (scripts < 10) o.fail("expected 10 scripts, found " + std::to_string(scripts));

  int stores = 0;
  auto round_trip = [&](const std::string& label, const std::string& once) {
    std::string twice = persist::store_fdb(persist::load_fdb(once));
    if (twice != once) o.fail(label + ": store(load(store)) differs");
    ++stores;
  };
  for (const auto& entry : fs::directory_iterator(fs::path(tests_dir) / "data")) {
    if (entry.path().extension() != ".fdb") continue;
    round_trip(entry.path().filename().string(),
               persist::store_fdb(persist::load_file(entry.path().string())));
  }
  round_trip("shop fixture", persist::store_fdb(shop_catalog()));
  round_trip("bank fixture", persist::store_fdb(bank_catalog()));
  Rng crng(seed + 7);
  for (int i = 0; i < 50; ++i) round_trip("random catalog " + std::to_string(i), persist::store_fdb(random_catalog(crng)));

  if (o.pass) {
    o.detail = std::to_string(asts) + " ASTs round-trip; " + std::to_string(scripts) +
               " scripts match their golden stdout; " + std::to_string(stores) +
               " stores are byte-identical after store, load, store";
  }
  return o;
}

}  // namespace fql::testing
