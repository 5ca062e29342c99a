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

#include <doctest.h>

#include "../support/fixtures.hpp"
#include "fql/error.hpp"
#include "fql/eval.hpp"
#include "fql/ops.hpp"
#include "fql/oracle.hpp"
#include "fql/syntax.hpp"

using namespace fql;

namespace {

struct Shop {
  std::shared_ptr<const Snapshot> snap = make_snapshot(testing::shop_catalog());

  Value run(const ExprPtr& e) {
    Value fast = interpreter().evaluate(*e, {}, *snap);
    Value slow = oracle::eval_naive(*e, *snap);
    CHECK(fast == slow);
    return fast;
  }

  ErrorKind fails(const ExprPtr& e) {
    ErrorKind a = ErrorKind::EvalError, b = ErrorKind::IoError;
    try {
      interpreter().evaluate(*e, {}, *snap);
      FAIL("interpreter did not raise");
    } catch (const Error& err) {
      a = err.kind();
    }
    try {
      oracle::eval_naive(*e, *snap);
      FAIL("oracle did not raise");
    } catch (const Error& err) {
      b = err.kind();
    }
    CHECK(a == b);
    return a;
  }
};

std::vector<Key> keys(const Value& v) {
  std::vector<Key> out;
  for (const auto& [k, x] : v.as_function()->mappings()) out.push_back(k);
  return out;
}

std::vector<Key> ints(std::initializer_list<int64_t> xs) {
  std::vector<Key> out;
  for (auto x : xs) out.push_back({Value(x)});
  return out;
}

Value member(const Value& dbf, const std::string& name) {
  return dbf.as_function()->mappings().at({Value(name)});
}

Value member_at(const Value& dbf, int64_t key) {
  return dbf.as_function()->mappings().at({Value(key)});
}

ExprPtr gt(const std::string& attribute, int64_t c) {
  return lambda({"t"}, binary(BinaryOp::Gt, attr("t", attribute), lit(Value(c))));
}

ExprPtr subdatabase() {
  return op(OperatorKind::Filter, {},
            {lambda({"kv"}, in(call(param("kv"), {lit(Value(0))}),
                               set_lit({lit(Value("customers")), lit(Value("order")),
                                        lit(Value("products"))}))),
             ref({"DB"})});
}

}  // namespace

TEST_CASE("filter keeps matching tuples") {
  Shop s;
  Value r = s.run(op(OperatorKind::Filter, {}, {gt("age", 42), ref({"customers"})}));
  CHECK(keys(r) == ints({1, 3}));
  Value all = s.run(op(OperatorKind::Filter, {}, {lambda({"t"}, lit(Value(true))), ref({"customers"})}));
  CHECK(all == s.run(ref({"customers"})));
  CHECK(s.fails(op(OperatorKind::Filter, {}, {lambda({"t"}, lit(Value(1))), ref({"customers"})})) ==
        ErrorKind::PredicateError);
  Value two = s.run(op(OperatorKind::Filter, {},
                       {lambda({"kv"}, in(ref({"kv", "key"}), set_lit({lit(Value("order")),
                                                                       lit(Value("products"))}))),
                        ref({"DB"})}));
  CHECK(keys(two) == std::vector<Key>{{Value("order")}, {Value("products")}});
}

TEST_CASE("group, aggregate and their fusion") {
  Shop s;
  OpConfig by_age;
  by_age.by = {"age"};
  Value g = s.run(op(OperatorKind::Group, by_age, {ref({"customers"})}));
  CHECK(keys(g) == ints({30, 45}));
  CHECK(keys(member_at(g, 45)) == ints({1, 3}));

  OpConfig count = by_age;
  count.aggs = {AggSpec{"count", AggKind::Count, ""}};
  OpConfig only_count;
  only_count.aggs = count.aggs;
  Value unfused = s.run(op(OperatorKind::Aggregate, only_count,
                           {op(OperatorKind::Group, by_age, {ref({"customers"})})}));
  Value fused = s.run(op(OperatorKind::GroupAndAggregate, count, {ref({"customers"})}));
  CHECK(fused == unfused);
  Context ctx{*s.snap, interpreter()};
  CHECK(apply(apply(fused, {Value(45)}, ctx), {Value("count")}, ctx) == Value(2));
  CHECK(apply(apply(fused, {Value(45)}, ctx), {Value("age")}, ctx) == Value(45));

  Value big = s.run(op(OperatorKind::Filter, {}, {gt("count", 1), op(OperatorKind::GroupAndAggregate, count, {ref({"customers"})})}));
  CHECK(keys(big) == ints({45}));

  OpConfig global;
  global.aggs = {AggSpec{"min", AggKind::Min, "age"}, AggSpec{"avg", AggKind::Avg, "age"},
                 AggSpec{"sum", AggKind::Sum, "age"}};
  Value one = s.run(op(OperatorKind::GroupAndAggregate, global, {ref({"customers"})}));
  REQUIRE(keys(one).size() == 1);
  CHECK(keys(one)[0].empty());
  Value t = one.as_function()->mappings().begin()->second;
  CHECK(apply(t, {Value("min")}, ctx) == Value(30));
  CHECK(apply(t, {Value("sum")}, ctx) == Value(120));
  CHECK(apply(t, {Value("avg")}, ctx) == Value(40.0));

  OpConfig dup = by_age;
  dup.aggs = {AggSpec{"age", AggKind::Count, ""}};
  CHECK(s.fails(op(OperatorKind::GroupAndAggregate, dup, {ref({"customers"})})) ==
        ErrorKind::UniqueViolation);
  OpConfig missing;
  missing.by = {"zip"};
  CHECK(s.fails(op(OperatorKind::Group, missing, {ref({"customers"})})) == ErrorKind::UndefinedInput);
  OpConfig sum_text;
  sum_text.aggs = {AggSpec{"s", AggKind::Sum, "name"}};
  CHECK(s.fails(op(OperatorKind::GroupAndAggregate, sum_text, {ref({"customers"})})) ==
        ErrorKind::TypeMismatch);
}

TEST_CASE("grouping sets produce one relation per member") {
  Shop s;
  OpConfig cfg;
  cfg.sets = {GroupingMember{{"age"}, {AggSpec{"cc", AggKind::Count, ""}}, "age_cc"},
              GroupingMember{{"age", "name"}, {AggSpec{"cc", AggKind::Count, ""}}, "age_name_cc"},
              GroupingMember{{}, {AggSpec{"min", AggKind::Min, "age"}}, "global_min"}};
  Value gs = s.run(op(OperatorKind::GroupingSets, cfg, {ref({"customers"})}));
  CHECK(keys(gs) == std::vector<Key>{{Value("age_cc")}, {Value("age_name_cc")}, {Value("global_min")}});
  for (const auto& m : cfg.sets) {
    OpConfig alone;
    alone.by = m.by;
    alone.aggs = m.aggs;
    CHECK(member(gs, m.name) == s.run(op(OperatorKind::GroupAndAggregate, alone, {ref({"customers"})})));
  }
  cfg.sets[1].name = "age_cc";
  CHECK(s.fails(op(OperatorKind::GroupingSets, cfg, {ref({"customers"})})) == ErrorKind::UniqueViolation);
}

TEST_CASE("join, reduce and outer marking on the shop") {
  Shop s;
  Value reduced = s.run(op(OperatorKind::ReduceDB, {}, {subdatabase()}));
  CHECK(keys(member(reduced, "customers")) == ints({1, 3}));
  CHECK(keys(member(reduced, "products")) == ints({10, 20}));
  CHECK(member(reduced, "order") == s.run(ref({"order"})));

  Value joined = s.run(op(OperatorKind::Join, {}, {subdatabase()}));
  CHECK(keys(joined) == std::vector<Key>{{Value(1), Value(10)}, {Value(3), Value(20)}});
  CHECK(joined == s.run(op(OperatorKind::Join, {}, {op(OperatorKind::ReduceDB, {}, {subdatabase()})})));
  Context ctx{*s.snap, interpreter()};
  Value row = apply(joined, {Value(1), Value(10)}, ctx);
  CHECK(apply(row, {Value("customers.name")}, ctx) == Value("Alice"));
  CHECK(apply(row, {Value("products.name")}, ctx) == Value("lamp"));
  CHECK(apply(row, {Value("qty")}, ctx) == Value(2));

  OpConfig explicit_on;
  explicit_on.on = std::vector<JoinPair>{{{"customers", "id"}, {"order", "c_id"}},
                                         {{"products", "id"}, {"order", "p_id"}}};
  CHECK(s.run(op(OperatorKind::Join, explicit_on, {subdatabase()})) == joined);

  OpConfig outer;
  outer.outer = {"products"};
  Value marked = s.run(op(OperatorKind::OuterMark, outer, {subdatabase()}));
  Value products = member(marked, "products");
  CHECK(keys(member(products, "inner")) == ints({10, 20}));
  CHECK(keys(member(products, "outer")) == ints({30}));
  CHECK(member(marked, "customers") == s.run(ref({"customers"})));

  OpConfig unknown;
  unknown.outer = {"nope"};
  CHECK(s.fails(op(OperatorKind::OuterMark, unknown, {subdatabase()})) == ErrorKind::UnknownRelation);

  ExprPtr two = record({{"customers", ref({"customers"})}, {"products", ref({"products"})}});
  CHECK(s.fails(op(OperatorKind::Join, {}, {two})) == ErrorKind::DisconnectedSchema);
  OpConfig bad_on;
  bad_on.on = std::vector<JoinPair>{{{"customers", "id"}, {"nope", "id"}}};
  CHECK(s.fails(op(OperatorKind::Join, bad_on, {subdatabase()})) == ErrorKind::UnresolvableCondition);

  ExprPtr single = record({{"customers", ref({"customers"})}});
  CHECK(s.run(op(OperatorKind::Join, {}, {single})) == s.run(ref({"customers"})));
}

TEST_CASE("database set operations") {
  Shop s;
  Value diff = s.run(op(OperatorKind::Difference, {}, {ref({"DB"}), op(OperatorKind::DeepCopy, {}, {ref({"DB"})})}));
  for (const auto& [name, rel] : diff.as_function()->mappings()) {
    CHECK(rel.as_function()->mappings().empty());
  }
  CHECK(s.run(op(OperatorKind::Intersect, {}, {ref({"DB"}), ref({"DB"})})) ==
        s.run(op(OperatorKind::Union, {}, {ref({"DB"}), ref({"DB"})})));

  Catalog changed = testing::shop_catalog();
  Context ctx{*s.snap, interpreter()};
  auto cust = changed.entries["customers"].as_function();
  Mappings m = cust->mappings();
  m[{Value(3)}] = Value(make_tuple({{"name", Value("Carol")}, {"age", Value(46)}, {"city", Value("SF")}}));
  changed.entries["customers"] = Value(make_extensional_unchecked(cust->sig, cust->codomain, m, cust->level));
  auto after = make_snapshot(changed);
  Value d = ops::deep_copy(Value(ops::set_op(OperatorKind::Difference, *s.snap->root(), *after->root(), ctx)));
  CHECK(keys(member(d, "customers")) == ints({3}));
  CHECK(member_at(member(d, "customers"), 3).as_set().size() == 2);
}

TEST_CASE("set operations reject mismatched arities") {
  Shop s;
  using syntax::parse_expr;
  // customers is unary, order binary
  CHECK(s.fails(parse_expr("union({\"r\": customers}, {\"r\": order})")) == ErrorKind::ArityError);
  CHECK(s.fails(parse_expr("minus(DB, group(by=[\"age\", \"city\"], customers))")) == ErrorKind::ArityError);
  // a name the left side cannot hold is still a valid key of the result
  Value u = s.run(parse_expr("union(DB, group(by=[\"age\"], customers))"));
  Context ctx{*s.snap, interpreter()};
  CHECK(apply(u, {Value(45)}, ctx).as_function()->mappings().size() == 2);
  CHECK(u.as_function()->sig[0].constraint.is_unconstrained());
}
