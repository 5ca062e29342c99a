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
#include "fql/optimizer.hpp"
#include "fql/oracle.hpp"
#include "fql/syntax.hpp"

using namespace fql;

namespace {

struct Fixture {
  std::shared_ptr<const Snapshot> snap = make_snapshot(testing::shop_catalog());
  optimizer::Schema schema = optimizer::build_schema(*snap);

  optimizer::Plan plan(const std::string& text) {
    return optimizer::rewrite(syntax::parse_expr(text), &schema);
  }

  std::vector<std::string> rules(const std::string& text) {
    std::vector<std::string> out;
    for (const auto& s : plan(text).trace) out.push_back(s.rule);
    return out;
  }

  /// Both sides agree on value or on error kind.
  void equivalent(const std::string& text) {
    ExprPtr e = syntax::parse_expr(text);
    ExprPtr r = optimizer::rewrite(e, &schema).expr;
    std::optional<Value> a, b;
    std::optional<ErrorKind> ea, eb;
    try {
      a = interpreter().evaluate(*r, {}, *snap);
    } catch (const Error& err) {
      ea = err.kind();
    }
    try {
      b = oracle::eval_naive(*e, *snap);
    } catch (const Error& err) {
      eb = err.kind();
    }
    CHECK_MESSAGE(ea == eb, text);
    if (a && b) CHECK_MESSAGE(*a == *b, text);
  }
};

using V = std::vector<std::string>;

}  // namespace

TEST_CASE("schema extraction") {
  Fixture f;
  const auto* c = f.schema.relation("customers");
  REQUIRE(c);
  CHECK(c->rows == 3);
  CHECK(c->uniform);
  CHECK(c->attrs.at("age").kind == optimizer::AttrInfo::Kind::Int);
  CHECK(c->attrs.at("age").max_abs == 45);
  CHECK(c->key_params == V{"id"});
  auto shadowed = optimizer::build_schema(*f.snap, {"customers"});
  CHECK(shadowed.relation("customers") == nullptr);
}

TEST_CASE("fuse filters") {
  Fixture f;
  std::string text = "filter(fn(p) => p.age > 40, filter(fn(q) => q.city != 'LA', customers))";
  auto plan = f.plan(text);
  REQUIRE(plan.trace.size() == 1);
  CHECK(plan.trace[0].rule == "fuse-filters");
  CHECK(syntax::print(*plan.expr) ==
        "filter(fn(q) => q.city != \"LA\" and q.age > 40, customers)");
  f.equivalent(text);
  // The outer predicate may raise on rows the inner one keeps.
  CHECK(f.rules("filter(fn(p) => p.nope > 1, filter(fn(q) => q.age > 40, customers))").empty());
  CHECK(f.rules("filter(fn(p) => p.name > 1, filter(fn(q) => q.age > 40, customers))").empty());
  // The inner predicate must produce a bool.
  CHECK(f.rules("filter(fn(p) => true, filter(fn(q) => q.age, customers))").empty());
  f.equivalent("filter(fn(p) => p.nope > 1, filter(fn(q) => q.age > 40, customers))");
  f.equivalent("filter(fn(p) => true, filter(fn(q) => q.age, customers))");
}

TEST_CASE("fresh names avoid capture") {
  Fixture f;
  auto plan = f.plan("fn(q) => filter(fn(p) => p.age == q, filter(fn(q) => q.age < 99, customers))");
  REQUIRE(plan.trace.size() == 1);
  CHECK(syntax::print(*plan.expr) ==
        "fn(q) => filter(fn(t1) => t1.age < 99 and t1.age == q, customers)");
  // Ordering against an unknown outer value may raise.
  CHECK(f.rules("fn(q) => filter(fn(p) => p.age > q, filter(fn(r) => r.age < 99, customers))").empty());
}

TEST_CASE("fuse group and aggregate") {
  Fixture f;
  std::string text = "aggregate(n=Count(), m=Max(\"age\"), group(by=[\"city\"], customers))";
  CHECK(f.rules(text) == V{"fuse-group-aggregate"});
  f.equivalent(text);
  f.equivalent("aggregate(n=Count(), city=Max(\"age\"), group(by=[\"city\"], customers))");
  f.equivalent("aggregate(n=Sum(\"name\"), group(by=[\"city\"], customers))");
}

TEST_CASE("push filter below aggregate") {
  Fixture f;
  std::string text =
      "filter(fn(t) => t.age > 40, group_and_aggregate(by=[\"age\"], n=Count(), customers))";
  auto plan = f.plan(text);
  CHECK(f.rules(text) == V{"push-filter-below-aggregate"});
  CHECK(syntax::print(*plan.expr) ==
        "group_and_aggregate(by=[\"age\"], n=Count(), filter(fn(t) => t.age > 40, customers))");
  f.equivalent(text);
  // Reading an aggregate output keeps the filter on top.
  CHECK(f.rules("filter(fn(t) => t.n > 1, group_and_aggregate(by=[\"age\"], n=Count(), customers))")
            .empty());
  // An aggregate that raises on the dropped groups blocks the rewrite.
  std::string raising =
      "filter(fn(t) => t.age > 40, group_and_aggregate(by=[\"age\"], s=Sum(\"name\"), customers))";
  CHECK(f.rules(raising).empty());
  f.equivalent(raising);
}

TEST_CASE("push filter into join") {
  Fixture f;
  std::string text =
      "filter(fn(t) => t.price > 100, join({customers: customers, order: order, products: "
      "products}))";
  auto plan = f.plan(text);
  CHECK(f.rules(text) == V{"push-filter-into-join"});
  f.equivalent(text);
  // `name` exists in two members, so it is not pushed.
  CHECK(f.rules("filter(fn(t) => t.age > 40 and t.qty > 0, join({customers: customers, order: "
                "order, products: products}))")
            .empty());
  f.equivalent("filter(fn(t) => t.age > 40 and t.qty > 0, join({customers: customers, order: "
               "order, products: products}))");
  f.equivalent("filter(fn(t) => t.age > 40, join({customers: customers, order: order}))");
}

TEST_CASE("drop unreachable members") {
  Fixture f;
  CHECK(f.rules("{a: customers, b: products}(\"a\")") == V{"drop-unreachable-members"});
  CHECK(f.rules("{a: customers, b: 1 / 0}(\"a\")").empty());
  CHECK(syntax::print(*f.plan("{a: customers, b: 1 / 0}(\"a\")").expr) ==
        "{\"a\": customers, \"b\": 1 / 0}.a");
  f.equivalent("{a: customers, b: 1 / 0}(\"a\")");
  std::string kv = "filter(fn(kv) => kv[0] in [\"a\"], {a: customers, b: products})";
  CHECK(syntax::print(*f.plan(kv).expr) == "{\"a\": customers}");
  f.equivalent(kv);
  std::string db = "join(filter(fn(kv) => kv[0] in [\"customers\", \"order\"], DB))";
  CHECK(syntax::print(*f.plan(db).expr) ==
        "join({\"customers\": DB.customers, \"order\": DB.order})");
  f.equivalent(db);
}

TEST_CASE("constant folding") {
  Fixture f;
  CHECK(syntax::print(*f.plan("1 + 2 * 3").expr) == "7");
  CHECK(syntax::print(*f.plan("false and x").expr) == "false");
  CHECK(f.rules("true and x").empty());
  CHECK(f.rules("1 / 0").empty());
  CHECK(f.rules("9223372036854775807 + 1").empty());
  CHECK(syntax::print(*f.plan("not (1 < 2)").expr) == "false");
  f.equivalent("true and 3");
}

TEST_CASE("explain and budget") {
  Fixture f;
  CHECK(optimizer::explain(f.plan("customers")) == "plan: customers\nno rewrites\n");
  std::string text = "filter(fn(p) => p.age > 40, filter(fn(q) => q.age < 50, customers))";
  std::string out = optimizer::explain(f.plan(text));
  CHECK(out.find("1. fuse-filters ") != std::string::npos);
  std::string deep = "0";
  for (int i = 0; i < 80; ++i) deep = "(" + deep + " + 1)";
  auto plan = f.plan(deep);
  CHECK(plan.trace.size() == optimizer::kRewriteBudget);
  CHECK(plan.budget_exceeded);
}
