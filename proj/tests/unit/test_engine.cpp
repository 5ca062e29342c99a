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
#include "fql/engine.hpp"
#include "fql/error.hpp"
#include "fql/syntax.hpp"

using namespace fql;
using engine::Session;
using engine::Store;
using syntax::parse_expr;

namespace {

ErrorKind error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::EvalError;
}

int64_t balance(const Session& s, int64_t id) {
  return s.read(parse_expr("accounts[" + std::to_string(id) + "].balance")).as_int();
}

void transfer(Session& s, int64_t from, int64_t to, int64_t amount) {
  Value a = s.read(parse_expr("accounts[" + std::to_string(from) + "].balance"));
  Value b = s.read(parse_expr("accounts[" + std::to_string(to) + "].balance"));
  s.set({{Value("accounts")}, {Value(from)}}, {Value("balance")}, Value(a.as_int() - amount));
  s.set({{Value("accounts")}, {Value(to)}}, {Value("balance")}, Value(b.as_int() + amount));
}

std::vector<Value> keys(const Value& rel) {
  std::vector<Value> out;
  for (const auto& [k, v] : rel.as_function()->mappings()) out.push_back(k[0]);
  return out;
}

}  // namespace

TEST_CASE("transfer commits atomically") {
  auto store = std::make_shared<Store>(testing::bank_catalog());
  Session s(store);
  s.begin();
  transfer(s, 42, 84, 100);
  CHECK(balance(s, 42) == 400);
  Session other(store);
  CHECK(balance(other, 42) == 500);  // isolation
  s.commit();
  CHECK(balance(other, 42) == 400);
  CHECK(balance(other, 84) == 300);
  CHECK(store->head_version() == 1);
}

TEST_CASE("rollback and conflicts leave the head untouched") {
  auto store = std::make_shared<Store>(testing::bank_catalog());
  auto before = store->head();
  Session a(store), b(store);
  a.begin();
  transfer(a, 42, 84, 100);
  a.rollback();
  CHECK(store->head() == before);
  CHECK(balance(a, 42) == 500);

  a.begin();
  b.begin();
  transfer(a, 42, 84, 10);
  transfer(b, 42, 84, 20);
  a.commit();
  auto after_a = store->head();
  CHECK(error_of([&] { b.commit(); }) == ErrorKind::WriteConflict);
  CHECK(b.state() == engine::TxState::Aborted);
  CHECK(error_of([&] { b.commit(); }) == ErrorKind::TxStateError);
  CHECK(error_of([&] { (void)b.snapshot(); }) == ErrorKind::TxStateError);
  b.rollback();
  CHECK(store->head() == after_a);
  CHECK(balance(b, 42) == 490);
}

TEST_CASE("transaction state errors") {
  Session s(std::make_shared<Store>(testing::bank_catalog()));
  CHECK(error_of([&] { s.commit(); }) == ErrorKind::TxStateError);
  CHECK(error_of([&] { s.rollback(); }) == ErrorKind::TxStateError);
  s.begin();
  CHECK(error_of([&] { s.begin(); }) == ErrorKind::TxStateError);
  s.commit();  // nothing written
  CHECK(s.store()->head_version() == 0);
}

TEST_CASE("mutations") {
  auto store = std::make_shared<Store>(testing::shop_catalog());
  Session s(store);
  engine::Path customers{{Value("customers")}};
  s.set({{Value("customers")}, {Value(3)}}, {Value("age")}, Value(50));
  CHECK(s.read(parse_expr("customers[3].age")) == Value(50));
  CHECK(store->head_version() == 1);  // autocommit

  Value tom = s.read(parse_expr("{name: 'Tom', age: 42}"));
  s.set(customers, {Value(3)}, tom);
  CHECK(s.read(parse_expr("customers[3].name")) == Value("Tom"));
  CHECK(error_of([&] { s.read(parse_expr("customers[3].city")); }) == ErrorKind::UndefinedInput);

  CHECK(s.add(customers, tom) == Value(4));
  s.remove(customers, {Value(2)});
  CHECK(error_of([&] { s.read(parse_expr("customers[2]")); }) == ErrorKind::UndefinedInput);
  CHECK(error_of([&] { s.remove(customers, {Value(2)}); }) == ErrorKind::UndefinedInput);
  CHECK(error_of([&] { s.set({{Value("customers")}, {Value(2)}}, {Value("age")}, Value(1)); }) ==
        ErrorKind::UndefinedInput);
  CHECK(error_of([&] { s.set(customers, {Value(1), Value(2)}, tom); }) == ErrorKind::ArityError);
  CHECK(error_of([&] { s.set({{Value("nope")}}, {Value(1)}, tom); }) == ErrorKind::NameError);
}

TEST_CASE("add allocates max plus one") {
  Catalog c;
  c.entries["r"] = Value(make_extensional({Param{"k", DomainConstraint::any(BaseType::Int)}},
                                          DomainConstraint::any(), {}, Level::Relation));
  c.entries["named"] = Value(make_extensional(text_sig("k"), DomainConstraint::any(), {},
                                              Level::Relation));
  Session s(std::make_shared<Store>(c));
  CHECK(s.add({{Value("r")}}, Value(true)) == Value(1));
  CHECK(s.add({{Value("r")}}, Value(true)) == Value(2));
  s.set({{Value("r")}}, {Value(10)}, Value(true));
  CHECK(s.add({{Value("r")}}, Value(true)) == Value(11));
  // A text-keyed function has no integer key to continue from.
  CHECK(error_of([&] { s.add({{Value("named")}}, Value(1)); }) == ErrorKind::DomainError);
}

TEST_CASE("dynamic and materialized views") {
  auto store = std::make_shared<Store>(testing::shop_catalog());
  Session s(store);
  s.assign("older", parse_expr("filter(fn(p) => p.age > 42, customers)"), false);
  s.assign("older_copy", parse_expr("copy(filter(fn(p) => p.age > 42, customers))"), true);
  CHECK(keys(s.read(parse_expr("older"))) == std::vector<Value>{Value(1), Value(3)});
  s.add({{Value("customers")}}, s.read(parse_expr("{name: 'Dora', age: 60, city: 'NY'}")));
  CHECK(keys(s.read(parse_expr("older"))) == std::vector<Value>{Value(1), Value(3), Value(4)});
  CHECK(keys(s.read(parse_expr("DB.older_copy"))) == std::vector<Value>{Value(1), Value(3)});
  CHECK(s.read(parse_expr("older")) == s.read(parse_expr("filter(fn(p) => p.age > 42, customers)")));

  CHECK(error_of([&] { s.assign("v", parse_expr("filter(fn(p) => true, v)"), false); }) ==
        ErrorKind::CyclicView);
  s.assign("a", parse_expr("customers"), false);
  s.assign("b", parse_expr("a"), false);
  CHECK(error_of([&] { s.assign("a", parse_expr("DB.b"), false); }) == ErrorKind::CyclicView);
  CHECK(error_of([&] { s.assign("c", parse_expr("join(DB)"), false); }) == ErrorKind::CyclicView);
  CHECK(s.read(parse_expr("b")) == s.read(parse_expr("customers")));  // failed assigns left no trace
  CHECK(error_of([&] { s.set({{Value("older")}}, {Value(9)}, Value(1)); }) ==
        ErrorKind::ReadOnlyTarget);
  CHECK(error_of([&] { s.assign("w", parse_expr("x"), false, {{"x", Value(1)}}); }) ==
        ErrorKind::NameError);
}

TEST_CASE("views inside a transaction see the working copy") {
  auto store = std::make_shared<Store>(testing::shop_catalog());
  Session s(store);
  s.assign("older", parse_expr("filter(fn(p) => p.age > 42, customers)"), false);
  s.begin();
  s.set({{Value("customers")}, {Value(2)}}, {Value("age")}, Value(99));
  CHECK(keys(s.read(parse_expr("older"))).size() == 3);
  Session other(store);
  CHECK(keys(other.read(parse_expr("older"))).size() == 2);
  s.rollback();
}
