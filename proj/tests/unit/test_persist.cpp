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

#include <cmath>
#include <cstdio>

#include "../support/fixtures.hpp"
#include "fql/engine.hpp"
#include "fql/error.hpp"
#include "fql/eval.hpp"
#include "fql/persist.hpp"
#include "fql/syntax.hpp"

using namespace fql;
using persist::load_fdb;
using persist::store_fdb;

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

const char* kShop =
    "fdb 1\n"
    "relation customers(id: int)\n"
    "row 1 -> {age=45, city=\"NY\", name=\"Alice\"}\n"
    "row 2 -> {age=30, city=\"LA\", name=\"Bob\"}\n"
    "row 3 -> {age=45, city=\"SF\", name=\"Carol\"}\n"
    "end\n"
    "relation order(c_id: int, p_id: int)\n"
    "row 1 10 -> {qty=2}\n"
    "row 3 20 -> {qty=1}\n"
    "end\n"
    "relation products(id: int)\n"
    "row 10 -> {name=\"lamp\", price=20}\n"
    "row 20 -> {name=\"desk\", price=150}\n"
    "row 30 -> {name=\"chair\", price=60}\n"
    "end\n"
    "rel order links customers.id, products.id\n";

}  // namespace

TEST_CASE("store_fdb writes the canonical form") {
  CHECK(store_fdb(testing::shop_catalog()) == kShop);
}

TEST_CASE("store, load, store is byte identical") {
  std::string once = store_fdb(testing::shop_catalog());
  CHECK(store_fdb(load_fdb(once)) == once);
  std::string bank = store_fdb(testing::bank_catalog());
  CHECK(store_fdb(load_fdb(bank)) == bank);
}

TEST_CASE("loaded stores evaluate") {
  engine::Session s(std::make_shared<engine::Store>(load_fdb(kShop)));
  auto keys = s.read(syntax::parse_expr("customers")).as_function();
  std::vector<int64_t> ids;
  for (const auto& [k, v] : keys->mappings()) ids.push_back(k[0].as_int());
  CHECK(ids == std::vector<int64_t>{1, 2, 3});
  CHECK(s.read(syntax::parse_expr("order(3, 20).qty")).as_int() == 1);
}

TEST_CASE("non-canonical input is normalised") {
  const char* text =
      "# comment\n"
      "fdb 1\n"
      "\n"
      "relation z(k: text in {\"b\", \"a\"})  # trailing\n"
      "row \"b\" -> {y=1.5, x=true}\n"
      "row \"a\" -> {}\n"
      "end\n"
      "relation a(n: float in [0; 10])\n"
      "row 2 -> {v=-3}\n"
      "end\n"
      "view w = filter(fn(t) => t.v < 0, a)\n"
      "view m materialized = a\n"
      "relation m(n: float)\n"
      "row 2.0 -> {v=-3}\n"
      "end\n";
  std::string canon = store_fdb(load_fdb(text));
  CHECK(canon ==
        "fdb 1\n"
        "relation a(n: float in [0.0;10.0])\n"
        "row 2.0 -> {v=-3}\n"
        "end\n"
        "relation m(n: float)\n"
        "row 2.0 -> {v=-3}\n"
        "end\n"
        "relation z(k: text in {\"a\", \"b\"})\n"
        "row \"a\" -> {}\n"
        "row \"b\" -> {x=true, y=1.5}\n"
        "end\n"
        "view m materialized = a\n"
        "view w = filter(fn(t) => t.v < 0, a)\n");
  CHECK(store_fdb(load_fdb(canon)) == canon);
}

TEST_CASE("a header alone is an empty store") {
  Catalog c = load_fdb("fdb 1\n");
  CHECK(c.entries.empty());
  CHECK(store_fdb(c) == "fdb 1\n");
}

TEST_CASE("duplicate keys name their line") {
  try {
    load_fdb("fdb 1\nrelation r(k: int)\nrow 1 -> {}\nrow 1 -> {a=1}\nend\n");
    FAIL("expected UniqueViolation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UniqueViolation);
    CHECK(std::string(e.what()).find("line 4") != std::string::npos);
  }
  CHECK(error_of([] { load_fdb("fdb 1\nrelation r(k: int)\nrow 1 -> {a=1, a=2}\nend\n"); }) ==
        ErrorKind::UniqueViolation);
  CHECK(error_of([] { load_fdb("fdb 1\nrelation r(k: int)\nend\nrelation r(k: int)\nend\n"); }) ==
        ErrorKind::UniqueViolation);
}

TEST_CASE("domain violations and syntax errors") {
  CHECK(error_of([] { load_fdb("fdb 1\nrelation r(k: int in {1, 2})\nrow 3 -> {}\nend\n"); }) ==
        ErrorKind::DomainError);
  CHECK(error_of([] { load_fdb("fdb 1\nrelation r(k: int in [1;2])\nrow 0 -> {}\nend\n"); }) ==
        ErrorKind::DomainError);
  CHECK(error_of([] { load_fdb("fdb 1\nrelation r(k: int)\nrow \"x\" -> {}\nend\n"); }) ==
        ErrorKind::DomainError);
  CHECK(error_of([] { load_fdb("fdb 1\nview v materialized = 1\n"); }) == ErrorKind::DomainError);

  auto pos_of = [](const char* text) {
    try {
      load_fdb(text);
    } catch (const ParseError& e) {
      return std::pair{e.pos().line, e.pos().column};
    }
    FAIL("expected ParseError");
    return std::pair{0, 0};
  };
  CHECK(pos_of("fdb 2\n").first == 1);
  CHECK(pos_of("relation r(k: int)\n").first == 1);
  CHECK(pos_of("fdb 1\nrelation r(k: integer)\nend\n") == std::pair{2, 15});
  CHECK(pos_of("fdb 1\nrelation r(k: int)\nrow 1 {}\nend\n") == std::pair{3, 7});
  CHECK(pos_of("fdb 1\nrelation r(k: int)\nrow 1 -> {}\n").first == 3);
  CHECK(pos_of("fdb 1\nview v = filter(\n") .first == 2);
  CHECK(error_of([] { load_fdb("fdb 1\nrel x links a.b, c.d\n"); }) == ErrorKind::DomainError);
}

TEST_CASE("computed relations are not serializable") {
  Catalog c = testing::example_catalog();
  c.entries["double"] = Value(make_computed({Param{"x", DomainConstraint::any(BaseType::Int)}}, DomainConstraint::any(BaseType::Int),
                                            syntax::parse_expr("fn(x) => x * 2")));
  CHECK(error_of([&] { store_fdb(c); }) == ErrorKind::NotSerializable);

  Catalog odd;
  odd.entries["f"] = Value(make_extensional_unchecked({Param{"x", DomainConstraint::any(BaseType::Int)}}, DomainConstraint::any(),
                                                      {{{Value(1)}, Value(std::nan(""))}},
                                                      Level::Relation));
  CHECK(error_of([&] { store_fdb(odd); }) == ErrorKind::NotSerializable);
}

TEST_CASE("value_fdb renders results") {
  engine::Session s(std::make_shared<engine::Store>(load_fdb(kShop)));
  auto snap = s.snapshot();
  Context ctx{*snap, interpreter()};
  std::string ny = persist::value_fdb(
      s.read(syntax::parse_expr("filter(fn(t) => t.city == \"NY\", customers)")), ctx);
  CHECK(ny ==
        "fdb 1\n"
        "relation result(id: int)\n"
        "row 1 -> {age=45, city=\"NY\", name=\"Alice\"}\n"
        "end\n");
  CHECK(persist::value_fdb(Value(7), ctx) ==
        "fdb 1\nrelation result(_: int)\nrow 0 -> {value=7}\nend\n");
  std::string db = persist::value_fdb(s.read(syntax::parse_expr("DB")), ctx);
  CHECK(db.find("relation customers(id: int)") != std::string::npos);
  CHECK(db.find("relation products(id: int)") != std::string::npos);
}

TEST_CASE("files") {
  std::string path = "persist_test_store.fdb";
  persist::store_file(path, testing::shop_catalog());
  CHECK(persist::read_text(path) == kShop);
  CHECK(store_fdb(persist::load_file(path)) == kShop);
  std::remove(path.c_str());
  CHECK(error_of([] { persist::load_file("/nonexistent/dir/x.fdb"); }) == ErrorKind::IoError);
  CHECK(error_of([] { persist::store_file("/nonexistent/dir/x.fdb", Catalog{}); }) ==
        ErrorKind::IoError);
}
