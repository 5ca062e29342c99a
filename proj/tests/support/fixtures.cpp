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

#include "fixtures.hpp"

namespace fql::testing {

namespace {

Value tuple(std::vector<std::pair<std::string, Value>> attrs) {
  return Value(make_tuple(std::move(attrs)));
}

Value relation(const std::string& param, BaseType type, std::vector<std::pair<Key, Value>> rows) {
  return Value(make_extensional({Param{param, DomainConstraint::any(type)}}, DomainConstraint::any(),
                                std::move(rows), Level::Relation));
}

}  // namespace

Bindings ExampleFunctions::bindings() const {
  return {{"t1", t1}, {"t3", t3}, {"t4", t4}, {"R1", R1}, {"R2", R2}, {"R3", R3}, {"R4", R4}};
}

ExampleFunctions example_functions() {
  Value t1 = tuple({{"name", Value("Alice")}, {"foo", Value(12)}});
  Value t3 = tuple({{"name", Value("Bob")}, {"foo", Value(25)}});
  Value t4 = tuple({{"name", Value("Thomas")}, {"foo", Value(25)}});
  Value r1 = relation("bar", BaseType::Int, {{{Value(1)}, t1}, {{Value(3)}, t3}});
  Value r2 = relation("foo", BaseType::Int, {{{Value(12)}, t1}, {{Value(25)}, t3}});
  Value r3 = relation("foo", BaseType::Int,
                      {{{Value(12)}, Value::set({t1})}, {{Value(25)}, Value::set({t3, t4})}});

  Mappings stored;
  stored.emplace(Key{Value(1)}, t1);
  stored.emplace(Key{Value(3)}, t3);
  ExprPtr lam_tuple = record({{"name", call(ref({"rnd_str"}), {param("bar")})},
                              {"foo", binary(BinaryOp::Mul, lit(Value(42)), param("bar"))}});
  Value r4 = Value(make_piecewise(
      {Param{"bar", DomainConstraint::any(BaseType::Int)}}, DomainConstraint::any(),
      {Case{in(param("bar"), set_lit({lit(Value(1)), lit(Value(3))})), Extensional{stored}}},
      Computed{lam_tuple, {}}, {}, Level::Relation));

  return ExampleFunctions{t1, t3, t4, r1, r2, r3, r4};
}

Catalog example_catalog() {
  ExampleFunctions f = example_functions();
  Catalog c;
  c.entries = {{"myTab", f.t4}, {"Table1", f.R1}, {"Table2", f.R2}};
  return c;
}

Catalog shop_catalog() {
  Catalog c;
  c.entries["customers"] = relation(
      "id", BaseType::Int,
      {{{Value(1)}, tuple({{"name", Value("Alice")}, {"age", Value(45)}, {"city", Value("NY")}})},
       {{Value(2)}, tuple({{"name", Value("Bob")}, {"age", Value(30)}, {"city", Value("LA")}})},
       {{Value(3)}, tuple({{"name", Value("Carol")}, {"age", Value(45)}, {"city", Value("SF")}})}});
  c.entries["products"] = relation(
      "id", BaseType::Int,
      {{{Value(10)}, tuple({{"name", Value("lamp")}, {"price", Value(20)}})},
       {{Value(20)}, tuple({{"name", Value("desk")}, {"price", Value(150)}})},
       {{Value(30)}, tuple({{"name", Value("chair")}, {"price", Value(60)}})}});
  c.entries["order"] = Value(make_extensional(
      {Param{"c_id", DomainConstraint::any(BaseType::Int)},
       Param{"p_id", DomainConstraint::any(BaseType::Int)}},
      DomainConstraint::any(),
      {{{Value(1), Value(10)}, tuple({{"qty", Value(2)}})},
       {{Value(3), Value(20)}, tuple({{"qty", Value(1)}})}},
      Level::Relation));
  c.relationships.push_back(
      RelationshipDecl{"order", {{"customers", "id"}, {"products", "id"}}, "order", false});
  return c;
}

Catalog bank_catalog() {
  Catalog c;
  c.entries["accounts"] = relation("id", BaseType::Int,
                                   {{{Value(42)}, tuple({{"balance", Value(500)}})},
                                    {{Value(84)}, tuple({{"balance", Value(200)}})}});
  return c;
}

}  // namespace fql::testing
