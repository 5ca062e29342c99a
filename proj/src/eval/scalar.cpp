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

#include "fql/error.hpp"
#include "fql/eval.hpp"

namespace fql {

std::optional<Value> builtin_function(const std::string& name) {
  if (name == "rnd_str") {
    static const Value fn = Value(make_native(
        {Param{"seed", DomainConstraint::any(BaseType::Int)}}, DomainConstraint::any(BaseType::Text),
        "rnd_str", [](const ValueList& args) { return Value(rnd_str(args[0].as_int())); }));
    return fn;
  }
  return std::nullopt;
}

namespace scalar {

namespace {

[[noreturn]] void mismatch(BinaryOp op, const Value& a, const Value& b) {
  fail(ErrorKind::TypeMismatch, std::string("operator '") + binary_op_symbol(op) +
                                    "' is not defined for " + type_name(a.type()) + " and " +
                                    type_name(b.type()));
}

int64_t checked(BinaryOp op, int64_t x, int64_t y) {
  int64_t r = 0;
  bool overflow = false;
  switch (op) {
    case BinaryOp::Add: overflow = __builtin_add_overflow(x, y, &r); break;
    case BinaryOp::Sub: overflow = __builtin_sub_overflow(x, y, &r); break;
    case BinaryOp::Mul: overflow = __builtin_mul_overflow(x, y, &r); break;
    default: break;
  }
  if (overflow) fail(ErrorKind::EvalError, "integer overflow");
  return r;
}

}  // namespace

Value arithmetic(BinaryOp op, const Value& a, const Value& b) {
  if (op == BinaryOp::Add && a.is_text() && b.is_text()) return Value(a.as_text() + b.as_text());
  if (!a.is_numeric() || !b.is_numeric()) mismatch(op, a, b);
  if (op == BinaryOp::Div) {
    if (b.as_number() == 0.0) fail(ErrorKind::EvalError, "division by zero");
    return Value(a.as_number() / b.as_number());
  }
  if (a.is_int() && b.is_int()) return Value(checked(op, a.as_int(), b.as_int()));
  double x = a.as_number();
  double y = b.as_number();
  switch (op) {
    case BinaryOp::Add: return Value(x + y);
    case BinaryOp::Sub: return Value(x - y);
    case BinaryOp::Mul: return Value(x * y);
    default: mismatch(op, a, b);
  }
}

bool loose_equal(const Value& a, const Value& b) {
  if (a.is_numeric() && b.is_numeric()) {
    if (a.is_int() && b.is_int()) return a.as_int() == b.as_int();
    return a.as_number() == b.as_number();
  }
  return a == b;
}

bool comparison(BinaryOp op, const Value& a, const Value& b) {
  if (op == BinaryOp::Eq) return loose_equal(a, b);
  if (op == BinaryOp::Ne) return !loose_equal(a, b);
  int c = 0;
  if (a.is_numeric() && b.is_numeric()) {
    if (a.is_int() && b.is_int()) {
      c = a.as_int() < b.as_int() ? -1 : (a.as_int() > b.as_int() ? 1 : 0);
    } else {
      double x = a.as_number();
      double y = b.as_number();
      if (std::isnan(x) || std::isnan(y)) return false;
      c = x < y ? -1 : (x > y ? 1 : 0);
    }
  } else if (a.is_text() && b.is_text()) {
    c = a.as_text().compare(b.as_text());
  } else if (a.is_bool() && b.is_bool()) {
    c = static_cast<int>(a.as_bool()) - static_cast<int>(b.as_bool());
  } else {
    mismatch(op, a, b);
  }
  switch (op) {
    case BinaryOp::Lt: return c < 0;
    case BinaryOp::Le: return c <= 0;
    case BinaryOp::Gt: return c > 0;
    case BinaryOp::Ge: return c >= 0;
    default: mismatch(op, a, b);
  }
}

}  // namespace scalar
}  // namespace fql
