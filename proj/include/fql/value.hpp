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

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace fql {

struct FunctionValue;
using FunctionRef = std::shared_ptr<const FunctionValue>;

/// Rank of each alternative in the structural order.
enum class ValueType { Int = 0, Float, Text, Bool, Function, Set };

const char* type_name(ValueType type);

/// The universal codomain element: a scalar, a function, or a finite set.
/// There is no null alternative; absence is an application error.
class Value {
 public:
  using SetItems = std::vector<Value>;

  Value() : data_(int64_t{0}) {}
  Value(int64_t v) : data_(v) {}
  Value(int v) : data_(int64_t{v}) {}
  Value(double v) : data_(v) {}
  Value(std::string v) : data_(std::move(v)) {}
  Value(const char* v) : data_(std::string(v)) {}
  Value(std::string_view v) : data_(std::string(v)) {}
  Value(bool v) : data_(v) {}
  Value(FunctionRef f);

  /// Builds a set; duplicates (structural equality) are removed and the
  /// items are kept in ascending structural order.
  static Value set(SetItems items);

  ValueType type() const { return static_cast<ValueType>(data_.index()); }
  bool is_int() const { return type() == ValueType::Int; }
  bool is_float() const { return type() == ValueType::Float; }
  bool is_numeric() const { return is_int() || is_float(); }
  bool is_text() const { return type() == ValueType::Text; }
  bool is_bool() const { return type() == ValueType::Bool; }
  bool is_function() const { return type() == ValueType::Function; }
  bool is_set() const { return type() == ValueType::Set; }

  int64_t as_int() const { return std::get<int64_t>(data_); }
  double as_float() const { return std::get<double>(data_); }
  /// Int or Float widened to double.
  double as_number() const { return is_int() ? static_cast<double>(as_int()) : as_float(); }
  const std::string& as_text() const { return std::get<std::string>(data_); }
  bool as_bool() const { return std::get<bool>(data_); }
  const FunctionRef& as_function() const { return std::get<FunctionRef>(data_); }
  const SetItems& as_set() const { return *std::get<std::shared_ptr<const SetItems>>(data_); }

 private:
  std::variant<int64_t, double, std::string, bool, FunctionRef,
               std::shared_ptr<const SetItems>>
      data_;
};

using ValueList = std::vector<Value>;

/// Total structural order: Int < Float < Text < Bool < Function < Set, then
/// the natural order within a type. Floats are ordered by their bit pattern
/// (IEEE total order), so equality is bitwise. Functions compare structurally.
int compare(const Value& a, const Value& b);
int compare(const ValueList& a, const ValueList& b);

inline bool operator==(const Value& a, const Value& b) { return compare(a, b) == 0; }
inline bool operator!=(const Value& a, const Value& b) { return compare(a, b) != 0; }
inline bool operator<(const Value& a, const Value& b) { return compare(a, b) < 0; }

struct KeyLess {
  bool operator()(const ValueList& a, const ValueList& b) const { return compare(a, b) < 0; }
};

struct ValueLess {
  bool operator()(const Value& a, const Value& b) const { return compare(a, b) < 0; }
};

/// Short literal-like rendering used in error messages and debugging.
std::string debug_string(const Value& v);
std::string debug_string(const ValueList& key);

/// Formats a double so that parsing it back yields the same bits and the
/// text always reads as a float literal ("2.0", "1e+300").
std::string format_float(double d);

/// Quotes a string with backslash escapes for \" \\ \n (and \t, \r).
std::string quote_text(std::string_view s);

}  // namespace fql
