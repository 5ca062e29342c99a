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

#include "fql/value.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>

#include "fql/function.hpp"

namespace fql {

const char* type_name(ValueType type) {
  switch (type) {
    case ValueType::Int: return "int";
    case ValueType::Float: return "float";
    case ValueType::Text: return "text";
    case ValueType::Bool: return "bool";
    case ValueType::Function: return "function";
    case ValueType::Set: return "set";
  }
  return "?";
}

Value::Value(FunctionRef f) : data_(std::move(f)) {}

Value Value::set(SetItems items) {
  std::sort(items.begin(), items.end(), ValueLess{});
  items.erase(std::unique(items.begin(), items.end()), items.end());
  Value v;
  v.data_ = std::make_shared<const SetItems>(std::move(items));
  return v;
}

namespace {

int64_t float_order_key(double d) {
  auto bits = std::bit_cast<int64_t>(d);
  if (bits < 0) bits ^= INT64_MAX;
  return bits;
}

template <typename T>
int three_way(const T& a, const T& b) {
  if (a < b) return -1;
  if (b < a) return 1;
  return 0;
}

}  // namespace

int compare(const Value& a, const Value& b) {
  if (a.type() != b.type()) return three_way(static_cast<int>(a.type()), static_cast<int>(b.type()));
  switch (a.type()) {
    case ValueType::Int: return three_way(a.as_int(), b.as_int());
    case ValueType::Float: return three_way(float_order_key(a.as_float()), float_order_key(b.as_float()));
    case ValueType::Text: {
      int c = a.as_text().compare(b.as_text());
      return c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
    case ValueType::Bool: return three_way(a.as_bool(), b.as_bool());
    case ValueType::Function: {
      const auto& fa = a.as_function();
      const auto& fb = b.as_function();
      if (fa == fb) return 0;
      return compare(*fa, *fb);
    }
    case ValueType::Set: {
      const auto& sa = a.as_set();
      const auto& sb = b.as_set();
      if (&sa == &sb) return 0;
      return compare(sa, sb);
    }
  }
  return 0;
}

int compare(const ValueList& a, const ValueList& b) {
  size_t n = std::min(a.size(), b.size());
  for (size_t i = 0; i < n; ++i) {
    if (int c = compare(a[i], b[i])) return c;
  }
  return three_way(a.size(), b.size());
}

std::string format_float(double d) {
  if (std::isnan(d)) return "nan";
  if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), d);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

std::string quote_text(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

std::string debug_string(const ValueList& key) {
  if (key.size() == 1) return debug_string(key[0]);
  std::string out = "(";
  for (size_t i = 0; i < key.size(); ++i) {
    if (i) out += ", ";
    out += debug_string(key[i]);
  }
  return out + ")";
}

std::string debug_string(const Value& v) {
  switch (v.type()) {
    case ValueType::Int: return std::to_string(v.as_int());
    case ValueType::Float: return format_float(v.as_float());
    case ValueType::Text: return quote_text(v.as_text());
    case ValueType::Bool: return v.as_bool() ? "true" : "false";
    case ValueType::Function: {
      const auto& f = *v.as_function();
      if (!f.is_extensional()) return "<computed function>";
      std::string out = "{";
      bool first = true;
      for (const auto& [k, val] : f.mappings()) {
        if (!first) out += ", ";
        first = false;
        out += debug_string(k) + ": " + debug_string(val);
      }
      return out + "}";
    }
    case ValueType::Set: {
      std::string out = "[";
      const auto& items = v.as_set();
      for (size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += debug_string(items[i]);
      }
      return out + "]";
    }
  }
  return "?";
}

}  // namespace fql
