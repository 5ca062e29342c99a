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

#include "fql/function.hpp"

#include <algorithm>
#include <cmath>

#include "fql/catalog.hpp"
#include "fql/error.hpp"
#include "fql/expr.hpp"

namespace fql {

const char* base_type_name(BaseType type) {
  switch (type) {
    case BaseType::Int: return "int";
    case BaseType::Float: return "float";
    case BaseType::Text: return "text";
    case BaseType::Bool: return "bool";
    case BaseType::Function: return "function";
    case BaseType::Any: return "any";
  }
  return "?";
}

const char* level_name(Level level) {
  switch (level) {
    case Level::Generic: return "function";
    case Level::Tuple: return "tuple";
    case Level::Relation: return "relation";
    case Level::Database: return "database";
  }
  return "?";
}

bool has_base_type(BaseType base, const Value& v) {
  switch (base) {
    case BaseType::Int: return v.is_int();
    case BaseType::Float: return v.is_float();
    case BaseType::Text: return v.is_text();
    case BaseType::Bool: return v.is_bool();
    case BaseType::Function: return v.is_function();
    case BaseType::Any: return true;
  }
  return false;
}

DomainConstraint DomainConstraint::any(BaseType base) {
  return DomainConstraint{base, Unconstrained{}};
}

DomainConstraint DomainConstraint::finite(BaseType base, ValueList values) {
  for (const auto& v : values) {
    if (!has_base_type(base, v)) {
      fail(ErrorKind::DomainError, "finite set member " + debug_string(v) + " is not of type " +
                                       base_type_name(base));
    }
  }
  std::sort(values.begin(), values.end(), ValueLess{});
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return DomainConstraint{base, FiniteSet{std::move(values)}};
}

DomainConstraint DomainConstraint::interval(BaseType base, Value lo, Value hi) {
  if (base != BaseType::Int && base != BaseType::Float) {
    fail(ErrorKind::DomainError, "interval constraint needs a numeric base type");
  }
  if (!lo.is_numeric() || !hi.is_numeric()) {
    fail(ErrorKind::DomainError, "interval bounds must be numeric");
  }
  if (lo.as_number() > hi.as_number()) {
    fail(ErrorKind::DomainError, "interval lower bound exceeds upper bound");
  }
  return DomainConstraint{base, Interval{std::move(lo), std::move(hi)}};
}

DomainConstraint DomainConstraint::predicate(BaseType base, std::string param, ExprPtr body) {
  return DomainConstraint{base, Predicate{std::move(param), std::move(body)}};
}

namespace {

template <typename T>
int three_way(const T& a, const T& b) {
  if (a < b) return -1;
  if (b < a) return 1;
  return 0;
}

int compare_text(const std::string& a, const std::string& b) {
  int c = a.compare(b);
  return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

int compare_bindings(const Bindings& a, const Bindings& b) {
  auto ia = a.begin();
  auto ib = b.begin();
  for (; ia != a.end() && ib != b.end(); ++ia, ++ib) {
    if (int c = compare_text(ia->first, ib->first)) return c;
    if (int c = compare(ia->second, ib->second)) return c;
  }
  return three_way(a.size(), b.size());
}

int compare_mappings(const Mappings& a, const Mappings& b) {
  auto ia = a.begin();
  auto ib = b.begin();
  for (; ia != a.end() && ib != b.end(); ++ia, ++ib) {
    if (int c = compare(ia->first, ib->first)) return c;
    if (int c = compare(ia->second, ib->second)) return c;
  }
  return three_way(a.size(), b.size());
}

int compare_computed(const Computed& a, const Computed& b) {
  if (int c = compare(*a.body, *b.body)) return c;
  return compare_bindings(a.captured, b.captured);
}

int compare_case_body(const std::variant<Extensional, Computed>& a,
                      const std::variant<Extensional, Computed>& b) {
  if (a.index() != b.index()) return three_way(a.index(), b.index());
  if (auto* ea = std::get_if<Extensional>(&a)) {
    return compare_mappings(ea->mappings, std::get<Extensional>(b).mappings);
  }
  return compare_computed(std::get<Computed>(a), std::get<Computed>(b));
}

}  // namespace

int compare(const DomainConstraint& a, const DomainConstraint& b) {
  if (a.base != b.base) return three_way(static_cast<int>(a.base), static_cast<int>(b.base));
  if (a.form.index() != b.form.index()) return three_way(a.form.index(), b.form.index());
  if (auto* fa = std::get_if<DomainConstraint::FiniteSet>(&a.form)) {
    return compare(fa->values, std::get<DomainConstraint::FiniteSet>(b.form).values);
  }
  if (auto* ia = std::get_if<DomainConstraint::Interval>(&a.form)) {
    const auto& ib = std::get<DomainConstraint::Interval>(b.form);
    if (int c = compare(ia->lo, ib.lo)) return c;
    return compare(ia->hi, ib.hi);
  }
  if (auto* pa = std::get_if<DomainConstraint::Predicate>(&a.form)) {
    const auto& pb = std::get<DomainConstraint::Predicate>(b.form);
    if (int c = compare_text(pa->param, pb.param)) return c;
    return compare(*pa->body, *pb.body);
  }
  return 0;
}

int compare(const FunctionValue& a, const FunctionValue& b) {
  if (&a == &b) return 0;
  if (int c = three_way(a.sig.size(), b.sig.size())) return c;
  for (size_t i = 0; i < a.sig.size(); ++i) {
    if (int c = compare_text(a.sig[i].name, b.sig[i].name)) return c;
    if (int c = compare(a.sig[i].constraint, b.sig[i].constraint)) return c;
  }
  if (int c = compare(a.codomain, b.codomain)) return c;
  if (int c = three_way(static_cast<int>(a.level), static_cast<int>(b.level))) return c;
  if (a.body.index() != b.body.index()) return three_way(a.body.index(), b.body.index());
  return std::visit(
      [&](const auto& body) -> int {
        using T = std::decay_t<decltype(body)>;
        const auto& other = std::get<T>(b.body);
        if constexpr (std::is_same_v<T, Extensional>) {
          return compare_mappings(body.mappings, other.mappings);
        } else if constexpr (std::is_same_v<T, Computed>) {
          return compare_computed(body, other);
        } else if constexpr (std::is_same_v<T, Piecewise>) {
          if (int c = three_way(body.cases.size(), other.cases.size())) return c;
          for (size_t i = 0; i < body.cases.size(); ++i) {
            if (int c = compare(*body.cases[i].guard, *other.cases[i].guard)) return c;
            if (int c = compare_case_body(body.cases[i].body, other.cases[i].body)) return c;
          }
          if (int c = three_way(body.fallback.has_value(), other.fallback.has_value())) return c;
          if (body.fallback) {
            if (int c = compare_computed(*body.fallback, *other.fallback)) return c;
          }
          return compare_bindings(body.captured, other.captured);
        } else {
          return compare_text(body.name, other.name);
        }
      },
      a.body);
}

bool contains(const DomainConstraint& c, const Value& v, const Context* ctx) {
  if (!has_base_type(c.base, v)) return false;
  return std::visit(
      [&](const auto& form) -> bool {
        using T = std::decay_t<decltype(form)>;
        if constexpr (std::is_same_v<T, DomainConstraint::Unconstrained>) {
          return true;
        } else if constexpr (std::is_same_v<T, DomainConstraint::FiniteSet>) {
          return std::binary_search(form.values.begin(), form.values.end(), v, ValueLess{});
        } else if constexpr (std::is_same_v<T, DomainConstraint::Interval>) {
          if (!v.is_numeric()) return false;
          double x = v.as_number();
          return form.lo.as_number() <= x && x <= form.hi.as_number();
        } else {
          if (!ctx) fail(ErrorKind::PredicateError, "predicate constraint needs an evaluation context");
          Value result;
          try {
            result = ctx->evaluator.evaluate(*form.body, Bindings{{form.param, v}}, ctx->snapshot);
          } catch (const Error& e) {
            fail(ErrorKind::PredicateError, std::string("domain predicate raised: ") + e.what());
          }
          if (!result.is_bool()) fail(ErrorKind::PredicateError, "domain predicate returned a non-bool");
          return result.as_bool();
        }
      },
      c.form);
}

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

ParamSig text_sig(const std::string& name) {
  return {Param{name, DomainConstraint::any(BaseType::Text)}};
}

namespace {

void check_key(const ParamSig& sig, const Key& key, const Context* ctx) {
  if (key.size() != sig.size()) {
    fail(ErrorKind::ArityError, "input " + debug_string(key) + " has arity " +
                                    std::to_string(key.size()) + ", expected " +
                                    std::to_string(sig.size()));
  }
  for (size_t i = 0; i < key.size(); ++i) {
    if (!contains(sig[i].constraint, key[i], ctx)) {
      fail(ErrorKind::DomainError, "input " + debug_string(key[i]) + " violates the domain of '" +
                                       sig[i].name + "'");
    }
  }
}

FunctionRef finish(ParamSig sig, DomainConstraint codomain, Level level, Body body) {
  auto f = std::make_shared<FunctionValue>();
  f->sig = std::move(sig);
  f->codomain = std::move(codomain);
  f->level = level;
  f->body = std::move(body);
  return f;
}

}  // namespace

FunctionRef make_extensional(ParamSig sig, DomainConstraint codomain,
                             std::vector<std::pair<Key, Value>> mappings, Level level,
                             const Context* ctx) {
  Mappings map;
  for (auto& [key, value] : mappings) {
    check_key(sig, key, ctx);
    if (!contains(codomain, value, ctx)) {
      fail(ErrorKind::DomainError, "value " + debug_string(value) + " for input " +
                                       debug_string(key) + " violates the codomain");
    }
    auto [it, inserted] = map.emplace(std::move(key), std::move(value));
    if (!inserted) {
      fail(ErrorKind::UniqueViolation, "input " + debug_string(it->first) + " is mapped twice");
    }
  }
  return finish(std::move(sig), std::move(codomain), level, Extensional{std::move(map)});
}

FunctionRef make_extensional_unchecked(ParamSig sig, DomainConstraint codomain, Mappings mappings,
                                       Level level) {
  return finish(std::move(sig), std::move(codomain), level, Extensional{std::move(mappings)});
}

FunctionRef make_computed(ParamSig sig, DomainConstraint codomain, ExprPtr body,
                          Bindings captured, Level level) {
  return finish(std::move(sig), std::move(codomain), level,
                Computed{std::move(body), std::move(captured)});
}

FunctionRef make_piecewise(ParamSig sig, DomainConstraint codomain, std::vector<Case> cases,
                           std::optional<Computed> fallback, Bindings captured, Level level) {
  for (auto& c : cases) {
    if (auto* ext = std::get_if<Extensional>(&c.body)) {
      for (const auto& [key, value] : ext->mappings) check_key(sig, key, nullptr);
    }
  }
  return finish(std::move(sig), std::move(codomain), level,
                Piecewise{std::move(cases), std::move(fallback), std::move(captured)});
}

FunctionRef make_native(ParamSig sig, DomainConstraint codomain, std::string name,
                        std::function<Value(const ValueList&)> fn) {
  return finish(std::move(sig), std::move(codomain), Level::Generic,
                Native{std::move(name), std::move(fn)});
}

FunctionRef make_tuple(std::vector<std::pair<std::string, Value>> attributes) {
  std::vector<std::pair<Key, Value>> mappings;
  mappings.reserve(attributes.size());
  for (auto& [name, value] : attributes) mappings.push_back({{Value(name)}, std::move(value)});
  return make_extensional(text_sig("attr"), DomainConstraint::any(), std::move(mappings),
                          Level::Tuple);
}

// ---------------------------------------------------------------------------
// Application
// ---------------------------------------------------------------------------

namespace {

Bindings bind_params(Bindings bindings, const ParamSig& sig, const ValueList& args) {
  for (size_t i = 0; i < sig.size(); ++i) bindings[sig[i].name] = args[i];
  return bindings;
}

Value eval_computed(const Computed& c, Bindings bindings, const Context& ctx) {
  for (const auto& [name, value] : c.captured) bindings.emplace(name, value);
  return ctx.evaluator.evaluate(*c.body, bindings, ctx.snapshot);
}

bool eval_guard(const Expr& guard, const Bindings& bindings, const Context& ctx) {
  Value g = ctx.evaluator.evaluate(guard, bindings, ctx.snapshot);
  if (!g.is_bool()) fail(ErrorKind::PredicateError, "piecewise guard returned a non-bool");
  return g.as_bool();
}

[[noreturn]] void undefined(const ValueList& args) {
  fail(ErrorKind::UndefinedInput, "no mapping defined for input " + debug_string(args));
}

}  // namespace

Value apply(const FunctionValue& f, const ValueList& args, const Context& ctx) {
  if (args.size() != f.arity()) {
    fail(ErrorKind::ArityError, "function of arity " + std::to_string(f.arity()) + " applied to " +
                                    std::to_string(args.size()) + " argument(s)");
  }
  for (size_t i = 0; i < args.size(); ++i) {
    if (!contains(f.sig[i].constraint, args[i], &ctx)) {
      fail(ErrorKind::DomainError, "argument " + debug_string(args[i]) +
                                       " violates the domain of '" + f.sig[i].name + "'");
    }
  }
  Value out = std::visit(
      [&](const auto& body) -> Value {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, Extensional>) {
          auto it = body.mappings.find(args);
          if (it == body.mappings.end()) undefined(args);
          return it->second;
        } else if constexpr (std::is_same_v<T, Computed>) {
          return eval_computed(body, bind_params({}, f.sig, args), ctx);
        } else if constexpr (std::is_same_v<T, Piecewise>) {
          Bindings bindings = bind_params(body.captured, f.sig, args);
          for (const auto& c : body.cases) {
            if (!eval_guard(*c.guard, bindings, ctx)) continue;
            if (auto* ext = std::get_if<Extensional>(&c.body)) {
              auto it = ext->mappings.find(args);
              if (it == ext->mappings.end()) undefined(args);
              return it->second;
            }
            return eval_computed(std::get<Computed>(c.body), bindings, ctx);
          }
          if (body.fallback) return eval_computed(*body.fallback, bindings, ctx);
          undefined(args);
        } else {
          return body.fn(args);
        }
      },
      f.body);
  if (!contains(f.codomain, out, &ctx)) {
    fail(ErrorKind::DomainError, "result " + debug_string(out) + " violates the codomain");
  }
  return out;
}

Value apply(const Value& f, const ValueList& args, const Context& ctx) {
  if (!f.is_function()) {
    fail(ErrorKind::TypeMismatch, std::string("cannot apply a value of type ") + type_name(f.type()));
  }
  return apply(*f.as_function(), args, ctx);
}

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

namespace {

std::optional<ValueList> finite_values(const DomainConstraint& c) {
  if (auto* fs = std::get_if<DomainConstraint::FiniteSet>(&c.form)) return fs->values;
  if (c.base == BaseType::Bool && c.is_unconstrained()) return ValueList{Value(false), Value(true)};
  if (auto* iv = std::get_if<DomainConstraint::Interval>(&c.form); iv && c.base == BaseType::Int) {
    double lo = std::ceil(iv->lo.as_number());
    double hi = std::floor(iv->hi.as_number());
    if (hi - lo + 1 > static_cast<double>(kMaxEnumeration)) return std::nullopt;
    ValueList out;
    for (auto i = static_cast<int64_t>(lo); i <= static_cast<int64_t>(hi); ++i) out.emplace_back(i);
    return out;
  }
  return std::nullopt;
}

std::optional<std::vector<Key>> finite_candidates(const ParamSig& sig) {
  std::vector<Key> out{Key{}};
  for (const auto& p : sig) {
    auto values = finite_values(p.constraint);
    if (!values) return std::nullopt;
    if (out.size() * values->size() > kMaxEnumeration) return std::nullopt;
    std::vector<Key> next;
    for (const auto& prefix : out) {
      for (const auto& v : *values) {
        Key k = prefix;
        k.push_back(v);
        next.push_back(std::move(k));
      }
    }
    out = std::move(next);
  }
  return out;
}

/// Literal inputs named by a guard of the form p == lit, lit == p,
/// p in [lits] or p in lit-set, for a unary signature.
std::optional<ValueList> guard_literals(const Expr& guard, const std::string& param_name) {
  auto is_param = [&](const ExprPtr& e) {
    auto* p = e->as<Expr::Param>();
    return p && p->name == param_name;
  };
  if (auto* b = guard.as<Expr::Binary>(); b && b->op == BinaryOp::Eq) {
    if (is_param(b->lhs)) {
      if (auto* l = b->rhs->as<Expr::Lit>()) return ValueList{l->value};
    }
    if (is_param(b->rhs)) {
      if (auto* l = b->lhs->as<Expr::Lit>()) return ValueList{l->value};
    }
    return std::nullopt;
  }
  if (auto* in = guard.as<Expr::In>(); in && is_param(in->needle)) {
    if (auto* s = in->haystack->as<Expr::SetLit>()) {
      ValueList out;
      for (const auto& item : s->items) {
        auto* l = item->as<Expr::Lit>();
        if (!l) return std::nullopt;
        out.push_back(l->value);
      }
      return out;
    }
    if (auto* l = in->haystack->as<Expr::Lit>(); l && l->value.is_set()) return l->value.as_set();
  }
  return std::nullopt;
}

[[noreturn]] void not_enumerable(const std::string& why) {
  fail(ErrorKind::NotEnumerable, "function domain is not enumerable: " + why);
}

}  // namespace

std::vector<Key> enumerate_domain(const FunctionValue& f, const Context* ctx) {
  if (f.is_extensional()) {
    std::vector<Key> keys;
    keys.reserve(f.mappings().size());
    for (const auto& [k, v] : f.mappings()) keys.push_back(k);
    return keys;
  }
  if (std::holds_alternative<Computed>(f.body) || std::holds_alternative<Native>(f.body)) {
    auto candidates = finite_candidates(f.sig);
    if (!candidates) not_enumerable("computed body over an infinite domain");
    std::vector<Key> out;
    for (auto& k : *candidates) {
      bool admissible = true;
      for (size_t i = 0; i < k.size() && admissible; ++i) {
        admissible = contains(f.sig[i].constraint, k[i], ctx);
      }
      if (admissible) out.push_back(std::move(k));
    }
    return out;
  }

  const auto& pw = std::get<Piecewise>(f.body);
  std::optional<std::vector<Key>> candidates = finite_candidates(f.sig);
  if (!candidates) {
    if (pw.fallback) not_enumerable("piecewise fallback over an infinite domain");
    std::vector<Key> collected;
    for (const auto& c : pw.cases) {
      if (auto* ext = std::get_if<Extensional>(&c.body)) {
        for (const auto& [k, v] : ext->mappings) collected.push_back(k);
        continue;
      }
      if (f.arity() != 1) not_enumerable("computed case over an unrestricted domain");
      auto lits = guard_literals(*c.guard, f.sig[0].name);
      if (!lits) not_enumerable("computed case guard does not name finitely many inputs");
      for (const auto& v : *lits) collected.push_back(Key{v});
    }
    std::sort(collected.begin(), collected.end(), KeyLess{});
    collected.erase(std::unique(collected.begin(), collected.end(),
                                [](const Key& a, const Key& b) { return compare(a, b) == 0; }),
                    collected.end());
    candidates = std::move(collected);
  }
  if (!ctx) not_enumerable("piecewise guards need an evaluation context");

  std::vector<Key> out;
  for (auto& k : *candidates) {
    bool admissible = k.size() == f.arity();
    for (size_t i = 0; i < k.size() && admissible; ++i) {
      admissible = contains(f.sig[i].constraint, k[i], ctx);
    }
    if (!admissible) continue;
    Bindings bindings = bind_params(pw.captured, f.sig, k);
    bool defined = false;
    bool matched = false;
    for (const auto& c : pw.cases) {
      if (!eval_guard(*c.guard, bindings, *ctx)) continue;
      matched = true;
      if (auto* ext = std::get_if<Extensional>(&c.body)) {
        defined = ext->mappings.count(k) > 0;
      } else {
        defined = true;
      }
      break;
    }
    if (!matched) defined = pw.fallback.has_value();
    if (defined) out.push_back(std::move(k));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string rnd_str(int64_t seed) {
  uint64_t z = static_cast<uint64_t>(seed) + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z = z ^ (z >> 31);
  std::string out(8, 'a');
  for (int i = 0; i < 8; ++i) {
    out[i] = static_cast<char>('a' + ((z >> (5 * i)) & 31u) % 26u);
  }
  return out;
}

}  // namespace fql
