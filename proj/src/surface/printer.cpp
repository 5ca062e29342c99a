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

#include "fql/syntax.hpp"

namespace fql::syntax {

namespace {

// Binding strength, loosest first.
enum Prec { kLambda = 0, kOr, kAnd, kNot, kCompare, kAdd, kMul, kUnary, kPostfix, kPrimary };

int binary_prec(BinaryOp op) {
  switch (op) {
    case BinaryOp::Or: return kOr;
    case BinaryOp::And: return kAnd;
    case BinaryOp::Add:
    case BinaryOp::Sub: return kAdd;
    case BinaryOp::Mul:
    case BinaryOp::Div: return kMul;
    default: return kCompare;
  }
}

std::string literal(const Value& v) {
  switch (v.type()) {
    case ValueType::Int: return std::to_string(v.as_int());
    case ValueType::Float: return format_float(v.as_float());
    case ValueType::Text: return quote_text(v.as_text());
    case ValueType::Bool: return v.as_bool() ? "true" : "false";
    case ValueType::Set: {
      std::string out = "[";
      bool first = true;
      for (const auto& item : v.as_set()) {
        if (!first) out += ", ";
        first = false;
        out += literal(item);
      }
      return out + "]";
    }
    case ValueType::Function: return "<function>";
  }
  return "?";
}

bool negative_literal(const Value& v) {
  if (v.is_int()) return v.as_int() < 0;
  if (v.is_float()) return std::signbit(v.as_float());
  return false;
}

class Printer {
 public:
  std::string expr(const Expr& e, int min_prec) {
    int p = 0;
    std::string s = bare(e, p);
    return p < min_prec ? "(" + s + ")" : s;
  }

  std::string target(const Expr& e) {
    if (auto* a = e.as<Expr::Apply>()) return target(*a->fn) + "[" + list(a->args) + "]";
    return expr(e, kPostfix);
  }

 private:
  std::string list(const std::vector<ExprPtr>& items) {
    std::string out;
    for (size_t i = 0; i < items.size(); ++i) {
      if (i) out += ", ";
      out += expr(*items[i], kLambda);
    }
    return out;
  }

  static std::string names(const std::vector<std::string>& ns) {
    std::string out = "[";
    for (size_t i = 0; i < ns.size(); ++i) {
      if (i) out += ", ";
      out += quote_text(ns[i]);
    }
    return out + "]";
  }

  static std::string agg(const AggSpec& a, const char* sep) {
    std::string out = a.out_name + sep + agg_name(a.kind) + "(";
    if (a.kind != AggKind::Count) out += quote_text(a.attribute);
    return out + ")";
  }

  static std::string endpoint(const JoinEndpoint& ep) {
    if (is_identifier(ep.relation) && is_identifier(ep.name)) return ep.relation + "." + ep.name;
    return quote_text(ep.relation + "." + ep.name);
  }

  std::string op(const Expr::Op& o) {
    std::vector<std::string> parts;
    const OpConfig& c = o.config;
    switch (o.kind) {
      case OperatorKind::Filter:
        parts = {expr(*o.inputs[0], kLambda), expr(*o.inputs[1], kLambda)};
        break;
      case OperatorKind::Group:
      case OperatorKind::GroupAndAggregate:
      case OperatorKind::Aggregate:
        if (o.kind != OperatorKind::Aggregate) {
          parts.push_back(c.by_lambda ? expr(*o.inputs[0], kLambda) : "by=" + names(c.by));
        }
        for (const auto& a : c.aggs) parts.push_back(agg(a, "="));
        parts.push_back(expr(*o.inputs.back(), kLambda));
        break;
      case OperatorKind::GroupingSets:
        for (const auto& m : c.sets) {
          std::string s = "(by=" + names(m.by);
          for (const auto& a : m.aggs) s += ", " + agg(a, "=");
          s += ", name=" + quote_text(m.name) + ")";
          parts.push_back(s);
        }
        parts.push_back(expr(*o.inputs[0], kLambda));
        break;
      case OperatorKind::Join:
        parts.push_back(expr(*o.inputs[0], kLambda));
        if (c.on) {
          std::string s = "on=[";
          for (size_t i = 0; i < c.on->size(); ++i) {
            if (i) s += ", ";
            s += "[" + endpoint((*c.on)[i].left) + ", " + endpoint((*c.on)[i].right) + "]";
          }
          parts.push_back(s + "]");
        }
        break;
      case OperatorKind::OuterMark:
        parts = {"outer=" + names(c.outer), expr(*o.inputs[0], kLambda)};
        break;
      default:
        for (const auto& in : o.inputs) parts.push_back(expr(*in, kLambda));
        break;
    }
    std::string out = std::string(operator_name(o.kind)) + "(";
    for (size_t i = 0; i < parts.size(); ++i) {
      if (i) out += ", ";
      out += parts[i];
    }
    return out + ")";
  }

  std::string bare(const Expr& e, int& p) {
    p = kPrimary;
    if (auto* l = e.as<Expr::Lit>()) {
      if (negative_literal(l->value)) p = kUnary;
      return literal(l->value);
    }
    if (auto* r = e.as<Expr::Ref>()) {
      std::string out;
      for (size_t i = 0; i < r->path.size(); ++i) out += (i ? "." : "") + r->path[i];
      return out;
    }
    if (auto* pr = e.as<Expr::Param>()) return pr->name;
    if (auto* a = e.as<Expr::Apply>()) {
      p = kPostfix;
      if (a->args.size() == 1 && !a->fn->as<Expr::Ref>()) {
        auto* l = a->args[0]->as<Expr::Lit>();
        if (l && l->value.is_text() && is_identifier(l->value.as_text())) {
          return expr(*a->fn, kPostfix) + "." + l->value.as_text();
        }
      }
      return expr(*a->fn, kPostfix) + "(" + list(a->args) + ")";
    }
    if (auto* lam = e.as<Expr::Lambda>()) {
      p = kLambda;
      std::string out = "fn(";
      for (size_t i = 0; i < lam->params.size(); ++i) out += (i ? ", " : "") + lam->params[i];
      return out + ") => " + expr(*lam->body, kLambda);
    }
    if (auto* b = e.as<Expr::Binary>()) {
      p = binary_prec(b->op);
      int lhs = p == kCompare ? kCompare + 1 : p;
      return expr(*b->lhs, lhs) + " " + binary_op_symbol(b->op) + " " + expr(*b->rhs, p + 1);
    }
    if (auto* n = e.as<Expr::Not>()) {
      p = kNot;
      return "not " + expr(*n->operand, kNot);
    }
    if (auto* in = e.as<Expr::In>()) {
      p = kCompare;
      return expr(*in->needle, kCompare + 1) + " in " + expr(*in->haystack, kCompare + 1);
    }
    if (auto* rec = e.as<Expr::Record>()) {
      std::string out = "{";
      for (size_t i = 0; i < rec->fields.size(); ++i) {
        if (i) out += ", ";
        out += quote_text(rec->fields[i].first) + ": " + expr(*rec->fields[i].second, kLambda);
      }
      return out + "}";
    }
    if (auto* s = e.as<Expr::SetLit>()) return "[" + list(s->items) + "]";
    return op(*e.as<Expr::Op>());
  }
};

}  // namespace

std::string print(const Expr& e) { return Printer().expr(e, kLambda); }

std::string print(const Statement& s) {
  Printer pr;
  return std::visit(
      [&](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Statement::Eval>) {
          return pr.expr(*n.expr, kLambda);
        } else if constexpr (std::is_same_v<T, Statement::Bind>) {
          std::string lhs, rhs;
          for (size_t i = 0; i < n.names.size(); ++i) {
            lhs += (i ? ", " : "") + n.names[i];
            rhs += (i ? ", " : "") + pr.expr(*n.values[i], kLambda);
          }
          return lhs + " = " + rhs;
        } else if constexpr (std::is_same_v<T, Statement::Assign>) {
          return pr.target(*n.target) + " " + n.op + " " + pr.expr(*n.value, kLambda);
        } else if constexpr (std::is_same_v<T, Statement::Delete>) {
          return "del " + pr.target(*n.target);
        } else if constexpr (std::is_same_v<T, Statement::Add>) {
          return pr.expr(*n.relation, kPostfix) + ".add(" + pr.expr(*n.value, kLambda) + ")";
        } else if constexpr (std::is_same_v<T, Statement::Begin>) {
          return "begin";
        } else if constexpr (std::is_same_v<T, Statement::Commit>) {
          return "commit";
        } else if constexpr (std::is_same_v<T, Statement::Rollback>) {
          return "rollback";
        } else if constexpr (std::is_same_v<T, Statement::Show>) {
          return "show " + pr.expr(*n.expr, kLambda);
        } else if constexpr (std::is_same_v<T, Statement::Explain>) {
          return "explain " + pr.expr(*n.expr, kLambda);
        } else if constexpr (std::is_same_v<T, Statement::Load>) {
          return "load " + quote_text(n.path);
        } else {
          return "save " + quote_text(n.path);
        }
      },
      s.node);
}

std::string print(const Script& s) {
  std::string out;
  for (const auto& st : s.statements) out += print(st) + "\n";
  return out;
}

}  // namespace fql::syntax
