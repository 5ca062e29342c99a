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

#include <charconv>
#include <map>
#include <set>

#include "fql/syntax.hpp"

namespace fql::syntax {

namespace {

const std::set<std::string> kOperators = {
    "filter", "group", "aggregate", "group_and_aggregate", "grouping_sets", "join", "subdatabase",
    "reduce_DB", "union", "intersect", "minus", "difference", "deep_copy", "copy"};

const std::map<std::string, AggKind> kAggs = {{"Count", AggKind::Count}, {"Sum", AggKind::Sum},
                                              {"Min", AggKind::Min},     {"Max", AggKind::Max},
                                              {"Avg", AggKind::Avg}};

const std::map<std::string, BinaryOp> kCompareOps = {
    {"gt", BinaryOp::Gt}, {"ge", BinaryOp::Ge}, {"lt", BinaryOp::Lt}, {"le", BinaryOp::Le},
    {"eq", BinaryOp::Eq}, {"ne", BinaryOp::Ne}, {">", BinaryOp::Gt},  {">=", BinaryOp::Ge},
    {"<", BinaryOp::Lt},  {"<=", BinaryOp::Le}, {"==", BinaryOp::Eq}, {"!=", BinaryOp::Ne}};

struct Arg {
  std::string keyword;  // empty for positional
  ExprPtr expr;
  std::vector<GroupingMember> members;  // grouping member list, if that is what was written
  bool is_members = false;
  SourcePos pos;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  Script script() {
    Script s;
    skip_newlines();
    while (!at_end()) {
      s.statements.push_back(statement());
      if (!at_end()) expect_newline();
      skip_newlines();
    }
    return s;
  }

  ExprPtr single_expr() {
    skip_newlines();
    ExprPtr e = expr();
    skip_newlines();
    if (!at_end()) error("unexpected input after expression", {"end of input"});
    return e;
  }

  /// Textual predicate mode: bare names are attributes of `row`, `$name`
  /// looks up `params`.
  void predicate_mode(std::string row, std::map<std::string, ExprPtr> params) {
    row_param_ = std::move(row);
    text_params_ = std::move(params);
    scopes_.push_back({row_param_});
  }

 private:
  // -- token helpers ---------------------------------------------------------

  const Token& peek(size_t k = 0) const { return toks_[std::min(i_ + k, toks_.size() - 1)]; }
  bool at_end() const { return peek().kind == TokenKind::End; }
  bool is_punct(const std::string& p, size_t k = 0) const {
    return peek(k).kind == TokenKind::Punct && peek(k).lexeme == p;
  }
  bool is_ident(const std::string& name, size_t k = 0) const {
    return peek(k).kind == TokenKind::Ident && peek(k).lexeme == name;
  }
  Token take() { return toks_[i_ < toks_.size() - 1 ? i_++ : i_]; }

  [[noreturn]] void error(const std::string& msg, std::vector<std::string> expected) const {
    const Token& t = peek();
    std::string found = t.kind == TokenKind::End       ? "end of input"
                        : t.kind == TokenKind::Newline ? "end of line"
                                                       : "'" + t.lexeme + "'";
    throw ParseError(t.pos, msg + ", found " + found, std::move(expected));
  }

  void expect_punct(const std::string& p) {
    if (!is_punct(p)) error("expected '" + p + "'", {p});
    take();
  }

  std::string expect_ident() {
    if (peek().kind != TokenKind::Ident) error("expected a name", {"name"});
    return take().lexeme;
  }

  void expect_newline() {
    if (peek().kind != TokenKind::Newline) error("expected end of statement", {"end of line"});
    take();
  }

  void skip_newlines() {
    while (peek().kind == TokenKind::Newline) take();
  }

  bool bound(const std::string& name) const {
    for (const auto& scope : scopes_) {
      if (scope.count(name)) return true;
    }
    return false;
  }

  // -- statements --------------------------------------------------------------

  Statement statement() {
    Statement st;
    st.line = peek().pos.line;
    auto ends_here = [&](size_t k) {
      return peek(k).kind == TokenKind::Newline || peek(k).kind == TokenKind::End;
    };
    auto bare = [&](const char* word) {
      if (!is_ident(word)) return false;
      if (ends_here(1)) return true;
      return is_punct("(", 1) && is_punct(")", 2) && ends_here(3);
    };
    auto skip_call = [&] {
      take();
      if (is_punct("(")) {
        take();
        take();
      }
    };
    if (bare("begin")) {
      skip_call();
      st.node = Statement::Begin{};
      return st;
    }
    if (bare("commit")) {
      skip_call();
      st.node = Statement::Commit{};
      return st;
    }
    if (bare("rollback")) {
      skip_call();
      st.node = Statement::Rollback{};
      return st;
    }
    if ((is_ident("show") || is_ident("explain")) && !ends_here(1) && !is_punct("=", 1) &&
        !is_punct(".", 1)) {
      bool show = take().lexeme == "show";
      ExprPtr e = expr();
      if (show) {
        st.node = Statement::Show{e};
      } else {
        st.node = Statement::Explain{e};
      }
      return st;
    }
    if ((is_ident("load") || is_ident("save")) && peek(1).kind == TokenKind::String) {
      bool load = take().lexeme == "load";
      std::string path = take().lexeme;
      if (load) {
        st.node = Statement::Load{path};
      } else {
        st.node = Statement::Save{path};
      }
      return st;
    }
    if (is_ident("del") && !ends_here(1) && !is_punct("=", 1)) {
      take();
      ExprPtr target = unary();
      if (!target->as<Expr::Apply>()) error("del needs an indexed target like r[k]", {"["});
      st.node = Statement::Delete{target};
      return st;
    }
    // name: Type = e
    if (peek().kind == TokenKind::Ident && is_punct(":", 1) && peek(2).kind == TokenKind::Ident &&
        is_punct("=", 3)) {
      std::string name = take().lexeme;
      take();
      take();
      take();
      st.node = Statement::Bind{{name}, {expr()}};
      return st;
    }
    // a, b = e1, e2
    if (peek().kind == TokenKind::Ident && is_punct(",", 1)) {
      size_t save = i_;
      std::vector<std::string> names{take().lexeme};
      while (is_punct(",") && peek(1).kind == TokenKind::Ident) {
        take();
        names.push_back(take().lexeme);
      }
      if (is_punct("=")) {
        take();
        std::vector<ExprPtr> values{expr()};
        while (is_punct(",")) {
          take();
          values.push_back(expr());
        }
        if (values.size() != names.size()) {
          throw ParseError(peek().pos, "assignment lists " + std::to_string(names.size()) +
                                           " names but " + std::to_string(values.size()) +
                                           " values");
        }
        st.node = Statement::Bind{names, values};
        return st;
      }
      i_ = save;
    }

    ExprPtr e = expr();
    if (is_punct("=") || is_punct("+=") || is_punct("-=")) {
      std::string op = take().lexeme;
      ExprPtr value = expr();
      auto* r = e->as<Expr::Ref>();
      if (r && r->path.size() == 1 && op == "=") {
        st.node = Statement::Bind{{r->path[0]}, {value}};
      } else if (r || e->as<Expr::Apply>()) {
        st.node = Statement::Assign{e, op, value};
      } else {
        throw ParseError(peek().pos, "cannot assign to this expression");
      }
      return st;
    }
    if (auto* a = e->as<Expr::Apply>(); a && a->args.size() == 1) {
      if (auto* r = a->fn->as<Expr::Ref>(); r && r->path.size() > 1 && r->path.back() == "add") {
        std::vector<std::string> rel(r->path.begin(), r->path.end() - 1);
        st.node = Statement::Add{ref(rel), a->args[0]};
        return st;
      }
      if (auto* inner = a->fn->as<Expr::Apply>(); inner && inner->args.size() == 1) {
        auto* l = inner->args[0]->as<Expr::Lit>();
        if (l && l->value.is_text() && l->value.as_text() == "add") {
          st.node = Statement::Add{inner->fn, a->args[0]};
          return st;
        }
      }
    }
    st.node = Statement::Eval{e};
    return st;
  }

  // -- expressions -------------------------------------------------------------

  ExprPtr expr() {
    if (is_ident("fn") && is_punct("(", 1)) {
      take();
      take();
      std::vector<std::string> params;
      if (!is_punct(")")) {
        params.push_back(expect_ident());
        while (is_punct(",")) {
          take();
          params.push_back(expect_ident());
        }
      }
      expect_punct(")");
      expect_punct("=>");
      return lambda_body(std::move(params));
    }
    if (is_ident("lambda")) {
      take();
      std::vector<std::string> params;
      if (!is_punct(":")) {
        params.push_back(expect_ident());
        while (is_punct(",")) {
          take();
          params.push_back(expect_ident());
        }
      }
      expect_punct(":");
      return lambda_body(std::move(params));
    }
    return or_expr();
  }

  ExprPtr lambda_body(std::vector<std::string> params) {
    std::set<std::string> scope(params.begin(), params.end());
    if (scope.size() != params.size()) error("duplicate lambda parameter", {});
    scopes_.push_back(scope);
    ExprPtr body = expr();
    scopes_.pop_back();
    return lambda(std::move(params), body);
  }

  ExprPtr or_expr() {
    ExprPtr e = and_expr();
    while (is_ident("or")) {
      take();
      e = binary(BinaryOp::Or, e, and_expr());
    }
    return e;
  }

  ExprPtr and_expr() {
    ExprPtr e = not_expr();
    while (is_ident("and")) {
      take();
      e = binary(BinaryOp::And, e, not_expr());
    }
    return e;
  }

  ExprPtr not_expr() {
    if (is_ident("not")) {
      take();
      return not_(not_expr());
    }
    return comparison();
  }

  ExprPtr comparison() {
    ExprPtr lhs = additive();
    static const std::map<std::string, BinaryOp> ops = {
        {"==", BinaryOp::Eq}, {"!=", BinaryOp::Ne}, {"<", BinaryOp::Lt},
        {"<=", BinaryOp::Le}, {">", BinaryOp::Gt},  {">=", BinaryOp::Ge}};
    if (peek().kind == TokenKind::Punct) {
      auto it = ops.find(peek().lexeme);
      if (it != ops.end()) {
        take();
        return binary(it->second, lhs, additive());
      }
    }
    if (is_ident("in")) {
      take();
      return in(lhs, additive());
    }
    if (is_ident("not") && is_ident("in", 1)) {
      take();
      take();
      return not_(in(lhs, additive()));
    }
    return lhs;
  }

  ExprPtr additive() {
    ExprPtr e = multiplicative();
    while (is_punct("+") || is_punct("-")) {
      BinaryOp op = take().lexeme == "+" ? BinaryOp::Add : BinaryOp::Sub;
      e = binary(op, e, multiplicative());
    }
    return e;
  }

  ExprPtr multiplicative() {
    ExprPtr e = unary();
    while (is_punct("*") || is_punct("/")) {
      BinaryOp op = take().lexeme == "*" ? BinaryOp::Mul : BinaryOp::Div;
      e = binary(op, e, unary());
    }
    return e;
  }

  ExprPtr unary() {
    if (is_punct("-")) {
      take();
      if (peek().kind == TokenKind::Int || peek().kind == TokenKind::Float) {
        Token t = take();
        ExprPtr lit_e = number(t, true);
        return postfix(lit_e, true);
      }
      ExprPtr operand = unary();
      return binary(BinaryOp::Sub, lit(Value(0)), operand);
    }
    return postfix(primary(), false);
  }

  ExprPtr number(const Token& t, bool negative) {
    std::string text = (negative ? "-" : "") + t.lexeme;
    if (t.kind == TokenKind::Int) {
      int64_t v = 0;
      auto res = std::from_chars(text.data(), text.data() + text.size(), v);
      if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw ParseError(t.pos, "integer literal out of range: " + text);
      }
      return lit(Value(v));
    }
    double d = 0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), d);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
      throw ParseError(t.pos, "float literal out of range: " + text);
    }
    return lit(Value(d));
  }

  /// A negative literal takes no postfix operators: `-5(x)` is rejected
  /// rather than read as `-(5(x))`.
  ExprPtr postfix(ExprPtr e, bool negative_literal) {
    while (true) {
      if (is_punct("(")) {
        if (negative_literal) error("cannot apply a negative literal", {});
        SourcePos p = peek().pos;
        take();
        auto args = call_args(false);
        std::vector<ExprPtr> plain;
        for (auto& a : args) {
          if (!a.keyword.empty() || a.is_members) {
            throw ParseError(a.pos, "keyword arguments are only accepted by operators");
          }
          plain.push_back(a.expr);
        }
        (void)p;
        e = call(e, std::move(plain));
      } else if (is_punct("[")) {
        if (negative_literal) error("cannot index a negative literal", {});
        take();
        std::vector<ExprPtr> args{expr()};
        while (is_punct(",")) {
          take();
          args.push_back(expr());
        }
        expect_punct("]");
        e = call(e, std::move(args));
      } else if (is_punct(".")) {
        if (negative_literal) error("cannot access an attribute of a negative literal", {});
        take();
        std::string name = expect_ident();
        if (auto* r = e->as<Expr::Ref>()) {
          auto path = r->path;
          path.push_back(name);
          e = ref(std::move(path));
        } else {
          e = call(e, {lit(Value(name))});
        }
      } else {
        return e;
      }
    }
  }

  ExprPtr primary() {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::Int:
      case TokenKind::Float: {
        Token tok = take();
        return number(tok, false);
      }
      case TokenKind::String:
        return lit(Value(take().lexeme));
      case TokenKind::Ident: {
        std::string name = t.lexeme;
        if (name == "true" || name == "True") {
          take();
          return lit(Value(true));
        }
        if (name == "false" || name == "False") {
          take();
          return lit(Value(false));
        }
        static const std::set<std::string> reserved = {"and", "or", "not", "in", "fn", "lambda"};
        if (reserved.count(name)) error("expected an expression", {"expression"});
        if (!row_param_.empty() && name != row_param_ && !bound(name)) {
          take();
          return call(param(row_param_), {lit(Value(name))});
        }
        if (kOperators.count(name) && is_punct("(", 1) && !bound(name)) {
          SourcePos p = take().pos;
          take();
          return operator_call(name, p);
        }
        take();
        if (bound(name)) return param(name);
        return ref({name});
      }
      case TokenKind::Punct: {
        if (t.lexeme == "(") {
          take();
          ExprPtr e = expr();
          expect_punct(")");
          return e;
        }
        if (t.lexeme == "[") {
          take();
          std::vector<ExprPtr> items;
          if (!is_punct("]")) {
            items.push_back(expr());
            while (is_punct(",")) {
              take();
              if (is_punct("]")) break;
              items.push_back(expr());
            }
          }
          expect_punct("]");
          return set_lit(std::move(items));
        }
        if (t.lexeme == "{") {
          take();
          std::vector<std::pair<std::string, ExprPtr>> fields;
          if (!is_punct("}")) {
            fields.push_back(record_field());
            while (is_punct(",")) {
              take();
              if (is_punct("}")) break;
              fields.push_back(record_field());
            }
          }
          expect_punct("}");
          return record(std::move(fields));
        }
        if (t.lexeme == "$" && !row_param_.empty()) {
          take();
          SourcePos p = peek().pos;
          std::string name = expect_ident();
          auto it = text_params_.find(name);
          if (it == text_params_.end()) throw ParseError(p, "no value given for parameter $" + name);
          return it->second;
        }
        break;
      }
      default:
        break;
    }
    error("expected an expression", {"expression"});
  }

  std::pair<std::string, ExprPtr> record_field() {
    std::string key;
    if (peek().kind == TokenKind::String || peek().kind == TokenKind::Ident) {
      key = take().lexeme;
    } else {
      error("expected a record key", {"name", "string"});
    }
    expect_punct(":");
    return {key, expr()};
  }

  // -- operator calls ----------------------------------------------------------

  bool member_tuple_ahead(size_t k) const {
    return is_punct("(", k) && peek(k + 1).kind == TokenKind::Ident &&
           (is_punct(":", k + 2) || is_punct("=", k + 2));
  }

  GroupingMember member_tuple() {
    GroupingMember m;
    bool named = false;
    SourcePos start = peek().pos;
    expect_punct("(");
    while (true) {
      SourcePos p = peek().pos;
      std::string key = expect_ident();
      if (!is_punct(":") && !is_punct("=")) error("expected ':' or '='", {":", "="});
      take();
      ExprPtr value = expr();
      if (auto spec = agg_spec(key, value, p)) {
        m.aggs.push_back(*spec);
      } else if (key == "by") {
        m.by = name_list(value, p);
      } else if (key == "name") {
        auto* l = value->as<Expr::Lit>();
        if (!l || !l->value.is_text()) throw ParseError(p, "grouping set name must be a string");
        m.name = l->value.as_text();
        named = true;
      } else {
        throw ParseError(p, "unknown grouping set field '" + key + "'");
      }
      if (!is_punct(",")) break;
      take();
    }
    expect_punct(")");
    if (!named) throw ParseError(start, "grouping set member needs a name");
    return m;
  }

  std::vector<Arg> call_args(bool allow_members) {
    std::vector<Arg> args;
    if (is_punct(")")) {
      take();
      return args;
    }
    while (true) {
      Arg a;
      a.pos = peek().pos;
      if (allow_members && member_tuple_ahead(0)) {
        a.is_members = true;
        a.members.push_back(member_tuple());
      } else if (allow_members && (is_punct("{") || is_punct("[")) && member_tuple_ahead(1)) {
        std::string close = take().lexeme == "{" ? "}" : "]";
        a.is_members = true;
        a.members.push_back(member_tuple());
        while (is_punct(",")) {
          take();
          if (is_punct(close)) break;
          a.members.push_back(member_tuple());
        }
        expect_punct(close);
      } else {
        if (peek().kind == TokenKind::Ident && is_punct("=", 1)) {
          a.keyword = take().lexeme;
          take();
        }
        a.expr = expr();
      }
      args.push_back(std::move(a));
      if (!is_punct(",")) break;
      take();
      if (is_punct(")")) break;
    }
    expect_punct(")");
    return args;
  }

  std::optional<AggSpec> agg_spec(const std::string& out, const ExprPtr& value, SourcePos p) {
    auto* a = value->as<Expr::Apply>();
    if (!a) return std::nullopt;
    auto* r = a->fn->as<Expr::Ref>();
    if (!r || r->path.size() != 1) return std::nullopt;
    auto it = kAggs.find(r->path[0]);
    if (it == kAggs.end()) return std::nullopt;
    AggSpec spec{out, it->second, ""};
    if (it->second == AggKind::Count) {
      if (!a->args.empty()) throw ParseError(p, "Count() takes no arguments");
      return spec;
    }
    if (a->args.size() != 1) {
      throw ParseError(p, r->path[0] + "() needs the attribute to aggregate");
    }
    spec.attribute = name_of(a->args[0], p);
    return spec;
  }

  std::string name_of(const ExprPtr& e, SourcePos p) {
    if (auto* l = e->as<Expr::Lit>(); l && l->value.is_text()) return l->value.as_text();
    if (auto* r = e->as<Expr::Ref>(); r && r->path.size() == 1) return r->path[0];
    throw ParseError(p, "expected an attribute name");
  }

  std::vector<std::string> name_list(const ExprPtr& e, SourcePos p) {
    if (auto* s = e->as<Expr::SetLit>()) {
      std::vector<std::string> out;
      for (const auto& item : s->items) out.push_back(name_of(item, p));
      return out;
    }
    return {name_of(e, p)};
  }

  JoinEndpoint endpoint(const ExprPtr& e, SourcePos p) {
    if (auto* r = e->as<Expr::Ref>(); r && r->path.size() == 2) return {r->path[0], r->path[1]};
    if (auto* l = e->as<Expr::Lit>(); l && l->value.is_text()) {
      const std::string& s = l->value.as_text();
      auto dot = s.find('.');
      if (dot != std::string::npos) return {s.substr(0, dot), s.substr(dot + 1)};
    }
    throw ParseError(p, "join condition endpoints are written relation.attribute");
  }

  ExprPtr operator_call(const std::string& name, SourcePos p) {
    OperatorKind kind = *operator_from_name(name);
    bool grouping = kind == OperatorKind::GroupAndAggregate || kind == OperatorKind::GroupingSets;
    auto args = call_args(grouping);

    OpConfig cfg;
    std::vector<ExprPtr> positional;
    ExprPtr input;
    std::vector<std::pair<std::string, ExprPtr>> eq_fields;  // filter(state="NY", ...)
    std::map<std::string, ExprPtr> kw;
    for (auto& a : args) {
      if (a.is_members) {
        if (!grouping) throw ParseError(a.pos, "grouping set members are only accepted by grouping operators");
        for (auto& m : a.members) cfg.sets.push_back(std::move(m));
        continue;
      }
      if (a.keyword.empty()) {
        positional.push_back(a.expr);
        continue;
      }
      if (a.keyword == "input") {
        if (input) throw ParseError(a.pos, "input given twice");
        input = a.expr;
        continue;
      }
      if (auto spec = agg_spec(a.keyword, a.expr, a.pos)) {
        if (kind != OperatorKind::Aggregate && kind != OperatorKind::GroupAndAggregate) {
          throw ParseError(a.pos, "aggregates are not accepted by " + name);
        }
        cfg.aggs.push_back(*spec);
        continue;
      }
      if (kind == OperatorKind::Filter && !(a.keyword == "att" || a.keyword == "op" || a.keyword == "c")) {
        eq_fields.push_back({a.keyword, a.expr});
        continue;
      }
      if (kw.count(a.keyword)) throw ParseError(a.pos, "keyword '" + a.keyword + "' given twice");
      kw[a.keyword] = a.expr;
    }
    auto take_kw = [&](const std::string& k) -> ExprPtr {
      auto it = kw.find(k);
      if (it == kw.end()) return nullptr;
      ExprPtr e = it->second;
      kw.erase(it);
      return e;
    };
    auto need_input = [&] {
      if (!input) {
        if (positional.empty()) throw ParseError(p, name + " needs an input");
        input = positional.back();
        positional.pop_back();
      }
      return input;
    };
    auto finish = [&](std::vector<ExprPtr> inputs) {
      if (!kw.empty()) throw ParseError(p, "unknown keyword '" + kw.begin()->first + "' for " + name);
      if (!positional.empty()) throw ParseError(p, "too many arguments for " + name);
      return op(kind, cfg, std::move(inputs));
    };

    switch (kind) {
      case OperatorKind::Filter: {
        ExprPtr in_e = need_input();
        ExprPtr pred;
        ExprPtr att = take_kw("att"), opk = take_kw("op"), c = take_kw("c");
        if (att || opk || c) {
          if (!att || !opk || !c) throw ParseError(p, "filter needs all of att=, op= and c=");
          std::string attr_name = name_of(att, p);
          std::string op_name = name_of(opk, p);
          auto it = kCompareOps.find(op_name);
          if (it == kCompareOps.end()) throw ParseError(p, "unknown comparison '" + op_name + "'");
          std::string t = fresh_row_name({c});
          pred = lambda({t}, binary(it->second, attr(t, attr_name), c));
        } else if (!eq_fields.empty()) {
          std::vector<ExprPtr> values;
          for (auto& f : eq_fields) values.push_back(f.second);
          std::string t = fresh_row_name(values);
          ExprPtr body;
          for (auto& [a, v] : eq_fields) {
            ExprPtr eq = binary(BinaryOp::Eq, attr(t, a), v);
            body = body ? binary(BinaryOp::And, body, eq) : eq;
          }
          pred = lambda({t}, body);
          eq_fields.clear();
        } else if (!positional.empty()) {
          ExprPtr first = positional.front();
          positional.erase(positional.begin());
          auto* text = first->as<Expr::Lit>();
          if (text && text->value.is_text()) {
            std::map<std::string, ExprPtr> params;
            if (!positional.empty()) {
              auto* rec = positional.front()->as<Expr::Record>();
              if (!rec) throw ParseError(p, "textual predicate parameters must be a record");
              for (const auto& [k, v] : rec->fields) params[k] = v;
              positional.erase(positional.begin());
            }
            pred = textual_predicate(text->value.as_text(), params, p);
          } else {
            pred = first;
          }
        } else {
          throw ParseError(p, "filter needs a predicate");
        }
        return finish({pred, in_e});
      }
      case OperatorKind::Group:
      case OperatorKind::GroupAndAggregate:
      case OperatorKind::GroupingSets: {
        if (!cfg.sets.empty() && kind == OperatorKind::GroupAndAggregate) kind = OperatorKind::GroupingSets;
        ExprPtr in_e = need_input();
        if (kind == OperatorKind::GroupingSets) {
          if (cfg.sets.empty()) throw ParseError(p, "grouping_sets needs at least one member");
          if (!cfg.aggs.empty()) throw ParseError(p, "aggregates belong inside grouping set members");
          return finish({in_e});
        }
        if (ExprPtr by = take_kw("by")) {
          cfg.by = name_list(by, p);
          return finish({in_e});
        }
        if (positional.empty()) {
          if (kind == OperatorKind::Group) throw ParseError(p, "group needs by= or a key function");
          return finish({in_e});
        }
        cfg.by_lambda = true;
        ExprPtr key = positional.front();
        positional.erase(positional.begin());
        return finish({key, in_e});
      }
      case OperatorKind::Aggregate:
        return finish({need_input()});
      case OperatorKind::Join: {
        ExprPtr in_e = need_input();
        if (ExprPtr on = take_kw("on")) {
          auto* pairs = on->as<Expr::SetLit>();
          if (!pairs) throw ParseError(p, "on= expects a list of [a.x, b.y] pairs");
          std::vector<JoinPair> conds;
          for (const auto& item : pairs->items) {
            auto* pair = item->as<Expr::SetLit>();
            if (!pair || pair->items.size() != 2) throw ParseError(p, "each join condition is a pair");
            conds.push_back({endpoint(pair->items[0], p), endpoint(pair->items[1], p)});
          }
          cfg.on = std::move(conds);
        }
        return finish({in_e});
      }
      case OperatorKind::OuterMark: {
        ExprPtr in_e = need_input();
        ExprPtr outer = take_kw("outer");
        if (!outer) throw ParseError(p, "subdatabase needs outer=");
        cfg.outer = name_list(outer, p);
        return finish({in_e});
      }
      case OperatorKind::ReduceDB:
      case OperatorKind::DeepCopy:
      case OperatorKind::Copy:
        return finish({need_input()});
      case OperatorKind::Union:
      case OperatorKind::Intersect:
      case OperatorKind::Minus:
      case OperatorKind::Difference: {
        if (positional.size() != 2) throw ParseError(p, name + " takes two database functions");
        std::vector<ExprPtr> ins = positional;
        positional.clear();
        return finish(ins);
      }
    }
    throw ParseError(p, "unknown operator " + name);
  }

  std::string fresh_row_name(const std::vector<ExprPtr>& values,
                             std::set<std::string> avoid = {}) {
    for (const auto& v : values) {
      for (const auto& n : free_names(*v)) avoid.insert(n);
    }
    std::string t = "t";
    for (int k = 1; avoid.count(t) || bound(t); ++k) t = "t" + std::to_string(k);
    return t;
  }

  ExprPtr textual_predicate(const std::string& text, const std::map<std::string, ExprPtr>& params,
                            SourcePos p) {
    std::vector<ExprPtr> values;
    for (const auto& [k, v] : params) values.push_back(v);
    std::set<std::string> words;
    std::vector<Token> tokens;
    try {
      tokens = tokenize(text);
    } catch (const ParseError& e) {
      throw ParseError(p, std::string("in textual predicate: ") + e.detail(), e.expected());
    }
    for (const auto& tok : tokens) {
      if (tok.kind == TokenKind::Ident) words.insert(tok.lexeme);
    }
    std::string t = fresh_row_name(values, words);
    try {
      Parser sub(std::move(tokens));
      sub.scopes_ = scopes_;
      sub.predicate_mode(t, params);
      return lambda({t}, sub.single_expr());
    } catch (const ParseError& e) {
      throw ParseError(p, std::string("in textual predicate: ") + e.detail(), e.expected());
    }
  }

  std::vector<Token> toks_;
  size_t i_ = 0;
  std::vector<std::set<std::string>> scopes_;
  std::string row_param_;
  std::map<std::string, ExprPtr> text_params_;
};

}  // namespace

Script parse_script(std::string_view text) { return Parser(tokenize(text)).script(); }

ExprPtr parse_expr(std::string_view text) { return Parser(tokenize(text)).single_expr(); }

}  // namespace fql::syntax
