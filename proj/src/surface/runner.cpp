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

#include "fql/runner.hpp"

#include <algorithm>
#include <iostream>
#include <sstream>

#include "fql/error.hpp"
#include "fql/eval.hpp"
#include "fql/ops.hpp"
#include "fql/optimizer.hpp"
#include "fql/persist.hpp"

namespace fql::surface {

Status status_of(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::ParseError: return Status::ParseError;
    case ErrorKind::IoError: return Status::IoError;
    default: return Status::EvalError;
  }
}

std::string describe(const Error& e) {
  if (e.kind() == ErrorKind::ParseError) return std::string("parse error at ") + e.what();
  return std::string(error_name(e.kind())) + ": " + e.what();
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

namespace {

std::string nested_literal(const Value& v, const Context& ctx);

std::string cell(const Value& v, const Context& ctx) {
  if (v.is_text()) return v.as_text();
  return nested_literal(v, ctx);
}

std::string nested_literal(const Value& v, const Context& ctx) {
  switch (v.type()) {
    case ValueType::Int: return std::to_string(v.as_int());
    case ValueType::Float: return format_float(v.as_float());
    case ValueType::Text: return quote_text(v.as_text());
    case ValueType::Bool: return v.as_bool() ? "true" : "false";
    case ValueType::Set: {
      std::string s = "[";
      bool first = true;
      for (const auto& item : v.as_set()) {
        s += (first ? "" : ", ") + nested_literal(item, ctx);
        first = false;
      }
      return s + "]";
    }
    default: break;
  }
  const FunctionValue& f = *v.as_function();
  if (f.level != Level::Tuple || f.arity() != 1) return "<" + std::string(level_name(f.level)) + ">";
  std::string s = "{";
  bool first = true;
  for (const auto& [k, a] : ops::materialize(f, ctx)) {
    s += (first ? "" : ", ") + cell(k[0], ctx) + "=" + nested_literal(a, ctx);
    first = false;
  }
  return s + "}";
}

std::string key_name(const Key& k, const Context& ctx) {
  std::string s;
  for (const auto& part : k) s += (s.empty() ? "" : ", ") + cell(part, ctx);
  return s;
}

bool is_row(const Value& v) {
  return (v.is_bool() && v.as_bool()) ||
         (v.is_function() && v.as_function()->level == Level::Tuple && v.as_function()->arity() == 1);
}

void table(std::string& out, const FunctionValue& f, const Context& ctx) {
  auto rows = ops::materialize(f, ctx);
  std::vector<std::string> columns;
  for (const auto& p : f.sig) columns.push_back(p.name);
  size_t nkeys = columns.size();

  std::vector<std::map<std::string, std::string>> attrs(rows.size());
  std::set<std::string> names;
  bool scalar_rows = false;
  for (size_t i = 0; i < rows.size(); ++i) {
    const Value& v = rows[i].second;
    if (v.is_bool() && v.as_bool()) continue;
    if (is_row(v)) {
      for (const auto& [ak, av] : ops::materialize(*v.as_function(), ctx)) {
        std::string n = cell(ak[0], ctx);
        names.insert(n);
        attrs[i][n] = cell(av, ctx);
      }
    } else {
      scalar_rows = true;
      attrs[i]["\x01value"] = cell(v, ctx);
    }
  }
  // An attribute repeating its key parameter in every row is shown once.
  for (size_t c = 0; c < nkeys; ++c) {
    if (!names.count(columns[c])) continue;
    bool repeats = true;
    for (size_t i = 0; i < rows.size() && repeats; ++i) {
      auto it = attrs[i].find(columns[c]);
      repeats = it != attrs[i].end() && it->second == cell(rows[i].first[c], ctx);
    }
    if (repeats) names.erase(columns[c]);
  }
  columns.insert(columns.end(), names.begin(), names.end());
  if (scalar_rows) columns.push_back("\x01value");

  std::vector<std::vector<std::string>> grid;
  for (size_t i = 0; i < rows.size(); ++i) {
    std::vector<std::string> line;
    for (const auto& k : rows[i].first) line.push_back(cell(k, ctx));
    for (size_t c = nkeys; c < columns.size(); ++c) {
      auto it = attrs[i].find(columns[c]);
      line.push_back(it == attrs[i].end() ? "" : it->second);
    }
    grid.push_back(std::move(line));
  }
  for (auto& c : columns) {
    if (c == "\x01value") c = "value";
  }
  std::vector<size_t> width(columns.size());
  for (size_t c = 0; c < columns.size(); ++c) {
    width[c] = columns[c].size();
    for (const auto& line : grid) width[c] = std::max(width[c], line[c].size());
  }
  auto emit = [&](const std::vector<std::string>& line) {
    std::string s;
    for (size_t c = 0; c < line.size(); ++c) {
      if (c) s += " | ";
      s += line[c];
      if (c + 1 < line.size()) s.append(width[c] - line[c].size(), ' ');
    }
    out += s + "\n";
  };
  emit(columns);
  std::string rule;
  for (size_t c = 0; c < columns.size(); ++c) {
    if (c) rule += "-+-";
    rule.append(width[c], '-');
  }
  out += rule + "\n";
  for (const auto& line : grid) emit(line);
  out += "(" + std::to_string(rows.size()) + (rows.size() == 1 ? " row)\n" : " rows)\n");
}

bool relation_shaped(const FunctionValue& f) {
  return f.level == Level::Relation || (f.level == Level::Generic && f.arity() > 0);
}

void render_into(std::string& out, const std::string& name, const Value& v, const Context& ctx) {
  bool nested_db = v.is_function() && v.as_function()->level == Level::Database;
  if (!name.empty() && !nested_db) out += "== " + name + " ==\n";
  if (!v.is_function()) {
    out += nested_literal(v, ctx) + "\n";
    return;
  }
  const FunctionValue& f = *v.as_function();
  if (f.level == Level::Database) {
    auto members = ops::materialize(f, ctx);
    if (members.empty()) {
      if (!name.empty()) out += "== " + name + " ==\n";
      out += "(empty database)\n";
      return;
    }
    bool first = true;
    for (const auto& [k, member] : members) {
      if (!first) out += "\n";
      first = false;
      std::string n = key_name(k, ctx);
      render_into(out, name.empty() ? n : name + "." + n, member, ctx);
    }
    return;
  }
  if (f.level == Level::Tuple) {
    out += nested_literal(v, ctx) + "\n";
    return;
  }
  if (relation_shaped(f)) {
    table(out, f, ctx);
    return;
  }
  out += "<" + std::string(level_name(f.level)) + ">\n";
}

}  // namespace

std::string render(const Value& v, const Context& ctx) {
  std::string out;
  render_into(out, "", v, ctx);
  return out;
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

Runner::Runner(std::shared_ptr<engine::Store> store, std::ostream& out, engine::Evaluation how,
               Mode mode)
    : session_(std::move(store)), out_(out), how_(how), mode_(mode) {}

namespace {

ExprPtr rebuild(const ExprPtr& e, const std::function<ExprPtr(const Expr::Ref&)>& on_ref) {
  const Expr& x = *e;
  auto rec = [&](const ExprPtr& c) { return rebuild(c, on_ref); };
  auto recs = [&](const std::vector<ExprPtr>& cs) {
    std::vector<ExprPtr> out;
    for (const auto& c : cs) out.push_back(rec(c));
    return out;
  };
  if (auto* r = x.as<Expr::Ref>()) {
    ExprPtr replaced = on_ref(*r);
    return replaced ? replaced : e;
  }
  if (auto* a = x.as<Expr::Apply>()) return call(rec(a->fn), recs(a->args));
  if (auto* l = x.as<Expr::Lambda>()) return lambda(l->params, rec(l->body));
  if (auto* b = x.as<Expr::Binary>()) return binary(b->op, rec(b->lhs), rec(b->rhs));
  if (auto* n = x.as<Expr::Not>()) return not_(rec(n->operand));
  if (auto* i = x.as<Expr::In>()) return in(rec(i->needle), rec(i->haystack));
  if (auto* r = x.as<Expr::Record>()) {
    std::vector<std::pair<std::string, ExprPtr>> fields;
    for (const auto& [k, v] : r->fields) fields.emplace_back(k, rec(v));
    return record(std::move(fields));
  }
  if (auto* s = x.as<Expr::SetLit>()) return set_lit(recs(s->items));
  if (auto* o = x.as<Expr::Op>()) return op(o->kind, o->config, recs(o->inputs));
  return e;
}

bool single_text(const Key& k) { return k.size() == 1 && k[0].is_text(); }

}  // namespace

ExprPtr Runner::resolve(const ExprPtr& e) const {
  if (aliases_.empty()) return e;
  return rebuild(e, [&](const Expr::Ref& r) -> ExprPtr {
    auto it = aliases_.find(r.path[0]);
    if (it == aliases_.end()) return nullptr;
    const engine::Path& p = it->second;
    const std::string& name = p[0][0].as_text();
    std::vector<std::string> path;
    if (bindings_.count(name)) path.push_back("DB");
    path.push_back(name);
    size_t i = 1;
    while (i < p.size() && single_text(p[i])) path.push_back(p[i++][0].as_text());
    if (i == p.size()) {
      path.insert(path.end(), r.path.begin() + 1, r.path.end());
      return ref(std::move(path));
    }
    ExprPtr out = ref(std::move(path));
    for (; i < p.size(); ++i) {
      std::vector<ExprPtr> args;
      for (const auto& v : p[i]) args.push_back(lit(v));
      out = call(out, std::move(args));
    }
    for (size_t j = 1; j < r.path.size(); ++j) out = call(out, {lit(Value(r.path[j]))});
    return out;
  });
}

std::optional<engine::Path> Runner::catalog_path(const ExprPtr& e) const {
  if (auto* r = e->as<Expr::Ref>()) {
    const auto& p = r->path;
    if (bindings_.count(p[0])) return std::nullopt;
    size_t start;
    if (p[0] == "DB") {
      if (p.size() < 2) return std::nullopt;
      start = 1;
    } else if (session_.snapshot()->catalog().has(p[0])) {
      start = 0;
    } else {
      return std::nullopt;
    }
    engine::Path out;
    for (size_t i = start; i < p.size(); ++i) out.push_back({Value(p[i])});
    return out;
  }
  if (auto* a = e->as<Expr::Apply>()) {
    if (auto* head = a->fn->as<Expr::Ref>(); head && head->path.size() == 1 && head->path[0] == "DB" &&
                                             !bindings_.count("DB")) {
      if (a->args.size() == 1) {
        if (auto* l = a->args[0]->as<Expr::Lit>(); l && l->value.is_text()) {
          return engine::Path{{l->value}};
        }
      }
      return std::nullopt;
    }
    auto base = catalog_path(a->fn);
    if (!base) return std::nullopt;
    Key k;
    for (const auto& arg : a->args) {
      auto* l = arg->as<Expr::Lit>();
      if (!l) return std::nullopt;
      k.push_back(l->value);
    }
    base->push_back(std::move(k));
    return base;
  }
  return std::nullopt;
}

Runner::Target Runner::target(const ExprPtr& e) const {
  // Flatten to a head name plus keys; key arguments may be expressions.
  std::vector<Key> keys;
  ExprPtr cur = e;
  std::string head;
  while (true) {
    if (auto* a = cur->as<Expr::Apply>()) {
      Key k;
      for (const auto& arg : a->args) k.push_back(session_.read(arg, bindings_, how_));
      keys.insert(keys.begin(), std::move(k));
      cur = a->fn;
      continue;
    }
    if (auto* r = cur->as<Expr::Ref>()) {
      std::vector<Key> front;
      for (size_t i = 1; i < r->path.size(); ++i) front.push_back({Value(r->path[i])});
      keys.insert(keys.begin(), front.begin(), front.end());
      head = r->path[0];
      break;
    }
    fail(ErrorKind::ReadOnlyTarget, "cannot assign to " + syntax::print(*e));
  }
  Target t;
  if (bindings_.count(head)) {
    t.binding = head;
    t.path = std::move(keys);
  } else if (head == "DB") {
    t.catalog = true;
    t.path = std::move(keys);
  } else if (session_.snapshot()->catalog().has(head)) {
    t.catalog = true;
    t.path = std::move(keys);
    t.path.insert(t.path.begin(), Key{Value(head)});
  } else {
    fail(ErrorKind::NameError, "unknown name '" + head + "'");
  }
  if (t.path.empty() || (t.catalog && t.path.size() < 2)) {
    fail(ErrorKind::ReadOnlyTarget, "cannot assign to " + syntax::print(*e));
  }
  t.key = t.path.back();
  t.path.pop_back();
  return t;
}

Value Runner::evaluate(const ExprPtr& e) { return session_.read(resolve(e), bindings_, how_); }

void Runner::bind(const std::string& name, const ExprPtr& e, const Value* value) {
  if (name == "DB") fail(ErrorKind::NameError, "'DB' cannot be rebound");
  if (!value) {
    aliases_[name] = *catalog_path(e);
    bindings_.erase(name);
    return;
  }
  bindings_[name] = *value;
  aliases_.erase(name);
}

void Runner::assign(const syntax::Statement::Assign& a) {
  ExprPtr target_expr = resolve(a.target);
  ExprPtr value_expr = resolve(a.value);
  if (a.op == "=") {
    auto p = catalog_path(target_expr);
    bool db_member = false;
    if (auto* r = target_expr->as<Expr::Ref>()) db_member = r->path.size() == 2 && r->path[0] == "DB";
    if (target_expr->as<Expr::Apply>() && p && p->size() == 1) db_member = true;
    if (db_member && p && p->size() == 1) {
      auto* o = value_expr->as<Expr::Op>();
      bool materialize =
          o && (o->kind == OperatorKind::Copy || o->kind == OperatorKind::DeepCopy);
      session_.assign(p->front()[0].as_text(), value_expr, materialize, bindings_);
      return;
    }
  }
  Target t = target(target_expr);
  Value v = session_.read(value_expr, bindings_, how_);
  if (a.op != "=") {
    Value current = session_.read(target_expr, bindings_, how_);
    v = scalar::arithmetic(a.op == "+=" ? BinaryOp::Add : BinaryOp::Sub, current, v);
  }
  if (t.catalog) {
    session_.set(t.path, t.key, v);
  } else {
    auto snap = session_.snapshot();
    Context ctx{*snap, interpreter()};
    bindings_[t.binding] = engine::updated(bindings_[t.binding], t.path, t.key, v, ctx);
  }
}

void Runner::remove(const ExprPtr& e) {
  Target t = target(resolve(e));
  if (t.catalog) {
    session_.remove(t.path, t.key);
  } else {
    auto snap = session_.snapshot();
    Context ctx{*snap, interpreter()};
    bindings_[t.binding] = engine::updated(bindings_[t.binding], t.path, t.key, std::nullopt, ctx);
  }
}

void Runner::add(const syntax::Statement::Add& a) {
  ExprPtr rel = resolve(a.relation);
  Value v = session_.read(resolve(a.value), bindings_, how_);
  Value key;
  if (auto p = catalog_path(rel); p && p->size() >= 1) {
    key = session_.add(*p, v);
  } else {
    Target t = target(call(rel, {lit(Value(0))}));
    if (t.catalog) fail(ErrorKind::ReadOnlyTarget, "cannot add to " + syntax::print(*rel));
    Value fn = session_.read(rel, bindings_, how_);
    if (!fn.is_function()) fail(ErrorKind::TypeMismatch, "add needs a function");
    key = engine::next_key(*fn.as_function());
    auto snap = session_.snapshot();
    Context ctx{*snap, interpreter()};
    bindings_[t.binding] = engine::updated(bindings_[t.binding], t.path, {key}, v, ctx);
  }
  (void)key;
}

void Runner::show(const ExprPtr& e) {
  if (mode_ == Mode::Explain) {
    explain(e);
    return;
  }
  Value v = evaluate(e);
  auto snap = session_.snapshot();
  Context ctx{*snap, interpreter()};
  if (shown_) out_ << "\n";
  shown_ = true;
  out_ << render(v, ctx);
}

void Runner::explain(const ExprPtr& e) {
  if (shown_) out_ << "\n";
  shown_ = true;
  out_ << optimizer::explain(session_.plan(resolve(e), bindings_));
}

void Runner::execute(const syntax::Statement& s, bool echo) {
  using S = syntax::Statement;
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, S::Eval>) {
          if (mode_ == Mode::Explain) {
            explain(n.expr);
          } else if (echo) {
            show(n.expr);
          } else {
            evaluate(n.expr);
          }
        } else if constexpr (std::is_same_v<T, S::Bind>) {
          std::vector<ExprPtr> exprs;
          std::vector<std::optional<Value>> values;
          for (const auto& e : n.values) {
            ExprPtr r = resolve(e);
            exprs.push_back(r);
            if (catalog_path(r)) {
              values.emplace_back();
            } else {
              values.emplace_back(session_.read(r, bindings_, how_));
            }
          }
          for (size_t i = 0; i < n.names.size(); ++i) {
            bind(n.names[i], exprs[i], values[i] ? &*values[i] : nullptr);
          }
        } else if constexpr (std::is_same_v<T, S::Assign>) {
          assign(n);
        } else if constexpr (std::is_same_v<T, S::Delete>) {
          remove(n.target);
        } else if constexpr (std::is_same_v<T, S::Add>) {
          add(n);
        } else if constexpr (std::is_same_v<T, S::Begin>) {
          session_.begin();
        } else if constexpr (std::is_same_v<T, S::Commit>) {
          session_.commit();
        } else if constexpr (std::is_same_v<T, S::Rollback>) {
          session_.rollback();
        } else if constexpr (std::is_same_v<T, S::Show>) {
          show(n.expr);
        } else if constexpr (std::is_same_v<T, S::Explain>) {
          explain(n.expr);
        } else if constexpr (std::is_same_v<T, S::Load>) {
          session_.replace(persist::load_file(n.path));
        } else if constexpr (std::is_same_v<T, S::Save>) {
          persist::store_file(n.path, session_.snapshot()->catalog());
        }
      },
      s.node);
}

Status Runner::run(std::string_view text, std::ostream& err) {
  syntax::Script script;
  try {
    script = syntax::parse_script(text);
  } catch (const Error& e) {
    err << describe(e) << "\n";
    return status_of(e);
  }
  for (const auto& s : script.statements) {
    try {
      execute(s);
    } catch (const Error& e) {
      out_.flush();
      err << "line " << s.line << ": " << describe(e) << "\n";
      return status_of(e);
    }
  }
  return Status::Ok;
}

namespace {

/// Bracket depth after `text`, ignoring brackets inside strings and comments.
int depth_of(std::string_view text) {
  int depth = 0;
  char quote = 0;
  for (size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quote) {
      if (c == '\\') ++i;
      else if (c == quote) quote = 0;
    } else if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
    } else if (c == '(' || c == '[' || c == '{') {
      ++depth;
    } else if (c == ')' || c == ']' || c == '}') {
      --depth;
    }
  }
  return depth;
}

}  // namespace

void Runner::repl(std::istream& in, std::ostream& err, bool prompt) {
  std::string pending;
  std::string line;
  while (true) {
    if (prompt) out_ << (pending.empty() ? "fql> " : "...> ") << std::flush;
    if (!std::getline(in, line)) break;
    pending += line + "\n";
    if (depth_of(pending) > 0) continue;
    std::string text = std::move(pending);
    pending.clear();
    try {
      for (const auto& s : syntax::parse_script(text).statements) {
        shown_ = false;
        execute(s, true);
      }
    } catch (const Error& e) {
      err << describe(e) << "\n";
    }
  }
  if (prompt) out_ << "\n";
}

}  // namespace fql::surface
