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

#include "fql/persist.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fql/error.hpp"
#include "fql/ops.hpp"
#include "fql/syntax.hpp"

namespace fql::persist {

namespace {

[[noreturn]] void unserializable(const std::string& msg) { fail(ErrorKind::NotSerializable, msg); }

// ---------------------------------------------------------------------------
// Writing
// ---------------------------------------------------------------------------

struct Writer {
  bool lenient = false;
  std::string out;

  std::string name(const std::string& n) const {
    if (syntax::is_identifier(n)) return n;
    if (lenient) return quote_text(n);
    unserializable("'" + n + "' is not a plain name");
  }

  static std::string literal(const Value& v) {
    switch (v.type()) {
      case ValueType::Int: return std::to_string(v.as_int());
      case ValueType::Float:
        if (!std::isfinite(v.as_float())) unserializable("non-finite float " + format_float(v.as_float()));
        return format_float(v.as_float());
      case ValueType::Text: return quote_text(v.as_text());
      case ValueType::Bool: return v.as_bool() ? "true" : "false";
      default: unserializable(std::string("a ") + type_name(v.type()) + " value has no literal form");
    }
  }

  static const char* type_word(BaseType b) {
    switch (b) {
      case BaseType::Int: return "int";
      case BaseType::Float: return "float";
      case BaseType::Text: return "text";
      case BaseType::Bool: return "bool";
      default: return nullptr;
    }
  }

  static BaseType base_of(const Value& v) {
    switch (v.type()) {
      case ValueType::Int: return BaseType::Int;
      case ValueType::Float: return BaseType::Float;
      case ValueType::Text: return BaseType::Text;
      case ValueType::Bool: return BaseType::Bool;
      default: return BaseType::Any;
    }
  }

  /// Declared type, or the one type every key uses at position i.
  static BaseType param_type(const Param& p, size_t i, const std::vector<std::pair<Key, Value>>& rows) {
    if (p.constraint.base != BaseType::Any) return p.constraint.base;
    std::optional<BaseType> seen;
    for (const auto& [k, v] : rows) {
      BaseType b = base_of(k[i]);
      if (seen && *seen != b) return BaseType::Any;
      seen = b;
    }
    return seen.value_or(BaseType::Int);
  }

  void param(const Param& p, size_t i, const std::vector<std::pair<Key, Value>>& rows) {
    const char* word = type_word(param_type(p, i, rows));
    if (!word) unserializable("parameter '" + p.name + "' has no single scalar type");
    out += name(p.name) + ": " + word;
    const auto& c = p.constraint;
    if (auto* f = std::get_if<DomainConstraint::FiniteSet>(&c.form)) {
      out += " in {";
      for (size_t j = 0; j < f->values.size(); ++j) out += (j ? ", " : "") + literal(f->values[j]);
      out += "}";
    } else if (auto* iv = std::get_if<DomainConstraint::Interval>(&c.form)) {
      out += " in [" + literal(iv->lo) + ";" + literal(iv->hi) + "]";
    } else if (std::holds_alternative<DomainConstraint::Predicate>(c.form)) {
      unserializable("parameter '" + p.name + "' has a predicate constraint");
    }
  }

  void row_value(const std::string& rel, const Key& k, const Value& v, const Context* ctx) {
    if (v.is_bool() && v.as_bool() && lenient) {
      out += "{}";
      return;
    }
    if (!v.is_function()) {
      unserializable("row " + debug_string(k) + " of '" + rel + "' is not a tuple");
    }
    const FunctionValue& t = *v.as_function();
    if (t.arity() != 1 || (!t.is_extensional() && !ctx)) {
      unserializable("row " + debug_string(k) + " of '" + rel + "' is not a stored tuple");
    }
    auto attrs = t.is_extensional() ? std::vector<std::pair<Key, Value>>(t.mappings().begin(), t.mappings().end())
                                    : ops::materialize(t, *ctx);
    out += "{";
    bool first = true;
    for (const auto& [ak, av] : attrs) {
      if (!ak[0].is_text()) unserializable("attribute names of '" + rel + "' must be text");
      out += (first ? "" : ", ") + name(ak[0].as_text()) + "=" + literal(av);
      first = false;
    }
    out += "}";
  }

  void relation(const std::string& rel, const FunctionValue& f, const Context* ctx) {
    if (!f.is_extensional() && !ctx) unserializable("'" + rel + "' is computed; only views may be");
    if (f.arity() == 0) unserializable("'" + rel + "' has no key parameters");
    if (f.level == Level::Database) unserializable("'" + rel + "' is a database function");
    if (!lenient && !(f.codomain.base == BaseType::Any && f.codomain.is_unconstrained())) {
      unserializable("'" + rel + "' has a constrained codomain");
    }
    auto rows = f.is_extensional() ? std::vector<std::pair<Key, Value>>(f.mappings().begin(), f.mappings().end())
                                   : ops::materialize(f, *ctx);
    out += "relation " + name(rel) + "(";
    for (size_t i = 0; i < f.sig.size(); ++i) {
      if (i) out += ", ";
      param(f.sig[i], i, rows);
    }
    out += ")\n";
    for (const auto& [k, v] : rows) {
      out += "row";
      for (const auto& kv : k) out += " " + literal(kv);
      out += " -> ";
      row_value(rel, k, v, ctx);
      out += "\n";
    }
    out += "end\n";
  }
};

bool relation_like(const FunctionValue& f, const Context& ctx) {
  if (f.level == Level::Relation) return true;
  if (f.level == Level::Database || f.level == Level::Tuple || f.arity() == 0) return false;
  for (const auto& [k, v] : ops::materialize(f, ctx)) {
    if (!(v.is_function() || (v.is_bool() && v.as_bool()))) return false;
  }
  return true;
}

void write_value(Writer& w, const std::string& prefix, const Value& v, const Context& ctx) {
  const std::string block = prefix.empty() ? "result" : prefix;
  if (v.is_function()) {
    const FunctionValue& f = *v.as_function();
    if (f.level == Level::Database) {
      for (const auto& [k, member] : ops::materialize(f, ctx)) {
        std::string n;
        for (const auto& part : k) n += (n.empty() ? "" : "_") + (part.is_text() ? part.as_text() : debug_string(part));
        write_value(w, prefix.empty() ? n : prefix + "__" + n, member, ctx);
      }
      return;
    }
    if (relation_like(f, ctx)) {
      w.relation(block, f, &ctx);
      return;
    }
    if (f.arity() == 1 && f.level == Level::Tuple) {
      w.out += "relation " + w.name(block) + "(_: int)\nrow 0 -> ";
      w.row_value(block, {Value(0)}, v, &ctx);
      w.out += "\nend\n";
      return;
    }
  }
  w.out += "relation " + w.name(block) + "(_: int)\nrow 0 -> {value=" + Writer::literal(v) + "}\nend\n";
}

// ---------------------------------------------------------------------------
// Reading
// ---------------------------------------------------------------------------

class LineReader {
 public:
  LineReader(std::vector<syntax::Token> toks, int line) : toks_(std::move(toks)), line_(line) {}

  const syntax::Token& peek() const { return toks_[i_]; }
  bool at_end() const {
    return peek().kind == syntax::TokenKind::End || peek().kind == syntax::TokenKind::Newline;
  }
  bool is(const std::string& p) const {
    return (peek().kind == syntax::TokenKind::Punct || peek().kind == syntax::TokenKind::Ident) &&
           peek().lexeme == p;
  }

  [[noreturn]] void error(const std::string& msg, std::vector<std::string> expected = {}) const {
    throw ParseError(SourcePos{line_, peek().pos.column}, msg, std::move(expected));
  }

  void expect(const std::string& p) {
    if (!is(p)) error("expected '" + p + "'", {p});
    ++i_;
  }

  std::string name() {
    if (peek().kind == syntax::TokenKind::Ident || peek().kind == syntax::TokenKind::String) {
      return toks_[i_++].lexeme;
    }
    error("expected a name", {"name"});
  }

  Value literal() {
    bool negative = false;
    if (is("-")) {
      negative = true;
      ++i_;
    }
    const syntax::Token& t = peek();
    if (t.kind == syntax::TokenKind::Int || t.kind == syntax::TokenKind::Float) {
      ExprPtr e = syntax::parse_expr((negative ? "-" : "") + t.lexeme);
      ++i_;
      return e->as<Expr::Lit>()->value;
    }
    if (negative) error("expected a number", {"number"});
    if (t.kind == syntax::TokenKind::String) {
      ++i_;
      return Value(t.lexeme);
    }
    if (t.kind == syntax::TokenKind::Ident && (t.lexeme == "true" || t.lexeme == "false")) {
      ++i_;
      return Value(t.lexeme == "true");
    }
    error("expected a literal", {"literal"});
  }

  void finish() {
    if (!at_end()) error("unexpected text at end of line", {"end of line"});
  }

  int column() const { return peek().pos.column; }
  int line() const { return line_; }

 private:
  std::vector<syntax::Token> toks_;
  size_t i_ = 0;
  int line_;
};

std::optional<BaseType> type_named(const std::string& s) {
  if (s == "int") return BaseType::Int;
  if (s == "float") return BaseType::Float;
  if (s == "text") return BaseType::Text;
  if (s == "bool") return BaseType::Bool;
  return std::nullopt;
}

Value coerce(const Value& v, BaseType b) {
  if (b == BaseType::Float && v.is_int()) return Value(static_cast<double>(v.as_int()));
  return v;
}

Param read_param(LineReader& r) {
  std::string n = r.name();
  r.expect(":");
  int type_col = r.column();
  std::string tword = r.name();
  auto base = type_named(tword);
  if (!base) throw ParseError(SourcePos{r.line(), type_col}, "unknown type '" + tword + "'",
                               {"int", "float", "text", "bool"});
  if (!r.is("in")) return Param{n, DomainConstraint::any(*base)};
  r.expect("in");
  try {
    if (r.is("{")) {
      r.expect("{");
      ValueList values;
      if (!r.is("}")) {
        values.push_back(coerce(r.literal(), *base));
        while (r.is(",")) {
          r.expect(",");
          values.push_back(coerce(r.literal(), *base));
        }
      }
      r.expect("}");
      return Param{n, DomainConstraint::finite(*base, std::move(values))};
    }
    r.expect("[");
    Value lo = coerce(r.literal(), *base);
    Value hi = coerce(r.literal(), *base);
    r.expect("]");
    return Param{n, DomainConstraint::interval(*base, lo, hi)};
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    fail(e.kind(), "line " + std::to_string(r.line()) + ": " + e.what());
  }
}

struct PendingRelation {
  std::string name;
  ParamSig sig;
  Mappings rows;
  int line = 0;
};

}  // namespace

Catalog load_fdb(std::string_view text) {
  Catalog catalog;
  std::optional<PendingRelation> open;
  std::set<std::string> names;
  bool header = false;
  int line_no = 0;
  int last_content = 0;
  size_t start = 0;
  while (start <= text.size()) {
    size_t nl = text.find('\n', start);
    std::string_view line = text.substr(start, nl == std::string_view::npos ? text.npos : nl - start);
    start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    std::vector<syntax::Token> toks;
    try {
      toks = syntax::tokenize(line);
    } catch (const ParseError& e) {
      throw ParseError(SourcePos{line_no, e.pos().column}, e.detail(), e.expected());
    }
    LineReader r(toks, line_no);
    if (r.at_end()) continue;
    last_content = line_no;
    if (!header) {
      r.expect("fdb");
      if (r.peek().kind != syntax::TokenKind::Int || r.peek().lexeme != "1") {
        r.error("unsupported format version", {"1"});
      }
      LineReader rest(std::vector<syntax::Token>(toks.begin() + 2, toks.end()), line_no);
      rest.finish();
      header = true;
      continue;
    }
    if (open) {
      if (r.is("end")) {
        r.expect("end");
        r.finish();
        catalog.entries[open->name] = Value(make_extensional_unchecked(
            open->sig, DomainConstraint::any(), std::move(open->rows), Level::Relation));
        open.reset();
        continue;
      }
      r.expect("row");
      Key key;
      for (size_t i = 0; i < open->sig.size(); ++i) {
        int col = r.column();
        Value v = coerce(r.literal(), open->sig[i].constraint.base);
        if (!contains(open->sig[i].constraint, v)) {
          fail(ErrorKind::DomainError, "line " + std::to_string(line_no) + ", column " +
                                           std::to_string(col) + ": " + debug_string(v) +
                                           " is outside the domain of '" + open->sig[i].name + "'");
        }
        key.push_back(v);
      }
      r.expect("-");
      r.expect(">");
      r.expect("{");
      std::vector<std::pair<std::string, Value>> attrs;
      std::set<std::string> seen;
      if (!r.is("}")) {
        while (true) {
          std::string a = r.name();
          r.expect("=");
          if (!seen.insert(a).second) {
            fail(ErrorKind::UniqueViolation, "line " + std::to_string(line_no) +
                                                 ": attribute '" + a + "' given twice");
          }
          attrs.emplace_back(a, r.literal());
          if (!r.is(",")) break;
          r.expect(",");
        }
      }
      r.expect("}");
      r.finish();
      if (!open->rows.emplace(key, Value(make_tuple(std::move(attrs)))).second) {
        fail(ErrorKind::UniqueViolation, "line " + std::to_string(line_no) + ": duplicate key " +
                                             debug_string(key) + " in '" + open->name + "'");
      }
      continue;
    }
    if (r.is("relation")) {
      r.expect("relation");
      PendingRelation rel;
      rel.line = line_no;
      rel.name = r.name();
      r.expect("(");
      rel.sig.push_back(read_param(r));
      while (r.is(",")) {
        r.expect(",");
        rel.sig.push_back(read_param(r));
      }
      r.expect(")");
      r.finish();
      if (!names.insert(rel.name).second) {
        fail(ErrorKind::UniqueViolation, "line " + std::to_string(line_no) + ": relation '" +
                                             rel.name + "' defined twice");
      }
      open = std::move(rel);
      continue;
    }
    if (r.is("rel")) {
      r.expect("rel");
      RelationshipDecl decl;
      decl.name = r.name();
      decl.function = decl.name;
      r.expect("links");
      do {
        if (!decl.participants.empty()) r.expect(",");
        std::string rel = r.name();
        r.expect(".");
        decl.participants.emplace_back(rel, r.name());
      } while (r.is(","));
      r.finish();
      if (decl.participants.size() < 2) r.error("a relationship links at least two endpoints", {","});
      catalog.relationships.push_back(std::move(decl));
      continue;
    }
    if (r.is("view")) {
      r.expect("view");
      std::string n = r.name();
      bool materialized = false;
      if (r.is("materialized")) {
        r.expect("materialized");
        materialized = true;
      }
      int col = r.column();
      r.expect("=");
      std::string_view body = line.substr(static_cast<size_t>(col));
      ExprPtr e;
      try {
        e = syntax::parse_expr(body);
      } catch (const ParseError& err) {
        throw ParseError(SourcePos{line_no, col + err.pos().column}, err.detail(), err.expected());
      }
      if (catalog.views.count(n)) {
        fail(ErrorKind::UniqueViolation, "line " + std::to_string(line_no) + ": view '" + n +
                                             "' defined twice");
      }
      catalog.views[n] = ViewDef{n, e, materialized};
      continue;
    }
    r.error("expected a relation, rel or view line", {"relation", "rel", "view"});
  }
  if (!header) throw ParseError(SourcePos{std::max(last_content, 1), 1}, "missing 'fdb 1' header", {"fdb"});
  if (open) {
    throw ParseError(SourcePos{last_content, 1}, "relation '" + open->name + "' is missing 'end'", {"end"});
  }
  for (const auto& [n, v] : catalog.views) {
    if (v.materialized && !catalog.entries.count(n)) {
      fail(ErrorKind::DomainError, "materialized view '" + n + "' has no stored rows");
    }
    if (!v.materialized && catalog.entries.count(n)) {
      fail(ErrorKind::UniqueViolation, "'" + n + "' is both a relation and a dynamic view");
    }
  }
  catalog.validate_relationships();
  return catalog;
}

std::string store_fdb(const Catalog& catalog) {
  Writer w;
  w.out = "fdb 1\n";
  for (const auto& [n, v] : catalog.entries) {
    if (!v.is_function()) unserializable("'" + n + "' is not a relation");
    w.relation(n, *v.as_function(), nullptr);
  }
  auto rels = catalog.relationships;
  std::sort(rels.begin(), rels.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  for (const auto& r : rels) {
    if (r.function != r.name || r.is_predicate) {
      unserializable("relationship '" + r.name + "' is not backed by a relation of the same name");
    }
    if (r.participants.size() < 2) unserializable("relationship '" + r.name + "' links fewer than two endpoints");
    w.out += "rel " + w.name(r.name) + " links ";
    for (size_t i = 0; i < r.participants.size(); ++i) {
      w.out += (i ? ", " : "") + w.name(r.participants[i].first) + "." + w.name(r.participants[i].second);
    }
    w.out += "\n";
  }
  for (const auto& [n, v] : catalog.views) {
    w.out += "view " + w.name(n) + (v.materialized ? " materialized" : "") + " = " +
             syntax::print(*v.expr) + "\n";
  }
  return w.out;
}

std::string value_fdb(const Value& value, const Context& ctx) {
  Writer w;
  w.lenient = true;
  w.out = "fdb 1\n";
  write_value(w, "", value, ctx);
  return w.out;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoError, "cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  if (in.bad()) fail(ErrorKind::IoError, "error reading '" + path + "'");
  return s.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::IoError, "cannot write '" + path + "'");
  out << text;
  if (!out.flush()) fail(ErrorKind::IoError, "error writing '" + path + "'");
}

Catalog load_file(const std::string& path) { return load_fdb(read_text(path)); }

void store_file(const std::string& path, const Catalog& catalog) {
  write_text(path, store_fdb(catalog));
}

}  // namespace fql::persist
