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

#include <cctype>

#include "fql/syntax.hpp"

namespace fql::syntax {

bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  }
  return true;
}

namespace {

const char* const kPuncts2[] = {"==", "!=", "<=", ">=", "+=", "-=", "=>"};
const char kPuncts1[] = "()[]{},:.=<>+-*/$;";

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    int depth = 0;
    while (i_ < text_.size()) {
      char c = text_[i_];
      if (c == '#') {
        while (i_ < text_.size() && text_[i_] != '\n') advance();
        continue;
      }
      if (c == '\n' || c == ';') {
        SourcePos p = pos();
        advance();
        if (depth == 0 && !out.empty() && out.back().kind != TokenKind::Newline) {
          out.push_back(Token{TokenKind::Newline, "\n", p});
        }
        continue;
      }
      if (c == ' ' || c == '\t' || c == '\r') {
        advance();
        continue;
      }
      SourcePos start = pos();
      if (std::isdigit(static_cast<unsigned char>(c))) {
        out.push_back(number(start));
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::string s;
        while (i_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[i_])) || text_[i_] == '_')) {
          s += text_[i_];
          advance();
        }
        out.push_back(Token{TokenKind::Ident, s, start});
      } else if (c == '"' || c == '\'') {
        out.push_back(string(start, c));
      } else {
        std::string p = punct(start);
        if (p == "(" || p == "[" || p == "{") ++depth;
        if ((p == ")" || p == "]" || p == "}") && depth > 0) --depth;
        out.push_back(Token{TokenKind::Punct, p, start});
      }
    }
    if (!out.empty() && out.back().kind != TokenKind::Newline) {
      out.push_back(Token{TokenKind::Newline, "\n", pos()});
    }
    out.push_back(Token{TokenKind::End, "", pos()});
    return out;
  }

 private:
  SourcePos pos() const { return SourcePos{line_, col_}; }

  void advance() {
    if (text_[i_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++i_;
  }

  bool digit_at(size_t k) const {
    return k < text_.size() && std::isdigit(static_cast<unsigned char>(text_[k]));
  }

  Token number(SourcePos start) {
    std::string s;
    bool is_float = false;
    while (digit_at(i_)) {
      s += text_[i_];
      advance();
    }
    if (i_ < text_.size() && text_[i_] == '.' && digit_at(i_ + 1)) {
      is_float = true;
      s += '.';
      advance();
      while (digit_at(i_)) {
        s += text_[i_];
        advance();
      }
    }
    if (i_ < text_.size() && (text_[i_] == 'e' || text_[i_] == 'E')) {
      size_t k = i_ + 1;
      if (k < text_.size() && (text_[k] == '+' || text_[k] == '-')) ++k;
      if (digit_at(k)) {
        is_float = true;
        while (i_ < k) {
          s += text_[i_];
          advance();
        }
        while (digit_at(i_)) {
          s += text_[i_];
          advance();
        }
      }
    }
    return Token{is_float ? TokenKind::Float : TokenKind::Int, s, start};
  }

  Token string(SourcePos start, char quote) {
    advance();
    std::string s;
    while (true) {
      if (i_ >= text_.size() || text_[i_] == '\n') {
        throw ParseError(start, "unterminated string literal", {std::string(1, quote)});
      }
      char c = text_[i_];
      if (c == quote) {
        advance();
        break;
      }
      if (c == '\\') {
        SourcePos esc = pos();
        advance();
        if (i_ >= text_.size()) throw ParseError(esc, "unterminated escape");
        char e = text_[i_];
        switch (e) {
          case 'n': s += '\n'; break;
          case 't': s += '\t'; break;
          case 'r': s += '\r'; break;
          case '"': s += '"'; break;
          case '\'': s += '\''; break;
          case '\\': s += '\\'; break;
          default: throw ParseError(esc, std::string("unknown escape \\") + e);
        }
        advance();
        continue;
      }
      s += c;
      advance();
    }
    return Token{TokenKind::String, s, start};
  }

  std::string punct(SourcePos start) {
    for (const char* p : kPuncts2) {
      if (text_.substr(i_, 2) == p) {
        advance();
        advance();
        return p;
      }
    }
    char c = text_[i_];
    for (const char* p = kPuncts1; *p; ++p) {
      if (*p == c) {
        advance();
        return std::string(1, c);
      }
    }
    throw ParseError(start, std::string("unexpected character '") + c + "'");
  }

  std::string_view text_;
  size_t i_ = 0;
  int line_ = 1;
  int col_ = 1;
};

}  // namespace

std::vector<Token> tokenize(std::string_view text) { return Lexer(text).run(); }

}  // namespace fql::syntax
