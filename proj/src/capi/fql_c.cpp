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

#include "fql/fql.h"

#include <memory>
#include <sstream>
#include <string>

#include "fql/engine.hpp"
#include "fql/error.hpp"
#include "fql/eval.hpp"
#include "fql/persist.hpp"
#include "fql/runner.hpp"
#include "fql/syntax.hpp"

struct fql_handle {
  explicit fql_handle(std::shared_ptr<fql::engine::Store> store)
      : runner(std::move(store), shown) {}

  std::ostringstream shown;
  fql::surface::Runner runner;
  std::string result;
  std::string error_kind;
  std::string error_message;
  std::string store_text;
};

namespace {

template <typename F>
int guarded(fql_handle* h, F&& f) {
  h->error_kind.clear();
  h->error_message.clear();
  try {
    f();
    return FQL_OK;
  } catch (const fql::Error& e) {
    h->error_kind = fql::error_name(e.kind());
    h->error_message = e.what();
    return static_cast<int>(fql::surface::status_of(e));
  } catch (const std::exception& e) {
    h->error_kind = "EvalError";
    h->error_message = e.what();
    return FQL_EVAL_ERROR;
  }
}

}  // namespace

extern "C" {

int fql_open(const char* path, fql_handle** out) {
  *out = nullptr;
  try {
    fql::Catalog catalog = path ? fql::persist::load_file(path) : fql::Catalog{};
    *out = new fql_handle(std::make_shared<fql::engine::Store>(std::move(catalog)));
    return FQL_OK;
  } catch (const fql::Error& e) {
    return static_cast<int>(fql::surface::status_of(e));
  }
}

void fql_close(fql_handle* h) { delete h; }

int fql_begin(fql_handle* h) {
  return guarded(h, [&] { h->runner.session().begin(); });
}

int fql_commit(fql_handle* h) {
  return guarded(h, [&] { h->runner.session().commit(); });
}

int fql_rollback(fql_handle* h) {
  return guarded(h, [&] { h->runner.session().rollback(); });
}

int fql_submit(fql_handle* h, const char* text) {
  return guarded(h, [&] {
    h->result.clear();
    using S = fql::syntax::Statement;
    for (const auto& s : fql::syntax::parse_script(text).statements) {
      fql::ExprPtr query;
      if (auto* e = std::get_if<S::Eval>(&s.node)) query = e->expr;
      if (auto* e = std::get_if<S::Show>(&s.node)) query = e->expr;
      if (!query) {
        h->runner.execute(s);
        continue;
      }
      fql::Value v = h->runner.evaluate(query);
      auto snap = h->runner.session().snapshot();
      fql::Context ctx{*snap, fql::interpreter()};
      h->result = fql::persist::value_fdb(v, ctx);
    }
  });
}

const char* fql_result(const fql_handle* h) { return h->result.c_str(); }
const char* fql_error_kind(const fql_handle* h) { return h->error_kind.c_str(); }
const char* fql_error_message(const fql_handle* h) { return h->error_message.c_str(); }

const char* fql_store_text(fql_handle* h) {
  int status = guarded(h, [&] {
    h->store_text = fql::persist::store_fdb(h->runner.session().snapshot()->catalog());
  });
  if (status != FQL_OK) h->store_text.clear();
  return h->store_text.c_str();
}

int fql_save(fql_handle* h, const char* path) {
  return guarded(h, [&] {
    fql::persist::store_file(path, h->runner.session().snapshot()->catalog());
  });
}

}  // extern "C"
