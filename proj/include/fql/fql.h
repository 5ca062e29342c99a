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

// Flat C interface for host-language bindings. Queries travel as surface
// text and results come back as fdb documents.

#ifndef FQL_FQL_H
#define FQL_FQL_H

#ifdef __cplusplus
extern "C" {
#endif

typedef struct fql_handle fql_handle;

// Status codes, shared with the command line tool.
enum {
  FQL_OK = 0,
  FQL_EVAL_ERROR = 1,
  FQL_PARSE_ERROR = 2,
  FQL_IO_ERROR = 3,
};

// Opens a store from an fdb file, or an empty store when path is NULL.
// On failure *out is NULL and the status says why.
int fql_open(const char* path, fql_handle** out);
void fql_close(fql_handle* h);

int fql_begin(fql_handle* h);
int fql_commit(fql_handle* h);
int fql_rollback(fql_handle* h);

// Runs canonical surface text, one or more statements. The value of the
// last expression or show statement becomes the result.
int fql_submit(fql_handle* h, const char* text);

// Result of the last successful submit as an fdb document; "" if none.
const char* fql_result(const fql_handle* h);

// Error kind name (e.g. "WriteConflict") and message of the last failure;
// "" after a success.
const char* fql_error_kind(const fql_handle* h);
const char* fql_error_message(const fql_handle* h);

// The session's current view of the store as an fdb document. The pointer
// stays valid until the next call on h.
const char* fql_store_text(fql_handle* h);

int fql_save(fql_handle* h, const char* path);

#ifdef __cplusplus
}
#endif

#endif  // FQL_FQL_H
