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

#include <stdexcept>
#include <string>
#include <vector>

namespace fql {

/// Every failure the engine can report. The evaluator and the naive oracle
/// must agree on the kind for the same invalid input.
enum class ErrorKind {
  DomainError,
  UndefinedInput,
  ArityError,
  UniqueViolation,
  NotEnumerable,
  PredicateError,
  NameError,
  TypeMismatch,
  EvalError,
  EmptyAggregate,
  DisconnectedSchema,
  UnresolvableCondition,
  UnknownRelation,
  TxStateError,
  WriteConflict,
  ReadOnlyTarget,
  CyclicView,
  ParseError,
  NotSerializable,
  IoError,
};

const char* error_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

struct SourcePos {
  int line = 1;
  int column = 1;
};

class ParseError : public Error {
 public:
  ParseError(SourcePos pos, const std::string& message,
             std::vector<std::string> expected = {});

  SourcePos pos() const { return pos_; }
  const std::vector<std::string>& expected() const { return expected_; }
  /// The message without position or expected set.
  const std::string& detail() const { return detail_; }

 private:
  SourcePos pos_;
  std::string detail_;
  std::vector<std::string> expected_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace fql
