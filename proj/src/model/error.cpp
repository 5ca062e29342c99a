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

#include "fql/error.hpp"

namespace fql {

const char* error_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::UndefinedInput: return "UndefinedInput";
    case ErrorKind::ArityError: return "ArityError";
    case ErrorKind::UniqueViolation: return "UniqueViolation";
    case ErrorKind::NotEnumerable: return "NotEnumerable";
    case ErrorKind::PredicateError: return "PredicateError";
    case ErrorKind::NameError: return "NameError";
    case ErrorKind::TypeMismatch: return "TypeMismatch";
    case ErrorKind::EvalError: return "EvalError";
    case ErrorKind::EmptyAggregate: return "EmptyAggregate";
    case ErrorKind::DisconnectedSchema: return "DisconnectedSchema";
    case ErrorKind::UnresolvableCondition: return "UnresolvableCondition";
    case ErrorKind::UnknownRelation: return "UnknownRelation";
    case ErrorKind::TxStateError: return "TxStateError";
    case ErrorKind::WriteConflict: return "WriteConflict";
    case ErrorKind::ReadOnlyTarget: return "ReadOnlyTarget";
    case ErrorKind::CyclicView: return "CyclicView";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::NotSerializable: return "NotSerializable";
    case ErrorKind::IoError: return "IoError";
  }
  return "Error";
}

static std::string format_parse_message(SourcePos pos, const std::string& message,
                                        const std::vector<std::string>& expected) {
  std::string out = std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " + message;
  if (!expected.empty()) {
    out += " (expected ";
    for (size_t i = 0; i < expected.size(); ++i) {
      if (i) out += ", ";
      out += expected[i];
    }
    out += ")";
  }
  return out;
}

ParseError::ParseError(SourcePos pos, const std::string& message, std::vector<std::string> expected)
    : Error(ErrorKind::ParseError, format_parse_message(pos, message, expected)),
      pos_(pos),
      detail_(message),
      expected_(std::move(expected)) {}

}  // namespace fql
