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

#include <string>
#include <string_view>

#include "fql/catalog.hpp"

namespace fql::persist {

/// Parses an FDB document. Throws ParseError (with line and column),
/// UniqueViolation and DomainError.
Catalog load_fdb(std::string_view text);

/// Canonical document: relations alphabetical with rows by key and
/// attributes alphabetical, then relationships, then views. Throws
/// NotSerializable for anything the format cannot express.
std::string store_fdb(const Catalog& catalog);

/// Any evaluation result as a document. A relation becomes one block named
/// `result`, a database one block per member (nested names joined with
/// "__"), anything else a one-row relation `result(_: int)` holding `value`.
/// Names that are not identifiers are written quoted.
std::string value_fdb(const Value& value, const Context& ctx);

Catalog load_file(const std::string& path);
void store_file(const std::string& path, const Catalog& catalog);

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

}  // namespace fql::persist
