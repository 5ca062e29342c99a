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

#include <memory>

#include "fql/catalog.hpp"

namespace fql::testing {

/// t1, t3, t4, R1, R2, R3, R4 from the functional data model walkthrough.
struct ExampleFunctions {
  Value t1, t3, t4, R1, R2, R3, R4;
  /// All of the above by name, for use as session bindings.
  Bindings bindings() const;
};

ExampleFunctions example_functions();

/// The walkthrough's database: myTab -> t4, Table1 -> R1, Table2 -> R2.
Catalog example_catalog();

/// customers {1,2,3}, order {(1,10),(3,20)}, products {10,20,30} with the
/// order relationship linking customers.id and products.id.
Catalog shop_catalog();

/// accounts {42: 500, 84: 200}.
Catalog bank_catalog();

}  // namespace fql::testing
