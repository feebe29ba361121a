// Copyright 2026 the kernmem authors
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
#include <vector>

#include "kernmem/rng.hpp"

namespace kernmem {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Built-in invariant checks: kernel identities, Gram structure, overlap and
/// corruption properties, sign(0) = +1, early-stop soundness, KRR residual,
/// the Hebbian brute-force oracle, and CSV / pattern-file round trips.
std::vector<CheckResult> run_selftest(Seed seed = Seed{20240501});

}  // namespace kernmem
