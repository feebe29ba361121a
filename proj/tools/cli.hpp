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

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kernmem/experiments.hpp"
#include "kernmem/learning.hpp"
#include "kernmem/simd/kernels.hpp"

namespace kernmem::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

enum class Command { capacity, noise, timing, recall, selftest };

struct CliInvocation {
    Command command = Command::selftest;
    SweepConfig sweep;
    /// gamma = gamma_scale / N.
    double gamma_scale = 1.0;
    std::string out;
    std::string plot;
    std::optional<simd::Isa> isa;

    // recall
    Rule rule = Rule::krr;
    std::string patterns_path;
    double beta = 0.2;
    double m0 = 1.0;
    std::size_t pattern_index = 0;
};

/// Either a validated invocation, or an exit status plus text to print
/// (usage on --help with status 0, a diagnostic with status 2).
struct ParseResult {
    std::optional<CliInvocation> invocation;
    int exit_code = kExitOk;
    std::string message;
};

/// Parses argv. A `--config FILE` of key=value lines supplies any flag that is
/// not given on the command line; KERNMEM_SEED supplies --seed when neither does.
ParseResult parse_args(const std::vector<std::string>& args);

/// Runs the invocation; 0 on success, 1 on runtime failure.
int dispatch(const CliInvocation& inv, std::ostream& out, std::ostream& err);

/// parse_args + dispatch.
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kernmem::cli
