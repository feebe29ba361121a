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
#include <cstdint>
#include <vector>

#include "kernmem/learning.hpp"
#include "kernmem/patterns.hpp"

namespace kernmem {

inline constexpr std::size_t kDefaultRecallSteps = 25;
inline constexpr double kDefaultSuccessThreshold = 0.95;

/// sign with sign(0) = +1.
constexpr std::int8_t spin_sign(double h) noexcept { return h >= 0.0 ? std::int8_t{1} : std::int8_t{-1}; }

struct RecallTrace {
    State initial;
    State final_state;
    /// overlap(target, s(t)) for t = 0 .. steps_run.
    std::vector<double> overlaps;
    std::size_t steps_run = 0;
    /// True iff the last update left the state unchanged.
    bool reached_fixed_point = false;

    double final_overlap() const { return overlaps.back(); }
};

/// One synchronous update of every neuron from the previous state.
/// Weight models: s'_i = sign(sum_{j != i} W_ij s_j).
/// Dual models:   s' = sign(k(s) alpha), k(s)_mu = K(s, xi^mu).
State step(const Model& model, const State& s);
State step(const WeightModel& model, const State& s);
State step(const DualModel& model, const State& s);

/// Iterates step() up to max_steps times, stopping early at a fixed point.
RecallTrace run(const Model& model, const State& s0, const State& target,
                std::size_t max_steps = kDefaultRecallSteps);

/// final overlap > threshold (strict). threshold must lie in (0, 1].
bool is_success(const RecallTrace& trace, double threshold = kDefaultSuccessThreshold);

}  // namespace kernmem
