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

#include "kernmem/recall.hpp"

#include <string>

#include "kernmem/error.hpp"
#include "kernmem/simd/kernels.hpp"

namespace kernmem {
namespace {

void check_length(std::size_t got, std::size_t want) {
    if (got != want) {
        throw DimensionMismatchError("state length " + std::to_string(got) + " does not match model N " +
                                     std::to_string(want));
    }
}

// Scratch buffers reused across the steps of one run.
struct Workspace {
    std::vector<double> kernel;
    std::vector<double> field;
};

void step_into(const WeightModel& model, std::span<const std::int8_t> s, std::span<std::int8_t> out, Workspace&) {
    const auto& k = simd::kernels();
    const MatrixD& w = model.weights();
    const std::size_t n = model.n();
    for (std::size_t i = 0; i < n; ++i) out[i] = spin_sign(k.dot_f64_i8(w.row(i).data(), s.data(), n));
}

void step_into(const DualModel& model, std::span<const std::int8_t> s, std::span<std::int8_t> out, Workspace& ws) {
    const auto& k = simd::kernels();
    const std::size_t p = model.p();
    const std::size_t n = model.n();
    ws.kernel.resize(p);
    ws.field.assign(n, 0.0);
    kernel_row_into(s, model.patterns(), model.kernel(), ws.kernel);
    for (std::size_t mu = 0; mu < p; ++mu) k.axpy(ws.kernel[mu], model.alpha().row(mu).data(), ws.field.data(), n);
    for (std::size_t i = 0; i < n; ++i) out[i] = spin_sign(ws.field[i]);
}

void step_into(const Model& model, std::span<const std::int8_t> s, std::span<std::int8_t> out, Workspace& ws) {
    std::visit([&](const auto& m) { step_into(m, s, out, ws); }, model);
}

}  // namespace

State step(const WeightModel& model, const State& s) {
    check_length(s.size(), model.n());
    std::vector<std::int8_t> out(s.size());
    Workspace ws;
    step_into(model, s.values(), out, ws);
    return State(std::move(out));
}

State step(const DualModel& model, const State& s) {
    check_length(s.size(), model.n());
    std::vector<std::int8_t> out(s.size());
    Workspace ws;
    step_into(model, s.values(), out, ws);
    return State(std::move(out));
}

State step(const Model& model, const State& s) {
    return std::visit([&](const auto& m) { return step(m, s); }, model);
}

RecallTrace run(const Model& model, const State& s0, const State& target, std::size_t max_steps) {
    if (max_steps == 0) throw OutOfRangeError("recall needs max_steps >= 1");
    const std::size_t n = model_n(model);
    check_length(s0.size(), n);
    check_length(target.size(), n);

    RecallTrace trace;
    trace.initial = s0;
    trace.overlaps.reserve(max_steps + 1);
    trace.overlaps.push_back(overlap(target, s0));

    std::vector<std::int8_t> current(s0.values().begin(), s0.values().end());
    std::vector<std::int8_t> next(n);
    Workspace ws;
    for (std::size_t t = 1; t <= max_steps; ++t) {
        step_into(model, current, next, ws);
        trace.steps_run = t;
        trace.overlaps.push_back(overlap(target.values(), next));
        const bool unchanged = next == current;
        current.swap(next);
        if (unchanged) {
            trace.reached_fixed_point = true;
            break;
        }
    }
    trace.final_state = State(std::move(current));
    return trace;
}

bool is_success(const RecallTrace& trace, double threshold) {
    if (!(threshold > 0.0 && threshold <= 1.0)) {
        throw OutOfRangeError("success threshold must lie in (0, 1] (got " + std::to_string(threshold) + ")");
    }
    return trace.final_overlap() > threshold;
}

}  // namespace kernmem
