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
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kernmem/matrix.hpp"
#include "kernmem/rng.hpp"

namespace kernmem {

/// Network state: a vector of bipolar (+1/-1) spins.
class State {
public:
    State() = default;

    /// Throws EntryDomainError if any value is not -1 or +1.
    explicit State(std::vector<std::int8_t> values);

    std::size_t size() const noexcept { return values_.size(); }
    std::span<const std::int8_t> values() const noexcept { return values_; }
    std::int8_t operator[](std::size_t i) const noexcept { return values_[i]; }

    State negated() const;

    friend bool operator==(const State&, const State&) = default;

private:
    std::vector<std::int8_t> values_;
};

/// P stored patterns over N neurons; row mu is pattern xi^mu.
class PatternSet {
public:
    PatternSet() = default;

    /// Throws InvalidDimensionError on n == 0 or p == 0, EntryDomainError on non-bipolar entries.
    PatternSet(std::size_t n, std::size_t p, std::vector<std::int8_t> row_major);

    std::size_t n() const noexcept { return data_.cols(); }
    std::size_t p() const noexcept { return data_.rows(); }

    std::span<const std::int8_t> pattern(std::size_t mu) const noexcept { return data_.row(mu); }
    State state(std::size_t mu) const;

    const Matrix<std::int8_t>& matrix() const noexcept { return data_; }

    /// X as doubles, P x N.
    MatrixD to_double() const;

    friend bool operator==(const PatternSet&, const PatternSet&) = default;

private:
    Matrix<std::int8_t> data_;
};

/// P x N independent fair +/-1 entries drawn from the seeded stream.
PatternSet generate_patterns(std::size_t n, std::size_t p, Seed seed);

/// Number of flips used to reach overlap m0 in an N-spin state:
/// round(N (1 - m0) / 2), ties rounded up.
std::size_t flip_count(std::size_t n, double target_overlap);

/// Flips flip_count(N, m0) distinct coordinates chosen uniformly without replacement.
/// Throws OutOfRangeError unless m0 is in [-1, 1].
State corrupt(const State& pattern, double target_overlap, Seed seed);

/// (1/N) sum_i a_i b_i. Throws DimensionMismatchError on unequal lengths.
double overlap(std::span<const std::int8_t> a, std::span<const std::int8_t> b);
double overlap(const State& a, const State& b);

/// Text format: "N P\n" followed by P lines of N space separated -1/1 tokens.
std::string format_patterns(const PatternSet& set);
PatternSet parse_patterns(std::string_view text);

void save_patterns(const PatternSet& set, const std::filesystem::path& path);
PatternSet load_patterns(const std::filesystem::path& path);

}  // namespace kernmem
