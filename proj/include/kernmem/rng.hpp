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

// Seeded pseudorandom streams.
//
// The generator is std::mt19937_64, whose output sequence is fixed by the
// C++ standard. The standard distributions are not (their algorithms are
// implementation-defined), so bits and bounded integers are drawn here by
// hand. Everything derived from a Seed is therefore bit-identical across
// compilers and standard libraries.

#include <cstdint>
#include <initializer_list>
#include <random>

namespace kernmem {

/// 64-bit seed of a deterministic stream.
struct Seed {
    std::uint64_t value = 0;

    friend bool operator==(Seed, Seed) = default;
};

/// SplitMix64 finalizer; a bijective avalanche mix of one word.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Sub-seed for an indexed sub-stream: seed XOR hash(tags...).
inline Seed derive_seed(Seed base, std::initializer_list<std::uint64_t> tags) noexcept {
    std::uint64_t h = 0x6b65726e6d656d00ULL;  // "kernmem\0"
    for (std::uint64_t t : tags) h = mix64(h ^ mix64(t));
    return Seed{base.value ^ h};
}

class Rng {
public:
    explicit Rng(Seed seed) : engine_(seed.value) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, bound), bound > 0. Rejects the short top range, then reduces.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        std::uint64_t r = next();
        while (r < threshold) r = next();
        return r % bound;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace kernmem
