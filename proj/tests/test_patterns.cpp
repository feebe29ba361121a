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


#include <cmath>
#include <fstream>
#include <set>
#include <vector>

#include "doctest.h"
#include "kernmem/error.hpp"
#include "kernmem/patterns.hpp"
#include "test_util.hpp"

using namespace kernmem;

namespace {

std::size_t hamming(const State& a, const State& b) {
    std::size_t d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
    return d;
}

}  // namespace

TEST_CASE("generate_patterns is deterministic and bipolar") {
    const PatternSet a = generate_patterns(4, 1, Seed{5});
    const PatternSet b = generate_patterns(4, 1, Seed{5});
    CHECK(a == b);
    CHECK(a.n() == 4);
    CHECK(a.p() == 1);
    CHECK(generate_patterns(500, 3, Seed{1}) != generate_patterns(500, 3, Seed{2}));
    const PatternSet wide = generate_patterns(50, 20, Seed{3});
    for (auto v : wide.matrix().flat()) CHECK((v == 1 || v == -1));
}

TEST_CASE("generate_patterns entries are balanced") {
    for (std::uint64_t s = 0; s < 12; ++s) {
        const PatternSet set = generate_patterns(500, 100, Seed{s});
        double sum = 0.0;
        for (auto v : set.matrix().flat()) sum += v;
        // Binomial: the mean of 50000 fair signs has sd ~0.0045.
        CHECK(std::abs(sum / 50000.0) <= 0.15);
        CHECK(std::abs(sum / 50000.0) <= 0.03);
    }
}

TEST_CASE("generate_patterns rejects empty dimensions") {
    CHECK_THROWS_AS(generate_patterns(0, 3, Seed{1}), InvalidDimensionError);
    CHECK_THROWS_AS(generate_patterns(3, 0, Seed{1}), InvalidDimensionError);
}

TEST_CASE("State and PatternSet validate their entries") {
    CHECK_THROWS_AS(State({1, 0, -1}), EntryDomainError);
    CHECK_THROWS_AS(PatternSet(2, 1, {1, 2}), EntryDomainError);
    CHECK_THROWS_AS(PatternSet(2, 2, {1, -1, 1}), DimensionMismatchError);
    CHECK(State({1, -1}).negated() == State({-1, 1}));
}

TEST_CASE("corrupt examples") {
    const State xi = generate_patterns(500, 1, Seed{11}).state(0);
    CHECK(corrupt(xi, 1.0, Seed{3}) == xi);
    CHECK(corrupt(xi, -1.0, Seed{3}) == xi.negated());

    const State y = corrupt(xi, 0.2, Seed{4});
    CHECK(flip_count(500, 0.2) == 200);
    CHECK(hamming(xi, y) == 200);
    CHECK(overlap(xi, y) == 0.2);

    CHECK(corrupt(xi, 0.5, Seed{9}) == corrupt(xi, 0.5, Seed{9}));
    CHECK(corrupt(xi, 0.5, Seed{9}) != corrupt(xi, 0.5, Seed{10}));
}

TEST_CASE("corrupt rejects overlaps outside [-1, 1]") {
    const State xi = generate_patterns(10, 1, Seed{1}).state(0);
    CHECK_THROWS_AS(corrupt(xi, 1.01, Seed{1}), OutOfRangeError);
    CHECK_THROWS_AS(corrupt(xi, -1.5, Seed{1}), OutOfRangeError);
    CHECK_THROWS_AS(corrupt(xi, std::nan(""), Seed{1}), OutOfRangeError);
}

TEST_CASE("corrupt hits 1 - 2f/N exactly across the m0 grid") {
    for (std::size_t n : {500u, 99u, 10u, 1u}) {
        const State xi = generate_patterns(n, 1, Seed{n}).state(0);
        for (int k = 0; k <= 20; ++k) {
            const double m0 = k / 20.0;
            const std::size_t f = flip_count(n, m0);
            // round(N (1 - m0) / 2), ties up, computed in integers: N (20 - k) / 40.
            const std::size_t num = n * static_cast<std::size_t>(20 - k);
            CHECK(f == (num + 20) / 40);
            const State y = corrupt(xi, m0, Seed{static_cast<std::uint64_t>(k)});
            CHECK(hamming(xi, y) == f);
            CHECK(overlap(xi, y) == (static_cast<double>(n) - 2.0 * static_cast<double>(f)) / static_cast<double>(n));
        }
    }
}

TEST_CASE("corrupt flips coordinates uniformly") {
    const std::size_t n = 20;
    const State xi = generate_patterns(n, 1, Seed{2}).state(0);
    std::vector<int> hits(n, 0);
    const int draws = 4000;
    for (int t = 0; t < draws; ++t) {
        const State y = corrupt(xi, 0.5, Seed{static_cast<std::uint64_t>(t) * 7919u});
        for (std::size_t i = 0; i < n; ++i) hits[i] += xi[i] != y[i];
    }
    // 5 of 20 flipped per draw: each coordinate with probability 1/4, sd ~27 over 4000 draws.
    for (int h : hits) CHECK(std::abs(h - draws / 4) < 150);
}

TEST_CASE("overlap identities and errors") {
    const State a = generate_patterns(64, 1, Seed{1}).state(0);
    const State b = generate_patterns(64, 1, Seed{2}).state(0);
    CHECK(overlap(a, a) == 1.0);
    CHECK(overlap(a, a.negated()) == -1.0);
    CHECK(overlap(a, b) == overlap(b, a));
    CHECK(overlap(a, corrupt(a, 0.0, Seed{5})) == 0.0);
    CHECK_THROWS_AS(overlap(a, generate_patterns(63, 1, Seed{1}).state(0)), DimensionMismatchError);
}

TEST_CASE("pattern text format") {
    const PatternSet set(4, 2, {1, -1, -1, 1, -1, -1, 1, 1});
    CHECK(format_patterns(set) == "4 2\n1 -1 -1 1\n-1 -1 1 1\n");
    CHECK(parse_patterns("4 2\n1 -1 -1 1\n-1 -1 1 1\n") == set);

    testing::TempPath tmp("patterns");
    save_patterns(set, tmp.path());
    CHECK(load_patterns(tmp.path()) == set);
}

TEST_CASE("pattern parse errors") {
    SUBCASE("fewer rows than the header declares") {
        CHECK_THROWS_AS(parse_patterns("4 2\n1 1 1 1\n"), ParseError);
    }
    SUBCASE("more rows than the header declares") {
        CHECK_THROWS_AS(parse_patterns("4 2\n1 1 1 1\n1 1 1 1\n1 1 1 1\n"), ParseError);
    }
    SUBCASE("entry outside {-1, 1} names its position") {
        try {
            parse_patterns("4 2\n1 1 1 1\n1 -1 2 1\n");
            FAIL("expected EntryDomainError");
        } catch (const EntryDomainError& e) {
            CHECK(e.line() == 3);
            CHECK(e.column() == 6);
        }
    }
    SUBCASE("short row") { CHECK_THROWS_AS(parse_patterns("4 1\n1 1 1\n"), ParseError); }
    SUBCASE("long row") { CHECK_THROWS_AS(parse_patterns("2 1\n1 1 1\n"), ParseError); }
    SUBCASE("missing trailing newline") { CHECK_THROWS_AS(parse_patterns("2 1\n1 1"), ParseError); }
    SUBCASE("bad header") {
        CHECK_THROWS_AS(parse_patterns("x 1\n1\n"), ParseError);
        CHECK_THROWS_AS(parse_patterns("0 1\n\n"), ParseError);
        CHECK_THROWS_AS(parse_patterns("2  1\n1 1\n"), ParseError);
    }
    SUBCASE("not a number") {
        try {
            parse_patterns("2 1\n1 +\n");
            FAIL("expected ParseError");
        } catch (const EntryDomainError&) {
            FAIL("wrong error type");
        } catch (const ParseError& e) {
            CHECK(e.line() == 2);
            CHECK(e.column() == 3);
        }
    }
    CHECK_THROWS_AS(load_patterns("/nonexistent/dir/patterns.txt"), IoError);
}

TEST_CASE("pattern files round-trip for random shapes") {
    std::mt19937_64 gen(123);
    for (int t = 0; t < 20; ++t) {
        const std::size_t n = 1 + gen() % 40;
        const std::size_t p = 1 + gen() % 15;
        const PatternSet set = generate_patterns(n, p, Seed{gen()});
        CHECK(parse_patterns(format_patterns(set)) == set);
    }
}
