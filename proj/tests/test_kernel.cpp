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
#include <random>
#include <vector>

#include "doctest.h"
#include "kernmem/error.hpp"
#include "kernmem/kernel.hpp"
#include "kernmem/patterns.hpp"

using namespace kernmem;

namespace {

// Direct exp(-gamma * sum (x_i - y_i)^2), no dot-product shortcut.
double naive_rbf(std::span<const std::int8_t> x, std::span<const std::int8_t> y, double gamma) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = static_cast<double>(x[i]) - static_cast<double>(y[i]);
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

MatrixD matmul(const MatrixD& a, const MatrixD& b) {
    MatrixD c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
            c(i, j) = s;
        }
    return c;
}

// Gauss-Jordan with partial pivoting.
MatrixD explicit_inverse(MatrixD a) {
    const std::size_t n = a.rows();
    MatrixD inv(n, n);
    for (std::size_t i = 0; i < n; ++i) inv(i, i) = 1.0;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
        for (std::size_t j = 0; j < n; ++j) {
            std::swap(a(c, j), a(piv, j));
            std::swap(inv(c, j), inv(piv, j));
        }
        const double d = a(c, c);
        for (std::size_t j = 0; j < n; ++j) {
            a(c, j) /= d;
            inv(c, j) /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            const double f = a(r, c);
            for (std::size_t j = 0; j < n; ++j) {
                a(r, j) -= f * a(c, j);
                inv(r, j) -= f * inv(c, j);
            }
        }
    }
    return inv;
}

// Cyclic Jacobi rotations; returns the eigenvalues of a symmetric matrix.
std::vector<double> jacobi_eigenvalues(MatrixD a) {
    const std::size_t n = a.rows();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (off < 1e-26) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
    return ev;
}

MatrixD random_spd(std::size_t n, std::mt19937_64& gen) {
    std::normal_distribution<double> dist;
    MatrixD b(n, n);
    for (auto& v : b.flat()) v = dist(gen);
    MatrixD a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += b(k, i) * b(k, j);
            a(i, j) = s / static_cast<double>(n);
        }
    return a;
}

double max_abs_diff(const MatrixD& a, const MatrixD& b) {
    double w = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) w = std::max(w, std::abs(a.flat()[i] - b.flat()[i]));
    return w;
}

}  // namespace

TEST_CASE("rbf examples") {
    const KernelConfig cfg = KernelConfig::for_neurons(500);
    const State x = generate_patterns(500, 1, Seed{1}).state(0);
    CHECK(rbf(x.values(), x.values(), cfg) == 1.0);

    std::vector<std::int8_t> y(x.values().begin(), x.values().end());
    y[17] = static_cast<std::int8_t>(-y[17]);
    CHECK(rbf(x.values(), y, cfg) == doctest::Approx(0.992032).epsilon(1e-6));
    CHECK(rbf(x.values(), y, cfg) == doctest::Approx(std::exp(-4.0 / 500.0)).epsilon(1e-15));

    const State neg = x.negated();
    CHECK(rbf(x.values(), neg.values(), cfg) == doctest::Approx(0.0183156).epsilon(1e-6));
    CHECK(rbf_at_distance(500, 1.0 / 500) == doctest::Approx(std::exp(-4.0)).epsilon(1e-15));

    CHECK_THROWS_AS(rbf(x.values(), std::span<const std::int8_t>(y).first(499), cfg), DimensionMismatchError);
    CHECK_THROWS_AS(KernelConfig{0.0}.validate(), OutOfRangeError);
    CHECK_THROWS_AS(KernelConfig{-1.0}.validate(), OutOfRangeError);
}

TEST_CASE("rbf is symmetric and strictly decreasing in Hamming distance") {
    const KernelConfig cfg = KernelConfig::for_neurons(60);
    const PatternSet set = generate_patterns(60, 8, Seed{3});
    for (std::size_t a = 0; a < 8; ++a)
        for (std::size_t b = 0; b < 8; ++b) {
            const double v = rbf(set.pattern(a), set.pattern(b), cfg);
            CHECK(v == rbf(set.pattern(b), set.pattern(a), cfg));
            CHECK(v > 0.0);
            CHECK(v <= 1.0);
        }
    for (std::size_t d = 0; d < 60; ++d) CHECK(rbf_at_distance(d + 1, cfg.gamma) < rbf_at_distance(d, cfg.gamma));
}

TEST_CASE("gram_matrix examples") {
    const KernelConfig cfg = KernelConfig::for_neurons(30);
    SUBCASE("single pattern") {
        const KernelMatrix k = gram_matrix(generate_patterns(30, 1, Seed{1}), cfg);
        CHECK(k.size() == 1);
        CHECK(k(0, 0) == 1.0);
    }
    SUBCASE("identical patterns give all ones") {
        const PatternSet one = generate_patterns(30, 1, Seed{2});
        std::vector<std::int8_t> rows;
        for (int r = 0; r < 4; ++r) rows.insert(rows.end(), one.pattern(0).begin(), one.pattern(0).end());
        const KernelMatrix k = gram_matrix(PatternSet(30, 4, rows), cfg);
        for (auto v : k.matrix().flat()) CHECK(v == 1.0);
    }
    SUBCASE("matches the naive double loop") {
        for (std::size_t p : {3u, 17u, 70u}) {
            const PatternSet set = generate_patterns(30, p, Seed{p});
            for (std::size_t threads : {1u, 3u}) {
                const KernelMatrix k = gram_matrix(set, cfg, threads);
                for (std::size_t i = 0; i < p; ++i)
                    for (std::size_t j = 0; j < p; ++j) {
                        const double ref = naive_rbf(set.pattern(i), set.pattern(j), cfg.gamma);
                        CHECK(std::abs(k(i, j) - ref) <= 1e-12 * ref);
                        CHECK(k(i, j) == k(j, i));
                    }
                for (std::size_t i = 0; i < p; ++i) CHECK(k(i, i) == 1.0);
            }
        }
    }
}

TEST_CASE("KernelMatrix::from_entries enforces its invariants") {
    MatrixD ok(2, 2, 0.5);
    ok(0, 0) = ok(1, 1) = 1.0;
    CHECK_NOTHROW(KernelMatrix::from_entries(ok));
    MatrixD asym = ok;
    asym(0, 1) = 0.4;
    CHECK_THROWS_AS(KernelMatrix::from_entries(asym), OutOfRangeError);
    MatrixD diag = ok;
    diag(1, 1) = 0.9;
    CHECK_THROWS_AS(KernelMatrix::from_entries(diag), OutOfRangeError);
    CHECK_THROWS_AS(KernelMatrix::from_entries(MatrixD(2, 3, 1.0)), OutOfRangeError);
}

TEST_CASE("kernel_row examples") {
    const KernelConfig cfg = KernelConfig::for_neurons(40);
    const PatternSet set = generate_patterns(40, 2, Seed{8});
    const auto row = kernel_row(set.pattern(0), set, cfg);
    REQUIRE(row.size() == 2);
    CHECK(row[0] == 1.0);
    CHECK(row[1] == doctest::Approx(naive_rbf(set.pattern(0), set.pattern(1), cfg.gamma)).epsilon(1e-14));

    const State neg = set.state(0).negated();
    CHECK(kernel_row(neg.values(), set, cfg)[0] == doctest::Approx(std::exp(-4.0)).epsilon(1e-14));

    const PatternSet single = generate_patterns(40, 1, Seed{9});
    CHECK(kernel_row(set.pattern(1), single, cfg).size() == 1);

    const State short_state = generate_patterns(39, 1, Seed{1}).state(0);
    CHECK_THROWS_AS(kernel_row(short_state.values(), set, cfg), DimensionMismatchError);
}

TEST_CASE("solve_regularized examples") {
    SUBCASE("1 x 1") {
        const KernelMatrix k = gram_matrix(generate_patterns(5, 1, Seed{1}), KernelConfig::for_neurons(5));
        MatrixD t(1, 2);
        t(0, 0) = 1.0;
        t(0, 1) = -1.0;
        const MatrixD a = solve_regularized(k, 0.01, t);
        CHECK(a(0, 0) == doctest::Approx(1.0 / 1.01).epsilon(1e-14));
        CHECK(a(0, 1) == doctest::Approx(-0.990099).epsilon(1e-6));
    }
    SUBCASE("identity") {
        MatrixD id(2, 2);
        id(0, 0) = id(1, 1) = 1.0;
        MatrixD t(2, 1);
        t(0, 0) = 3.0;
        t(1, 0) = -2.0;
        const MatrixD a = solve_shifted_spd(id, 0.01, t);
        CHECK(a(0, 0) == doctest::Approx(3.0 / 1.01).epsilon(1e-14));
        CHECK(a(1, 0) == doctest::Approx(-2.0 / 1.01).epsilon(1e-14));
    }
    SUBCASE("random SPD agrees with an explicit inverse") {
        std::mt19937_64 gen(17);
        for (int trial = 0; trial < 5; ++trial) {
            const MatrixD a = random_spd(10, gen);
            MatrixD t(10, 3);
            std::normal_distribution<double> dist;
            for (auto& v : t.flat()) v = dist(gen);
            const MatrixD x = solve_shifted_spd(a, 0.01, t);

            MatrixD shifted = a;
            for (std::size_t i = 0; i < 10; ++i) shifted(i, i) += 0.01;
            CHECK(max_abs_diff(matmul(shifted, x), t) <= 1e-8);
            CHECK(max_abs_diff(matmul(explicit_inverse(shifted), t), x) <= 1e-8);
        }
    }
    SUBCASE("blocked substitution across several panels") {
        const PatternSet set = generate_patterns(200, 150, Seed{4});
        const KernelMatrix k = gram_matrix(set, KernelConfig::for_neurons(200));
        const MatrixD t = set.to_double();
        const MatrixD x = solve_regularized(k, 0.01, t);
        MatrixD shifted = k.matrix();
        for (std::size_t i = 0; i < 150; ++i) shifted(i, i) += 0.01;
        CHECK(max_abs_diff(matmul(shifted, x), t) <= 1e-8);
    }
    SUBCASE("argument errors") {
        MatrixD id(2, 2);
        id(0, 0) = id(1, 1) = 1.0;
        CHECK_THROWS_AS(solve_shifted_spd(id, 0.0, MatrixD(2, 1)), OutOfRangeError);
        CHECK_THROWS_AS(solve_shifted_spd(id, -1.0, MatrixD(2, 1)), OutOfRangeError);
        CHECK_THROWS_AS(solve_shifted_spd(id, 0.01, MatrixD(3, 1)), DimensionMismatchError);
    }
}

TEST_CASE("jitter fallback escalates then gives up") {
    MatrixD a(2, 2);
    a(0, 0) = 1.0;
    a(1, 1) = -0.01;
    MatrixD t(2, 1, 1.0);
    SolveReport report;
    const MatrixD x = solve_shifted_spd(a, 0.01, t, &report);
    CHECK(report.escalations == 1);
    // The first escalation adds 1e-10 * trace(A) / P.
    CHECK(report.lambda_used == doctest::Approx(0.01 + 1e-10 * 0.99 / 2.0).epsilon(1e-15));
    CHECK(std::isfinite(x(1, 0)));

    MatrixD bad(2, 2);
    bad(0, 0) = 1.0;
    bad(1, 1) = -1.0;
    CHECK_THROWS_AS(solve_shifted_spd(bad, 0.01, t), FactorizationError);
}

TEST_CASE("K + lambda I has smallest eigenvalue at least lambda") {
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 8; ++trial) {
        const std::size_t n = 5 + gen() % 60;
        const std::size_t p = 1 + gen() % 50;
        const KernelMatrix k = gram_matrix(generate_patterns(n, p, Seed{gen()}), KernelConfig::for_neurons(n));
        MatrixD shifted = k.matrix();
        for (std::size_t i = 0; i < p; ++i) shifted(i, i) += 0.01;
        const auto ev = jacobi_eigenvalues(shifted);
        CHECK(*std::min_element(ev.begin(), ev.end()) >= 0.01 - 1e-9);
    }
}
