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
#include <map>
#include <random>
#include <vector>

#include "doctest.h"
#include "kernmem/error.hpp"
#include "kernmem/learning.hpp"
#include "kernmem/model_io.hpp"
#include "kernmem/recall.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace kernmem;
using testing::naive_gram;
using testing::ridge_by_descent;
using testing::ridge_objective;

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double bisect(double lo, double hi, auto f) {
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

using LossLog = std::map<std::size_t, std::vector<double>>;

LossObserver recorder(LossLog& log) {
    return [&log](std::size_t neuron, std::size_t iteration, double loss) {
        auto& v = log[neuron];
        REQUIRE(v.size() == iteration);
        v.push_back(loss);
    };
}

}  // namespace

TEST_CASE("rule names round-trip") {
    for (Rule r : {Rule::hebbian, Rule::llr, Rule::klr, Rule::krr}) CHECK(parse_rule(rule_name(r)) == r);
    CHECK_FALSE(parse_rule("ridge").has_value());
}

TEST_CASE("TrainConfig validation") {
    TrainConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.kernel_for(500).gamma == doctest::Approx(1.0 / 500).epsilon(1e-15));
    cfg.lambda = 0.0;
    CHECK_THROWS_AS(cfg.validate(), OutOfRangeError);
    cfg = TrainConfig{};
    cfg.eta = -0.1;
    CHECK_THROWS_AS(cfg.validate(), OutOfRangeError);
    cfg = TrainConfig{};
    cfg.gamma = 0.0;
    CHECK_THROWS_AS(cfg.validate(), OutOfRangeError);
    cfg = TrainConfig{};
    cfg.llr_iters = cfg.klr_iters = 0;
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("binary targets") {
    const PatternSet set(3, 1, {1, -1, 1});
    const MatrixD t = binary_targets(set);
    CHECK(t(0, 0) == 1.0);
    CHECK(t(0, 1) == 0.0);
    CHECK(t(0, 2) == 1.0);
}

TEST_CASE("hebbian examples") {
    const PatternSet one(4, 1, {1, -1, 1, 1});
    const WeightModel w = train_hebbian(one);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            const double expect = i == j ? 0.0 : one.pattern(0)[i] * one.pattern(0)[j] / 4.0;
            CHECK(w.weights()(i, j) == expect);
        }
}

TEST_CASE("hebbian matches the triple loop") {
    std::mt19937_64 gen(31);
    for (int t = 0; t < 12; ++t) {
        const std::size_t n = 1 + gen() % 20;
        const std::size_t p = 1 + gen() % 10;
        const PatternSet set = generate_patterns(n, p, Seed{gen()});
        const WeightModel w = train_hebbian(set);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double s = 0.0;
                if (i != j)
                    for (std::size_t mu = 0; mu < p; ++mu) s += set.pattern(mu)[i] * set.pattern(mu)[j];
                CHECK(std::abs(w.weights()(i, j) - s / static_cast<double>(n)) <= 1e-12);
                CHECK(w.weights()(i, j) == w.weights()(j, i));
            }
    }
}

TEST_CASE("llr examples") {
    TrainConfig cfg;
    SUBCASE("zero iterations leaves W at zero") {
        cfg.llr_iters = 0;
        const WeightModel w = train_llr(generate_patterns(10, 3, Seed{1}), cfg);
        for (auto v : w.weights().flat()) CHECK(v == 0.0);
    }
    SUBCASE("one iteration equals the hand-computed gradient step") {
        cfg.llr_iters = 1;
        const PatternSet set = generate_patterns(12, 4, Seed{2});
        const WeightModel w = train_llr(set, cfg);
        for (std::size_t i = 0; i < 12; ++i)
            for (std::size_t j = 0; j < 12; ++j) {
                double expect = 0.0;
                if (i != j)
                    for (std::size_t mu = 0; mu < 4; ++mu) {
                        const double t = set.pattern(mu)[i] > 0 ? 1.0 : 0.0;
                        expect -= cfg.eta / 4.0 * (0.5 - t) * set.pattern(mu)[j];
                    }
                CHECK(w.weights()(i, j) == doctest::Approx(expect).epsilon(1e-13));
            }
    }
    SUBCASE("single pattern fields align with the pattern") {
        const PatternSet set(4, 1, {1, -1, -1, 1});
        const WeightModel w = train_llr(set, cfg);
        for (std::size_t i = 0; i < 4; ++i) {
            double h = 0.0;
            for (std::size_t j = 0; j < 4; ++j) h += w.weights()(i, j) * set.pattern(0)[j];
            CHECK(spin_sign(h) == set.pattern(0)[i]);
            CHECK(w.weights()(i, i) == 0.0);
        }
    }
    SUBCASE("thread count does not change the result") {
        const PatternSet set = generate_patterns(30, 9, Seed{3});
        cfg.llr_iters = 20;
        CHECK(train_llr(set, cfg, {1, {}}) == train_llr(set, cfg, {3, {}}));
    }
}

TEST_CASE("llr loss is non-increasing per neuron") {
    for (std::uint64_t s = 0; s < 4; ++s) {
        const std::size_t p = 5 + 5 * s;
        const PatternSet set = generate_patterns(20, p, Seed{s});
        LossLog log;
        TrainConfig cfg;
        cfg.llr_iters = 60;
        train_llr(set, cfg, {1, recorder(log)});
        REQUIRE(log.size() == 20);
        for (const auto& [neuron, losses] : log) {
            REQUIRE(losses.size() == 61);
            CHECK(losses.front() == doctest::Approx(p * std::log(2.0)));
            for (std::size_t k = 1; k < losses.size(); ++k) CHECK(losses[k] <= losses[k - 1] + 1e-12);
        }
    }
}

TEST_CASE("klr examples") {
    TrainConfig cfg;
    SUBCASE("zero iterations leaves alpha at zero") {
        cfg.klr_iters = 0;
        const DualModel m = train_klr(generate_patterns(10, 3, Seed{1}), cfg);
        for (auto v : m.alpha().flat()) CHECK(v == 0.0);
    }
    SUBCASE("recurrence matches a naive loop implementation") {
        cfg.klr_iters = 5;
        const PatternSet set = generate_patterns(25, 7, Seed{4});
        const DualModel m = train_klr(set, cfg);
        const MatrixD k = naive_gram(set, 1.0 / 25);
        MatrixD a(7, 25, 0.0);
        for (std::size_t it = 0; it < 5; ++it) {
            MatrixD z(7, 25, 0.0);
            for (std::size_t r = 0; r < 7; ++r)
                for (std::size_t c = 0; c < 25; ++c)
                    for (std::size_t q = 0; q < 7; ++q) z(r, c) += k(r, q) * a(q, c);
            for (std::size_t r = 0; r < 7; ++r)
                for (std::size_t c = 0; c < 25; ++c) {
                    const double t = set.pattern(r)[c] > 0 ? 1.0 : 0.0;
                    a(r, c) -= cfg.eta * (sigmoid(z(r, c)) - t + cfg.lambda * a(r, c));
                }
        }
        for (std::size_t e = 0; e < a.size(); ++e) CHECK(m.alpha().flat()[e] == doctest::Approx(a.flat()[e]).epsilon(1e-12));
    }
    SUBCASE("single pattern converges to the scalar fixed point") {
        cfg.klr_iters = 20000;
        const DualModel m = train_klr(PatternSet(2, 1, {1, -1}), cfg);
        const double root = bisect(-50.0, 50.0, [&](double a) { return sigmoid(a) - 1.0 + cfg.lambda * a; });
        CHECK(std::abs(m.alpha()(0, 0) - root) <= 1e-6);
        CHECK(std::abs(m.alpha()(0, 1) + root) <= 1e-6);
    }
}

TEST_CASE("klr loss is non-increasing for P <= 20") {
    for (std::size_t p : {1u, 5u, 12u, 20u}) {
        const PatternSet set = generate_patterns(30, p, Seed{p * 3});
        LossLog log;
        TrainConfig cfg;
        cfg.klr_iters = 80;
        train_klr(set, cfg, {1, recorder(log)});
        REQUIRE(log.size() == 30);
        for (const auto& [neuron, losses] : log) {
            REQUIRE(losses.size() == 81);
            for (std::size_t k = 1; k < losses.size(); ++k) CHECK(losses[k] <= losses[k - 1] + 1e-12);
        }
    }
}

TEST_CASE("krr examples") {
    TrainConfig cfg;
    SUBCASE("single pattern") {
        const PatternSet set(3, 1, {1, -1, 1});
        const DualModel m = train_krr(set, cfg);
        CHECK(m.alpha()(0, 0) == doctest::Approx(0.990099).epsilon(1e-6));
        CHECK(m.alpha()(0, 1) == doctest::Approx(-1.0 / 1.01).epsilon(1e-14));
    }
    SUBCASE("agrees with iterative ridge descent") {
        const PatternSet set = generate_patterns(30, 8, Seed{8});
        const DualModel m = train_krr(set, cfg);
        const MatrixD k = naive_gram(set, 1.0 / 30);
        for (std::size_t i = 0; i < 30; ++i) {
            std::vector<double> x(8);
            for (std::size_t mu = 0; mu < 8; ++mu) x[mu] = set.pattern(mu)[i];
            const auto ref = ridge_by_descent(k, x, cfg.lambda);
            for (std::size_t mu = 0; mu < 8; ++mu) CHECK(std::abs(m.alpha()(mu, i) - ref[mu]) <= 1e-6);
        }
    }
    SUBCASE("first-order optimality by finite differences") {
        const PatternSet set = generate_patterns(20, 6, Seed{9});
        const DualModel m = train_krr(set, cfg);
        const MatrixD k = naive_gram(set, 1.0 / 20);
        for (std::size_t i = 0; i < 20; ++i) {
            std::vector<double> a(6), x(6);
            for (std::size_t mu = 0; mu < 6; ++mu) {
                a[mu] = m.alpha()(mu, i);
                x[mu] = set.pattern(mu)[i];
            }
            double norm2 = 0.0;
            const double h = 1e-6;
            for (std::size_t c = 0; c < 6; ++c) {
                auto up = a, dn = a;
                up[c] += h;
                dn[c] -= h;
                const double g = (ridge_objective(k, up, x, cfg.lambda) - ridge_objective(k, dn, x, cfg.lambda)) / (2 * h);
                norm2 += g * g;
            }
            CHECK(std::sqrt(norm2) <= 1e-5);
        }
    }
}

TEST_CASE("every rule stores a low load as fixed points") {
    const PatternSet set = generate_patterns(200, 10, Seed{77});
    for (Rule r : {Rule::hebbian, Rule::llr, Rule::klr, Rule::krr}) {
        const Model m = train(r, set, TrainConfig{});
        CHECK(model_rule(m) == r);
        CHECK(model_n(m) == 200);
        for (std::size_t mu = 0; mu < 10; ++mu) CHECK(step(m, set.state(mu)) == set.state(mu));
    }
}

TEST_CASE("model constructors validate") {
    MatrixD diag(2, 2, 0.0);
    diag(0, 0) = 0.5;
    CHECK_THROWS_AS(WeightModel(Rule::llr, diag, 1), OutOfRangeError);
    MatrixD asym(2, 2, 0.0);
    asym(0, 1) = 1.0;
    CHECK_NOTHROW(WeightModel(Rule::llr, asym, 1));
    CHECK_THROWS_AS(WeightModel(Rule::hebbian, asym, 1), OutOfRangeError);
    CHECK_THROWS_AS(WeightModel(Rule::llr, MatrixD(2, 3), 1), DimensionMismatchError);
    MatrixD nan(2, 2, 0.0);
    nan(0, 1) = std::nan("");
    CHECK_THROWS_AS(WeightModel(Rule::llr, nan, 1), NonFiniteError);

    const PatternSet set = generate_patterns(4, 2, Seed{1});
    CHECK_THROWS_AS(DualModel(Rule::krr, set, MatrixD(2, 3), KernelConfig{0.25}, 0.01), DimensionMismatchError);
    MatrixD bad(2, 4, 0.0);
    bad(1, 1) = INFINITY;
    CHECK_THROWS_AS(DualModel(Rule::krr, set, bad, KernelConfig{0.25}, 0.01), NonFiniteError);
}

TEST_CASE("models round-trip through text") {
    const PatternSet set = generate_patterns(16, 5, Seed{12});
    TrainConfig cfg;
    cfg.llr_iters = 10;
    cfg.klr_iters = 10;
    for (Rule r : {Rule::hebbian, Rule::llr, Rule::klr, Rule::krr}) {
        const Model m = train(r, set, cfg);
        CHECK(parse_model(format_model(m)) == m);
        testing::TempPath tmp("model");
        save_model(m, tmp.path());
        CHECK(load_model(tmp.path()) == m);
    }
    CHECK_THROWS_AS(parse_model("krr 2 1 0.01\n"), ParseError);
    CHECK_THROWS_AS(parse_model("perceptron 2 1 0.01 0\n0 0\n0 0\n"), ParseError);
    CHECK_THROWS_AS(load_model("/nonexistent/model.txt"), IoError);
}
