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

#include "kernmem/selftest.hpp"

#include <cmath>
#include <filesystem>
#include <functional>
#include <sstream>

#include "kernmem/experiments.hpp"
#include "kernmem/kernel.hpp"
#include "kernmem/learning.hpp"
#include "kernmem/patterns.hpp"
#include "kernmem/recall.hpp"

namespace kernmem {
namespace {

// Throws with a description on the first violated condition.
struct Failure {
    std::string what;
};

void expect(bool cond, const std::string& what) {
    if (!cond) throw Failure{what};
}

CheckResult check(const std::string& name, const std::function<std::string()>& body) {
    try {
        return {name, true, body()};
    } catch (const Failure& f) {
        return {name, false, f.what};
    } catch (const std::exception& e) {
        return {name, false, std::string("exception: ") + e.what()};
    }
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(3);
    os << v;
    return os.str();
}

}  // namespace

std::vector<CheckResult> run_selftest(Seed seed) {
    std::vector<CheckResult> out;

    out.push_back(check("gram symmetry and unit diagonal", [&] {
        for (std::size_t t = 0; t < 5; ++t) {
            const PatternSet set = generate_patterns(60, 25, derive_seed(seed, {1, t}));
            const KernelMatrix k = gram_matrix(set, KernelConfig::for_neurons(60));
            for (std::size_t i = 0; i < k.size(); ++i) {
                expect(k(i, i) == 1.0, "diagonal entry != 1");
                for (std::size_t j = 0; j < k.size(); ++j) {
                    expect(k(i, j) == k(j, i), "asymmetric entry");
                    expect(k(i, j) > 0.0 && k(i, j) <= 1.0, "entry outside (0, 1]");
                }
            }
        }
        return std::string("5 Gram matrices, P=25, N=60");
    }));

    out.push_back(check("rbf equals exp(-4 gamma d)", [&] {
        const std::size_t n = 500;
        const KernelConfig cfg = KernelConfig::for_neurons(n);
        const State x = generate_patterns(n, 1, derive_seed(seed, {2})).state(0);
        double worst = 0.0;
        for (std::size_t d : {0u, 1u, 7u, 250u, 499u, 500u}) {
            const double m0 = 1.0 - 2.0 * static_cast<double>(d) / static_cast<double>(n);
            const State y = corrupt(x, m0, derive_seed(seed, {3, d}));
            const double expected = std::exp(-4.0 * cfg.gamma * static_cast<double>(d));
            worst = std::max(worst, std::abs(rbf(x.values(), y.values(), cfg) - expected) / expected);
            expect(std::abs(rbf(x.values(), y.values(), cfg) - rbf(y.values(), x.values(), cfg)) == 0.0,
                   "rbf not symmetric");
        }
        expect(worst <= 1e-12, "relative error " + fmt(worst));
        expect(std::abs(rbf_at_distance(1, 1.0 / 500) - 0.9920319148370607) < 1e-12, "d=1 reference value");
        expect(std::abs(rbf_at_distance(500, 1.0 / 500) - 0.01831563888873418) < 1e-12, "d=N reference value");
        return "max relative error " + fmt(worst);
    }));

    out.push_back(check("overlap identities", [&] {
        const State a = generate_patterns(101, 1, derive_seed(seed, {4})).state(0);
        const State b = generate_patterns(101, 1, derive_seed(seed, {5})).state(0);
        expect(overlap(a, a) == 1.0, "overlap(a, a) != 1");
        expect(overlap(a, a.negated()) == -1.0, "overlap(a, -a) != -1");
        expect(overlap(a, b) == overlap(b, a), "overlap not symmetric");
        const State even = generate_patterns(100, 1, derive_seed(seed, {6})).state(0);
        expect(overlap(even, corrupt(even, 0.0, derive_seed(seed, {7}))) == 0.0, "half flip != 0");
        return std::string("self, negation, symmetry, half flip");
    }));

    out.push_back(check("corrupt reaches 1 - 2f/N exactly", [&] {
        for (std::size_t n : {500u, 101u, 64u}) {
            const State x = generate_patterns(n, 1, derive_seed(seed, {8, n})).state(0);
            for (int k = 0; k <= 20; ++k) {
                const double m0 = k / 20.0;
                const std::size_t f = flip_count(n, m0);
                const State y = corrupt(x, m0, derive_seed(seed, {9, n, static_cast<std::uint64_t>(k)}));
                const double expected = (static_cast<double>(n) - 2.0 * static_cast<double>(f)) / static_cast<double>(n);
                expect(overlap(x, y) == expected, "N=" + std::to_string(n) + " m0=" + fmt(m0));
                expect(std::abs(expected - m0) <= 1.0 / static_cast<double>(n) + 1e-12, "not closest overlap");
            }
        }
        return std::string("N in {500, 101, 64}, m0 grid 0:0.05:1");
    }));

    out.push_back(check("sign(0) = +1", [&] {
        expect(spin_sign(0.0) == 1 && spin_sign(-0.0) == 1, "sign of zero");
        expect(spin_sign(1e-300) == 1 && spin_sign(-1e-300) == -1, "sign of tiny values");
        // All-zero weights give h = 0 everywhere, so every neuron becomes +1.
        const WeightModel zero(Rule::llr, MatrixD(8, 8, 0.0), 1);
        const State s({-1, 1, -1, 1, -1, -1, 1, -1});
        expect(step(zero, s) == State(std::vector<std::int8_t>(8, 1)), "zero field did not map to +1");
        return std::string("spin_sign and zero-field step");
    }));

    out.push_back(check("fixed-point early stop is sound", [&] {
        const PatternSet set = generate_patterns(120, 12, derive_seed(seed, {10}));
        TrainConfig cfg;
        std::size_t stopped = 0;
        for (Rule rule : {Rule::hebbian, Rule::llr, Rule::klr, Rule::krr}) {
            const Model model = train(rule, set, cfg);
            for (std::size_t mu = 0; mu < set.p(); ++mu) {
                const State target = set.state(mu);
                const State s0 = corrupt(target, 0.6, derive_seed(seed, {11, mu}));
                const RecallTrace trace = run(model, s0, target, kDefaultRecallSteps);
                expect(trace.steps_run <= kDefaultRecallSteps, "steps_run exceeds T");
                if (trace.reached_fixed_point) {
                    ++stopped;
                    expect(step(model, trace.final_state) == trace.final_state,
                           std::string(rule_name(rule)) + ": reported fixed point is not fixed");
                }
            }
        }
        expect(stopped > 0, "no run reached a fixed point");
        return std::to_string(stopped) + " fixed points verified";
    }));

    out.push_back(check("KRR residual <= 1e-8", [&] {
        double worst = 0.0;
        for (std::size_t t = 0; t < 5; ++t) {
            const PatternSet set = generate_patterns(30, 10, derive_seed(seed, {12, t}));
            TrainConfig cfg;
            const DualModel m = train_krr(set, cfg);
            const KernelMatrix k = gram_matrix(set, m.kernel());
            const MatrixD x = set.to_double();
            double num = 0.0, den = 0.0;
            for (std::size_t i = 0; i < set.p(); ++i) {
                for (std::size_t c = 0; c < set.n(); ++c) {
                    double r = cfg.lambda * m.alpha()(i, c) - x(i, c);
                    for (std::size_t j = 0; j < set.p(); ++j) r += k(i, j) * m.alpha()(j, c);
                    num += r * r;
                    den += x(i, c) * x(i, c);
                }
            }
            worst = std::max(worst, std::sqrt(num / den));
        }
        expect(worst <= 1e-8, "relative residual " + fmt(worst));
        return "max relative residual " + fmt(worst);
    }));

    out.push_back(check("Hebbian matches triple-loop oracle", [&] {
        const PatternSet set = generate_patterns(20, 7, derive_seed(seed, {13}));
        const WeightModel w = train_hebbian(set);
        double worst = 0.0;
        for (std::size_t i = 0; i < 20; ++i) {
            for (std::size_t j = 0; j < 20; ++j) {
                double expected = 0.0;
                if (i != j) {
                    for (std::size_t mu = 0; mu < 7; ++mu) expected += set.matrix()(mu, i) * set.matrix()(mu, j);
                    expected /= 20.0;
                }
                worst = std::max(worst, std::abs(w.weights()(i, j) - expected));
            }
        }
        expect(worst <= 1e-12, "max deviation " + fmt(worst));
        return std::string("P=7, N=20");
    }));

    out.push_back(check("CSV round trip", [&] {
        std::vector<ExperimentRow> rows;
        rows.push_back({Rule::krr, 500, 0.15, 75, seed.value, CapacityMetrics{1.0}});
        rows.push_back({Rule::hebbian, 500, 0.1, 50, seed.value, CapacityMetrics{0.62}});
        const std::string csv = format_rows(rows, Experiment::capacity);
        expect(parse_rows(csv) == std::vector<ExperimentRow>{rows[1], rows[0]}, "capacity rows differ");

        std::vector<ExperimentRow> noise{{Rule::llr, 500, 0.2, 100, seed.value, NoiseMetrics{0.35, 0.9871234, 0.1, 10}}};
        expect(parse_rows(format_rows(noise, Experiment::noise)) == noise, "noise rows differ");

        std::vector<ExperimentRow> timing{
            {Rule::klr, 500, 1.0, 500, seed.value, TimingMetrics{{TrialLabel::Kind::run, 0}, 1.234567891, 1}},
            {Rule::klr, 500, 1.0, 500, seed.value, TimingMetrics{{TrialLabel::Kind::mean, 0}, 1.3, 1}},
            {Rule::klr, 500, 1.0, 500, seed.value, TimingMetrics{{TrialLabel::Kind::std, 0}, 0.01, 1}}};
        expect(parse_rows(format_rows(timing, Experiment::timing)) == timing, "timing rows differ");
        return std::string("capacity, noise, timing");
    }));

    out.push_back(check("pattern file round trip", [&] {
        const PatternSet set = generate_patterns(17, 5, derive_seed(seed, {14}));
        expect(parse_patterns(format_patterns(set)) == set, "in-memory round trip differs");
        const auto path = std::filesystem::temp_directory_path() /
                          ("kernmem_selftest_" + std::to_string(seed.value) + ".txt");
        save_patterns(set, path);
        const PatternSet back = load_patterns(path);
        std::filesystem::remove(path);
        expect(back == set, "file round trip differs");
        return std::string("N=17, P=5");
    }));

    return out;
}

}  // namespace kernmem
