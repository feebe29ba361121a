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

#include "kernmem/experiments.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <string>

#include "kernmem/error.hpp"
#include "kernmem/parallel.hpp"

namespace kernmem {
namespace {

// Stream tags, one per kind of draw.
constexpr std::uint64_t kTagPatterns = 0x70617474;  // "patt"
constexpr std::uint64_t kTagCorrupt = 0x636f7272;   // "corr"
constexpr std::uint64_t kTagWarmup = 0x7761726d;    // "warm"

std::uint64_t bits(double v) { return std::bit_cast<std::uint64_t>(v); }

std::string cell_label(Rule rule, std::string_view key, double value) {
    return "rule=" + std::string(rule_name(rule)) + " " + std::string(key) + "=" + std::to_string(value);
}

template <typename Fn>
auto annotated(const std::string& where, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ExperimentError&) {
        throw;
    } catch (const std::exception& e) {
        throw ExperimentError(where + ": " + e.what());
    }
}

std::vector<double> grid(int first, int last, double denom) {
    std::vector<double> out;
    for (int k = first; k <= last; ++k) out.push_back(k / denom);
    return out;
}

double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

std::string_view experiment_name(Experiment e) noexcept {
    switch (e) {
        case Experiment::capacity:
            return "capacity";
        case Experiment::noise:
            return "noise";
        case Experiment::timing:
            return "timing";
    }
    return "unknown";
}

std::optional<Experiment> parse_experiment(std::string_view name) noexcept {
    for (Experiment e : {Experiment::capacity, Experiment::noise, Experiment::timing}) {
        if (experiment_name(e) == name) return e;
    }
    return std::nullopt;
}

std::vector<double> default_beta_grid() { return grid(1, 30, 20.0); }
std::vector<double> default_noise_grid() { return grid(0, 20, 20.0); }
std::vector<double> default_timing_grid() { return {0.1, 0.2, 0.4, 0.6, 0.8, 1.0}; }

std::size_t pattern_count(double beta, std::size_t n) {
    return static_cast<std::size_t>(std::floor(beta * static_cast<double>(n) + 1e-9));
}

std::string TrialLabel::to_string() const {
    switch (kind) {
        case Kind::mean:
            return "mean";
        case Kind::std:
            return "std";
        case Kind::run:
            break;
    }
    return std::to_string(index);
}

void SweepConfig::validate() const {
    if (n == 0) throw InvalidDimensionError("sweep needs n >= 1");
    if (rules.empty()) throw OutOfRangeError("sweep needs at least one rule");
    if (trials == 0) throw OutOfRangeError("trials must be >= 1");
    if (noise_trials_per_pattern == 0) throw OutOfRangeError("noise trials per pattern must be >= 1");
    if (t_max == 0) throw OutOfRangeError("t_max must be >= 1");
    if (!(success_threshold > 0.0 && success_threshold <= 1.0)) {
        throw OutOfRangeError("success threshold must lie in (0, 1]");
    }
    for (double b : beta_grid) {
        if (!(std::isfinite(b) && b > 0.0)) throw OutOfRangeError("beta grid entries must be > 0");
        if (pattern_count(b, n) == 0) {
            throw OutOfRangeError("beta " + std::to_string(b) + " gives P = 0 at n = " + std::to_string(n));
        }
    }
    for (double m : noise_grid) {
        if (!(m >= 0.0 && m <= 1.0)) throw OutOfRangeError("noise grid entries must lie in [0, 1]");
    }
    if (!(std::isfinite(noise_beta) && noise_beta > 0.0) || pattern_count(noise_beta, n) == 0) {
        throw OutOfRangeError("noise beta must give P >= 1");
    }
    train.validate();
}

PatternSet sweep_patterns(const SweepConfig& cfg, Experiment experiment, Rule rule, double beta, std::size_t trial) {
    const std::uint64_t rule_tag = cfg.shared_patterns ? 0 : static_cast<std::uint64_t>(rule) + 1;
    const Seed seed = derive_seed(cfg.seed, {kTagPatterns, static_cast<std::uint64_t>(experiment), rule_tag,
                                             bits(beta), cfg.n, trial});
    return generate_patterns(cfg.n, pattern_count(beta, cfg.n), seed);
}

std::vector<ExperimentRow> capacity_sweep(const SweepConfig& cfg) {
    cfg.validate();
    std::vector<ExperimentRow> rows;
    for (Rule rule : cfg.rules) {
        for (double beta : cfg.beta_grid) {
            const std::size_t p = pattern_count(beta, cfg.n);
            const double rate = annotated("capacity " + cell_label(rule, "beta", beta), [&] {
                std::size_t successes = 0;
                for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
                    const PatternSet set = sweep_patterns(cfg, Experiment::capacity, rule, beta, trial);
                    const Model model = train(rule, set, cfg.train, TrainOptions{cfg.threads, {}});
                    std::vector<char> ok(p, 0);
                    parallel_for(p, cfg.threads, [&](std::size_t mu) {
                        const State clean = set.state(mu);
                        ok[mu] = is_success(run(model, clean, clean, cfg.t_max), cfg.success_threshold);
                    });
                    successes += static_cast<std::size_t>(std::count(ok.begin(), ok.end(), 1));
                }
                return static_cast<double>(successes) / static_cast<double>(p * cfg.trials);
            });
            rows.push_back(ExperimentRow{rule, cfg.n, beta, p, cfg.seed.value, CapacityMetrics{rate}});
        }
    }
    sort_rows(rows);
    return rows;
}

std::vector<ExperimentRow> noise_sweep(const SweepConfig& cfg) {
    cfg.validate();
    const double beta = cfg.noise_beta;
    const std::size_t p = pattern_count(beta, cfg.n);
    const std::size_t per = cfg.noise_trials_per_pattern;
    std::vector<ExperimentRow> rows;
    for (Rule rule : cfg.rules) {
        const PatternSet set = sweep_patterns(cfg, Experiment::noise, rule, beta, 0);
        const Model model = annotated("noise " + cell_label(rule, "beta", beta),
                                      [&] { return train(rule, set, cfg.train, TrainOptions{cfg.threads, {}}); });
        for (double m0 : cfg.noise_grid) {
            std::vector<double> finals(p * per);
            annotated("noise " + cell_label(rule, "m0", m0), [&] {
                parallel_for(p * per, cfg.threads, [&](std::size_t run_index) {
                    const std::size_t mu = run_index / per;
                    const std::size_t t = run_index % per;
                    const State clean = set.state(mu);
                    const Seed seed = derive_seed(cfg.seed, {kTagCorrupt, bits(m0), mu, t});
                    finals[run_index] = run(model, corrupt(clean, m0, seed), clean, cfg.t_max).final_overlap();
                });
            });
            const double mean = mean_of(finals);
            double var = 0.0;
            for (double f : finals) var += (f - mean) * (f - mean);
            var /= static_cast<double>(finals.size());
            rows.push_back(ExperimentRow{rule, cfg.n, beta, p, cfg.seed.value,
                                         NoiseMetrics{m0, mean, std::sqrt(var), per}});
        }
    }
    sort_rows(rows);
    return rows;
}

std::vector<ExperimentRow> timing_benchmark(const SweepConfig& cfg) {
    cfg.validate();
    for (Rule rule : cfg.rules) {
        if (rule == Rule::hebbian) throw OutOfRangeError("timing benchmark covers llr, klr and krr only");
    }
    if (cfg.beta_grid.empty()) return {};
    const std::size_t threads = cfg.parallel_training ? resolve_threads(cfg.threads) : 1;
    const TrainOptions opts{threads, {}};

    std::vector<ExperimentRow> rows;
    for (Rule rule : cfg.rules) {
        annotated("timing warm-up " + cell_label(rule, "beta", cfg.beta_grid.front()), [&] {
            const double beta = cfg.beta_grid.front();
            const Seed seed = derive_seed(cfg.seed, {kTagWarmup, static_cast<std::uint64_t>(rule), bits(beta)});
            (void)train(rule, generate_patterns(cfg.n, pattern_count(beta, cfg.n), seed), cfg.train, opts);
        });
        for (double beta : cfg.beta_grid) {
            const std::size_t p = pattern_count(beta, cfg.n);
            std::vector<double> seconds;
            for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
                const PatternSet set = sweep_patterns(cfg, Experiment::timing, rule, beta, trial);
                const double secs = annotated("timing " + cell_label(rule, "beta", beta), [&] {
                    const auto start = std::chrono::steady_clock::now();
                    const Model model = train(rule, set, cfg.train, opts);
                    const auto stop = std::chrono::steady_clock::now();
                    (void)model;
                    return std::max(std::chrono::duration<double>(stop - start).count(), 1e-9);
                });
                seconds.push_back(secs);
                rows.push_back(ExperimentRow{rule, cfg.n, beta, p, cfg.seed.value,
                                             TimingMetrics{{TrialLabel::Kind::run, trial}, secs, threads}});
            }
            const double mean = mean_of(seconds);
            double ss = 0.0;
            for (double s : seconds) ss += (s - mean) * (s - mean);
            const double sd = seconds.size() > 1 ? std::sqrt(ss / static_cast<double>(seconds.size() - 1)) : 0.0;
            rows.push_back(ExperimentRow{rule, cfg.n, beta, p, cfg.seed.value,
                                         TimingMetrics{{TrialLabel::Kind::mean, 0}, mean, threads}});
            rows.push_back(ExperimentRow{rule, cfg.n, beta, p, cfg.seed.value,
                                         TimingMetrics{{TrialLabel::Kind::std, 0}, sd, threads}});
        }
    }
    sort_rows(rows);
    return rows;
}

void sort_rows(std::vector<ExperimentRow>& rows) {
    auto secondary = [](const ExperimentRow& r) -> std::pair<double, double> {
        if (const auto* nm = std::get_if<NoiseMetrics>(&r.metrics)) return {nm->m0, 0.0};
        if (const auto* tm = std::get_if<TimingMetrics>(&r.metrics)) {
            return {static_cast<double>(tm->trial.kind), static_cast<double>(tm->trial.index)};
        }
        return {0.0, 0.0};
    };
    std::stable_sort(rows.begin(), rows.end(), [&](const ExperimentRow& a, const ExperimentRow& b) {
        if (a.rule != b.rule) return a.rule < b.rule;
        if (a.beta != b.beta) return a.beta < b.beta;
        return secondary(a) < secondary(b);
    });
}

}  // namespace kernmem
