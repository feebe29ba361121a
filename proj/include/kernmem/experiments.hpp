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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "kernmem/learning.hpp"
#include "kernmem/patterns.hpp"
#include "kernmem/recall.hpp"
#include "kernmem/rng.hpp"

namespace kernmem {

enum class Experiment { capacity, noise, timing };

std::string_view experiment_name(Experiment e) noexcept;
std::optional<Experiment> parse_experiment(std::string_view name) noexcept;

/// {0.05, 0.10, ..., 1.50}
std::vector<double> default_beta_grid();
/// {0.00, 0.05, ..., 1.00}
std::vector<double> default_noise_grid();
/// {0.1, 0.2, 0.4, 0.6, 0.8, 1.0}
std::vector<double> default_timing_grid();

/// floor(beta * n); products within 1e-9 below an integer snap up to it.
std::size_t pattern_count(double beta, std::size_t n);

struct SweepConfig {
    std::size_t n = 500;
    std::vector<Rule> rules{Rule::hebbian, Rule::llr, Rule::klr, Rule::krr};
    /// Capacity and timing load grid.
    std::vector<double> beta_grid = default_beta_grid();
    /// Capacity: pattern draws averaged per cell. Timing: measured trials per cell.
    std::size_t trials = 1;
    std::vector<double> noise_grid = default_noise_grid();
    /// Load used by the noise sweep.
    double noise_beta = 0.2;
    std::size_t noise_trials_per_pattern = 10;
    std::size_t t_max = kDefaultRecallSteps;
    double success_threshold = kDefaultSuccessThreshold;
    TrainConfig train;
    Seed seed{0};
    /// Worker threads for sweeps (0 = all cores).
    std::size_t threads = 0;
    /// Draw one pattern set per (beta, trial) shared by all rules instead of one per rule.
    bool shared_patterns = false;
    /// Timing only: let the measured training calls use `threads` workers.
    bool parallel_training = false;

    /// Throws OutOfRangeError / InvalidDimensionError on invalid fields.
    void validate() const;
};

struct CapacityMetrics {
    double success_rate = 0.0;

    friend bool operator==(const CapacityMetrics&, const CapacityMetrics&) = default;
};

struct NoiseMetrics {
    double m0 = 0.0;
    double mean_final_overlap = 0.0;
    double std_final_overlap = 0.0;
    std::size_t trials = 0;

    friend bool operator==(const NoiseMetrics&, const NoiseMetrics&) = default;
};

struct TrialLabel {
    enum class Kind { run, mean, std };
    Kind kind = Kind::run;
    std::size_t index = 0;

    std::string to_string() const;
    friend bool operator==(const TrialLabel&, const TrialLabel&) = default;
};

struct TimingMetrics {
    TrialLabel trial;
    double learn_seconds = 0.0;
    std::size_t threads = 1;

    friend bool operator==(const TimingMetrics&, const TimingMetrics&) = default;
};

struct ExperimentRow {
    Rule rule = Rule::krr;
    std::size_t n = 0;
    double beta = 0.0;
    std::size_t p = 0;
    std::uint64_t seed = 0;
    std::variant<CapacityMetrics, NoiseMetrics, TimingMetrics> metrics;

    Experiment experiment() const noexcept { return static_cast<Experiment>(metrics.index()); }

    friend bool operator==(const ExperimentRow&, const ExperimentRow&) = default;
};

/// Patterns for one sweep cell. Deterministic in (cfg.seed, cfg.n, experiment,
/// rule unless shared_patterns, beta, trial).
PatternSet sweep_patterns(const SweepConfig& cfg, Experiment experiment, Rule rule, double beta, std::size_t trial);

/// Clean-start recall success rate per (rule, beta), averaged over cfg.trials draws.
std::vector<ExperimentRow> capacity_sweep(const SweepConfig& cfg);

/// Mean/std of m(T) over P x noise_trials_per_pattern corrupted starts per (rule, m0), at cfg.noise_beta.
std::vector<ExperimentRow> noise_sweep(const SweepConfig& cfg);

/// Wall-clock training time per (rule, beta, trial) plus mean and std rows.
/// Rules must be llr, klr or krr. Measured calls run serially.
std::vector<ExperimentRow> timing_benchmark(const SweepConfig& cfg);

/// Sorts by rule, beta, then m0 / trial (runs by index, then mean, then std).
void sort_rows(std::vector<ExperimentRow>& rows);

std::string_view csv_header(Experiment experiment);

/// CSV text for rows of one experiment type (header first, rows sorted).
/// Throws OutOfRangeError if a row belongs to a different experiment.
std::string format_rows(std::span<const ExperimentRow> rows, Experiment experiment);

/// Inverse of format_rows; the experiment is taken from the header.
std::vector<ExperimentRow> parse_rows(std::string_view csv, Experiment* experiment = nullptr);

void write_rows(std::span<const ExperimentRow> rows, Experiment experiment, const std::filesystem::path& path);
std::vector<ExperimentRow> read_rows(const std::filesystem::path& path, Experiment* experiment = nullptr);

/// SVG line chart with one series per rule. Timing uses a log10 time axis.
/// Throws OutOfRangeError on empty or mixed input.
std::string render_svg(std::span<const ExperimentRow> rows);
void render_plot(std::span<const ExperimentRow> rows, const std::filesystem::path& path);

}  // namespace kernmem
