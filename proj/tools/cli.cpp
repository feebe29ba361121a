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

#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "kernmem/error.hpp"
#include "kernmem/fileio.hpp"
#include "kernmem/patterns.hpp"
#include "kernmem/recall.hpp"
#include "kernmem/selftest.hpp"

namespace kernmem::cli {
namespace {

constexpr std::uint64_t kDefaultSeed = 42;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<Rule> parse_rule_list(const std::string& text) {
    std::vector<Rule> rules;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto rule = parse_rule(trim(item));
        if (!rule) throw UsageError("unknown rule '" + item + "' (expected hebbian, llr, klr, krr)");
        if (std::find(rules.begin(), rules.end(), *rule) == rules.end()) rules.push_back(*rule);
    }
    if (rules.empty()) throw UsageError("--rules needs at least one rule");
    return rules;
}

bool has_flag(const std::vector<std::string>& args, const std::string& key) {
    const std::string flag = "--" + key;
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
        return a == flag || a.rfind(flag + "=", 0) == 0;
    });
}

// Splices key=value lines from --config FILE in as "--key=value" for keys
// absent from the command line, so command-line flags take precedence.
std::vector<std::string> apply_config(const std::vector<std::string>& args) {
    std::string path;
    for (std::size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty()) return args;

    std::string text;
    try {
        text = read_file(path);
    } catch (const IoError& e) {
        throw UsageError(e.what());
    }
    std::vector<std::string> injected;
    std::stringstream ss(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw UsageError("config line " + std::to_string(line_no) + ": expected key=value");
        }
        const std::string key = trim(std::string_view(t).substr(0, eq));
        const std::string value = trim(std::string_view(t).substr(eq + 1));
        if (key.empty() || key == "config") {
            throw UsageError("config line " + std::to_string(line_no) + ": invalid key '" + key + "'");
        }
        if (!has_flag(args, key)) injected.push_back("--" + key + "=" + value);
    }
    // Insert right after the subcommand token.
    std::vector<std::string> out(args.begin(), args.end());
    auto sub = std::find_if(out.begin() + 1, out.end(), [](const std::string& a) { return !a.starts_with("-"); });
    if (sub == out.end()) return out;
    out.insert(sub + 1, injected.begin(), injected.end());
    return out;
}

struct Bindings {
    std::string rules_text;
    std::uint64_t seed = kDefaultSeed;
    std::string isa_text;
    std::string rule_text = "krr";
    std::vector<double> betas;
    std::vector<double> m0_grid;
};

void add_training_flags(CLI::App* sub, CliInvocation& inv) {
    TrainConfig& t = inv.sweep.train;
    sub->add_option("--n", inv.sweep.n, "neuron count N")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--lambda", t.lambda, "L2 regularization (LLR, KLR, KRR)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--eta", t.eta, "learning rate (LLR, KLR)")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--llr-iters", t.llr_iters, "LLR gradient steps")->capture_default_str();
    sub->add_option("--klr-iters", t.klr_iters, "KLR gradient steps")->capture_default_str();
    sub->add_option("--gamma-scale", inv.gamma_scale, "RBF width multiplier: gamma = scale / N")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
}

void add_run_flags(CLI::App* sub, CliInvocation& inv, Bindings& b) {
    sub->add_option("--seed", b.seed, "base seed (env KERNMEM_SEED)")->envname("KERNMEM_SEED")->capture_default_str();
    sub->add_option("--t-max", inv.sweep.t_max, "synchronous recall steps T")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--threshold", inv.sweep.success_threshold, "success if final overlap > threshold")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    sub->add_option("--threads", inv.sweep.threads, "worker threads, 0 = all cores")->capture_default_str();
    sub->add_option("--isa", b.isa_text, "kernel variant: scalar or avx2 (default: best available)");
    sub->add_option("--config", "key=value file supplying flags not given on the command line");
}

void add_output_flags(CLI::App* sub, CliInvocation& inv) {
    sub->add_option("--out", inv.out, "CSV output path (default: stdout)");
    sub->add_option("--plot", inv.plot, "SVG plot output path");
}

std::string grid_text(const std::vector<double>& grid) {
    std::ostringstream os;
    for (std::size_t i = 0; i < grid.size(); ++i) os << (i ? "," : "") << grid[i];
    return os.str();
}

}  // namespace

ParseResult parse_args(const std::vector<std::string>& raw_args) {
    CliInvocation inv;
    Bindings b;

    CLI::App app{"Kernel associative-memory benchmark: Hebbian, LLR, KLR and KRR learning for Hopfield networks",
                 "kernmem"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "help for every subcommand");

    auto* capacity = app.add_subcommand("capacity", "recall success rate vs. storage load from clean starts");
    add_training_flags(capacity, inv);
    add_run_flags(capacity, inv, b);
    add_output_flags(capacity, inv);
    capacity->add_option("--rules", b.rules_text, "comma-separated rules")->default_str("hebbian,llr,klr,krr");
    capacity->add_option("--betas", b.betas, "comma-separated loads")
        ->delimiter(',')
        ->check(CLI::PositiveNumber)
        ->default_str(grid_text(default_beta_grid()));
    capacity->add_option("--trials", inv.sweep.trials, "pattern draws averaged per load")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    capacity->add_flag("--shared-patterns", inv.sweep.shared_patterns, "reuse one pattern draw across rules");

    auto* noise = app.add_subcommand("noise", "mean final overlap vs. initial overlap at a fixed load");
    add_training_flags(noise, inv);
    add_run_flags(noise, inv, b);
    add_output_flags(noise, inv);
    noise->add_option("--rules", b.rules_text, "comma-separated rules")->default_str("hebbian,llr,klr,krr");
    noise->add_option("--beta", inv.sweep.noise_beta, "storage load")->check(CLI::PositiveNumber)->capture_default_str();
    noise->add_option("--m0-grid", b.m0_grid, "comma-separated initial overlaps")
        ->delimiter(',')
        ->check(CLI::Range(0.0, 1.0))
        ->default_str(grid_text(default_noise_grid()));
    noise->add_option("--noise-trials", inv.sweep.noise_trials_per_pattern, "corrupted starts per pattern")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    noise->add_flag("--shared-patterns", inv.sweep.shared_patterns, "reuse one pattern draw across rules");

    auto* timing = app.add_subcommand("timing", "wall-clock learning time vs. storage load");
    add_training_flags(timing, inv);
    add_run_flags(timing, inv, b);
    add_output_flags(timing, inv);
    timing->add_option("--rules", b.rules_text, "comma-separated rules (llr, klr, krr)")->default_str("llr,klr,krr");
    timing->add_option("--betas", b.betas, "comma-separated loads")
        ->delimiter(',')
        ->check(CLI::PositiveNumber)
        ->default_str(grid_text(default_timing_grid()));
    std::size_t timing_trials = 3;
    timing->add_option("--trials", timing_trials, "measured trials per load")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    timing->add_flag("--parallel-training", inv.sweep.parallel_training,
                     "train with --threads workers (recorded in the threads column)");
    timing->add_flag("--shared-patterns", inv.sweep.shared_patterns, "reuse one pattern draw across rules");

    auto* recall = app.add_subcommand("recall", "single recall run printing the overlap trajectory");
    add_training_flags(recall, inv);
    add_run_flags(recall, inv, b);
    recall->add_option("--rule", b.rule_text, "learning rule")->capture_default_str();
    recall->add_option("--patterns", inv.patterns_path, "pattern file (default: generate floor(beta N) patterns)");
    recall->add_option("--beta", inv.beta, "load for generated patterns")->check(CLI::PositiveNumber)->capture_default_str();
    recall->add_option("--m0", inv.m0, "initial overlap with the target pattern")
        ->check(CLI::Range(-1.0, 1.0))
        ->capture_default_str();
    recall->add_option("--pattern-index", inv.pattern_index, "target pattern row")->capture_default_str();

    auto* selftest = app.add_subcommand("selftest", "run the built-in invariant checks");
    selftest->add_option("--seed", b.seed, "seed for the generated test instances")
        ->envname("KERNMEM_SEED")
        ->capture_default_str();
    selftest->add_option("--isa", b.isa_text, "kernel variant: scalar or avx2");

    ParseResult result;
    try {
        const std::vector<std::string> args = apply_config(raw_args);
        std::vector<const char*> argv;
        argv.reserve(args.size());
        for (const auto& a : args) argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());

        if (capacity->parsed()) inv.command = Command::capacity;
        if (noise->parsed()) inv.command = Command::noise;
        if (timing->parsed()) inv.command = Command::timing;
        if (recall->parsed()) inv.command = Command::recall;
        if (selftest->parsed()) inv.command = Command::selftest;

        inv.sweep.seed = Seed{b.seed};
        if (!b.isa_text.empty()) {
            inv.isa = simd::parse_isa(b.isa_text);
            if (!inv.isa) throw UsageError("unknown --isa '" + b.isa_text + "' (expected scalar or avx2)");
        }
        if (!(inv.sweep.success_threshold > 0.0)) throw UsageError("--threshold must lie in (0, 1]");
        switch (inv.command) {
            case Command::capacity:
                if (!b.rules_text.empty()) inv.sweep.rules = parse_rule_list(b.rules_text);
                if (!b.betas.empty()) inv.sweep.beta_grid = b.betas;
                break;
            case Command::noise:
                if (!b.rules_text.empty()) inv.sweep.rules = parse_rule_list(b.rules_text);
                if (!b.m0_grid.empty()) inv.sweep.noise_grid = b.m0_grid;
                break;
            case Command::timing:
                inv.sweep.rules = parse_rule_list(b.rules_text.empty() ? "llr,klr,krr" : b.rules_text);
                if (std::find(inv.sweep.rules.begin(), inv.sweep.rules.end(), Rule::hebbian) != inv.sweep.rules.end()) {
                    throw UsageError("timing covers llr, klr and krr only");
                }
                inv.sweep.beta_grid = b.betas.empty() ? default_timing_grid() : b.betas;
                inv.sweep.trials = timing_trials;
                break;
            case Command::recall: {
                const auto rule = parse_rule(b.rule_text);
                if (!rule) throw UsageError("unknown --rule '" + b.rule_text + "'");
                inv.rule = *rule;
                break;
            }
            case Command::selftest:
                break;
        }
        inv.sweep.train.gamma = inv.gamma_scale / static_cast<double>(inv.sweep.n);
        try {
            inv.sweep.validate();
        } catch (const Error& e) {
            throw UsageError(e.what());
        }
        result.invocation = inv;
    } catch (const CLI::ParseError& e) {
        std::ostringstream out, err;
        const int code = app.exit(e, out, err);
        result.exit_code = code == 0 ? kExitOk : kExitUsage;
        result.message = out.str() + err.str();
    } catch (const UsageError& e) {
        result.exit_code = kExitUsage;
        result.message = std::string("usage error: ") + e.what() + "\nRun with --help for more information.\n";
    }
    return result;
}

namespace {

void emit_rows(const CliInvocation& inv, const std::vector<ExperimentRow>& rows, Experiment experiment,
               std::ostream& out) {
    if (inv.out.empty()) {
        out << format_rows(rows, experiment);
    } else {
        write_rows(rows, experiment, inv.out);
    }
    if (!inv.plot.empty()) render_plot(rows, inv.plot);
}

// Summaries go to stdout when the CSV went to a file, else to stderr.
std::ostream& summary_stream(const CliInvocation& inv, std::ostream& out, std::ostream& err) {
    return inv.out.empty() ? err : out;
}

void summarize_capacity(const std::vector<ExperimentRow>& rows, const SweepConfig& cfg, std::ostream& os) {
    for (Rule rule : cfg.rules) {
        double last_perfect = 0.0;
        double sum = 0.0;
        std::size_t count = 0;
        for (const auto& r : rows) {
            if (r.rule != rule) continue;
            const double rate = std::get<CapacityMetrics>(r.metrics).success_rate;
            sum += rate;
            ++count;
            if (rate >= 1.0) last_perfect = std::max(last_perfect, r.beta);
        }
        os << rule_name(rule) << ": mean success " << std::fixed << std::setprecision(3) << sum / count
           << " over " << count << " loads; largest load with 100% recall " << last_perfect << '\n';
    }
}

void summarize_noise(const std::vector<ExperimentRow>& rows, const SweepConfig& cfg, std::ostream& os) {
    for (Rule rule : cfg.rules) {
        std::optional<double> edge;
        for (const auto& r : rows) {
            if (r.rule != rule) continue;
            const auto& m = std::get<NoiseMetrics>(r.metrics);
            if (m.mean_final_overlap >= 0.99 && (!edge || m.m0 < *edge)) edge = m.m0;
        }
        os << rule_name(rule) << ": ";
        if (edge) {
            os << "mean m(T) >= 0.99 from m(0) = " << std::fixed << std::setprecision(2) << *edge << '\n';
        } else {
            os << "mean m(T) stays below 0.99 on the whole grid\n";
        }
    }
}

void summarize_timing(const std::vector<ExperimentRow>& rows, const SweepConfig& cfg, std::ostream& os) {
    for (Rule rule : cfg.rules) {
        os << rule_name(rule) << ":";
        for (const auto& r : rows) {
            const auto& t = std::get<TimingMetrics>(r.metrics);
            if (r.rule == rule && t.trial.kind == TrialLabel::Kind::mean) {
                os << " beta=" << r.beta << " " << std::scientific << std::setprecision(3) << t.learn_seconds << "s"
                   << std::defaultfloat;
            }
        }
        os << '\n';
    }
}

int run_recall(const CliInvocation& inv, std::ostream& out) {
    const SweepConfig& cfg = inv.sweep;
    const PatternSet set = inv.patterns_path.empty()
                               ? generate_patterns(cfg.n, pattern_count(inv.beta, cfg.n), cfg.seed)
                               : load_patterns(inv.patterns_path);
    if (inv.pattern_index >= set.p()) {
        throw OutOfRangeError("--pattern-index " + std::to_string(inv.pattern_index) + " out of range (P = " +
                              std::to_string(set.p()) + ")");
    }
    TrainConfig train = cfg.train;
    train.gamma = inv.gamma_scale / static_cast<double>(set.n());
    const Model model = kernmem::train(inv.rule, set, train, TrainOptions{cfg.threads, {}});
    const State target = set.state(inv.pattern_index);
    const State s0 = corrupt(target, inv.m0, derive_seed(cfg.seed, {inv.pattern_index}));
    const RecallTrace trace = run(model, s0, target, cfg.t_max);

    out << "# rule=" << rule_name(inv.rule) << " n=" << set.n() << " p=" << set.p()
        << " pattern=" << inv.pattern_index << " m0=" << inv.m0 << '\n';
    out << "t,overlap\n";
    for (std::size_t t = 0; t < trace.overlaps.size(); ++t) out << t << ',' << trace.overlaps[t] << '\n';
    out << "# steps_run=" << trace.steps_run << " fixed_point=" << (trace.reached_fixed_point ? "yes" : "no")
        << " success=" << (is_success(trace, cfg.success_threshold) ? "yes" : "no") << '\n';
    return kExitOk;
}

int run_selftest_command(const CliInvocation& inv, std::ostream& out) {
    const auto results = run_selftest(inv.sweep.seed);
    std::size_t failed = 0;
    for (const auto& r : results) {
        out << (r.passed ? "PASS " : "FAIL ") << r.name;
        if (!r.detail.empty()) out << " (" << r.detail << ")";
        out << '\n';
        if (!r.passed) ++failed;
    }
    out << (results.size() - failed) << "/" << results.size() << " checks passed\n";
    return failed == 0 ? kExitOk : kExitFailure;
}

}  // namespace

int dispatch(const CliInvocation& inv, std::ostream& out, std::ostream& err) {
    try {
        if (inv.isa) simd::set_isa(*inv.isa);
        switch (inv.command) {
            case Command::capacity: {
                const auto rows = capacity_sweep(inv.sweep);
                emit_rows(inv, rows, Experiment::capacity, out);
                summarize_capacity(rows, inv.sweep, summary_stream(inv, out, err));
                return kExitOk;
            }
            case Command::noise: {
                const auto rows = noise_sweep(inv.sweep);
                emit_rows(inv, rows, Experiment::noise, out);
                summarize_noise(rows, inv.sweep, summary_stream(inv, out, err));
                return kExitOk;
            }
            case Command::timing: {
                const auto rows = timing_benchmark(inv.sweep);
                emit_rows(inv, rows, Experiment::timing, out);
                summarize_timing(rows, inv.sweep, summary_stream(inv, out, err));
                return kExitOk;
            }
            case Command::recall:
                return run_recall(inv, out);
            case Command::selftest:
                return run_selftest_command(inv, out);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitFailure;
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    const ParseResult parsed = parse_args(args);
    if (!parsed.invocation) {
        (parsed.exit_code == kExitOk ? out : err) << parsed.message;
        return parsed.exit_code;
    }
    return dispatch(*parsed.invocation, out, err);
}

}  // namespace kernmem::cli
