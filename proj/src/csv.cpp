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

#include <charconv>
#include <string>

#include "kernmem/error.hpp"
#include "kernmem/experiments.hpp"
#include "kernmem/fileio.hpp"

namespace kernmem {
namespace {

void put(std::string& out, double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
}

void put(std::string& out, std::uint64_t v) { out += std::to_string(v); }

void put(std::string& out, std::string_view v) { out += v; }

template <typename... Fields>
void put_line(std::string& out, const Fields&... fields) {
    bool first = true;
    ((out += first ? "" : ",", first = false, put(out, fields)), ...);
    out += '\n';
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    for (;;) {
        const auto comma = line.find(',', pos);
        out.push_back(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

class FieldReader {
public:
    FieldReader(std::vector<std::string_view> fields, std::size_t line) : fields_(std::move(fields)), line_(line) {}

    std::string_view text() { return next(); }

    double real() {
        const auto tok = next();
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (tok.empty() || ec != std::errc{} || ptr != tok.data() + tok.size()) fail("invalid number", tok);
        return v;
    }

    std::uint64_t integer() {
        const auto tok = next();
        std::uint64_t v = 0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (tok.empty() || ec != std::errc{} || ptr != tok.data() + tok.size()) fail("invalid integer", tok);
        return v;
    }

    Rule rule() {
        const auto tok = next();
        const auto r = parse_rule(tok);
        if (!r) fail("unknown rule", tok);
        return *r;
    }

    TrialLabel trial() {
        const auto tok = next();
        if (tok == "mean") return {TrialLabel::Kind::mean, 0};
        if (tok == "std") return {TrialLabel::Kind::std, 0};
        std::size_t v = 0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (tok.empty() || ec != std::errc{} || ptr != tok.data() + tok.size()) fail("invalid trial", tok);
        return {TrialLabel::Kind::run, v};
    }

private:
    std::string_view next() {
        if (index_ >= fields_.size()) throw ParseError("too few fields", line_, column());
        return fields_[index_++];
    }

    std::size_t column() const {
        std::size_t col = 1;
        for (std::size_t i = 0; i < index_ && i < fields_.size(); ++i) col += fields_[i].size() + 1;
        return col;
    }

    [[noreturn]] void fail(const char* what, std::string_view tok) const {
        std::size_t col = 1;
        for (std::size_t i = 0; i + 1 < index_; ++i) col += fields_[i].size() + 1;
        throw ParseError(std::string(what) + " '" + std::string(tok) + "'", line_, col);
    }

    std::vector<std::string_view> fields_;
    std::size_t line_;
    std::size_t index_ = 0;
};

}  // namespace

std::string_view csv_header(Experiment experiment) {
    switch (experiment) {
        case Experiment::capacity:
            return "experiment,rule,n,beta,p,success_rate,seed";
        case Experiment::noise:
            return "experiment,rule,n,beta,m0,mean_final_overlap,std_final_overlap,trials,seed";
        case Experiment::timing:
            return "experiment,rule,n,beta,p,trial,learn_seconds,threads,seed";
    }
    return "";
}

std::string format_rows(std::span<const ExperimentRow> rows, Experiment experiment) {
    std::vector<ExperimentRow> sorted(rows.begin(), rows.end());
    for (const auto& r : sorted) {
        if (r.experiment() != experiment) {
            throw OutOfRangeError("cannot mix " + std::string(experiment_name(r.experiment())) + " rows into a " +
                                  std::string(experiment_name(experiment)) + " file");
        }
    }
    sort_rows(sorted);

    std::string out(csv_header(experiment));
    out += '\n';
    const std::string_view exp = experiment_name(experiment);
    for (const auto& r : sorted) {
        const std::string_view rule = rule_name(r.rule);
        const std::uint64_t n = r.n;
        const std::uint64_t p = r.p;
        if (const auto* c = std::get_if<CapacityMetrics>(&r.metrics)) {
            put_line(out, exp, rule, n, r.beta, p, c->success_rate, r.seed);
        } else if (const auto* nm = std::get_if<NoiseMetrics>(&r.metrics)) {
            put_line(out, exp, rule, n, r.beta, nm->m0, nm->mean_final_overlap, nm->std_final_overlap,
                     static_cast<std::uint64_t>(nm->trials), r.seed);
        } else {
            const auto& t = std::get<TimingMetrics>(r.metrics);
            const std::string trial = t.trial.to_string();
            put_line(out, exp, rule, n, r.beta, p, std::string_view(trial), t.learn_seconds,
                     static_cast<std::uint64_t>(t.threads), r.seed);
        }
    }
    return out;
}

std::vector<ExperimentRow> parse_rows(std::string_view csv, Experiment* experiment_out) {
    const auto first_nl = csv.find('\n');
    if (first_nl == std::string_view::npos) throw ParseError("missing CSV header", 1, 1);
    const std::string_view header = csv.substr(0, first_nl);
    std::optional<Experiment> experiment;
    for (Experiment e : {Experiment::capacity, Experiment::noise, Experiment::timing}) {
        if (header == csv_header(e)) experiment = e;
    }
    if (!experiment) throw ParseError("unrecognized CSV header '" + std::string(header) + "'", 1, 1);
    if (experiment_out) *experiment_out = *experiment;

    std::vector<ExperimentRow> rows;
    std::string_view rest = csv.substr(first_nl + 1);
    std::size_t line_no = 1;
    while (!rest.empty()) {
        ++line_no;
        const auto nl = rest.find('\n');
        if (nl == std::string_view::npos) throw ParseError("missing trailing newline", line_no, 1);
        const std::string_view line = rest.substr(0, nl);
        rest.remove_prefix(nl + 1);

        auto fields = split(line);
        const std::size_t expected = split(csv_header(*experiment)).size();
        if (fields.size() != expected) {
            throw ParseError("expected " + std::to_string(expected) + " fields, found " +
                                 std::to_string(fields.size()),
                             line_no, 1);
        }
        FieldReader in(std::move(fields), line_no);
        if (in.text() != experiment_name(*experiment)) throw ParseError("experiment column mismatch", line_no, 1);
        ExperimentRow row;
        row.rule = in.rule();
        row.n = in.integer();
        row.beta = in.real();
        switch (*experiment) {
            case Experiment::capacity: {
                row.p = in.integer();
                const double rate = in.real();
                row.metrics = CapacityMetrics{rate};
                break;
            }
            case Experiment::noise: {
                row.p = pattern_count(row.beta, row.n);
                NoiseMetrics m;
                m.m0 = in.real();
                m.mean_final_overlap = in.real();
                m.std_final_overlap = in.real();
                m.trials = in.integer();
                row.metrics = m;
                break;
            }
            case Experiment::timing: {
                row.p = in.integer();
                TimingMetrics m;
                m.trial = in.trial();
                m.learn_seconds = in.real();
                m.threads = in.integer();
                row.metrics = m;
                break;
            }
        }
        row.seed = in.integer();
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_rows(std::span<const ExperimentRow> rows, Experiment experiment, const std::filesystem::path& path) {
    write_file_atomic(path, format_rows(rows, experiment));
}

std::vector<ExperimentRow> read_rows(const std::filesystem::path& path, Experiment* experiment) {
    return parse_rows(read_file(path), experiment);
}

}  // namespace kernmem
