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

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <string>

#include "kernmem/error.hpp"
#include "kernmem/experiments.hpp"
#include "kernmem/fileio.hpp"

namespace kernmem {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 72.0;
constexpr double kRight = 120.0;
constexpr double kTop = 36.0;
constexpr double kBottom = 56.0;

struct Series {
    std::vector<std::pair<double, double>> points;
};

std::string num(double v) {
    char buf[32];
    // Round to 6 significant digits; coordinates need no more.
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 6);
    return std::string(buf, res.ptr);
}

std::string_view color_for(Rule r) {
    switch (r) {
        case Rule::hebbian:
            return "#1f77b4";
        case Rule::llr:
            return "#ff7f0e";
        case Rule::klr:
            return "#2ca02c";
        case Rule::krr:
            return "#d62728";
    }
    return "#000000";
}

double nice_step(double span, int target_ticks) {
    const double raw = span / target_ticks;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double f = raw / mag;
    const double nice = f < 1.5 ? 1.0 : f < 3.0 ? 2.0 : f < 7.0 ? 5.0 : 10.0;
    return nice * mag;
}

class Axis {
public:
    Axis(double lo, double hi, bool log_scale, double pix_lo, double pix_hi)
        : lo_(lo), hi_(hi), log_(log_scale), pix_lo_(pix_lo), pix_hi_(pix_hi) {}

    double map(double v) const {
        const double a = log_ ? std::log10(lo_) : lo_;
        const double b = log_ ? std::log10(hi_) : hi_;
        const double x = log_ ? std::log10(v) : v;
        return pix_lo_ + (x - a) / (b - a) * (pix_hi_ - pix_lo_);
    }

    std::vector<double> ticks() const {
        std::vector<double> out;
        if (log_) {
            for (double e = std::round(std::log10(lo_)); e <= std::round(std::log10(hi_)) + 1e-9; e += 1.0) {
                out.push_back(std::pow(10.0, e));
            }
            return out;
        }
        const double step = nice_step(hi_ - lo_, 5);
        for (double t = std::ceil(lo_ / step - 1e-9) * step; t <= hi_ + step * 1e-9; t += step) {
            out.push_back(std::abs(t) < step * 1e-9 ? 0.0 : t);
        }
        return out;
    }

private:
    double lo_, hi_;
    bool log_;
    double pix_lo_, pix_hi_;
};

}  // namespace

std::string render_svg(std::span<const ExperimentRow> rows) {
    if (rows.empty()) throw OutOfRangeError("cannot plot an empty row set");
    const Experiment experiment = rows.front().experiment();
    for (const auto& r : rows) {
        if (r.experiment() != experiment) throw OutOfRangeError("cannot plot rows of mixed experiments");
    }

    std::map<Rule, Series> series;
    const bool has_mean = std::any_of(rows.begin(), rows.end(), [](const ExperimentRow& r) {
        const auto* t = std::get_if<TimingMetrics>(&r.metrics);
        return t && t->trial.kind == TrialLabel::Kind::mean;
    });
    // Timing without summary rows: average the runs per (rule, beta).
    std::map<std::pair<Rule, double>, std::pair<double, int>> run_sums;
    for (const auto& r : rows) {
        if (const auto* c = std::get_if<CapacityMetrics>(&r.metrics)) {
            series[r.rule].points.emplace_back(r.beta, c->success_rate);
        } else if (const auto* nm = std::get_if<NoiseMetrics>(&r.metrics)) {
            series[r.rule].points.emplace_back(nm->m0, nm->mean_final_overlap);
        } else {
            const auto& t = std::get<TimingMetrics>(r.metrics);
            if (has_mean && t.trial.kind == TrialLabel::Kind::mean) {
                series[r.rule].points.emplace_back(r.beta, t.learn_seconds);
            } else if (!has_mean && t.trial.kind == TrialLabel::Kind::run) {
                auto& acc = run_sums[{r.rule, r.beta}];
                acc.first += t.learn_seconds;
                acc.second += 1;
            }
        }
    }
    for (const auto& [key, acc] : run_sums) series[key.first].points.emplace_back(key.second, acc.first / acc.second);
    for (auto& [rule, s] : series) std::sort(s.points.begin(), s.points.end());

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& [rule, s] : series) {
        for (auto [x, y] : s.points) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    }
    if (xmin == xmax) {
        xmin -= 0.05;
        xmax += 0.05;
    }

    const bool log_y = experiment == Experiment::timing;
    std::string title, xlabel, ylabel;
    double ylo = 0.0, yhi = 1.0;
    switch (experiment) {
        case Experiment::capacity:
            title = "Recall success rate vs. storage load";
            xlabel = "storage load beta = P/N";
            ylabel = "success rate";
            break;
        case Experiment::noise:
            title = "Final overlap vs. initial overlap";
            xlabel = "initial overlap m(0)";
            ylabel = "mean final overlap m(T)";
            ylo = std::min(0.0, std::floor(ymin * 10.0) / 10.0);
            break;
        case Experiment::timing:
            title = "Learning time vs. storage load";
            xlabel = "storage load beta = P/N";
            ylabel = "learning time (s, log scale)";
            ylo = std::pow(10.0, std::floor(std::log10(std::max(ymin, 1e-12))));
            yhi = std::pow(10.0, std::ceil(std::log10(std::max(ymax, 1e-12))));
            if (yhi <= ylo) yhi = ylo * 10.0;
            break;
    }

    const Axis xaxis(xmin, xmax, false, kLeft, kWidth - kRight);
    const Axis yaxis(ylo, yhi, log_y, kHeight - kBottom, kTop);

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
           "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + num(kWidth / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" + title + "</text>\n";

    const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
    svg += "<g class=\"grid\" stroke=\"#dddddd\">\n";
    for (double t : yaxis.ticks()) {
        const double y = yaxis.map(t);
        svg += "<line x1=\"" + num(x0) + "\" y1=\"" + num(y) + "\" x2=\"" + num(x1) + "\" y2=\"" + num(y) + "\"/>\n";
    }
    svg += "</g>\n";
    svg += "<rect x=\"" + num(x0) + "\" y=\"" + num(y1) + "\" width=\"" + num(x1 - x0) + "\" height=\"" +
           num(y0 - y1) + "\" fill=\"none\" stroke=\"black\"/>\n";

    svg += "<g class=\"x-axis\" text-anchor=\"middle\">\n";
    for (double t : xaxis.ticks()) {
        const double x = xaxis.map(t);
        svg += "<line x1=\"" + num(x) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x) + "\" y2=\"" + num(y0 + 5) +
               "\" stroke=\"black\"/><text x=\"" + num(x) + "\" y=\"" + num(y0 + 18) + "\">" + num(t) + "</text>\n";
    }
    svg += "<text x=\"" + num((x0 + x1) / 2) + "\" y=\"" + num(kHeight - 14) + "\">" + xlabel + "</text>\n</g>\n";

    svg += "<g class=\"y-axis" + std::string(log_y ? " log" : "") + "\" text-anchor=\"end\">\n";
    for (double t : yaxis.ticks()) {
        const double y = yaxis.map(t);
        svg += "<line x1=\"" + num(x0 - 5) + "\" y1=\"" + num(y) + "\" x2=\"" + num(x0) + "\" y2=\"" + num(y) +
               "\" stroke=\"black\"/><text x=\"" + num(x0 - 8) + "\" y=\"" + num(y + 4) + "\">" + num(t) +
               "</text>\n";
    }
    svg += "<text transform=\"translate(18 " + num((y0 + y1) / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
           ylabel + "</text>\n</g>\n";

    double legend_y = kTop + 10;
    for (const auto& [rule, s] : series) {
        const std::string color(color_for(rule));
        const std::string dash = rule == Rule::klr ? " stroke-dasharray=\"6 3\"" : "";
        std::string pts;
        for (auto [x, y] : s.points) {
            if (log_y && !(y > 0.0)) continue;
            pts += num(xaxis.map(x)) + "," + num(yaxis.map(y)) + " ";
        }
        svg += "<polyline class=\"series\" data-rule=\"" + std::string(rule_name(rule)) + "\" fill=\"none\" stroke=\"" +
               color + "\" stroke-width=\"2\"" + dash + " points=\"" + pts + "\"/>\n";
        svg += "<line x1=\"" + num(x1 + 12) + "\" y1=\"" + num(legend_y) + "\" x2=\"" + num(x1 + 36) + "\" y2=\"" +
               num(legend_y) + "\" stroke=\"" + color + "\" stroke-width=\"2\"" + dash + "/><text x=\"" +
               num(x1 + 42) + "\" y=\"" + num(legend_y + 4) + "\">" + std::string(rule_name(rule)) + "</text>\n";
        legend_y += 20;
    }
    svg += "</svg>\n";
    return svg;
}

void render_plot(std::span<const ExperimentRow> rows, const std::filesystem::path& path) {
    write_file_atomic(path, render_svg(rows));
}

}  // namespace kernmem
