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

#include "kernmem/model_io.hpp"

#include <charconv>
#include <cstdio>
#include <vector>

#include "kernmem/error.hpp"
#include "kernmem/fileio.hpp"

namespace kernmem {
namespace {

void append_double(std::string& out, double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific, 16);
    out.append(buf, res.ptr);
}

void append_matrix(std::string& out, const MatrixD& m) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (c) out += ' ';
            append_double(out, m(r, c));
        }
        out += '\n';
    }
}

// Splits off the next '\n'-terminated line; `line_no` tracks position for errors.
std::string_view next_line(std::string_view& rest, std::size_t& line_no) {
    ++line_no;
    const auto nl = rest.find('\n');
    if (nl == std::string_view::npos) throw ParseError("unexpected end of model file", line_no, 1);
    std::string_view line = rest.substr(0, nl);
    rest.remove_prefix(nl + 1);
    return line;
}

std::vector<std::string_view> fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos <= line.size()) {
        const auto sp = line.find(' ', pos);
        const auto end = sp == std::string_view::npos ? line.size() : sp;
        out.push_back(line.substr(pos, end - pos));
        if (sp == std::string_view::npos) break;
        pos = sp + 1;
    }
    return out;
}

template <typename T>
T parse_number(std::string_view tok, std::size_t line, std::size_t col) {
    T value{};
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (tok.empty() || ec != std::errc{} || ptr != tok.data() + tok.size()) {
        throw ParseError("invalid number '" + std::string(tok) + "'", line, col);
    }
    return value;
}

MatrixD parse_matrix(std::string_view& rest, std::size_t& line_no, std::size_t rows, std::size_t cols) {
    MatrixD m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const auto line = next_line(rest, line_no);
        const auto toks = fields(line);
        if (toks.size() != cols) {
            throw ParseError("expected " + std::to_string(cols) + " values, found " + std::to_string(toks.size()),
                             line_no, 1);
        }
        std::size_t col = 1;
        for (std::size_t c = 0; c < cols; ++c) {
            m(r, c) = parse_number<double>(toks[c], line_no, col);
            col += toks[c].size() + 1;
        }
    }
    return m;
}

}  // namespace

std::string format_model(const Model& model) {
    std::string out;
    std::visit(
        [&](const auto& m) {
            out += rule_name(m.rule());
            out += ' ';
            out += std::to_string(m.n());
            out += ' ';
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, WeightModel>) {
                out += std::to_string(m.trained_patterns());
                out += ' ';
                append_double(out, m.lambda());
                out += " 0\n";
                append_matrix(out, m.weights());
            } else {
                out += std::to_string(m.p());
                out += ' ';
                append_double(out, m.lambda());
                out += ' ';
                append_double(out, m.kernel().gamma);
                out += '\n';
                append_matrix(out, m.alpha());
                out += format_patterns(m.patterns());
            }
        },
        model);
    return out;
}

Model parse_model(std::string_view text) {
    std::size_t line_no = 0;
    std::string_view rest = text;
    const auto header = fields(next_line(rest, line_no));
    if (header.size() != 5) throw ParseError("model header needs 'RULE N P LAMBDA GAMMA'", 1, 1);
    const auto rule = parse_rule(header[0]);
    if (!rule) throw ParseError("unknown rule '" + std::string(header[0]) + "'", 1, 1);
    const auto n = parse_number<std::size_t>(header[1], 1, 1);
    const auto p = parse_number<std::size_t>(header[2], 1, 1);
    const auto lambda = parse_number<double>(header[3], 1, 1);
    const auto gamma = parse_number<double>(header[4], 1, 1);
    if (n == 0 || p == 0) throw ParseError("model dimensions must be positive", 1, 1);

    if (*rule == Rule::hebbian || *rule == Rule::llr) {
        MatrixD w = parse_matrix(rest, line_no, n, n);
        if (!rest.empty()) throw ParseError("trailing content after weight matrix", line_no + 1, 1);
        return WeightModel(*rule, std::move(w), p, lambda);
    }
    MatrixD alpha = parse_matrix(rest, line_no, p, n);
    PatternSet patterns = parse_patterns(rest);
    if (patterns.n() != n || patterns.p() != p) {
        throw ParseError("embedded pattern set does not match the model header", line_no + 1, 1);
    }
    return DualModel(*rule, std::move(patterns), std::move(alpha), KernelConfig{gamma}, lambda);
}

void save_model(const Model& model, const std::filesystem::path& path) {
    write_file_atomic(path, format_model(model));
}

Model load_model(const std::filesystem::path& path) { return parse_model(read_file(path)); }

}  // namespace kernmem
