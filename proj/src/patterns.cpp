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

#include "kernmem/patterns.hpp"

#include <charconv>
#include <cmath>
#include <numeric>

#include "kernmem/error.hpp"
#include "kernmem/fileio.hpp"
#include "kernmem/simd/kernels.hpp"

namespace kernmem {
namespace {

bool is_bipolar(std::int8_t v) { return v == 1 || v == -1; }

void require_bipolar(std::span<const std::int8_t> values, std::string_view what) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!is_bipolar(values[i])) {
            throw EntryDomainError(std::string(what) + " entry " + std::to_string(i) + " is " +
                                       std::to_string(values[i]) + ", expected -1 or 1",
                                   0, 0);
        }
    }
}

// Line/column tracking reader for the pattern text format.
class Cursor {
public:
    explicit Cursor(std::string_view text) : text_(text) {}

    bool at_end() const { return pos_ >= text_.size(); }
    char peek() const { return text_[pos_]; }
    std::size_t line() const { return line_; }
    std::size_t column() const { return pos_ - line_start_ + 1; }

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, line(), column()); }

    std::string_view token() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && text_[pos_] != ' ' && text_[pos_] != '\n') ++pos_;
        return text_.substr(start, pos_ - start);
    }

    void expect(char c, const char* what) {
        if (at_end() || peek() != c) fail(std::string("expected ") + what);
        ++pos_;
        if (c == '\n') {
            ++line_;
            line_start_ = pos_;
        }
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t line_start_ = 0;
};

std::size_t parse_count(Cursor& cur, const char* what) {
    const std::size_t col = cur.column();
    const std::string_view tok = cur.token();
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (tok.empty() || ec != std::errc{} || ptr != tok.data() + tok.size()) {
        throw ParseError(std::string("invalid ") + what + " '" + std::string(tok) + "'", cur.line(), col);
    }
    if (value == 0) throw ParseError(std::string(what) + " must be positive", cur.line(), col);
    return value;
}

}  // namespace

State::State(std::vector<std::int8_t> values) : values_(std::move(values)) {
    require_bipolar(values_, "state");
}

State State::negated() const {
    std::vector<std::int8_t> out(values_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<std::int8_t>(-values_[i]);
    return State(std::move(out));
}

PatternSet::PatternSet(std::size_t n, std::size_t p, std::vector<std::int8_t> row_major) {
    if (n == 0 || p == 0) {
        throw InvalidDimensionError("pattern set needs n >= 1 and p >= 1 (got n=" + std::to_string(n) +
                                    ", p=" + std::to_string(p) + ")");
    }
    if (row_major.size() != n * p) {
        throw DimensionMismatchError("pattern data has " + std::to_string(row_major.size()) +
                                     " entries, expected " + std::to_string(n * p));
    }
    require_bipolar(row_major, "pattern");
    data_ = Matrix<std::int8_t>(p, n);
    std::copy(row_major.begin(), row_major.end(), data_.data());
}

State PatternSet::state(std::size_t mu) const {
    const auto row = pattern(mu);
    return State(std::vector<std::int8_t>(row.begin(), row.end()));
}

MatrixD PatternSet::to_double() const {
    MatrixD out(p(), n());
    const auto src = data_.flat();
    auto dst = out.flat();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i];
    return out;
}

PatternSet generate_patterns(std::size_t n, std::size_t p, Seed seed) {
    if (n == 0 || p == 0) {
        throw InvalidDimensionError("generate_patterns needs n >= 1 and p >= 1 (got n=" + std::to_string(n) +
                                    ", p=" + std::to_string(p) + ")");
    }
    // Entries consume the stream 64 at a time, least significant bit first.
    Rng rng(seed);
    std::vector<std::int8_t> data(n * p);
    std::uint64_t word = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (i % 64 == 0) word = rng.next();
        data[i] = (word & 1u) ? std::int8_t{1} : std::int8_t{-1};
        word >>= 1;
    }
    return PatternSet(n, p, std::move(data));
}

std::size_t flip_count(std::size_t n, double target_overlap) {
    if (!(target_overlap >= -1.0 && target_overlap <= 1.0)) {
        throw OutOfRangeError("target overlap " + std::to_string(target_overlap) + " outside [-1, 1]");
    }
    const double exact = static_cast<double>(n) * (1.0 - target_overlap) / 2.0;
    // Snap grid values like 0.35 that land a hair below a .5 tie.
    const auto f = static_cast<std::size_t>(std::floor(exact + 0.5 + 1e-9));
    return std::min(f, n);
}

State corrupt(const State& pattern, double target_overlap, Seed seed) {
    const std::size_t n = pattern.size();
    const std::size_t flips = flip_count(n, target_overlap);
    std::vector<std::int8_t> out(pattern.values().begin(), pattern.values().end());
    if (flips == n) {
        for (auto& v : out) v = static_cast<std::int8_t>(-v);
        return State(std::move(out));
    }
    // Partial Fisher-Yates: the first `flips` slots are a uniform sample without replacement.
    std::vector<std::uint32_t> index(n);
    std::iota(index.begin(), index.end(), 0u);
    Rng rng(seed);
    for (std::size_t k = 0; k < flips; ++k) {
        const std::size_t j = k + static_cast<std::size_t>(rng.below(n - k));
        std::swap(index[k], index[j]);
        out[index[k]] = static_cast<std::int8_t>(-out[index[k]]);
    }
    return State(std::move(out));
}

double overlap(std::span<const std::int8_t> a, std::span<const std::int8_t> b) {
    if (a.size() != b.size()) {
        throw DimensionMismatchError("overlap of lengths " + std::to_string(a.size()) + " and " +
                                     std::to_string(b.size()));
    }
    if (a.empty()) throw InvalidDimensionError("overlap of empty states");
    const std::int64_t sum = simd::kernels().dot_i8(a.data(), b.data(), a.size());
    return static_cast<double>(sum) / static_cast<double>(a.size());
}

double overlap(const State& a, const State& b) { return overlap(a.values(), b.values()); }

std::string format_patterns(const PatternSet& set) {
    std::string out;
    out.reserve(16 + set.p() * set.n() * 3);
    out += std::to_string(set.n());
    out += ' ';
    out += std::to_string(set.p());
    out += '\n';
    for (std::size_t mu = 0; mu < set.p(); ++mu) {
        const auto row = set.pattern(mu);
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ' ';
            out += row[i] > 0 ? "1" : "-1";
        }
        out += '\n';
    }
    return out;
}

PatternSet parse_patterns(std::string_view text) {
    Cursor cur(text);
    const std::size_t n = parse_count(cur, "neuron count N");
    cur.expect(' ', "a single space between N and P");
    const std::size_t p = parse_count(cur, "pattern count P");
    cur.expect('\n', "end of header line");

    std::vector<std::int8_t> data;
    data.reserve(n * p);
    for (std::size_t mu = 0; mu < p; ++mu) {
        if (cur.at_end()) {
            cur.fail("expected " + std::to_string(p) + " pattern rows, found " + std::to_string(mu));
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (i) cur.expect(' ', "a single space between entries");
            const std::size_t col = cur.column();
            const std::string_view tok = cur.token();
            if (tok.empty()) {
                cur.fail("expected " + std::to_string(n) + " entries in row, found " + std::to_string(i));
            }
            int value = 0;
            auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
            if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
                throw ParseError("invalid entry '" + std::string(tok) + "'", cur.line(), col);
            }
            if (value != 1 && value != -1) {
                throw EntryDomainError("entry " + std::string(tok) + " is not -1 or 1", cur.line(), col);
            }
            data.push_back(static_cast<std::int8_t>(value));
        }
        if (!cur.at_end() && cur.peek() == ' ') cur.fail("more than " + std::to_string(n) + " entries in row");
        cur.expect('\n', "newline after pattern row");
    }
    if (!cur.at_end()) cur.fail("trailing content after " + std::to_string(p) + " pattern rows");
    return PatternSet(n, p, std::move(data));
}

void save_patterns(const PatternSet& set, const std::filesystem::path& path) {
    write_file_atomic(path, format_patterns(set));
}

PatternSet load_patterns(const std::filesystem::path& path) { return parse_patterns(read_file(path)); }

}  // namespace kernmem
