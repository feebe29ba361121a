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

#include "kernmem/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kernmem/error.hpp"
#include "kernmem/parallel.hpp"
#include "kernmem/simd/kernels.hpp"

namespace kernmem {
namespace {

constexpr std::size_t kSolveBlock = 64;
constexpr int kMaxEscalations = 3;

inline double rbf_from_dot(std::int64_t dot, std::size_t n, double gamma) {
    const double sq = 2.0 * static_cast<double>(static_cast<std::int64_t>(n) - dot);
    return std::exp(-gamma * sq);
}

MatrixD transpose(const MatrixD& m) {
    MatrixD t(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
    return t;
}

// Blocked forward substitution T Y = B for lower-triangular T, in place.
// Off-diagonal blocks go through gemm, diagonal blocks through axpy.
void lower_solve_in_place(const MatrixD& t, MatrixD& b) {
    const auto& k = simd::kernels();
    const std::size_t p = t.rows();
    const std::size_t n = b.cols();
    for (std::size_t i0 = 0; i0 < p; i0 += kSolveBlock) {
        const std::size_t bs = std::min(kSolveBlock, p - i0);
        if (i0 > 0) {
            // B[I] -= T[I, 0:i0] Y[0:i0]; done as gemm into a scratch then subtracted.
            MatrixD acc(bs, n, 0.0);
            k.gemm(bs, n, i0, &t(i0, 0), t.cols(), b.data(), n, acc.data(), n);
            for (std::size_t r = 0; r < bs; ++r) k.axpy(-1.0, acc.row(r).data(), b.row(i0 + r).data(), n);
        }
        for (std::size_t i = i0; i < i0 + bs; ++i) {
            double* yi = b.row(i).data();
            for (std::size_t j = i0; j < i; ++j) k.axpy(-t(i, j), b.row(j).data(), yi, n);
            const double inv = 1.0 / t(i, i);
            for (std::size_t c = 0; c < n; ++c) yi[c] *= inv;
        }
    }
}

// Backward substitution U X = B for upper-triangular U, in place.
void upper_solve_in_place(const MatrixD& u, MatrixD& b) {
    const auto& k = simd::kernels();
    const std::size_t p = u.rows();
    const std::size_t n = b.cols();
    std::size_t i1 = p;
    while (i1 > 0) {
        const std::size_t i0 = i1 > kSolveBlock ? i1 - kSolveBlock : 0;
        const std::size_t bs = i1 - i0;
        if (i1 < p) {
            MatrixD acc(bs, n, 0.0);
            k.gemm(bs, n, p - i1, &u(i0, i1), u.cols(), b.row(i1).data(), n, acc.data(), n);
            for (std::size_t r = 0; r < bs; ++r) k.axpy(-1.0, acc.row(r).data(), b.row(i0 + r).data(), n);
        }
        for (std::size_t i = i1; i-- > i0;) {
            double* xi = b.row(i).data();
            for (std::size_t j = i + 1; j < i1; ++j) k.axpy(-u(i, j), b.row(j).data(), xi, n);
            const double inv = 1.0 / u(i, i);
            for (std::size_t c = 0; c < n; ++c) xi[c] *= inv;
        }
        i1 = i0;
    }
}

}  // namespace

KernelConfig KernelConfig::for_neurons(std::size_t n, double scale) {
    if (n == 0) throw InvalidDimensionError("kernel width needs n >= 1");
    KernelConfig cfg{scale / static_cast<double>(n)};
    cfg.validate();
    return cfg;
}

void KernelConfig::validate() const {
    if (!(std::isfinite(gamma) && gamma > 0.0)) {
        throw OutOfRangeError("kernel gamma must be finite and > 0 (got " + std::to_string(gamma) + ")");
    }
}

KernelMatrix KernelMatrix::from_entries(MatrixD entries) {
    if (entries.rows() != entries.cols() || entries.rows() == 0) {
        throw OutOfRangeError("kernel matrix must be square and non-empty");
    }
    const std::size_t p = entries.rows();
    for (std::size_t i = 0; i < p; ++i) {
        if (entries(i, i) != 1.0) throw OutOfRangeError("kernel matrix diagonal must be 1");
        for (std::size_t j = 0; j < p; ++j) {
            const double v = entries(i, j);
            if (!(v > 0.0 && v <= 1.0)) throw OutOfRangeError("kernel matrix entries must lie in (0, 1]");
            if (v != entries(j, i)) throw OutOfRangeError("kernel matrix must be symmetric");
        }
    }
    return KernelMatrix(std::move(entries));
}

double rbf_at_distance(std::size_t hamming, double gamma) {
    return std::exp(-4.0 * gamma * static_cast<double>(hamming));
}

double rbf(std::span<const std::int8_t> x, std::span<const std::int8_t> y, const KernelConfig& cfg) {
    if (x.size() != y.size()) {
        throw DimensionMismatchError("rbf of lengths " + std::to_string(x.size()) + " and " +
                                     std::to_string(y.size()));
    }
    return rbf_from_dot(simd::kernels().dot_i8(x.data(), y.data(), x.size()), x.size(), cfg.gamma);
}

KernelMatrix gram_matrix(const PatternSet& set, const KernelConfig& cfg, std::size_t threads) {
    cfg.validate();
    const std::size_t p = set.p();
    const std::size_t n = set.n();
    const auto& k = simd::kernels();
    MatrixD g(p, p);
    parallel_for(p, threads, [&](std::size_t nu) {
        const auto xi = set.pattern(nu);
        g(nu, nu) = 1.0;
        for (std::size_t mu = nu + 1; mu < p; ++mu) {
            g(nu, mu) = rbf_from_dot(k.dot_i8(xi.data(), set.pattern(mu).data(), n), n, cfg.gamma);
        }
    });
    for (std::size_t nu = 0; nu < p; ++nu)
        for (std::size_t mu = nu + 1; mu < p; ++mu) g(mu, nu) = g(nu, mu);
    return KernelMatrix(std::move(g));
}

void kernel_row_into(std::span<const std::int8_t> state, const PatternSet& set, const KernelConfig& cfg,
                     std::span<double> out) {
    if (state.size() != set.n()) {
        throw DimensionMismatchError("state length " + std::to_string(state.size()) + " != N " +
                                     std::to_string(set.n()));
    }
    if (out.size() != set.p()) throw DimensionMismatchError("kernel row output must have length P");
    const auto& k = simd::kernels();
    for (std::size_t mu = 0; mu < set.p(); ++mu) {
        out[mu] = rbf_from_dot(k.dot_i8(state.data(), set.pattern(mu).data(), set.n()), set.n(), cfg.gamma);
    }
}

std::vector<double> kernel_row(std::span<const std::int8_t> state, const PatternSet& set,
                               const KernelConfig& cfg) {
    std::vector<double> out(set.p());
    kernel_row_into(state, set, cfg, out);
    return out;
}

namespace detail {

bool cholesky_lower(MatrixD& a) {
    const auto& k = simd::kernels();
    const std::size_t p = a.rows();
    for (std::size_t i = 0; i < p; ++i) {
        double* li = a.row(i).data();
        for (std::size_t j = 0; j < i; ++j) {
            const double* lj = a.row(j).data();
            li[j] = (li[j] - k.dot(li, lj, j)) / lj[j];
        }
        const double pivot = li[i] - k.dot(li, li, i);
        if (!(pivot > 0.0) || !std::isfinite(pivot)) return false;
        li[i] = std::sqrt(pivot);
        for (std::size_t j = i + 1; j < p; ++j) li[j] = 0.0;
    }
    return true;
}

void cholesky_solve(const MatrixD& lower, MatrixD& b) {
    lower_solve_in_place(lower, b);
    upper_solve_in_place(transpose(lower), b);
}

}  // namespace detail

MatrixD solve_shifted_spd(const MatrixD& a, double lambda, const MatrixD& targets, SolveReport* report) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw OutOfRangeError("regularization lambda must be finite and > 0 (got " + std::to_string(lambda) + ")");
    }
    if (a.rows() != a.cols() || a.rows() == 0) throw InvalidDimensionError("system matrix must be square, non-empty");
    if (targets.rows() != a.rows()) {
        throw DimensionMismatchError("targets have " + std::to_string(targets.rows()) + " rows, expected " +
                                     std::to_string(a.rows()));
    }
    const std::size_t p = a.rows();
    double trace = 0.0;
    for (std::size_t i = 0; i < p; ++i) trace += a(i, i);
    const double jitter = 1e-10 * trace / static_cast<double>(p);

    double shift = lambda;
    for (int escalation = 0;; ++escalation) {
        MatrixD factor = a;
        for (std::size_t i = 0; i < p; ++i) factor(i, i) += shift;
        if (detail::cholesky_lower(factor)) {
            MatrixD x = targets;
            detail::cholesky_solve(factor, x);
            if (report) *report = SolveReport{shift, escalation};
            return x;
        }
        if (escalation == kMaxEscalations) break;
        shift = lambda + jitter * std::pow(10.0, escalation);
    }
    throw FactorizationError("Cholesky factorization failed after " + std::to_string(kMaxEscalations) +
                             " jitter escalations (last shift " + std::to_string(shift) + ")");
}

MatrixD solve_regularized(const KernelMatrix& k, double lambda, const MatrixD& targets, SolveReport* report) {
    return solve_shifted_spd(k.matrix(), lambda, targets, report);
}

}  // namespace kernmem
