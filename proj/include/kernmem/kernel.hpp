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
#include <span>
#include <vector>

#include "kernmem/matrix.hpp"
#include "kernmem/patterns.hpp"

namespace kernmem {

/// RBF kernel exp(-gamma ||x - y||^2).
struct KernelConfig {
    double gamma = 0.0;

    /// gamma = scale / n, the usual 1/N width.
    static KernelConfig for_neurons(std::size_t n, double scale = 1.0);

    /// Throws OutOfRangeError unless gamma is finite and > 0.
    void validate() const;

    friend bool operator==(const KernelConfig&, const KernelConfig&) = default;
};

/// Symmetric P x P Gram matrix with unit diagonal and entries in (0, 1].
class KernelMatrix {
public:
    KernelMatrix() = default;

    /// Validates the invariants; throws OutOfRangeError when violated.
    static KernelMatrix from_entries(MatrixD entries);

    std::size_t size() const noexcept { return entries_.rows(); }
    double operator()(std::size_t i, std::size_t j) const noexcept { return entries_(i, j); }
    const MatrixD& matrix() const noexcept { return entries_; }

private:
    explicit KernelMatrix(MatrixD entries) : entries_(std::move(entries)) {}
    friend KernelMatrix gram_matrix(const PatternSet&, const KernelConfig&, std::size_t);

    MatrixD entries_;
};

/// For bipolar vectors at Hamming distance d: ||x - y||^2 = 4d.
double rbf_at_distance(std::size_t hamming, double gamma);

/// Kernel between two bipolar vectors. Throws DimensionMismatchError.
double rbf(std::span<const std::int8_t> x, std::span<const std::int8_t> y, const KernelConfig& cfg);

/// K[nu, mu] = rbf(xi^nu, xi^mu), built from row inner products via
/// ||x - y||^2 = 2N - 2 x.y. Upper triangle is computed and mirrored.
KernelMatrix gram_matrix(const PatternSet& set, const KernelConfig& cfg, std::size_t threads = 1);

/// [rbf(state, xi^1), ..., rbf(state, xi^P)].
std::vector<double> kernel_row(std::span<const std::int8_t> state, const PatternSet& set, const KernelConfig& cfg);
void kernel_row_into(std::span<const std::int8_t> state, const PatternSet& set, const KernelConfig& cfg,
                     std::span<double> out);

struct SolveReport {
    double lambda_used = 0.0;
    int escalations = 0;
};

/// Solves (A + lambda I) X = B for symmetric positive definite A via Cholesky,
/// all right-hand sides at once. If the factorization breaks down, lambda is
/// raised by 1e-10 * trace(A)/P, then x10, up to three escalations, after which
/// FactorizationError is thrown.
MatrixD solve_shifted_spd(const MatrixD& a, double lambda, const MatrixD& targets, SolveReport* report = nullptr);

/// (K + lambda I)^{-1} targets for a Gram matrix.
MatrixD solve_regularized(const KernelMatrix& k, double lambda, const MatrixD& targets,
                          SolveReport* report = nullptr);

namespace detail {

/// In-place lower Cholesky factor of a row-major SPD matrix (upper part zeroed).
/// Returns false if a pivot is not strictly positive and finite.
bool cholesky_lower(MatrixD& a);

/// Solves L L^T X = B in place of b.
void cholesky_solve(const MatrixD& lower, MatrixD& b);

}  // namespace detail

}  // namespace kernmem
