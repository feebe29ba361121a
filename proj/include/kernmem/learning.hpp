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
#include <functional>
#include <optional>
#include <string_view>
#include <variant>

#include "kernmem/kernel.hpp"
#include "kernmem/matrix.hpp"
#include "kernmem/patterns.hpp"

namespace kernmem {

enum class Rule { hebbian, llr, klr, krr };

std::string_view rule_name(Rule rule) noexcept;
std::optional<Rule> parse_rule(std::string_view name) noexcept;

/// Hyperparameters shared by the supervised learners.
struct TrainConfig {
    double lambda = 0.01;
    double eta = 0.1;
    std::size_t llr_iters = 100;
    std::size_t klr_iters = 200;
    /// RBF width; unset means 1/N.
    std::optional<double> gamma;

    KernelConfig kernel_for(std::size_t n) const;

    /// Throws OutOfRangeError on non-positive lambda/eta/gamma.
    /// Zero iteration counts are accepted (the model stays at its initialization).
    void validate() const;
};

/// Explicit N x N weight matrix (Hebbian or LLR) with zero diagonal.
class WeightModel {
public:
    /// Throws OutOfRangeError if w is not square, has a nonzero diagonal, is
    /// non-finite, or (for Hebbian) is not symmetric.
    WeightModel(Rule rule, MatrixD w, std::size_t trained_patterns, double lambda = 0.0);

    Rule rule() const noexcept { return rule_; }
    std::size_t n() const noexcept { return w_.rows(); }
    std::size_t trained_patterns() const noexcept { return p_; }
    double lambda() const noexcept { return lambda_; }
    const MatrixD& weights() const noexcept { return w_; }

    friend bool operator==(const WeightModel&, const WeightModel&) = default;

private:
    Rule rule_;
    MatrixD w_;
    std::size_t p_;
    double lambda_;
};

/// Dual form (KLR or KRR): P x N coefficients over the stored patterns.
class DualModel {
public:
    /// Throws DimensionMismatchError if alpha is not P x N, NonFiniteError on NaN/Inf.
    DualModel(Rule rule, PatternSet patterns, MatrixD alpha, KernelConfig kernel, double lambda);

    Rule rule() const noexcept { return rule_; }
    std::size_t n() const noexcept { return patterns_.n(); }
    std::size_t p() const noexcept { return patterns_.p(); }
    const PatternSet& patterns() const noexcept { return patterns_; }
    const MatrixD& alpha() const noexcept { return alpha_; }
    const KernelConfig& kernel() const noexcept { return kernel_; }
    double lambda() const noexcept { return lambda_; }

    friend bool operator==(const DualModel&, const DualModel&) = default;

private:
    Rule rule_;
    PatternSet patterns_;
    MatrixD alpha_;
    KernelConfig kernel_;
    double lambda_;
};

using Model = std::variant<WeightModel, DualModel>;

Rule model_rule(const Model& model) noexcept;
std::size_t model_n(const Model& model) noexcept;

/// Called with the regularized loss of `neuron` after `iteration` updates
/// (iteration 0 is the initialization). Invoked from worker threads when
/// threads > 1.
using LossObserver = std::function<void(std::size_t neuron, std::size_t iteration, double loss)>;

struct TrainOptions {
    /// Worker threads for per-neuron / per-row parallelism; 0 = all cores.
    std::size_t threads = 1;
    LossObserver observer;
};

/// t = (xi + 1) / 2, entrywise.
MatrixD binary_targets(const PatternSet& set);

/// W = X^T X / N with zeroed diagonal.
WeightModel train_hebbian(const PatternSet& set, const TrainOptions& opts = {});

/// Per-neuron logistic regression by full-batch gradient descent from w = 0:
///   w_i <- w_i - (eta / P) [ sum_mu (sigma(h_i^mu) - t_i^mu) xi^mu + lambda w_i ],
/// with w_ii pinned at 0. Loss: sum_mu softplus(h) - t h + (lambda/2)|w_i|^2.
WeightModel train_llr(const PatternSet& set, const TrainConfig& cfg, const TrainOptions& opts = {});

/// Kernel logistic regression in the dual, all neurons as one recurrence from alpha = 0:
///   alpha <- alpha - eta [ (sigma(K alpha) - T) + lambda alpha ].
/// Loss per neuron: sum_mu softplus(z) - t z + (lambda/2) alpha_i^T K alpha_i, z = K alpha_i.
DualModel train_klr(const PatternSet& set, const TrainConfig& cfg, const TrainOptions& opts = {});

/// Closed form alpha = (K + lambda I)^{-1} X with bipolar targets.
DualModel train_krr(const PatternSet& set, const TrainConfig& cfg, const TrainOptions& opts = {});

Model train(Rule rule, const PatternSet& set, const TrainConfig& cfg, const TrainOptions& opts = {});

/// softplus(z) - t z, the logistic loss of logit z against a {0,1} target.
double logistic_loss(double z, double target) noexcept;

}  // namespace kernmem
