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

#include "kernmem/learning.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "kernmem/error.hpp"
#include "kernmem/parallel.hpp"
#include "kernmem/simd/kernels.hpp"

namespace kernmem {
namespace {

constexpr std::size_t kGemmRowBlock = 64;

inline double sigmoid(double z) noexcept {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

void require_finite(std::span<const double> values, Rule rule, std::size_t iteration) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw NonFiniteError(std::string(rule_name(rule)) + " training produced a non-finite value at iteration " +
                                 std::to_string(iteration));
        }
    }
}

// Z = K A, split by row blocks when threaded.
void kernel_times(const MatrixD& k, const MatrixD& a, MatrixD& z, std::size_t threads) {
    const auto& kern = simd::kernels();
    const std::size_t p = k.rows();
    const std::size_t n = a.cols();
    z.fill(0.0);
    if (resolve_threads(threads) <= 1) {
        kern.gemm(p, n, p, k.data(), p, a.data(), n, z.data(), n);
        return;
    }
    const std::size_t blocks = (p + kGemmRowBlock - 1) / kGemmRowBlock;
    parallel_for(blocks, threads, [&](std::size_t b) {
        const std::size_t r0 = b * kGemmRowBlock;
        const std::size_t rows = std::min(kGemmRowBlock, p - r0);
        kern.gemm(rows, n, p, k.row(r0).data(), p, a.data(), n, z.row(r0).data(), n);
    });
}

// Per-neuron KLR losses from Z = K alpha.
void report_klr_losses(const LossObserver& observer, const MatrixD& z, const MatrixD& alpha, const MatrixD& targets,
                       double lambda, std::size_t iteration) {
    const std::size_t p = z.rows();
    const std::size_t n = z.cols();
    std::vector<double> loss(n, 0.0);
    for (std::size_t mu = 0; mu < p; ++mu) {
        for (std::size_t i = 0; i < n; ++i) {
            loss[i] += logistic_loss(z(mu, i), targets(mu, i)) + 0.5 * lambda * alpha(mu, i) * z(mu, i);
        }
    }
    for (std::size_t i = 0; i < n; ++i) observer(i, iteration, loss[i]);
}

}  // namespace

std::string_view rule_name(Rule rule) noexcept {
    switch (rule) {
        case Rule::hebbian:
            return "hebbian";
        case Rule::llr:
            return "llr";
        case Rule::klr:
            return "klr";
        case Rule::krr:
            return "krr";
    }
    return "unknown";
}

std::optional<Rule> parse_rule(std::string_view name) noexcept {
    for (Rule r : {Rule::hebbian, Rule::llr, Rule::klr, Rule::krr}) {
        if (rule_name(r) == name) return r;
    }
    return std::nullopt;
}

KernelConfig TrainConfig::kernel_for(std::size_t n) const {
    if (gamma) {
        KernelConfig cfg{*gamma};
        cfg.validate();
        return cfg;
    }
    return KernelConfig::for_neurons(n);
}

void TrainConfig::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(std::isfinite(v) && v > 0.0)) {
            throw OutOfRangeError(std::string(name) + " must be finite and > 0 (got " + std::to_string(v) + ")");
        }
    };
    positive(lambda, "lambda");
    positive(eta, "eta");
    if (gamma) positive(*gamma, "gamma");
}

WeightModel::WeightModel(Rule rule, MatrixD w, std::size_t trained_patterns, double lambda)
    : rule_(rule), w_(std::move(w)), p_(trained_patterns), lambda_(lambda) {
    if (rule_ != Rule::hebbian && rule_ != Rule::llr) throw OutOfRangeError("weight models are hebbian or llr");
    if (w_.rows() != w_.cols() || w_.rows() == 0) throw DimensionMismatchError("weight matrix must be square");
    const std::size_t n = w_.rows();
    for (std::size_t i = 0; i < n; ++i) {
        if (w_(i, i) != 0.0) throw OutOfRangeError("weight matrix diagonal must be zero");
        for (std::size_t j = 0; j < n; ++j) {
            if (!std::isfinite(w_(i, j))) throw NonFiniteError("weight matrix has non-finite entries");
            if (rule_ == Rule::hebbian && w_(i, j) != w_(j, i)) {
                throw OutOfRangeError("hebbian weight matrix must be symmetric");
            }
        }
    }
}

DualModel::DualModel(Rule rule, PatternSet patterns, MatrixD alpha, KernelConfig kernel, double lambda)
    : rule_(rule), patterns_(std::move(patterns)), alpha_(std::move(alpha)), kernel_(kernel), lambda_(lambda) {
    if (rule_ != Rule::klr && rule_ != Rule::krr) throw OutOfRangeError("dual models are klr or krr");
    if (alpha_.rows() != patterns_.p() || alpha_.cols() != patterns_.n()) {
        throw DimensionMismatchError("alpha must be P x N (" + std::to_string(patterns_.p()) + " x " +
                                     std::to_string(patterns_.n()) + ")");
    }
    kernel_.validate();
    require_finite(alpha_.flat(), rule_, 0);
}

Rule model_rule(const Model& model) noexcept {
    return std::visit([](const auto& m) { return m.rule(); }, model);
}

std::size_t model_n(const Model& model) noexcept {
    return std::visit([](const auto& m) { return m.n(); }, model);
}

double logistic_loss(double z, double target) noexcept {
    const double softplus = std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
    return softplus - target * z;
}

MatrixD binary_targets(const PatternSet& set) {
    MatrixD t(set.p(), set.n());
    const auto src = set.matrix().flat();
    auto dst = t.flat();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = (src[i] + 1) / 2;
    return t;
}

WeightModel train_hebbian(const PatternSet& set, const TrainOptions& opts) {
    const std::size_t n = set.n();
    const std::size_t p = set.p();
    // Columns of X as contiguous rows so each W_ij is one exact integer dot.
    Matrix<std::int8_t> cols(n, p);
    for (std::size_t mu = 0; mu < p; ++mu)
        for (std::size_t i = 0; i < n; ++i) cols(i, mu) = set.matrix()(mu, i);

    const auto& k = simd::kernels();
    const double inv_n = 1.0 / static_cast<double>(n);
    MatrixD w(n, n, 0.0);
    parallel_for(n, opts.threads, [&](std::size_t i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            w(i, j) = static_cast<double>(k.dot_i8(cols.row(i).data(), cols.row(j).data(), p)) * inv_n;
        }
    });
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) w(j, i) = w(i, j);
    return WeightModel(Rule::hebbian, std::move(w), p);
}

WeightModel train_llr(const PatternSet& set, const TrainConfig& cfg, const TrainOptions& opts) {
    cfg.validate();
    const std::size_t n = set.n();
    const std::size_t p = set.p();
    const MatrixD x = set.to_double();
    const auto& k = simd::kernels();
    const double step = cfg.eta / static_cast<double>(p);
    MatrixD w_all(n, n, 0.0);

    parallel_for(n, opts.threads, [&](std::size_t i) {
        std::vector<double> w(n, 0.0);
        std::vector<double> h(p);
        std::vector<double> grad(n);
        std::vector<double> target(p);
        for (std::size_t mu = 0; mu < p; ++mu) target[mu] = (set.matrix()(mu, i) + 1) / 2;

        auto compute_fields = [&] {
            for (std::size_t mu = 0; mu < p; ++mu) h[mu] = k.dot(x.row(mu).data(), w.data(), n);
        };
        auto report = [&](std::size_t iteration) {
            double loss = 0.5 * cfg.lambda * k.dot(w.data(), w.data(), n);
            for (std::size_t mu = 0; mu < p; ++mu) loss += logistic_loss(h[mu], target[mu]);
            opts.observer(i, iteration, loss);
        };

        for (std::size_t it = 0; it < cfg.llr_iters; ++it) {
            compute_fields();
            if (opts.observer) report(it);
            std::fill(grad.begin(), grad.end(), 0.0);
            for (std::size_t mu = 0; mu < p; ++mu) {
                k.axpy(sigmoid(h[mu]) - target[mu], x.row(mu).data(), grad.data(), n);
            }
            for (std::size_t j = 0; j < n; ++j) w[j] -= step * (grad[j] + cfg.lambda * w[j]);
            w[i] = 0.0;
            require_finite(w, Rule::llr, it + 1);
        }
        if (opts.observer) {
            compute_fields();
            report(cfg.llr_iters);
        }
        std::copy(w.begin(), w.end(), w_all.row(i).begin());
    });
    return WeightModel(Rule::llr, std::move(w_all), p, cfg.lambda);
}

DualModel train_klr(const PatternSet& set, const TrainConfig& cfg, const TrainOptions& opts) {
    cfg.validate();
    const KernelConfig kcfg = cfg.kernel_for(set.n());
    const KernelMatrix gram = gram_matrix(set, kcfg, opts.threads);
    const MatrixD targets = binary_targets(set);
    const std::size_t p = set.p();
    const std::size_t n = set.n();

    MatrixD alpha(p, n, 0.0);
    MatrixD z(p, n, 0.0);
    for (std::size_t it = 0; it < cfg.klr_iters; ++it) {
        if (it > 0) kernel_times(gram.matrix(), alpha, z, opts.threads);
        if (opts.observer) report_klr_losses(opts.observer, z, alpha, targets, cfg.lambda, it);
        auto a = alpha.flat();
        const auto zf = z.flat();
        const auto tf = targets.flat();
        for (std::size_t e = 0; e < a.size(); ++e) {
            a[e] -= cfg.eta * ((sigmoid(zf[e]) - tf[e]) + cfg.lambda * a[e]);
        }
        require_finite(a, Rule::klr, it + 1);
    }
    if (opts.observer) {
        kernel_times(gram.matrix(), alpha, z, opts.threads);
        report_klr_losses(opts.observer, z, alpha, targets, cfg.lambda, cfg.klr_iters);
    }
    return DualModel(Rule::klr, set, std::move(alpha), kcfg, cfg.lambda);
}

DualModel train_krr(const PatternSet& set, const TrainConfig& cfg, const TrainOptions& opts) {
    cfg.validate();
    const KernelConfig kcfg = cfg.kernel_for(set.n());
    const KernelMatrix gram = gram_matrix(set, kcfg, opts.threads);
    MatrixD alpha = solve_regularized(gram, cfg.lambda, set.to_double());
    return DualModel(Rule::krr, set, std::move(alpha), kcfg, cfg.lambda);
}

Model train(Rule rule, const PatternSet& set, const TrainConfig& cfg, const TrainOptions& opts) {
    switch (rule) {
        case Rule::hebbian:
            return train_hebbian(set, opts);
        case Rule::llr:
            return train_llr(set, cfg, opts);
        case Rule::klr:
            return train_klr(set, cfg, opts);
        case Rule::krr:
            return train_krr(set, cfg, opts);
    }
    throw OutOfRangeError("unknown learning rule");
}

}  // namespace kernmem
