// Copyright 2026 The cvdistill Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cvdistill/pattern.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>

#include "quadrature.h"

namespace cvdistill {

namespace {

// exp(-k^2/4) < 1e-60 beyond this, far below any polynomial prefactor we use.
constexpr double kKernelCutoff = 24.0;
constexpr int kPanels = 48;
constexpr int kNodesPerPanel = 16;

const internal::QuadratureRule &kernel_rule() {
    static const internal::QuadratureRule rule = [] {
        internal::QuadratureRule all;
        const double width = kKernelCutoff / kPanels;
        for (int p = 0; p < kPanels; p++) {
            auto panel = internal::gauss_legendre(kNodesPerPanel, p * width, (p + 1) * width);
            all.nodes.insert(all.nodes.end(), panel.nodes.begin(), panel.nodes.end());
            all.weights.insert(all.weights.end(), panel.weights.begin(), panel.weights.end());
        }
        return all;
    }();
    return rule;
}

double generalized_laguerre(int n, int alpha, double t) {
    if (n == 0) {
        return 1.0;
    }
    double prev = 1.0;
    double cur = 1.0 + alpha - t;
    for (int k = 1; k < n; k++) {
        const double next = ((2.0 * k + 1.0 + alpha - t) * cur - (k + alpha) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    return cur;
}

// Everything in f_nm that does not depend on x, evaluated at quadrature node k:
// sign * sqrt(lo!/hi!) * 2^(-d/2) * k^(d+1) * L_lo^(d)(k^2/2) * exp(-k^2/4) * weight.
struct KernelProfile {
    bool odd;
    std::vector<double> amplitude;
};

KernelProfile kernel_profile(int n, int m) {
    const int hi = std::max(n, m);
    const int lo = std::min(n, m);
    const int d = hi - lo;
    double norm = std::pow(2.0, -0.5 * d);
    for (int k = lo + 1; k <= hi; k++) {
        norm /= std::sqrt(static_cast<double>(k));
    }
    // (-i)^d from the overlap combined with the i from the odd part of exp(ikx).
    const double sign = (d % 2 == 0) ? ((d / 2) % 2 == 0 ? 1.0 : -1.0) : (((d - 1) / 2) % 2 == 0 ? 1.0 : -1.0);
    const auto &rule = kernel_rule();
    KernelProfile prof{d % 2 == 1, std::vector<double>(rule.nodes.size())};
    for (size_t q = 0; q < rule.nodes.size(); q++) {
        const double k = rule.nodes[q];
        prof.amplitude[q] = sign * norm * std::pow(k, d + 1) * generalized_laguerre(lo, d, 0.5 * k * k) *
                            std::exp(-0.25 * k * k) * rule.weights[q];
    }
    return prof;
}

double kernel_eval(int n, int m, double x, bool derivative) {
    if (n < 0 || m < 0) {
        throw std::invalid_argument("pattern_kernel: negative index");
    }
    const KernelProfile prof = kernel_profile(n, m);
    const auto &nodes = kernel_rule().nodes;
    double acc = 0.0;
    for (size_t q = 0; q < nodes.size(); q++) {
        const double k = nodes[q];
        double term;
        if (!derivative) {
            term = prof.odd ? std::sin(k * x) : std::cos(k * x);
        } else {
            term = prof.odd ? k * std::cos(k * x) : -k * std::sin(k * x);
        }
        acc += prof.amplitude[q] * term;
    }
    return acc;
}

}  // namespace

double pattern_kernel(int n, int m, double x_std) {
    return kernel_eval(n, m, x_std, false);
}

double pattern_kernel_derivative(int n, int m, double x_std) {
    return kernel_eval(n, m, x_std, true);
}

PatternTable::PatternTable(int dim, double x_max, double step) : dim_(dim), x_max_(x_max), step_(step) {
    if (dim < 1 || !(x_max > 0.0) || !(step > 0.0) || step > x_max) {
        throw std::invalid_argument("PatternTable: invalid dimensions");
    }
    n_points_ = static_cast<size_t>(std::llround(x_max / step)) + 1;
    step_ = x_max / static_cast<double>(n_points_ - 1);
    const size_t pairs = static_cast<size_t>(dim * dim);
    f_.assign(n_points_ * pairs, 0.0);
    df_.assign(n_points_ * pairs, 0.0);
    parity_.resize(pairs);
    for (int n = 0; n < dim; n++) {
        for (int m = 0; m < dim; m++) {
            parity_[static_cast<size_t>(n * dim + m)] = (n + m) % 2 ? -1.0 : 1.0;
            if (n <= m) {
                upper_.push_back(static_cast<size_t>(n * dim + m));
            }
        }
    }

    const auto &nodes = kernel_rule().nodes;
    std::vector<KernelProfile> profiles;
    std::vector<std::pair<int, int>> unique;
    for (int n = 0; n < dim; n++) {
        for (int m = n; m < dim; m++) {
            unique.emplace_back(n, m);
            profiles.push_back(kernel_profile(n, m));
        }
    }
    std::vector<double> c(nodes.size());
    std::vector<double> s(nodes.size());
    for (size_t i = 0; i < n_points_; i++) {
        const double x = static_cast<double>(i) * step_;
        for (size_t q = 0; q < nodes.size(); q++) {
            c[q] = std::cos(nodes[q] * x);
            s[q] = std::sin(nodes[q] * x);
        }
        for (size_t u = 0; u < unique.size(); u++) {
            const auto &prof = profiles[u];
            double v = 0.0;
            double dv = 0.0;
            for (size_t q = 0; q < nodes.size(); q++) {
                const double k = nodes[q];
                if (prof.odd) {
                    v += prof.amplitude[q] * s[q];
                    dv += prof.amplitude[q] * k * c[q];
                } else {
                    v += prof.amplitude[q] * c[q];
                    dv -= prof.amplitude[q] * k * s[q];
                }
            }
            const auto [n, m] = unique[u];
            for (size_t pair : {static_cast<size_t>(n * dim + m), static_cast<size_t>(m * dim + n)}) {
                f_[i * pairs + pair] = v;
                df_[i * pairs + pair] = dv;
            }
        }
    }
}

const PatternTable &PatternTable::standard() {
    return for_dim(kDefaultFockDim);
}

const PatternTable &PatternTable::for_dim(int dim) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<PatternTable>> tables;
    std::lock_guard<std::mutex> lock(mu);
    auto &slot = tables[dim];
    if (!slot) {
        slot = std::make_unique<PatternTable>(dim, 8.0, 1e-3);
    }
    return *slot;
}

void PatternTable::values(double x_std, std::span<double> out) const {
    const size_t pairs = static_cast<size_t>(dim_ * dim_);
    const double ax = std::abs(x_std);
    if (!(ax <= x_max_)) {
        std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(pairs), 0.0);
        return;
    }
    const double u = ax / step_;
    size_t i = std::min(static_cast<size_t>(u), n_points_ - 2);
    const double t = u - static_cast<double>(i);
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = (t3 - 2 * t2 + t) * step_;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = (t3 - t2) * step_;
    const double *f0 = &f_[i * pairs];
    const double *f1 = f0 + pairs;
    const double *d0 = &df_[i * pairs];
    const double *d1 = d0 + pairs;
    double *o = out.data();
    if (x_std < 0.0) {
        const double *sg = parity_.data();
        for (size_t p = 0; p < pairs; p++) {
            o[p] = sg[p] * (h00 * f0[p] + h10 * d0[p] + h01 * f1[p] + h11 * d1[p]);
        }
    } else {
        for (size_t p = 0; p < pairs; p++) {
            o[p] = h00 * f0[p] + h10 * d0[p] + h01 * f1[p] + h11 * d1[p];
        }
    }
}

void PatternTable::upper_values(double x_std, std::span<double> out) const {
    const size_t pairs = static_cast<size_t>(dim_ * dim_);
    const size_t n_upper = upper_.size();
    const double ax = std::abs(x_std);
    if (!(ax <= x_max_)) {
        std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n_upper), 0.0);
        return;
    }
    const double u = ax / step_;
    size_t i = std::min(static_cast<size_t>(u), n_points_ - 2);
    const double t = u - static_cast<double>(i);
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = (t3 - 2 * t2 + t) * step_;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = (t3 - t2) * step_;
    const double *f0 = &f_[i * pairs];
    const double *f1 = f0 + pairs;
    const double *d0 = &df_[i * pairs];
    const double *d1 = d0 + pairs;
    const bool negative = x_std < 0.0;
    double *o = out.data();
    for (size_t q = 0; q < n_upper; q++) {
        const size_t p = upper_[q];
        const double v = h00 * f0[p] + h10 * d0[p] + h01 * f1[p] + h11 * d1[p];
        o[q] = negative ? parity_[p] * v : v;
    }
}

double PatternTable::value(int n, int m, double x_std) const {
    if (n < 0 || m < 0 || n >= dim_ || m >= dim_) {
        throw std::invalid_argument("PatternTable: index (" + std::to_string(n) + ", " + std::to_string(m) +
                                    ") outside truncation " + std::to_string(dim_));
    }
    std::vector<double> all(static_cast<size_t>(dim_ * dim_));
    values(x_std, all);
    return all[static_cast<size_t>(n * dim_ + m)];
}

double pattern_value(int n, int m, double x_std, int dim) {
    return PatternTable::for_dim(dim).value(n, m, x_std);
}

}  // namespace cvdistill
