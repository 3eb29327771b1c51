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

#include "cvdistill/measures.h"

#include <cmath>
#include <stdexcept>

#include "cvdistill/errors.h"
#include "cvdistill/random.h"

namespace cvdistill {

namespace {

constexpr uint64_t kBootstrapDomain = 0x424F4F54ULL;

// Coefficients of X_A - X_B and P_A + P_B in (x_A, p_A, x_B, p_B).
constexpr double kDiffX[4] = {1.0, 0.0, -1.0, 0.0};
constexpr double kSumP[4] = {0.0, 1.0, 0.0, 1.0};

double trace_norm_pt(const FockDM &rho, double tol) {
    if (rho.hermiticity_defect() > tol) {
        throw std::invalid_argument("log_negativity: density matrix is not Hermitian");
    }
    Eigen::MatrixXcd pt = partial_transpose(rho).matrix;
    pt = (0.5 * (pt + pt.adjoint())).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(pt, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().cwiseAbs().sum();
}

struct BlockMoments {
    double n = 0.0;
    double sum_mean[2] = {0.0, 0.0};
    double sum_mean_sq[2] = {0.0, 0.0};
    double sum_var[2] = {0.0, 0.0};
};

double combine(const std::vector<const BlockMoments *> &blocks) {
    double n = 0.0;
    double total = 0.0;
    double sm[2] = {0, 0};
    double sq[2] = {0, 0};
    double sv[2] = {0, 0};
    for (const auto *b : blocks) {
        n += b->n;
        for (int k = 0; k < 2; k++) {
            sm[k] += b->sum_mean[k];
            sq[k] += b->sum_mean_sq[k];
            sv[k] += b->sum_var[k];
        }
    }
    for (int k = 0; k < 2; k++) {
        const double mean = sm[k] / n;
        total += sv[k] / n + sq[k] / n - mean * mean;
    }
    return total;
}

}  // namespace

FockDM partial_transpose(const FockDM &rho) {
    const int d = rho.dim;
    FockDM out = FockDM::zero(d);
    for (int n = 0; n < d; n++) {
        for (int k = 0; k < d; k++) {
            for (int l = 0; l < d; l++) {
                for (int m = 0; m < d; m++) {
                    out(n, k, l, m) = rho(n, m, l, k);
                }
            }
        }
    }
    return out;
}

double log_negativity(const FockDM &rho, double hermiticity_tolerance) {
    return std::log2(trace_norm_pt(rho, hermiticity_tolerance));
}

double log_negativity_normalized(const FockDM &rho, double hermiticity_tolerance) {
    return std::log2(trace_norm_pt(rho, hermiticity_tolerance) / rho.trace());
}

double purity(const FockDM &rho) {
    return rho.matrix.cwiseAbs2().sum();
}

double total_variance(const GaussianState &state) {
    if (state.n_modes() != 2) {
        throw std::invalid_argument("total_variance: expected a two-mode state");
    }
    return quadrature_stats(state, kDiffX).variance + quadrature_stats(state, kSumP).variance;
}

double total_variance(const GaussianEnsemble &ensemble) {
    if (ensemble.n_modes() != 2) {
        throw std::invalid_argument("total_variance: expected a two-mode ensemble");
    }
    return quadrature_stats(ensemble, kDiffX).variance + quadrature_stats(ensemble, kSumP).variance;
}

double total_variance(std::span<const GaussianState> components) {
    if (components.empty()) {
        throw std::invalid_argument("total_variance: empty ensemble");
    }
    BlockMoments all;
    for (const auto &c : components) {
        if (c.n_modes() != 2) {
            throw std::invalid_argument("total_variance: expected two-mode states");
        }
        const QuadratureStats s[2] = {quadrature_stats(c, kDiffX), quadrature_stats(c, kSumP)};
        all.n += 1.0;
        for (int k = 0; k < 2; k++) {
            all.sum_mean[k] += s[k].mean;
            all.sum_mean_sq[k] += s[k].mean * s[k].mean;
            all.sum_var[k] += s[k].variance;
        }
    }
    return combine({&all});
}

double total_variance_from_rho(const FockDM &rho) {
    const int d = rho.dim;
    // Single-mode a in the truncated basis; X = (a + a^dag)/2, P = (a - a^dag)/(2i).
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(d, d);
    for (int n = 1; n < d; n++) {
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    }
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(d, d);
    const Eigen::MatrixXcd x = 0.5 * (a + a.adjoint());
    const Eigen::MatrixXcd p = std::complex<double>(0.0, -0.5) * (a - a.adjoint());
    auto kron = [](const Eigen::MatrixXcd &u, const Eigen::MatrixXcd &v) {
        Eigen::MatrixXcd out(u.rows() * v.rows(), u.cols() * v.cols());
        for (Eigen::Index i = 0; i < u.rows(); i++) {
            for (Eigen::Index j = 0; j < u.cols(); j++) {
                out.block(i * v.rows(), j * v.cols(), v.rows(), v.cols()) = u(i, j) * v;
            }
        }
        return out;
    };
    const Eigen::MatrixXcd state = rho.matrix / rho.trace();
    auto variance = [&](const Eigen::MatrixXcd &op) {
        const double mean = (state * op).trace().real();
        return (state * op * op).trace().real() - mean * mean;
    };
    return variance(kron(x, id) - kron(id, x)) + variance(kron(p, id) + kron(id, p));
}

double pt_symplectic_eigenvalue_min(const Eigen::MatrixXd &cov) {
    if (cov.rows() != 4 || cov.cols() != 4) {
        throw std::invalid_argument("gaussian_log_negativity: expected a 4x4 covariance");
    }
    const double det_a = cov.block<2, 2>(0, 0).determinant();
    const double det_b = cov.block<2, 2>(2, 2).determinant();
    const double det_c = cov.block<2, 2>(0, 2).determinant();
    const double det_all = cov.determinant();
    // Partial transposition flips p_B, which flips the sign of det C.
    const double delta = det_a + det_b - 2.0 * det_c;
    const double disc = std::max(0.0, delta * delta - 4.0 * det_all);
    return std::sqrt(std::max(0.0, 0.5 * (delta - std::sqrt(disc))));
}

double gaussian_log_negativity(const Eigen::MatrixXd &cov) {
    const GaussianState probe(Eigen::VectorXd::Zero(cov.rows()), cov);
    if (cov.rows() != 4 || !is_physical(probe, 1e-10)) {
        throw std::invalid_argument("gaussian_log_negativity: covariance is not a physical two-mode state");
    }
    const double nu = pt_symplectic_eigenvalue_min(cov);
    return std::max(0.0, -std::log2(4.0 * nu));
}

double bootstrap_stderr(const std::vector<FockDM> &blocks, double (*f)(const FockDM &),
                        const BootstrapOptions &options) {
    if (blocks.size() < 2 || options.resamples < 2) {
        return 0.0;
    }
    Rng rng = substream(options.seed, kBootstrapDomain, 0);
    std::uniform_int_distribution<size_t> pick(0, blocks.size() - 1);
    std::vector<double> values;
    values.reserve(static_cast<size_t>(options.resamples));
    FockDM mean = FockDM::zero(blocks.front().dim);
    for (int r = 0; r < options.resamples; r++) {
        mean.matrix.setZero();
        for (size_t i = 0; i < blocks.size(); i++) {
            mean.matrix += blocks[pick(rng)].matrix;
        }
        mean.matrix /= static_cast<double>(blocks.size());
        values.push_back(f(mean));
    }
    double mu = 0.0;
    for (double v : values) {
        mu += v;
    }
    mu /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) {
        ss += (v - mu) * (v - mu);
    }
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

double total_variance_stderr(std::span<const GaussianState> components, int n_blocks,
                             const BootstrapOptions &options) {
    if (n_blocks < 2 || static_cast<size_t>(n_blocks) > components.size() || options.resamples < 2) {
        return 0.0;
    }
    std::vector<BlockMoments> blocks(static_cast<size_t>(n_blocks));
    for (size_t i = 0; i < components.size(); i++) {
        BlockMoments &b = blocks[i % blocks.size()];
        const QuadratureStats s[2] = {quadrature_stats(components[i], kDiffX),
                                      quadrature_stats(components[i], kSumP)};
        b.n += 1.0;
        for (int k = 0; k < 2; k++) {
            b.sum_mean[k] += s[k].mean;
            b.sum_mean_sq[k] += s[k].mean * s[k].mean;
            b.sum_var[k] += s[k].variance;
        }
    }
    Rng rng = substream(options.seed, kBootstrapDomain, 1);
    std::uniform_int_distribution<size_t> pick(0, blocks.size() - 1);
    std::vector<double> values;
    std::vector<const BlockMoments *> chosen(blocks.size());
    for (int r = 0; r < options.resamples; r++) {
        for (auto &c : chosen) {
            c = &blocks[pick(rng)];
        }
        values.push_back(combine(chosen));
    }
    double mu = 0.0;
    for (double v : values) {
        mu += v;
    }
    mu /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) {
        ss += (v - mu) * (v - mu);
    }
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

MeasureReport measure(const TomographyResult &tomo, std::span<const GaussianState> components,
                      const BootstrapOptions &options) {
    MeasureReport r;
    r.log_negativity = log_negativity(tomo.rho);
    r.purity = purity(tomo.rho);
    r.total_variance = total_variance(components);
    r.log_negativity_stderr = bootstrap_stderr(
        tomo.blocks, [](const FockDM &m) { return log_negativity(m); }, options);
    r.purity_stderr = bootstrap_stderr(tomo.blocks, &purity, options);
    r.total_variance_stderr =
        total_variance_stderr(components, static_cast<int>(tomo.blocks.size()), options);
    return r;
}

}  // namespace cvdistill
