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

#ifndef CVDISTILL_TESTS_TEST_UTIL_H
#define CVDISTILL_TESTS_TEST_UTIL_H

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "cvdistill/gaussian_state.h"
#include "cvdistill/random.h"

namespace cvdistill::test {

inline double max_abs_diff(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b) {
    return (a - b).cwiseAbs().maxCoeff();
}

/// Random physical n-mode state: a random passive-plus-squeezing symplectic
/// applied to a thermal state.
inline GaussianState random_physical_state(size_t n_modes, Rng &rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    GaussianState s = vacuum_state(n_modes);
    Eigen::MatrixXd cov = s.cov();
    for (size_t k = 0; k < n_modes; k++) {
        const double thermal = 1.0 + 2.0 * u(rng);
        const double r = 0.8 * u(rng);
        cov(2 * k, 2 * k) *= thermal * std::exp(-2 * r);
        cov(2 * k + 1, 2 * k + 1) *= thermal * std::exp(2 * r);
    }
    Eigen::VectorXd mean(2 * n_modes);
    for (Eigen::Index i = 0; i < mean.size(); i++) {
        mean(i) = u(rng) - 0.5;
    }
    s = GaussianState(mean, cov);
    for (int rep = 0; rep < 3; rep++) {
        for (size_t k = 0; k < n_modes; k++) {
            s = phase_shift(s, k, 6.283185307179586 * u(rng));
        }
        for (size_t i = 0; i + 1 < n_modes; i++) {
            s = beamsplitter(s, i, i + 1, u(rng));
        }
    }
    return s;
}

/// Samples of a multivariate normal via Cholesky.
inline std::vector<Eigen::VectorXd> draw_gaussian(const GaussianState &s, size_t n, Rng &rng) {
    const Eigen::LLT<Eigen::MatrixXd> llt(s.cov());
    const Eigen::MatrixXd l = llt.matrixL();
    std::vector<Eigen::VectorXd> out;
    out.reserve(n);
    std::normal_distribution<double> g;
    Eigen::VectorXd z(s.mean().size());
    for (size_t i = 0; i < n; i++) {
        for (Eigen::Index k = 0; k < z.size(); k++) {
            z(k) = g(rng);
        }
        out.push_back(s.mean() + l * z);
    }
    return out;
}

/// Gauss-Hermite rule for the weight exp(-x^2) by Golub-Welsch (test-side copy).
inline void gauss_hermite(int n, std::vector<double> &x, std::vector<double> &w) {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; i++) {
        j(i, i - 1) = j(i - 1, i) = std::sqrt(i / 2.0);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
    x.resize(static_cast<size_t>(n));
    w.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; i++) {
        x[static_cast<size_t>(i)] = es.eigenvalues()(i);
        const double v = es.eigenvectors()(0, i);
        w[static_cast<size_t>(i)] = std::sqrt(3.141592653589793) * v * v;
    }
}

}  // namespace cvdistill::test

#endif
