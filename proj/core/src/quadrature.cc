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

#include "quadrature.h"

#include <Eigen/Dense>
#include <cmath>

namespace cvdistill::internal {

namespace {

// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix, weights come from
// the first components of the eigenvectors.
QuadratureRule golub_welsch(const Eigen::VectorXd &off_diagonal, double mu0) {
    const Eigen::Index n = off_diagonal.size() + 1;
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index k = 0; k + 1 < n; k++) {
        j(k, k + 1) = off_diagonal[k];
        j(k + 1, k) = off_diagonal[k];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(j);
    QuadratureRule rule;
    rule.nodes.resize(static_cast<size_t>(n));
    rule.weights.resize(static_cast<size_t>(n));
    for (Eigen::Index k = 0; k < n; k++) {
        const double v0 = eig.eigenvectors()(0, k);
        rule.nodes[static_cast<size_t>(k)] = eig.eigenvalues()[k];
        rule.weights[static_cast<size_t>(k)] = mu0 * v0 * v0;
    }
    return rule;
}

}  // namespace

QuadratureRule gauss_legendre(int n, double a, double b) {
    Eigen::VectorXd beta(n - 1);
    for (int k = 1; k < n; k++) {
        beta[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
    }
    QuadratureRule rule = golub_welsch(beta, 2.0);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (size_t k = 0; k < rule.nodes.size(); k++) {
        rule.nodes[k] = mid + half * rule.nodes[k];
        rule.weights[k] *= half;
    }
    return rule;
}

QuadratureRule gauss_hermite_normal(int n) {
    // Probabilists' Hermite polynomials: recurrence coefficients sqrt(k).
    Eigen::VectorXd beta(n - 1);
    for (int k = 1; k < n; k++) {
        beta[k - 1] = std::sqrt(static_cast<double>(k));
    }
    return golub_welsch(beta, 1.0);
}

}  // namespace cvdistill::internal
