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

#ifndef CVDISTILL_GAUSSIAN_STATE_H
#define CVDISTILL_GAUSSIAN_STATE_H

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "cvdistill/random.h"

namespace cvdistill {

/// Quadrature variance of the vacuum. Every public interface uses this
/// normalization: X and P of a mode in its ground state each have variance 1/4.
inline constexpr double kVacuumVariance = 0.25;

/// Zero-or-more-mode Gaussian state described by its first and second moments.
///
/// Quadratures are interleaved: (x1, p1, x2, p2, ...). The covariance matrix is
/// the symmetrized one, cov_ij = <{dR_i, dR_j}>/2.
class GaussianState {
   public:
    GaussianState() = default;
    GaussianState(Eigen::VectorXd mean, Eigen::MatrixXd cov);

    size_t n_modes() const {
        return static_cast<size_t>(mean_.size() / 2);
    }
    const Eigen::VectorXd &mean() const {
        return mean_;
    }
    const Eigen::MatrixXd &cov() const {
        return cov_;
    }

    bool operator==(const GaussianState &other) const = default;

   private:
    Eigen::VectorXd mean_;
    Eigen::MatrixXd cov_;
};

/// Linear symplectic map with an (unused, always zero here) displacement.
struct SymplecticOp {
    Eigen::MatrixXd matrix;
    Eigen::VectorXd displacement;

    size_t n_modes() const {
        return static_cast<size_t>(matrix.rows() / 2);
    }
};

/// Weighted mixture of Gaussian states over the same number of modes.
struct GaussianEnsemble {
    std::vector<GaussianState> components;
    std::vector<double> weights;

    /// Equal-weight mixture.
    static GaussianEnsemble uniform(std::vector<GaussianState> components);

    size_t n_modes() const;
    bool empty() const {
        return components.empty();
    }
};

/// Symplectic form Omega = direct sum of [[0, 1], [-1, 0]].
Eigen::MatrixXd symplectic_form(size_t n_modes);

/// Returns max |S Omega S^T - Omega|.
double symplectic_defect(const Eigen::MatrixXd &s);

/// Symplectic eigenvalues in ascending order (modulus of eigenvalues of i*Omega*cov).
Eigen::VectorXd symplectic_eigenvalues(const Eigen::MatrixXd &cov);

/// Uncertainty relation cov + (i/4) Omega >= 0, tested on symplectic eigenvalues.
bool is_physical(const GaussianState &state, double tolerance = 1e-10);

/// (1/4)^N / sqrt(det cov).
double gaussian_purity(const GaussianState &state);

GaussianState vacuum_state(size_t n_modes);

/// Applies S to mean and cov (cov <- S cov S^T, symmetrized).
GaussianState apply(const GaussianState &state, const SymplecticOp &op);

SymplecticOp phase_shift_op(size_t n_modes, size_t mode, double theta);
SymplecticOp beamsplitter_op(size_t n_modes, size_t i, size_t j, double transmittance);

/// Rotates the (x, p) block of `mode` by R(theta) = [[cos, sin], [-sin, cos]].
GaussianState phase_shift(const GaussianState &state, size_t mode, double theta);

/// out_i = sqrt(T) in_i + sqrt(1-T) in_j,  out_j = sqrt(1-T) in_i - sqrt(T) in_j,
/// acting identically on the x and p quadratures.
GaussianState beamsplitter(const GaussianState &state, size_t i, size_t j, double transmittance);

/// Block-diagonal product; modes of `a` come first.
GaussianState tensor(const GaussianState &a, const GaussianState &b);

/// Reduced state on the listed modes, in the listed order.
GaussianState keep_modes(const GaussianState &state, std::span<const size_t> modes);

struct ConditionedState {
    GaussianState remaining;
    double likelihood_density;
};

struct HomodyneOutcome {
    double value;
    GaussianState remaining;
    double likelihood_density;
};

/// Conditions on the outcome `value` of x_theta = cos(theta) x + sin(theta) p on
/// `mode`. The measured mode is removed from the returned state.
ConditionedState condition_on_value(const GaussianState &state, size_t mode, double lo_angle, double value);

/// Draws an outcome of x_theta on `mode` from its exact marginal, then conditions on it.
HomodyneOutcome homodyne_sample(const GaussianState &state, size_t mode, double lo_angle, Rng &rng);

struct QuadratureStats {
    double mean;
    double variance;
};

/// Mean and variance of sum_k c_k R_k.
QuadratureStats quadrature_stats(const GaussianState &state, std::span<const double> coefficients);

/// Law of total variance over the mixture.
QuadratureStats quadrature_stats(const GaussianEnsemble &ensemble, std::span<const double> coefficients);

}  // namespace cvdistill

#endif
