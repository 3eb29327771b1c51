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

#ifndef CVDISTILL_MEASURES_H
#define CVDISTILL_MEASURES_H

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "cvdistill/gaussian_state.h"
#include "cvdistill/tomography.h"

namespace cvdistill {

/// rho^{T_B}: swaps the B indices, (rho^{T_B})_{nk,lm} = rho_{nm,lk}.
FockDM partial_transpose(const FockDM &rho);

/// log2 of the trace norm of rho^{T_B}, without renormalizing by tr(rho).
/// Can dip slightly below zero when tr(rho) < 1. Throws std::invalid_argument
/// if rho is not Hermitian to within `hermiticity_tolerance`.
double log_negativity(const FockDM &rho, double hermiticity_tolerance = 1e-8);

/// Same, with rho first divided by its trace.
double log_negativity_normalized(const FockDM &rho, double hermiticity_tolerance = 1e-8);

/// Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho.
double purity(const FockDM &rho);

/// Var(X_A - X_B) + Var(P_A + P_B) from first and second moments.
double total_variance(const GaussianState &state);
double total_variance(const GaussianEnsemble &ensemble);
double total_variance(std::span<const GaussianState> equal_weight_components);

/// The same quantity evaluated on a truncated density matrix with truncated
/// quadrature operators (rho is divided by its trace). A diagnostic only.
double total_variance_from_rho(const FockDM &rho);

/// Log-negativity of a two-mode Gaussian state from its covariance (quarter-vacuum
/// units): max(0, -log2(4 nu_min)) with nu_min the smaller symplectic
/// eigenvalue of the partially transposed covariance.
double gaussian_log_negativity(const Eigen::MatrixXd &cov);

/// nu_min above, without the clamp and log.
double pt_symplectic_eigenvalue_min(const Eigen::MatrixXd &cov);

struct MeasureReport {
    double log_negativity = 0.0;
    double purity = 0.0;
    double total_variance = 0.0;
    double log_negativity_stderr = 0.0;
    double purity_stderr = 0.0;
    double total_variance_stderr = 0.0;
};

struct BootstrapOptions {
    int resamples = 50;
    uint64_t seed = 0;
};

/// Standard deviation of f over bootstrap resamples (with replacement) of the
/// block estimates, f applied to the mean of each resample.
double bootstrap_stderr(const std::vector<FockDM> &blocks, double (*f)(const FockDM &),
                        const BootstrapOptions &options);

/// Block bootstrap of total_variance: components are split into n_blocks by
/// index modulo n_blocks and whole blocks are resampled.
double total_variance_stderr(std::span<const GaussianState> components, int n_blocks,
                             const BootstrapOptions &options);

/// E_n, purity and I of a tomographed distillate with bootstrap error bars.
MeasureReport measure(const TomographyResult &tomo, std::span<const GaussianState> components,
                      const BootstrapOptions &options = {});

}  // namespace cvdistill

#endif
