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

#ifndef CVDISTILL_TOMOGRAPHY_H
#define CVDISTILL_TOMOGRAPHY_H

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "cvdistill/gaussian_state.h"
#include "cvdistill/pattern.h"

namespace cvdistill {

/// Truncated two-mode density matrix rho_{nk,lm} = <n k| rho |l m>, mode A first.
/// Stored as a (dim^2 x dim^2) matrix with row n*dim + k and column l*dim + m.
struct FockDM {
    int dim = kDefaultFockDim;
    Eigen::MatrixXcd matrix;

    static FockDM zero(int dim);
    /// |n k><l m| embedded in dimension `dim`.
    static FockDM outer(int dim, int n, int k, int l, int m);

    std::complex<double> operator()(int n, int k, int l, int m) const {
        return matrix(n * dim + k, l * dim + m);
    }
    std::complex<double> &operator()(int n, int k, int l, int m) {
        return matrix(n * dim + k, l * dim + m);
    }
    double trace() const {
        return matrix.trace().real();
    }
    double hermiticity_defect() const {
        return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
    }
};

struct TomographyPlan {
    int n_slices = 100;
    uint64_t samples_per_slice = 300000;
    /// Local-oscillator angles (theta_A, theta_B) per slice.
    std::vector<std::pair<double, double>> phase_schedule;

    /// n_a x n_b product grid of angles k*pi/n on [0, pi) per mode.
    static TomographyPlan product_grid(int n_a, int n_b, uint64_t samples_per_slice);
    /// Closest-to-square product grid with exactly n_slices slices.
    static TomographyPlan with_slices(int n_slices, uint64_t samples_per_slice);

    uint64_t total_samples() const {
        return static_cast<uint64_t>(n_slices) * samples_per_slice;
    }
    void validate() const;
};

/// One joint homodyne record, quadratures in vacuum-variance-1/4 units.
struct HomodyneRecord {
    double theta_a;
    double theta_b;
    double x_a;
    double x_b;
};

/// Quarter-vacuum units (vacuum variance 1/4) to standard units (vacuum variance 1/2).
inline constexpr double kUnitBridge = 1.4142135623730951;

/// Draws plan.samples_per_slice joint records per slice, each from a component
/// chosen uniformly at random. Slice j uses its own substream of `seed`.
std::vector<HomodyneRecord> acquire(std::span<const GaussianState> components, const TomographyPlan &plan,
                                    uint64_t seed);

/// Pattern-function estimate: the sample mean of
/// f_nl(x_A) f_km(x_B) exp(i(n-l) theta_A) exp(i(k-m) theta_B), Hermitian-symmetrized.
FockDM reconstruct(std::span<const HomodyneRecord> samples, int dim = kDefaultFockDim);

struct TomographyOptions {
    int dim = kDefaultFockDim;
    /// Independent sub-estimates used for bootstrap error bars.
    int n_blocks = 20;
    int workers = 1;
};

struct TomographyResult {
    FockDM rho;
    /// Per-element standard errors of Re and Im from the spread of the block
    /// estimates (NaN with a single block).
    Eigen::MatrixXd stderr_re;
    Eigen::MatrixXd stderr_im;
    /// rho estimated from disjoint blocks of components and samples.
    std::vector<FockDM> blocks;
    uint64_t n_samples = 0;
};

/// acquire + reconstruct without materializing the samples. Components are
/// partitioned into n_blocks groups (by index modulo n_blocks) and each block
/// yields its own estimate; with fewer components than blocks, samples are
/// split round-robin instead. Produces the same rho as
/// reconstruct(acquire(components, plan, seed)) up to summation order.
TomographyResult tomograph(std::span<const GaussianState> components, const TomographyPlan &plan, uint64_t seed,
                           const TomographyOptions &options = {});

/// Deterministic N -> infinity limit of tomograph: the pattern-function
/// estimator integrated against each component's exact bivariate quadrature
/// marginal (composite Gauss-Legendre in x over the tabulated support, the
/// plan's schedule in theta).
/// Throws NumericalFailure if the quadrature does not converge.
FockDM exact_rho(std::span<const GaussianState> components, const TomographyPlan &plan,
                 int dim = kDefaultFockDim, int workers = 1);

}  // namespace cvdistill

#endif
