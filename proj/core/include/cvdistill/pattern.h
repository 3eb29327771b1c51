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

#ifndef CVDISTILL_PATTERN_H
#define CVDISTILL_PATTERN_H

#include <span>
#include <vector>

namespace cvdistill {

/// Default Fock-space truncation: photon numbers 0..4 per mode.
inline constexpr int kDefaultFockDim = 5;

/// Homodyne pattern functions f_nm(x) in standard units (vacuum variance 1/2).
///
/// With x_theta = cos(theta) x + sin(theta) p and theta uniform on [0, pi),
/// <n|rho|m> = E[ f_nm(x_theta) exp(i (n - m) theta) ]. The functions are real,
/// symmetric in (n, m), and have parity (-1)^(n - m) in x.
///
/// They are computed from the kernel representation
///   f_nm(x) = 1/2 int |k| exp(ikx) <max| exp(-ik x_0) |min> dk,
/// whose matrix element is a displaced-number-state overlap (an associated
/// Laguerre polynomial times a Gaussian), integrated by composite
/// Gauss-Legendre quadrature.
double pattern_kernel(int n, int m, double x_std);

/// d/dx of pattern_kernel.
double pattern_kernel_derivative(int n, int m, double x_std);

/// Pattern functions tabulated on [-x_max, x_max] and evaluated by cubic
/// Hermite interpolation. Outside the grid the table returns 0.
class PatternTable {
   public:
    PatternTable(int dim, double x_max, double step);

    /// dim 5 on [-8, 8] with step 1e-3, built once on first use.
    static const PatternTable &standard();

    /// Shared table for truncation `dim` on the standard grid, built on first use.
    static const PatternTable &for_dim(int dim);

    int dim() const {
        return dim_;
    }
    double x_max() const {
        return x_max_;
    }
    double step() const {
        return step_;
    }

    double value(int n, int m, double x_std) const;

    /// Writes f_nm(x_std) for all (n, m) into out[n * dim + m]; out.size() >= dim*dim.
    void values(double x_std, std::span<double> out) const;
    /// f_nm for n <= m only, in row-major order of the upper triangle;
    /// out.size() >= dim*(dim+1)/2.
    void upper_values(double x_std, std::span<double> out) const;

   private:
    int dim_;
    double x_max_;
    double step_;
    size_t n_points_;
    // Indexed [point][pair], pair = n * dim + m, for x >= 0 only.
    std::vector<double> f_;
    std::vector<double> df_;
    // (-1)^(n+m), applied for x < 0.
    std::vector<double> parity_;
    std::vector<size_t> upper_;
};

/// f_nm(x_std) from the standard table. Throws std::invalid_argument if n or m >= dim.
double pattern_value(int n, int m, double x_std, int dim = kDefaultFockDim);

}  // namespace cvdistill

#endif
