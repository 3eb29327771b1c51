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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace cvdistill;

namespace {

constexpr int kDim = 5;

/// Harmonic-oscillator eigenfunctions psi_0..psi_{n_max} (vacuum variance 1/2).
std::vector<double> psi(int n_max, double x) {
    std::vector<double> p(static_cast<size_t>(n_max + 1));
    p[0] = std::pow(std::numbers::pi, -0.25) * std::exp(-x * x / 2);
    for (int n = 0; n < n_max; n++) {
        const double prev = n > 0 ? std::sqrt(static_cast<double>(n)) * p[static_cast<size_t>(n - 1)] : 0.0;
        p[static_cast<size_t>(n + 1)] = (std::sqrt(2.0) * x * p[static_cast<size_t>(n)] - prev) / std::sqrt(n + 1.0);
    }
    return p;
}

/// exp(-x^2/2) * int_0^x exp(t^2) dt by composite Simpson.
double scaled_dawson_integral(double x) {
    const int n = 4000;
    const double h = x / n;
    double s = 1.0 + std::exp(x * x);
    for (int i = 1; i < n; i++) {
        const double t = i * h;
        s += (i % 2 ? 4.0 : 2.0) * std::exp(t * t);
    }
    return std::exp(-x * x / 2) * s * h / 3;
}

/// Irregular solutions phi_0..phi_{n_max} of the oscillator equation, with
/// phi_0 = 2 pi^(1/4) exp(x^2/2) D(x) (D the Dawson function) and the same
/// ladder recurrence as psi.
std::vector<double> phi(int n_max, double x) {
    const double c = 2 * std::pow(std::numbers::pi, 0.25);
    std::vector<double> q(static_cast<size_t>(n_max + 1));
    q[0] = c * scaled_dawson_integral(x);
    if (n_max >= 1) {
        q[1] = std::sqrt(2.0) * x * q[0] - c * std::exp(x * x / 2) / std::sqrt(2.0);
    }
    for (int n = 1; n < n_max; n++) {
        q[static_cast<size_t>(n + 1)] =
            (std::sqrt(2.0) * x * q[static_cast<size_t>(n)] - std::sqrt(static_cast<double>(n)) * q[static_cast<size_t>(n - 1)]) /
            std::sqrt(n + 1.0);
    }
    return q;
}

/// d/dx [psi_hi phi_lo] by central differences.
double psi_phi_oracle(int n, int m, double x) {
    const int hi = std::max(n, m);
    const int lo = std::min(n, m);
    const double h = 1e-5;
    auto prod = [&](double y) { return psi(hi, y)[static_cast<size_t>(hi)] * phi(lo, y)[static_cast<size_t>(lo)]; };
    return (prod(x + h) - prod(x - h)) / (2 * h);
}

/// Trapezoid over [-12, 12]; spectrally accurate for these smooth, decaying integrands.
template <typename F>
double integrate(F f) {
    const int n = 6000;
    const double a = -12.0;
    const double h = 24.0 / n;
    double s = 0.0;
    for (int i = 0; i <= n; i++) {
        const double w = (i == 0 || i == n) ? 0.5 : 1.0;
        s += w * f(a + i * h);
    }
    return s * h;
}

}  // namespace

TEST(pattern, index_bounds) {
    EXPECT_THROW(pattern_value(5, 0, 0.1), std::invalid_argument);
    EXPECT_THROW(pattern_value(0, 7, 0.1), std::invalid_argument);
    EXPECT_THROW(pattern_value(-1, 0, 0.1), std::invalid_argument);
    EXPECT_NO_THROW(pattern_value(5, 0, 0.1, 6));
}

TEST(pattern, symmetry_and_parity) {
    for (int n = 0; n < kDim; n++) {
        for (int m = 0; m < kDim; m++) {
            for (double x : {0.3, 1.7, 3.9}) {
                EXPECT_EQ(pattern_value(n, m, x), pattern_value(m, n, x));
                EXPECT_EQ(pattern_value(n, m, -x), ((n + m) % 2 ? -1.0 : 1.0) * pattern_value(n, m, x));
            }
        }
    }
}

TEST(pattern, known_values) {
    // f_00(0) = 2 and f_00 of the standard kernel at x = 1: 2 (1 - 2 x D(x)).
    EXPECT_NEAR(pattern_kernel(0, 0, 0.0), 2.0, 1e-10);
    const double x = 1.0;
    const double dawson_1 = 0.5380795069127684;
    EXPECT_NEAR(pattern_kernel(0, 0, x), 2 * (1 - 2 * x * dawson_1), 1e-10);
}

TEST(pattern, kernel_matches_psi_phi_construction_near_diagonal) {
    for (int n = 0; n < kDim; n++) {
        for (int m = n; m <= std::min(n + 1, kDim - 1); m++) {
            for (double x : {0.0, 0.35, 1.1, 2.3, 3.7}) {
                const double oracle = psi_phi_oracle(n, m, x);
                EXPECT_NEAR(pattern_kernel(n, m, x), oracle, 1e-6 * std::max(1.0, std::abs(oracle)))
                    << "n=" << n << " m=" << m << " x=" << x;
            }
        }
    }
}

TEST(pattern, derivative_matches_finite_difference) {
    for (int n = 0; n < kDim; n++) {
        for (int m = n; m < kDim; m++) {
            for (double x : {0.2, 1.4, 2.9}) {
                const double h = 1e-5;
                const double fd = (pattern_kernel(n, m, x + h) - pattern_kernel(n, m, x - h)) / (2 * h);
                EXPECT_NEAR(pattern_kernel_derivative(n, m, x), fd, 1e-6);
            }
        }
    }
}

TEST(pattern, table_interpolation_accuracy) {
    const PatternTable &t = PatternTable::standard();
    EXPECT_EQ(t.dim(), 5);
    EXPECT_LE(t.step(), 1e-3);
    EXPECT_EQ(t.x_max(), 8.0);
    for (double x : {-7.3217, -2.00051, -0.41233, 0.0, 0.00037, 1.234567, 4.56789, 7.9999}) {
        for (int n = 0; n < kDim; n++) {
            for (int m = 0; m < kDim; m++) {
                EXPECT_NEAR(t.value(n, m, x), pattern_kernel(n, m, x), 1e-9) << n << m << " x=" << x;
            }
        }
    }
}

TEST(pattern, upper_values_match_values) {
    const PatternTable &t = PatternTable::standard();
    std::vector<double> all(25);
    std::vector<double> up(15);
    for (double x : {-3.1, 0.4, 9.0}) {
        t.values(x, all);
        t.upper_values(x, up);
        size_t q = 0;
        for (int n = 0; n < kDim; n++) {
            for (int m = n; m < kDim; m++) {
                EXPECT_EQ(up[q++], all[static_cast<size_t>(n * kDim + m)]);
            }
        }
    }
}

TEST(pattern, vacuum_reconstructs_unity) {
    const double v = integrate([](double x) {
        const double p0 = psi(0, x)[0];
        return pattern_value(0, 0, x) * p0 * p0;
    });
    EXPECT_NEAR(v, 1.0, 1e-8);
}

TEST(pattern, biorthogonality_on_matching_offsets) {
    // int f_nm psi_k psi_l dx = delta_nk delta_ml whenever k - l = n - m; for
    // other offsets the theta average supplies the remaining orthogonality.
    int checked = 0;
    for (int n = 0; n < kDim; n++) {
        for (int m = 0; m < kDim; m++) {
            for (int k = 0; k < kDim; k++) {
                for (int l = 0; l < kDim; l++) {
                    if (k - l != n - m) {
                        continue;
                    }
                    const double v = integrate([&](double x) {
                        const auto p = psi(kDim - 1, x);
                        return pattern_value(n, m, x) * p[static_cast<size_t>(k)] * p[static_cast<size_t>(l)];
                    });
                    EXPECT_NEAR(v, (n == k && m == l) ? 1.0 : 0.0, 1e-6) << n << m << k << l;
                    checked++;
                }
            }
        }
    }
    EXPECT_EQ(checked, 85);
}

TEST(pattern, table_vanishes_outside_grid) {
    for (int n = 0; n < kDim; n++) {
        for (int m = 0; m < kDim; m++) {
            EXPECT_EQ(pattern_value(n, m, 10.0), 0.0);
            EXPECT_EQ(pattern_value(n, m, -10.0), 0.0);
        }
    }
}

TEST(pattern, kernel_decays_algebraically) {
    // The untruncated functions fall off like 1/x^2, not exponentially.
    for (int n = 0; n < kDim; n++) {
        for (int m = n; m < kDim; m++) {
            const double a = std::abs(pattern_kernel(n, m, 10.0));
            const double b = std::abs(pattern_kernel(n, m, 20.0));
            EXPECT_LT(a, 0.05);
            EXPECT_LT(b, a);
        }
    }
    EXPECT_NEAR(pattern_kernel(0, 0, 10.0) * 100.0, -1.0, 0.05);
}

TEST(pattern, larger_truncation_tables) {
    const PatternTable &t7 = PatternTable::for_dim(7);
    EXPECT_EQ(t7.dim(), 7);
    EXPECT_EQ(&t7, &PatternTable::for_dim(7));
    EXPECT_NEAR(t7.value(6, 5, 0.8), pattern_kernel(6, 5, 0.8), 1e-9);
    EXPECT_NEAR(t7.value(2, 3, 0.8), pattern_value(2, 3, 0.8), 1e-12);
}
