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

#ifndef CVDISTILL_SOURCE_H
#define CVDISTILL_SOURCE_H

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cvdistill/gaussian_state.h"
#include "cvdistill/random.h"

namespace cvdistill {

/// Squeezed-light source, quoted in dB relative to shot noise.
struct SqueezerSpec {
    double squeezing_db = 5.0;
    double antisqueezing_db = 9.0;

    double squeezed_variance() const;
    double antisqueezed_variance() const;
};

inline constexpr size_t kNumBeams = 6;

/// Standard deviation (radians) of the Gaussian phase noise on each distributed
/// beam, ordered (A1, B1, A2, B2, A3, B3).
struct NoiseSpec {
    std::array<double, kNumBeams> sigma_per_beam{};

    static NoiseSpec uniform(double sigma);

    /// Throws std::invalid_argument on negative or non-finite entries.
    void validate() const;
    /// Human-readable notes for entries >= pi, where the phase distribution wraps.
    std::vector<std::string> warnings() const;
};

using PhaseSample = std::array<double, kNumBeams>;

/// Single-mode squeezed vacuum with cov = diag(Vx, Vp).
GaussianState make_squeezed(const SqueezerSpec &spec);

/// Splits a single-mode state with vacuum on a balanced beam splitter and
/// flips the phase of B by pi, so that X_A - X_B and P_A + P_B are the
/// correlated combinations. Modes are ordered (A, B).
GaussianState make_pair(const GaussianState &squeezed);

PhaseSample sample_phases(const NoiseSpec &noise, Rng &rng);

/// One component of the phase-diffused mixture: rotate A by theta_a and B by theta_b.
GaussianState decohere(const GaussianState &pair, double theta_a, double theta_b);

/// Mixes `mode` with vacuum on a beam splitter of transmittance `efficiency`
/// and traces the vacuum port out. Used as a mode-mismatch model with
/// efficiency = visibility^2.
GaussianState attenuate(const GaussianState &state, size_t mode, double efficiency);

/// Phase-diffused copies of pair `pair_index` (0, 1 or 2), one per sample,
/// drawn with the noise of beams (2*pair_index, 2*pair_index + 1).
GaussianEnsemble decohered_pair_ensemble(const SqueezerSpec &source, const NoiseSpec &noise, size_t pair_index,
                                         size_t n_samples, uint64_t seed);

}  // namespace cvdistill

#endif
