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

#include "cvdistill/source.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cvdistill {

namespace {
constexpr uint64_t kPhaseEnsembleDomain = 0x5048415345ULL;
}

double SqueezerSpec::squeezed_variance() const {
    return kVacuumVariance * std::pow(10.0, -squeezing_db / 10.0);
}

double SqueezerSpec::antisqueezed_variance() const {
    return kVacuumVariance * std::pow(10.0, antisqueezing_db / 10.0);
}

NoiseSpec NoiseSpec::uniform(double sigma) {
    NoiseSpec n;
    n.sigma_per_beam.fill(sigma);
    return n;
}

void NoiseSpec::validate() const {
    for (double s : sigma_per_beam) {
        if (!(s >= 0.0) || !std::isfinite(s)) {
            throw std::invalid_argument("NoiseSpec: phase noise sigma must be finite and >= 0");
        }
    }
}

std::vector<std::string> NoiseSpec::warnings() const {
    std::vector<std::string> out;
    for (size_t k = 0; k < kNumBeams; k++) {
        if (sigma_per_beam[k] >= std::numbers::pi) {
            out.push_back("beam " + std::to_string(k) + ": phase noise sigma >= pi; the phase distribution wraps");
        }
    }
    return out;
}

GaussianState make_squeezed(const SqueezerSpec &spec) {
    const double vx = spec.squeezed_variance();
    const double vp = spec.antisqueezed_variance();
    if (!std::isfinite(vx) || !std::isfinite(vp) || vx * vp < kVacuumVariance * kVacuumVariance * (1.0 - 1e-12)) {
        throw std::invalid_argument("make_squeezed: Vx*Vp below 1/16 violates the uncertainty relation");
    }
    Eigen::MatrixXd cov(2, 2);
    cov << vx, 0.0, 0.0, vp;
    return GaussianState(Eigen::VectorXd::Zero(2), std::move(cov));
}

GaussianState make_pair(const GaussianState &squeezed) {
    if (squeezed.n_modes() != 1) {
        throw std::invalid_argument("make_pair: expected a single-mode input");
    }
    GaussianState pair = beamsplitter(tensor(squeezed, vacuum_state(1)), 0, 1, 0.5);
    return phase_shift(pair, 1, std::numbers::pi);
}

PhaseSample sample_phases(const NoiseSpec &noise, Rng &rng) {
    PhaseSample out{};
    for (size_t k = 0; k < kNumBeams; k++) {
        out[k] = noise.sigma_per_beam[k] * standard_normal(rng);
    }
    return out;
}

GaussianState decohere(const GaussianState &pair, double theta_a, double theta_b) {
    if (pair.n_modes() != 2) {
        throw std::invalid_argument("decohere: expected a two-mode state");
    }
    return phase_shift(phase_shift(pair, 0, theta_a), 1, theta_b);
}

GaussianState attenuate(const GaussianState &state, size_t mode, double efficiency) {
    if (efficiency == 1.0) {
        return state;
    }
    const size_t n = state.n_modes();
    GaussianState mixed = beamsplitter(tensor(state, vacuum_state(1)), mode, n, efficiency);
    std::vector<size_t> keep(n);
    for (size_t k = 0; k < n; k++) {
        keep[k] = k;
    }
    return keep_modes(mixed, keep);
}

GaussianEnsemble decohered_pair_ensemble(const SqueezerSpec &source, const NoiseSpec &noise, size_t pair_index,
                                         size_t n_samples, uint64_t seed) {
    if (pair_index > 2) {
        throw std::invalid_argument("decohered_pair_ensemble: pair index must be 0, 1 or 2");
    }
    noise.validate();
    const GaussianState pair = make_pair(make_squeezed(source));
    const double sa = noise.sigma_per_beam[2 * pair_index];
    const double sb = noise.sigma_per_beam[2 * pair_index + 1];
    if (sa == 0.0 && sb == 0.0) {
        return GaussianEnsemble::uniform({pair});
    }
    Rng rng = substream(seed, kPhaseEnsembleDomain, pair_index);
    std::vector<GaussianState> comps;
    comps.reserve(n_samples);
    for (size_t i = 0; i < n_samples; i++) {
        const double ta = sa * standard_normal(rng);
        const double tb = sb * standard_normal(rng);
        comps.push_back(decohere(pair, ta, tb));
    }
    return GaussianEnsemble::uniform(std::move(comps));
}

}  // namespace cvdistill
