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

#ifndef CVDISTILL_RANDOM_H
#define CVDISTILL_RANDOM_H

#include <cstdint>
#include <random>

namespace cvdistill {

using Rng = std::mt19937_64;

/// Mixes (seed, stream index) into a well-separated 64-bit seed.
uint64_t mix_seed(uint64_t seed, uint64_t index);

/// Independent generator for the index-th substream of a master seed. Trials,
/// tomography slices and bootstrap resamples each draw from their own
/// substream, so results do not depend on how work is split across threads.
Rng substream(uint64_t seed, uint64_t index);

/// Substream keyed by a domain tag as well, so that e.g. trial 7 and slice 7
/// never share a generator.
Rng substream(uint64_t seed, uint64_t domain, uint64_t index);

inline double standard_normal(Rng &rng) {
    return std::normal_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace cvdistill

#endif
