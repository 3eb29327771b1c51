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

#ifndef CVDISTILL_PROTOCOL_H
#define CVDISTILL_PROTOCOL_H

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cvdistill/gaussian_state.h"
#include "cvdistill/random.h"
#include "cvdistill/source.h"

namespace cvdistill {

enum class ProtocolMode { kSingleStage, kIterative };

std::string to_string(ProtocolMode mode);
ProtocolMode protocol_mode_from_string(const std::string &name);

inline constexpr double kNoThreshold = std::numeric_limits<double>::infinity();

struct ProtocolConfig {
    /// Trigger thresholds on |x_A - x_B| in vacuum-variance-1/4 units.
    double threshold_stage1 = kNoThreshold;
    double threshold_stage2 = kNoThreshold;
    double stage1_transmittance = 0.5;
    double stage2_transmittance = 2.0 / 3.0;
    ProtocolMode mode = ProtocolMode::kIterative;
    /// Stage 2 feeds the stage-1 survivor into the transmitted port. Setting
    /// this to false swaps the survivor and the fresh copy.
    bool survivor_in_transmitted_port = true;
    /// Interference visibility at the distillation beam splitters; 1 is ideal.
    double visibility = 1.0;

    int copies_per_attempt() const {
        return mode == ProtocolMode::kIterative ? 3 : 2;
    }
    void validate() const;
};

using SourceSet = std::array<SqueezerSpec, 3>;

struct StageResult {
    bool accepted;
    double diff;
    double x_a;
    double x_b;
    /// Conditioned state of the two kept ports (A, B), returned whether or not
    /// the trigger fired.
    GaussianState output;
};

/// One two-copy distillation step on modes (A_keep, B_keep, A_new, B_new).
/// Mixes A_keep with A_new and B_keep with B_new at transmittance T, measures
/// x on both reflected ports and accepts iff |x_A - x_B| <= Q.
StageResult distill_stage(const GaussianState &input, double transmittance, double threshold, Rng &rng,
                          double visibility = 1.0);

struct TrialOutcome {
    bool accepted = false;
    bool stage1_accepted = false;
    double stage1_diff = 0.0;
    std::optional<double> stage2_diff;
    std::optional<GaussianState> output;
    int copies_consumed = 0;
};

/// One Monte Carlo attempt. All random numbers come from `rng` in a fixed order
/// (phases of pairs 1 and 2, stage-1 homodynes, phases of pair 3, stage-2
/// homodynes), so a larger threshold accepts a superset of the same trials.
TrialOutcome run_trial(const ProtocolConfig &config, const SourceSet &sources, const NoiseSpec &noise, Rng &rng);

struct Distillate {
    std::vector<GaussianState> components;
    uint64_t attempts = 0;
    uint64_t accepts = 0;
    uint64_t stage1_accepts = 0;
    int copies_per_attempt = 2;

    double yield() const;
    double acceptance_probability() const;
    GaussianEnsemble ensemble() const;
};

/// Generator of trial `index` under master seed `seed`.
Rng trial_stream(uint64_t seed, uint64_t index);

/// Runs trials 0..n_trials-1, trial i on trial_stream(seed, i), split across
/// `workers` threads. The result does not depend on `workers`.
Distillate run_batch(const ProtocolConfig &config, const SourceSet &sources, const NoiseSpec &noise,
                     uint64_t n_trials, uint64_t seed, int workers = 1);

/// Unthresholded record of one trial, from which the outcome at any
/// thresholds can be read off without rerunning.
struct TrialRecord {
    double stage1_diff;
    double stage2_diff;  // NaN in single-stage mode
    GaussianState output;
};

/// Runs every trial with both thresholds infinite.
std::vector<TrialRecord> record_batch(const ProtocolConfig &config, const SourceSet &sources, const NoiseSpec &noise,
                                      uint64_t n_trials, uint64_t seed, int workers = 1);

bool accepts(const TrialRecord &record, ProtocolMode mode, double threshold_stage1, double threshold_stage2);

/// Equivalent to run_batch at the given thresholds with the same seed.
Distillate select(const std::vector<TrialRecord> &records, ProtocolMode mode, double threshold_stage1,
                  double threshold_stage2);

}  // namespace cvdistill

#endif
