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

#ifndef CVDISTILL_HARNESS_H
#define CVDISTILL_HARNESS_H

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cvdistill/config.h"
#include "cvdistill/measures.h"
#include "cvdistill/protocol.h"
#include "cvdistill/tomography.h"

namespace cvdistill {

const char *version_string();

struct RunMetadata {
    std::string config_hash;
    uint64_t seed = 0;
    std::string version;
};

/// One (mode, Q) point. Measures are NaN when there were no accepts, and
/// E_n / purity are NaN when tomography is disabled.
struct SweepRow {
    ProtocolMode mode = ProtocolMode::kSingleStage;
    double threshold = kNoThreshold;
    double yield = 0.0;
    double acceptance_probability = 0.0;
    uint64_t accepts = 0;
    uint64_t attempts = 0;
    MeasureReport measures;
    std::optional<FockDM> rho;
};

/// Where the distillate E_n curve crosses the decohered-input E_n.
struct BreakEven {
    ProtocolMode mode = ProtocolMode::kSingleStage;
    bool found = false;
    /// Linear interpolation between the bracketing rows.
    double threshold = 0.0;
    double acceptance_probability = 0.0;
    std::string note;
};

struct SweepResult {
    RunMetadata metadata;
    std::vector<SweepRow> rows;
    /// Phase-diffused input pair (tomography path when enabled).
    MeasureReport input;
    /// Gaussian-oracle E_n of the noiseless input pair.
    double clean_pair_log_negativity = 0.0;
    double clean_pair_total_variance = 0.0;
    std::vector<BreakEven> break_even;
    std::vector<std::string> warnings;
};

using ProgressFn = std::function<void(const std::string &)>;

/// Threshold sweep: for each selected mode, one record_batch at the master
/// seed (both modes share trial streams) and one row per threshold with
/// Q1 = Q2 = Q. Every row is tomographed with the same tomography seed.
SweepResult run_sweep(const ExperimentConfig &config, const ProgressFn &progress = {});

/// Ensemble I of a phase-diffused pair with uniform noise sigma on both beams,
/// estimated from n_samples phase draws (common random numbers across sigma).
double decohered_pair_total_variance(const SqueezerSpec &source, double sigma, size_t n_samples, uint64_t seed);

/// Bisection over a uniform sigma in [0, pi] such that the decohered pair's
/// ensemble I matches target within 0.5% relative. Throws
/// std::invalid_argument for targets below the clean-pair I or above I(pi).
double calibrate_sigma(double target_input_total_variance, const SqueezerSpec &source, size_t n_samples,
                       uint64_t seed);

/// Threshold reaching a target yield on a fixed set of trial records.
struct YieldPoint {
    double threshold = kNoThreshold;
    double yield = 0.0;
    uint64_t accepts = 0;
    uint64_t attempts = 0;
    int iterations = 0;
};

/// Monotone bisection over Q (Q1 = Q2) toward the accept count nearest the
/// target; returns the closest point within `relative_tolerance` of target.
/// Throws UnreachableYield when the target is outside the feasible range and
/// NumericalFailure when 40 iterations find no point within tolerance.
YieldPoint find_threshold_for_yield(const std::vector<TrialRecord> &records, ProtocolMode mode, double target_yield,
                                    double relative_tolerance = 0.02);

struct YieldRow {
    ProtocolMode mode = ProtocolMode::kSingleStage;
    YieldPoint point;
    MeasureReport measures;
    bool tomographed = false;
};

struct YieldComparison {
    RunMetadata metadata;
    double target_yield = 0.0;
    YieldRow single_stage;
    YieldRow iterative;
    /// I(iterative) - I(single) and its standard error (independent blocks).
    double total_variance_difference = 0.0;
    double total_variance_difference_stderr = 0.0;
};

/// Equal-yield comparison of the two protocols at config.target_yield.
YieldComparison equal_yield_compare(const ExperimentConfig &config, const ProgressFn &progress = {});

/// Single-stage I at the target yield for a given uniform sigma.
double distilled_total_variance_at_yield(const ExperimentConfig &config, double sigma);

/// Bisection over a uniform sigma such that the single-stage distillate at
/// config.target_yield has I within `tolerance` of target.
double calibrate_sigma_to_distillate(double target_total_variance, const ExperimentConfig &config,
                                     double tolerance = 1e-3, const ProgressFn &progress = {});

}  // namespace cvdistill

#endif
