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

#ifndef CVDISTILL_CONFIG_H
#define CVDISTILL_CONFIG_H

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cvdistill/protocol.h"
#include "cvdistill/source.h"
#include "cvdistill/tomography.h"

namespace cvdistill {

/// Which protocol variants a harness run covers.
enum class ModeSelection { kSingle, kIterative, kBoth };

ModeSelection mode_selection_from_string(const std::string &name);
std::string to_string(ModeSelection modes);
std::vector<ProtocolMode> expand(ModeSelection modes);

struct TomographySettings {
    bool enabled = true;
    TomographyPlan plan = TomographyPlan::product_grid(10, 10, 300000);
    int dim = kDefaultFockDim;
    int n_blocks = 20;
    int bootstrap_resamples = 50;
};

/// Full description of a harness run. Every field has a default except seed.
struct ExperimentConfig {
    SourceSet sources{};
    NoiseSpec noise = NoiseSpec::uniform(kDefaultPhaseNoise);
    ProtocolConfig protocol{};
    ModeSelection modes = ModeSelection::kBoth;
    /// Ascending; thresholds apply to both stages. Infinity means "always accept".
    std::vector<double> thresholds{0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0, kNoThreshold};
    uint64_t trials_per_point = 100000;
    TomographySettings tomography{};
    std::optional<uint64_t> seed;
    int workers = 1;
    std::string output_dir = "out";
    /// Samples of the phase distribution used when calibrating sigma.
    uint64_t calibration_phase_samples = 100000;
    double target_yield = 0.1;
    std::optional<double> target_input_total_variance;

    /// Phase-noise sigma for which the single-stage distillate at 10% yield has
    /// I ~ 0.843 with the default 5 dB / 9 dB sources.
    static constexpr double kDefaultPhaseNoise = 0.44;

    /// Throws ConfigError describing the first violated constraint.
    void validate() const;
    uint64_t require_seed() const;
};

/// Parses a JSON document. Unknown keys are rejected. Thresholds may be
/// numbers, "inf" or null (infinite).
ExperimentConfig parse_config(const std::string &json_text);
ExperimentConfig load_config(const std::string &path);

/// Canonical JSON of every field that influences results (output_dir and
/// workers excluded).
std::string canonical_config_json(const ExperimentConfig &config);

/// 64-bit FNV-1a of canonical_config_json, as 16 hex digits.
std::string config_hash(const ExperimentConfig &config);

}  // namespace cvdistill

#endif
