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

#include "cvdistill/protocol.h"

#include <cmath>
#include <stdexcept>

#include "parallel.h"

namespace cvdistill {

namespace {

constexpr uint64_t kTrialDomain = 0x545249414CULL;

using Pairs = std::array<GaussianState, 3>;

Pairs make_pairs(const SourceSet &sources) {
    return {make_pair(make_squeezed(sources[0])), make_pair(make_squeezed(sources[1])),
            make_pair(make_squeezed(sources[2]))};
}

struct RawTrial {
    double d1;
    double d2;
    bool ran_stage2;
    bool accepted;
    bool stage1_accepted;
    GaussianState output;
};

RawTrial run_trial_impl(const ProtocolConfig &config, const Pairs &pairs, const NoiseSpec &noise, Rng &rng,
                        double q1, double q2) {
    const PhaseSample phases = sample_phases(noise, rng);
    const GaussianState copy1 = decohere(pairs[0], phases[0], phases[1]);
    const GaussianState copy2 = decohere(pairs[1], phases[2], phases[3]);

    StageResult s1 = distill_stage(tensor(copy1, copy2), config.stage1_transmittance, q1, rng, config.visibility);
    RawTrial out{s1.diff, std::nan(""), false, s1.accepted, s1.accepted, std::move(s1.output)};
    if (config.mode == ProtocolMode::kSingleStage || !s1.accepted) {
        return out;
    }

    const GaussianState copy3 = decohere(pairs[2], phases[4], phases[5]);
    GaussianState input = config.survivor_in_transmitted_port ? tensor(out.output, copy3) : tensor(copy3, out.output);
    StageResult s2 = distill_stage(input, config.stage2_transmittance, q2, rng, config.visibility);
    out.d2 = s2.diff;
    out.ran_stage2 = true;
    out.accepted = s2.accepted;
    out.output = std::move(s2.output);
    return out;
}

}  // namespace

std::string to_string(ProtocolMode mode) {
    return mode == ProtocolMode::kIterative ? "iterative" : "single";
}

ProtocolMode protocol_mode_from_string(const std::string &name) {
    if (name == "single" || name == "single_stage") {
        return ProtocolMode::kSingleStage;
    }
    if (name == "iterative") {
        return ProtocolMode::kIterative;
    }
    throw std::invalid_argument("unknown protocol mode '" + name + "' (expected single or iterative)");
}

void ProtocolConfig::validate() const {
    if (!(threshold_stage1 >= 0.0) || !(threshold_stage2 >= 0.0)) {
        throw std::invalid_argument("ProtocolConfig: thresholds must be >= 0");
    }
    auto open_unit = [](double t) { return t > 0.0 && t < 1.0; };
    if (!open_unit(stage1_transmittance) || !open_unit(stage2_transmittance)) {
        throw std::invalid_argument("ProtocolConfig: transmittances must lie in (0, 1)");
    }
    if (!(visibility > 0.0 && visibility <= 1.0)) {
        throw std::invalid_argument("ProtocolConfig: visibility must lie in (0, 1]");
    }
}

StageResult distill_stage(const GaussianState &input, double transmittance, double threshold, Rng &rng,
                          double visibility) {
    if (input.n_modes() != 4) {
        throw std::invalid_argument("distill_stage: expected modes (A_keep, B_keep, A_new, B_new)");
    }
    GaussianState s = input;
    if (visibility < 1.0) {
        const double eff = visibility * visibility;
        for (size_t m = 0; m < 4; m++) {
            s = attenuate(s, m, eff);
        }
    }
    s = beamsplitter(s, 0, 2, transmittance);
    s = beamsplitter(s, 1, 3, transmittance);
    // Reflected ports: A at mode 2, then B, which sits at mode 2 once A is consumed.
    HomodyneOutcome a = homodyne_sample(s, 2, 0.0, rng);
    HomodyneOutcome b = homodyne_sample(a.remaining, 2, 0.0, rng);
    const double diff = a.value - b.value;
    return {std::abs(diff) <= threshold, diff, a.value, b.value, std::move(b.remaining)};
}

Rng trial_stream(uint64_t seed, uint64_t index) {
    return substream(seed, kTrialDomain, index);
}

TrialOutcome run_trial(const ProtocolConfig &config, const SourceSet &sources, const NoiseSpec &noise, Rng &rng) {
    config.validate();
    noise.validate();
    const Pairs pairs = make_pairs(sources);
    RawTrial raw = run_trial_impl(config, pairs, noise, rng, config.threshold_stage1, config.threshold_stage2);
    TrialOutcome out;
    out.accepted = raw.accepted;
    out.stage1_accepted = raw.stage1_accepted;
    out.stage1_diff = raw.d1;
    if (raw.ran_stage2) {
        out.stage2_diff = raw.d2;
    }
    if (raw.accepted) {
        out.output = std::move(raw.output);
    }
    out.copies_consumed = config.copies_per_attempt();
    return out;
}

double Distillate::yield() const {
    if (attempts == 0) {
        return 0.0;
    }
    return static_cast<double>(accepts) / (static_cast<double>(attempts) * copies_per_attempt);
}

double Distillate::acceptance_probability() const {
    return attempts == 0 ? 0.0 : static_cast<double>(accepts) / static_cast<double>(attempts);
}

GaussianEnsemble Distillate::ensemble() const {
    return GaussianEnsemble::uniform(components);
}

Distillate run_batch(const ProtocolConfig &config, const SourceSet &sources, const NoiseSpec &noise,
                     uint64_t n_trials, uint64_t seed, int workers) {
    if (n_trials == 0) {
        throw std::invalid_argument("run_batch: n_trials must be >= 1");
    }
    config.validate();
    noise.validate();
    const Pairs pairs = make_pairs(sources);

    struct Partial {
        std::vector<GaussianState> components;
        uint64_t accepts = 0;
        uint64_t stage1_accepts = 0;
    };
    std::vector<Partial> partials(static_cast<size_t>(std::max(1, workers)));
    internal::parallel_chunks(n_trials, workers, [&](int w, uint64_t begin, uint64_t end) {
        Partial &p = partials[static_cast<size_t>(w)];
        for (uint64_t i = begin; i < end; i++) {
            Rng rng = trial_stream(seed, i);
            RawTrial raw = run_trial_impl(config, pairs, noise, rng, config.threshold_stage1, config.threshold_stage2);
            p.stage1_accepts += raw.stage1_accepted ? 1 : 0;
            if (raw.accepted) {
                p.accepts++;
                p.components.push_back(std::move(raw.output));
            }
        }
    });

    Distillate out;
    out.attempts = n_trials;
    out.copies_per_attempt = config.copies_per_attempt();
    for (auto &p : partials) {
        out.accepts += p.accepts;
        out.stage1_accepts += p.stage1_accepts;
        for (auto &c : p.components) {
            out.components.push_back(std::move(c));
        }
    }
    return out;
}

std::vector<TrialRecord> record_batch(const ProtocolConfig &config, const SourceSet &sources, const NoiseSpec &noise,
                                      uint64_t n_trials, uint64_t seed, int workers) {
    if (n_trials == 0) {
        throw std::invalid_argument("record_batch: n_trials must be >= 1");
    }
    config.validate();
    noise.validate();
    const Pairs pairs = make_pairs(sources);
    std::vector<TrialRecord> records(n_trials);
    internal::parallel_chunks(n_trials, workers, [&](int, uint64_t begin, uint64_t end) {
        for (uint64_t i = begin; i < end; i++) {
            Rng rng = trial_stream(seed, i);
            RawTrial raw = run_trial_impl(config, pairs, noise, rng, kNoThreshold, kNoThreshold);
            records[i] = TrialRecord{raw.d1, raw.d2, std::move(raw.output)};
        }
    });
    return records;
}

bool accepts(const TrialRecord &record, ProtocolMode mode, double threshold_stage1, double threshold_stage2) {
    if (!(std::abs(record.stage1_diff) <= threshold_stage1)) {
        return false;
    }
    return mode == ProtocolMode::kSingleStage || std::abs(record.stage2_diff) <= threshold_stage2;
}

Distillate select(const std::vector<TrialRecord> &records, ProtocolMode mode, double threshold_stage1,
                  double threshold_stage2) {
    Distillate out;
    out.attempts = records.size();
    out.copies_per_attempt = mode == ProtocolMode::kIterative ? 3 : 2;
    if (!records.empty() && (mode == ProtocolMode::kIterative) == std::isnan(records.front().stage2_diff)) {
        throw std::invalid_argument("select: records were made in a different protocol mode");
    }
    for (const auto &r : records) {
        if (std::abs(r.stage1_diff) <= threshold_stage1) {
            out.stage1_accepts++;
        }
        if (accepts(r, mode, threshold_stage1, threshold_stage2)) {
            out.accepts++;
            out.components.push_back(r.output);
        }
    }
    return out;
}

}  // namespace cvdistill
