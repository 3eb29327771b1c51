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

#include "cvdistill/config.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "cvdistill/errors.h"
#include "json.hpp"

namespace cvdistill {

using nlohmann::json;

namespace {

void reject_unknown(const json &obj, const std::set<std::string> &known, const std::string &where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!known.count(it.key())) {
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
        }
    }
}

double threshold_from_json(const json &v) {
    if (v.is_null()) {
        return kNoThreshold;
    }
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "+inf" || s == "infinity") {
            return kNoThreshold;
        }
        throw ConfigError("threshold string must be \"inf\", got \"" + s + "\"");
    }
    if (!v.is_number()) {
        throw ConfigError("thresholds must be numbers or \"inf\"");
    }
    return v.get<double>();
}

json threshold_to_json(double q) {
    if (std::isinf(q)) {
        return "inf";
    }
    return q;
}

template <typename T>
T get_or(const json &obj, const char *key, T fallback) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
        return fallback;
    }
    try {
        return it->get<T>();
    } catch (const json::exception &e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

SqueezerSpec squeezer_from_json(const json &j) {
    reject_unknown(j, {"squeezing_db", "antisqueezing_db"}, "sources");
    SqueezerSpec s;
    s.squeezing_db = get_or(j, "squeezing_db", s.squeezing_db);
    s.antisqueezing_db = get_or(j, "antisqueezing_db", s.antisqueezing_db);
    return s;
}

}  // namespace

ModeSelection mode_selection_from_string(const std::string &name) {
    if (name == "single") {
        return ModeSelection::kSingle;
    }
    if (name == "iterative") {
        return ModeSelection::kIterative;
    }
    if (name == "both") {
        return ModeSelection::kBoth;
    }
    throw ConfigError("mode must be single, iterative or both (got '" + name + "')");
}

std::string to_string(ModeSelection modes) {
    switch (modes) {
        case ModeSelection::kSingle:
            return "single";
        case ModeSelection::kIterative:
            return "iterative";
        default:
            return "both";
    }
}

std::vector<ProtocolMode> expand(ModeSelection modes) {
    switch (modes) {
        case ModeSelection::kSingle:
            return {ProtocolMode::kSingleStage};
        case ModeSelection::kIterative:
            return {ProtocolMode::kIterative};
        default:
            return {ProtocolMode::kSingleStage, ProtocolMode::kIterative};
    }
}

void ExperimentConfig::validate() const {
    for (const auto &s : sources) {
        if (!(s.squeezing_db >= 0.0) || !(s.antisqueezing_db >= s.squeezing_db)) {
            throw ConfigError("sources: need squeezing_db >= 0 and antisqueezing_db >= squeezing_db");
        }
    }
    try {
        noise.validate();
        protocol.validate();
        tomography.plan.validate();
    } catch (const std::invalid_argument &e) {
        throw ConfigError(e.what());
    }
    if (thresholds.empty()) {
        throw ConfigError("thresholds: at least one value required");
    }
    for (double q : thresholds) {
        if (!(q >= 0.0)) {
            throw ConfigError("thresholds must be >= 0");
        }
    }
    if (!std::is_sorted(thresholds.begin(), thresholds.end())) {
        throw ConfigError("thresholds must be sorted ascending");
    }
    if (trials_per_point < 100) {
        throw ConfigError("trials_per_point must be >= 100");
    }
    if (workers < 1) {
        throw ConfigError("workers must be >= 1");
    }
    if (tomography.dim < 1 || tomography.n_blocks < 1 || tomography.bootstrap_resamples < 0) {
        throw ConfigError("tomography: dim and n_blocks must be >= 1");
    }
    if (calibration_phase_samples < 1) {
        throw ConfigError("calibration.phase_samples must be >= 1");
    }
    if (!(target_yield > 0.0 && target_yield <= 0.5)) {
        throw ConfigError("target_yield must lie in (0, 0.5]");
    }
}

uint64_t ExperimentConfig::require_seed() const {
    if (!seed) {
        throw ConfigError("seed is required (set \"seed\" in the config or pass --seed)");
    }
    return *seed;
}

ExperimentConfig parse_config(const std::string &json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error &e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    reject_unknown(j,
                   {"seed", "workers", "output_dir", "sources", "noise", "protocol", "modes", "thresholds",
                    "trials_per_point", "tomography", "calibration", "target_yield"},
                   "config");
    ExperimentConfig c;
    if (j.contains("seed") && !j["seed"].is_null()) {
        if (!j["seed"].is_number_integer()) {
            throw ConfigError("seed must be an integer");
        }
        c.seed = j["seed"].get<uint64_t>();
    }
    c.workers = get_or(j, "workers", c.workers);
    c.output_dir = get_or(j, "output_dir", c.output_dir);
    if (j.contains("sources")) {
        const json &s = j["sources"];
        if (s.is_array()) {
            if (s.size() != 3) {
                throw ConfigError("sources: expected one entry per pair (3)");
            }
            for (size_t k = 0; k < 3; k++) {
                c.sources[k] = squeezer_from_json(s[k]);
            }
        } else if (s.is_object()) {
            c.sources.fill(squeezer_from_json(s));
        } else {
            throw ConfigError("sources must be an object or a list of three objects");
        }
    }
    if (j.contains("noise")) {
        const json &n = j["noise"];
        reject_unknown(n, {"sigma", "sigma_per_beam"}, "noise");
        if (n.contains("sigma") && n.contains("sigma_per_beam")) {
            throw ConfigError("noise: give either sigma or sigma_per_beam, not both");
        }
        if (n.contains("sigma")) {
            c.noise = NoiseSpec::uniform(get_or(n, "sigma", 0.0));
        }
        if (n.contains("sigma_per_beam")) {
            auto v = get_or(n, "sigma_per_beam", std::vector<double>{});
            if (v.size() != kNumBeams) {
                throw ConfigError("noise.sigma_per_beam needs 6 entries (A1, B1, A2, B2, A3, B3)");
            }
            std::copy(v.begin(), v.end(), c.noise.sigma_per_beam.begin());
        }
    }
    if (j.contains("protocol")) {
        const json &p = j["protocol"];
        reject_unknown(p, {"stage1_transmittance", "stage2_transmittance", "visibility", "survivor_in_transmitted_port"},
                       "protocol");
        c.protocol.stage1_transmittance = get_or(p, "stage1_transmittance", c.protocol.stage1_transmittance);
        c.protocol.stage2_transmittance = get_or(p, "stage2_transmittance", c.protocol.stage2_transmittance);
        c.protocol.visibility = get_or(p, "visibility", c.protocol.visibility);
        c.protocol.survivor_in_transmitted_port =
            get_or(p, "survivor_in_transmitted_port", c.protocol.survivor_in_transmitted_port);
    }
    if (j.contains("modes")) {
        c.modes = mode_selection_from_string(get_or<std::string>(j, "modes", "both"));
    }
    if (j.contains("thresholds")) {
        if (!j["thresholds"].is_array()) {
            throw ConfigError("thresholds must be a list");
        }
        c.thresholds.clear();
        for (const auto &v : j["thresholds"]) {
            c.thresholds.push_back(threshold_from_json(v));
        }
    }
    c.trials_per_point = get_or(j, "trials_per_point", c.trials_per_point);
    if (j.contains("tomography")) {
        const json &t = j["tomography"];
        reject_unknown(t, {"enabled", "n_slices", "samples_per_slice", "dim", "n_blocks", "bootstrap_resamples"},
                       "tomography");
        c.tomography.enabled = get_or(t, "enabled", c.tomography.enabled);
        const int n_slices = get_or(t, "n_slices", c.tomography.plan.n_slices);
        const uint64_t per_slice = get_or(t, "samples_per_slice", c.tomography.plan.samples_per_slice);
        if (n_slices < 1 || per_slice < 1) {
            throw ConfigError("tomography: n_slices and samples_per_slice must be >= 1");
        }
        c.tomography.plan = TomographyPlan::with_slices(n_slices, per_slice);
        c.tomography.dim = get_or(t, "dim", c.tomography.dim);
        c.tomography.n_blocks = get_or(t, "n_blocks", c.tomography.n_blocks);
        c.tomography.bootstrap_resamples = get_or(t, "bootstrap_resamples", c.tomography.bootstrap_resamples);
    }
    if (j.contains("calibration")) {
        const json &cal = j["calibration"];
        reject_unknown(cal, {"phase_samples", "target_input_total_variance"}, "calibration");
        c.calibration_phase_samples = get_or(cal, "phase_samples", c.calibration_phase_samples);
        if (cal.contains("target_input_total_variance") && !cal["target_input_total_variance"].is_null()) {
            c.target_input_total_variance = get_or(cal, "target_input_total_variance", 0.0);
        }
    }
    c.target_yield = get_or(j, "target_yield", c.target_yield);
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string canonical_config_json(const ExperimentConfig &c) {
    json j;
    j["seed"] = c.seed ? json(*c.seed) : json(nullptr);
    json sources = json::array();
    for (const auto &s : c.sources) {
        sources.push_back({{"squeezing_db", s.squeezing_db}, {"antisqueezing_db", s.antisqueezing_db}});
    }
    j["sources"] = sources;
    j["noise"] = {{"sigma_per_beam", c.noise.sigma_per_beam}};
    j["protocol"] = {{"stage1_transmittance", c.protocol.stage1_transmittance},
                     {"stage2_transmittance", c.protocol.stage2_transmittance},
                     {"visibility", c.protocol.visibility},
                     {"survivor_in_transmitted_port", c.protocol.survivor_in_transmitted_port}};
    j["modes"] = to_string(c.modes);
    json qs = json::array();
    for (double q : c.thresholds) {
        qs.push_back(threshold_to_json(q));
    }
    j["thresholds"] = qs;
    j["trials_per_point"] = c.trials_per_point;
    j["tomography"] = {{"enabled", c.tomography.enabled},
                       {"n_slices", c.tomography.plan.n_slices},
                       {"samples_per_slice", c.tomography.plan.samples_per_slice},
                       {"dim", c.tomography.dim},
                       {"n_blocks", c.tomography.n_blocks},
                       {"bootstrap_resamples", c.tomography.bootstrap_resamples}};
    j["calibration"] = {{"phase_samples", c.calibration_phase_samples},
                        {"target_input_total_variance", c.target_input_total_variance
                                                            ? json(*c.target_input_total_variance)
                                                            : json(nullptr)}};
    j["target_yield"] = c.target_yield;
    return j.dump();
}

std::string config_hash(const ExperimentConfig &config) {
    const std::string text = canonical_config_json(config);
    uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001B3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace cvdistill
