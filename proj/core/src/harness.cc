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

#include "cvdistill/harness.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "cvdistill/errors.h"
#include "cvdistill/random.h"
#include "cvdistill/source.h"

#ifndef CVDISTILL_VERSION_STRING
#define CVDISTILL_VERSION_STRING "unknown"
#endif

namespace cvdistill {

namespace {

constexpr uint64_t kTomographyDomain = 0x544F4D4FULL;
constexpr uint64_t kBootstrapSeedDomain = 0x42535452ULL;
constexpr uint64_t kInputDomain = 0x494E5055ULL;
constexpr int kMaxBisections = 40;

RunMetadata metadata_for(const ExperimentConfig &config) {
    return RunMetadata{config_hash(config), config.require_seed(), version_string()};
}

void report(const ProgressFn &progress, const std::string &msg) {
    if (progress) {
        progress(msg);
    }
}

std::string fmt_q(double q) {
    if (std::isinf(q)) {
        return "inf";
    }
    std::ostringstream ss;
    ss << q;
    return ss.str();
}

MeasureReport nan_report() {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return MeasureReport{nan, nan, nan, nan, nan, nan};
}

/// Tomography (if enabled) plus moment-path I of an equal-weight mixture.
MeasureReport evaluate(const ExperimentConfig &config, std::span<const GaussianState> components,
                       std::optional<FockDM> *rho_out) {
    const uint64_t seed = config.require_seed();
    const BootstrapOptions boot{config.tomography.bootstrap_resamples, mix_seed(seed, kBootstrapSeedDomain)};
    if (!config.tomography.enabled) {
        MeasureReport r = nan_report();
        r.total_variance = total_variance(components);
        r.total_variance_stderr = total_variance_stderr(components, config.tomography.n_blocks, boot);
        return r;
    }
    TomographyOptions opts;
    opts.dim = config.tomography.dim;
    opts.n_blocks = config.tomography.n_blocks;
    opts.workers = config.workers;
    TomographyResult tomo = tomograph(components, config.tomography.plan, mix_seed(seed, kTomographyDomain), opts);
    MeasureReport r = measure(tomo, components, boot);
    if (rho_out) {
        *rho_out = std::move(tomo.rho);
    }
    return r;
}

ProtocolConfig protocol_for(const ExperimentConfig &config, ProtocolMode mode) {
    ProtocolConfig p = config.protocol;
    p.mode = mode;
    p.threshold_stage1 = kNoThreshold;
    p.threshold_stage2 = kNoThreshold;
    return p;
}

std::vector<BreakEven> find_break_even(const std::vector<SweepRow> &rows, double input_en,
                                       const std::vector<ProtocolMode> &modes) {
    std::vector<BreakEven> out;
    for (ProtocolMode mode : modes) {
        BreakEven be;
        be.mode = mode;
        std::vector<const SweepRow *> pts;
        for (const auto &r : rows) {
            if (r.mode == mode && std::isfinite(r.measures.log_negativity)) {
                pts.push_back(&r);
            }
        }
        if (!std::isfinite(input_en) || pts.size() < 2) {
            be.note = "not enough tomographed rows";
            out.push_back(be);
            continue;
        }
        // Walk down from the loosest threshold to the first row at or above the input.
        size_t hi = pts.size() - 1;
        if (pts[hi]->measures.log_negativity >= input_en) {
            be.note = "distillate E_n is at or above the input at every threshold";
            out.push_back(be);
            continue;
        }
        size_t i = hi;
        while (i > 0 && pts[i - 1]->measures.log_negativity < input_en) {
            i--;
        }
        if (i == 0) {
            be.note = "distillate E_n is below the input at every threshold";
            out.push_back(be);
            continue;
        }
        const SweepRow &a = *pts[i - 1];
        const SweepRow &b = *pts[i];
        const double t = (a.measures.log_negativity - input_en) / (a.measures.log_negativity - b.measures.log_negativity);
        be.found = true;
        be.acceptance_probability =
            a.acceptance_probability + t * (b.acceptance_probability - a.acceptance_probability);
        be.threshold = std::isinf(b.threshold) ? a.threshold : a.threshold + t * (b.threshold - a.threshold);
        be.note = "bracketed by Q=" + fmt_q(a.threshold) + " and Q=" + fmt_q(b.threshold);
        out.push_back(be);
    }
    return out;
}

double yield_key(const TrialRecord &r, ProtocolMode mode) {
    const double d1 = std::abs(r.stage1_diff);
    return mode == ProtocolMode::kSingleStage ? d1 : std::max(d1, std::abs(r.stage2_diff));
}

}  // namespace

const char *version_string() {
    return CVDISTILL_VERSION_STRING;
}

SweepResult run_sweep(const ExperimentConfig &config, const ProgressFn &progress) {
    config.validate();
    const uint64_t seed = config.require_seed();
    SweepResult result;
    result.metadata = metadata_for(config);
    result.warnings = config.noise.warnings();
    const auto modes = expand(config.modes);

    const GaussianState clean = make_pair(make_squeezed(config.sources[0]));
    result.clean_pair_log_negativity = gaussian_log_negativity(clean.cov());
    result.clean_pair_total_variance = total_variance(clean);

    report(progress, "input reference");
    {
        GaussianEnsemble input = decohered_pair_ensemble(config.sources[0], config.noise, 0,
                                                         config.calibration_phase_samples, mix_seed(seed, kInputDomain));
        result.input = evaluate(config, input.components, nullptr);
    }

    for (ProtocolMode mode : modes) {
        report(progress, "recording " + to_string(mode) + " trials");
        const auto records =
            record_batch(protocol_for(config, mode), config.sources, config.noise, config.trials_per_point, seed,
                         config.workers);
        for (double q : config.thresholds) {
            report(progress, to_string(mode) + " Q=" + fmt_q(q));
            Distillate d = select(records, mode, q, q);
            SweepRow row;
            row.mode = mode;
            row.threshold = q;
            row.accepts = d.accepts;
            row.attempts = d.attempts;
            row.yield = d.yield();
            row.acceptance_probability = d.acceptance_probability();
            if (d.accepts == 0) {
                row.measures = nan_report();
                result.warnings.push_back(to_string(mode) + " Q=" + fmt_q(q) + ": no accepted trials");
            } else {
                row.measures = evaluate(config, d.components, &row.rho);
            }
            result.rows.push_back(std::move(row));
        }
    }
    if (config.tomography.enabled) {
        result.break_even = find_break_even(result.rows, result.input.log_negativity, modes);
    }
    return result;
}

double decohered_pair_total_variance(const SqueezerSpec &source, double sigma, size_t n_samples, uint64_t seed) {
    return total_variance(decohered_pair_ensemble(source, NoiseSpec::uniform(sigma), 0, n_samples, seed));
}

double calibrate_sigma(double target, const SqueezerSpec &source, size_t n_samples, uint64_t seed) {
    const double clean = total_variance(make_pair(make_squeezed(source)));
    if (!(target >= clean * (1.0 - 1e-12))) {
        throw std::invalid_argument("calibrate_sigma: target I is below the clean-pair value " + std::to_string(clean));
    }
    if (target <= clean * (1.0 + 1e-12)) {
        return 0.0;
    }
    auto f = [&](double s) { return decohered_pair_total_variance(source, s, n_samples, seed); };
    double lo = 0.0;
    double hi = std::numbers::pi;
    const double top = f(hi);
    if (target > top) {
        throw std::invalid_argument("calibrate_sigma: target I exceeds the fully dephased value " +
                                    std::to_string(top));
    }
    for (int it = 0; it < 60; it++) {
        const double mid = 0.5 * (lo + hi);
        const double v = f(mid);
        if (std::abs(v - target) <= 1e-9 * target) {
            return mid;
        }
        (v < target ? lo : hi) = mid;
    }
    const double sigma = 0.5 * (lo + hi);
    if (std::abs(f(sigma) - target) > 0.005 * target) {
        throw NumericalFailure("calibrate_sigma: bisection did not reach 0.5% of the target");
    }
    return sigma;
}

YieldPoint find_threshold_for_yield(const std::vector<TrialRecord> &records, ProtocolMode mode, double target,
                                    double relative_tolerance) {
    if (records.empty()) {
        throw std::invalid_argument("find_threshold_for_yield: no records");
    }
    const uint64_t n = records.size();
    const double copies = mode == ProtocolMode::kIterative ? 3.0 : 2.0;
    const double max_yield = 1.0 / copies;
    const double min_yield = 1.0 / (copies * static_cast<double>(n));
    auto unreachable = [&]() {
        std::ostringstream ss;
        ss << "target yield " << target << " is unreachable for " << to_string(mode) << " with " << n
           << " attempts; feasible range [" << min_yield << ", " << max_yield << "]";
        return UnreachableYield(ss.str(), min_yield, max_yield);
    };
    if (!(target > 0.0) || target > max_yield * (1.0 + relative_tolerance) ||
        target < min_yield * (1.0 - relative_tolerance)) {
        throw unreachable();
    }
    if (std::abs(target - max_yield) <= relative_tolerance * target) {
        return YieldPoint{kNoThreshold, max_yield, n, n, 0};
    }
    std::vector<double> keys(n);
    for (uint64_t i = 0; i < n; i++) {
        keys[i] = yield_key(records[i], mode);
    }
    std::sort(keys.begin(), keys.end());
    auto count_at = [&](double q) {
        return static_cast<uint64_t>(std::upper_bound(keys.begin(), keys.end(), q) - keys.begin());
    };
    // Bisect toward the accept count nearest the target; any point within tolerance is acceptable as a fallback.
    const auto wanted = static_cast<uint64_t>(std::llround(target * copies * static_cast<double>(n)));
    double lo = 0.0;
    double hi = keys.back();
    std::optional<YieldPoint> best;
    for (int it = 1; it <= kMaxBisections; it++) {
        const double mid = 0.5 * (lo + hi);
        const uint64_t k = count_at(mid);
        const double y = static_cast<double>(k) / (copies * static_cast<double>(n));
        if (std::abs(y - target) <= relative_tolerance * target &&
            (!best || std::abs(y - target) < std::abs(best->yield - target))) {
            best = YieldPoint{mid, y, k, n, it};
        }
        if (k == wanted) {
            break;
        }
        (k < wanted ? lo : hi) = mid;
    }
    if (best) {
        return *best;
    }
    throw NumericalFailure("find_threshold_for_yield: no threshold within tolerance after 40 bisections");
}

YieldComparison equal_yield_compare(const ExperimentConfig &config, const ProgressFn &progress) {
    config.validate();
    const uint64_t seed = config.require_seed();
    if (!(config.target_yield > 0.0 && config.target_yield <= 1.0 / 3.0 + 1e-12)) {
        std::ostringstream ss;
        ss << "target yield " << config.target_yield << " outside the range shared by both protocols (0, 1/3]";
        throw UnreachableYield(ss.str(), 0.0, 1.0 / 3.0);
    }
    YieldComparison out;
    out.metadata = metadata_for(config);
    out.target_yield = config.target_yield;
    for (ProtocolMode mode : {ProtocolMode::kSingleStage, ProtocolMode::kIterative}) {
        report(progress, "recording " + to_string(mode) + " trials");
        YieldRow row;
        row.mode = mode;
        {
            const auto records = record_batch(protocol_for(config, mode), config.sources, config.noise,
                                              config.trials_per_point, seed, config.workers);
            row.point = find_threshold_for_yield(records, mode, config.target_yield);
            Distillate d = select(records, mode, row.point.threshold, row.point.threshold);
            report(progress, to_string(mode) + " Q=" + fmt_q(row.point.threshold));
            row.measures = evaluate(config, d.components, nullptr);
            row.tomographed = config.tomography.enabled;
        }
        (mode == ProtocolMode::kSingleStage ? out.single_stage : out.iterative) = row;
    }
    out.total_variance_difference = out.iterative.measures.total_variance - out.single_stage.measures.total_variance;
    out.total_variance_difference_stderr = std::hypot(out.iterative.measures.total_variance_stderr,
                                                      out.single_stage.measures.total_variance_stderr);
    return out;
}

double distilled_total_variance_at_yield(const ExperimentConfig &config, double sigma) {
    const uint64_t seed = config.require_seed();
    const auto records = record_batch(protocol_for(config, ProtocolMode::kSingleStage), config.sources,
                                      NoiseSpec::uniform(sigma), config.trials_per_point, seed, config.workers);
    const YieldPoint p = find_threshold_for_yield(records, ProtocolMode::kSingleStage, config.target_yield, 1e-3);
    const Distillate d = select(records, ProtocolMode::kSingleStage, p.threshold, p.threshold);
    return total_variance(d.components);
}

double calibrate_sigma_to_distillate(double target, const ExperimentConfig &config, double tolerance,
                                     const ProgressFn &progress) {
    double lo = 0.0;
    double hi = std::numbers::pi / 2;
    const double f_lo = distilled_total_variance_at_yield(config, lo);
    const double f_hi = distilled_total_variance_at_yield(config, hi);
    if (!(target >= f_lo && target <= f_hi)) {
        std::ostringstream ss;
        ss << "calibrate_sigma_to_distillate: target I " << target << " outside [" << f_lo << ", " << f_hi
           << "] spanned by sigma in [0, pi/2]";
        throw std::invalid_argument(ss.str());
    }
    for (int it = 0; it < kMaxBisections; it++) {
        const double mid = 0.5 * (lo + hi);
        const double v = distilled_total_variance_at_yield(config, mid);
        report(progress, "sigma=" + std::to_string(mid) + " I=" + std::to_string(v));
        if (std::abs(v - target) <= tolerance) {
            return mid;
        }
        (v < target ? lo : hi) = mid;
    }
    throw NumericalFailure("calibrate_sigma_to_distillate: no convergence after 40 bisections");
}

}  // namespace cvdistill
