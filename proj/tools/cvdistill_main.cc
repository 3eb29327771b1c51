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

#include <cmath>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cvdistill/config.h"
#include "cvdistill/errors.h"
#include "cvdistill/harness.h"
#include "cvdistill/io.h"
#include "cvdistill/measures.h"
#include "json.hpp"

using namespace cvdistill;

namespace {

enum ExitCode { kOk = 0, kOther = 1, kConfig = 2, kUnreachable = 3, kNumerical = 4 };

struct CommonOptions {
    std::string config_path;
    std::optional<uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> out;
    std::optional<std::string> mode;
    std::vector<std::string> thresholds;
    std::optional<double> target_yield;
    std::optional<double> sigma;
    std::optional<uint64_t> trials;
    bool no_tomography = false;
    bool quiet = false;
};

void add_common(CLI::App *cmd, CommonOptions &o) {
    cmd->add_option("--config", o.config_path, "JSON config file (defaults apply to missing keys)");
    cmd->add_option("--seed", o.seed, "Master seed (overrides the config)");
    cmd->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--out", o.out, "Output directory");
    cmd->add_option("--mode", o.mode, "single, iterative or both");
    cmd->add_option("--threshold-list", o.thresholds, "Thresholds Q (numbers or inf)")->delimiter(',');
    cmd->add_option("--target-yield", o.target_yield, "Target distillation yield");
    cmd->add_option("--sigma", o.sigma, "Uniform phase-noise sigma on all six beams (radians)");
    cmd->add_option("--trials", o.trials, "Trials per threshold point");
    cmd->add_flag("--no-tomography", o.no_tomography, "Skip tomography; report I only");
    cmd->add_flag("-q,--quiet", o.quiet, "No progress output");
}

double parse_threshold(const std::string &s) {
    if (s == "inf" || s == "+inf" || s == "infinity") {
        return kNoThreshold;
    }
    size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception &) {
        used = 0;
    }
    if (used != s.size()) {
        throw ConfigError("--threshold-list: cannot parse '" + s + "'");
    }
    return v;
}

ExperimentConfig build_config(const CommonOptions &o) {
    ExperimentConfig c = o.config_path.empty() ? ExperimentConfig{} : load_config(o.config_path);
    if (o.seed) {
        c.seed = *o.seed;
    }
    if (o.workers) {
        c.workers = *o.workers;
    }
    if (o.out) {
        c.output_dir = *o.out;
    }
    if (o.mode) {
        c.modes = mode_selection_from_string(*o.mode);
    }
    if (!o.thresholds.empty()) {
        c.thresholds.clear();
        for (const auto &s : o.thresholds) {
            c.thresholds.push_back(parse_threshold(s));
        }
    }
    if (o.target_yield) {
        c.target_yield = *o.target_yield;
    }
    if (o.sigma) {
        c.noise = NoiseSpec::uniform(*o.sigma);
    }
    if (o.trials) {
        c.trials_per_point = *o.trials;
    }
    if (o.no_tomography) {
        c.tomography.enabled = false;
    }
    c.validate();
    c.require_seed();
    return c;
}

ProgressFn progress_for(const CommonOptions &o) {
    if (o.quiet) {
        return {};
    }
    return [](const std::string &msg) { std::cerr << "[cvdistill] " << msg << std::endl; };
}

int cmd_sweep(const CommonOptions &o) {
    const ExperimentConfig c = build_config(o);
    prepare_output_dir(c.output_dir, c);
    const SweepResult r = run_sweep(c, progress_for(o));
    write_sweep_outputs(c.output_dir, r);
    for (const auto &w : r.warnings) {
        std::cerr << "warning: " << w << "\n";
    }
    std::cout << sweep_csv(r);
    for (const auto &b : r.break_even) {
        std::cout << "# break-even " << to_string(b.mode) << ": "
                  << (b.found ? "acceptance_probability=" + format_number(b.acceptance_probability) +
                                    " Q=" + format_number(b.threshold)
                              : std::string("not found"))
                  << " (" << b.note << ")\n";
    }
    return kOk;
}

int cmd_compare(const CommonOptions &o) {
    const ExperimentConfig c = build_config(o);
    prepare_output_dir(c.output_dir, c);
    const YieldComparison r = equal_yield_compare(c, progress_for(o));
    const std::string text = comparison_json(r);
    write_file((std::filesystem::path(c.output_dir) / "compare_yield.json").string(), text + "\n");
    std::cout << text << "\n";
    return kOk;
}

int cmd_calibrate(const CommonOptions &o, std::optional<double> target_input, std::optional<double> target_distilled) {
    ExperimentConfig c = build_config(o);
    if (!target_input && !target_distilled) {
        target_input = c.target_input_total_variance;
    }
    if (!target_input && !target_distilled) {
        throw ConfigError("calibrate: give --target-input-i, --target-distilled-i or calibration.target_input_total_variance");
    }
    nlohmann::json j;
    j["config_hash"] = config_hash(c);
    j["seed"] = *c.seed;
    j["version"] = version_string();
    if (target_input) {
        try {
            const double s = calibrate_sigma(*target_input, c.sources[0], c.calibration_phase_samples, *c.seed);
            j["target_input_I"] = *target_input;
            j["sigma"] = s;
            j["achieved_input_I"] =
                decohered_pair_total_variance(c.sources[0], s, c.calibration_phase_samples, *c.seed);
        } catch (const std::invalid_argument &e) {
            throw ConfigError(e.what());
        }
    } else {
        try {
            const double s = calibrate_sigma_to_distillate(*target_distilled, c, 1e-3, progress_for(o));
            j["target_distilled_I"] = *target_distilled;
            j["target_yield"] = c.target_yield;
            j["sigma"] = s;
        } catch (const std::invalid_argument &e) {
            throw ConfigError(e.what());
        }
    }
    std::cout << j.dump(1) << "\n";
    return kOk;
}

int cmd_tomo_dump(const CommonOptions &o, uint64_t n_samples) {
    ExperimentConfig c = build_config(o);
    c.tomography.enabled = true;
    prepare_output_dir(c.output_dir, c);
    const uint64_t seed = *c.seed;
    const ProgressFn progress = progress_for(o);
    SweepResult r = run_sweep(c, progress);
    namespace fs = std::filesystem;
    for (const auto &row : r.rows) {
        if (!row.rho) {
            continue;
        }
        const fs::path p = fs::path(c.output_dir) / rho_file_name(row.threshold);
        write_file(p.string(), rho_file_json(r, row.threshold) + "\n");
    }
    if (n_samples > 0) {
        for (ProtocolMode mode : expand(c.modes)) {
            ProtocolConfig p = c.protocol;
            p.mode = mode;
            p.threshold_stage1 = p.threshold_stage2 = c.thresholds.front();
            const Distillate d = run_batch(p, c.sources, c.noise, c.trials_per_point, seed, c.workers);
            if (d.accepts == 0) {
                std::cerr << "warning: no accepted " << to_string(mode) << " trials at Q=" << format_number(p.threshold_stage1)
                          << "\n";
                continue;
            }
            const TomographyPlan plan = TomographyPlan::with_slices(c.tomography.plan.n_slices,
                                                                    (n_samples + c.tomography.plan.n_slices - 1) /
                                                                        c.tomography.plan.n_slices);
            auto samples = acquire(d.components, plan, seed);
            samples.resize(std::min<size_t>(samples.size(), n_samples));
            const std::string name =
                "samples_" + to_string(mode) + "_Q" + format_number(p.threshold_stage1) + ".csv";
            write_file((fs::path(c.output_dir) / name).string(), samples_csv(samples));
        }
    }
    for (const auto &row : r.rows) {
        std::cout << to_string(row.mode) << " Q=" << format_number(row.threshold) << " trace="
                  << (row.rho ? format_number(row.rho->trace()) : std::string("n/a")) << "\n";
    }
    return kOk;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Monte Carlo simulator for iterative entanglement distillation of phase-diffused squeezed light"};
    app.set_version_flag("--version", std::string(version_string()));
    app.require_subcommand(1);

    CommonOptions sweep_opts, compare_opts, calib_opts, dump_opts;
    auto *sweep = app.add_subcommand("sweep", "Threshold sweep with tomography; writes sweep.csv, report.json, rho_Q*.json");
    add_common(sweep, sweep_opts);
    auto *compare = app.add_subcommand("compare-yield", "Equal-yield comparison of single-stage and iterative");
    add_common(compare, compare_opts);
    auto *calibrate = app.add_subcommand("calibrate", "Fit the phase-noise sigma");
    add_common(calibrate, calib_opts);
    std::optional<double> target_input, target_distilled;
    calibrate->add_option("--target-input-i", target_input, "Target I of the phase-diffused input pair");
    calibrate->add_option("--target-distilled-i", target_distilled, "Target single-stage I at the target yield");
    auto *dump = app.add_subcommand("tomo-dump", "Write reconstructed density matrices and raw homodyne samples");
    add_common(dump, dump_opts);
    uint64_t dump_samples = 0;
    dump->add_option("--samples", dump_samples, "Raw homodyne records to dump per mode (first threshold)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        if (sweep->parsed()) {
            return cmd_sweep(sweep_opts);
        }
        if (compare->parsed()) {
            return cmd_compare(compare_opts);
        }
        if (calibrate->parsed()) {
            return cmd_calibrate(calib_opts, target_input, target_distilled);
        }
        if (dump->parsed()) {
            return cmd_tomo_dump(dump_opts, dump_samples);
        }
    } catch (const ConfigError &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const UnreachableYield &e) {
        std::cerr << "unreachable yield: " << e.what() << "\n";
        return kUnreachable;
    } catch (const NumericalFailure &e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    } catch (const InvariantViolation &e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kOther;
    }
    return kOther;
}
