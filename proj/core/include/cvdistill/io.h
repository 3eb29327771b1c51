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

#ifndef CVDISTILL_IO_H
#define CVDISTILL_IO_H

#include <span>
#include <string>

#include "cvdistill/config.h"
#include "cvdistill/harness.h"
#include "cvdistill/tomography.h"

namespace cvdistill {

/// Column order of sweep.csv.
inline constexpr const char *kSweepColumns =
    "mode,Q,yield,acceptance_probability,E_n,E_n_se,purity,purity_se,I,I_se,accepts,attempts";

/// Shortest round-trip decimal form ("inf" for infinity, "" for NaN).
std::string format_number(double value);

/// sweep.csv contents: '#' metadata lines, the header, then one row per (mode, Q).
std::string sweep_csv(const SweepResult &result);

/// {"dim": d, "rho": [re, im, re, im, ...]} in row-major order of FockDM::matrix.
std::string fockdm_json(const FockDM &rho);
FockDM fockdm_from_json(const std::string &text);

/// rho_Q<value>.json for every Q of the sweep that has at least one tomographed row.
std::string rho_file_name(double threshold);
std::string rho_file_json(const SweepResult &result, double threshold);

std::string report_json(const SweepResult &result);
std::string comparison_json(const YieldComparison &comparison);

/// x_A, x_B, theta_A, theta_B per line, quarter-vacuum units.
std::string samples_csv(std::span<const HomodyneRecord> samples);

/// Creates `dir` and stamps it with the config hash. Throws ConfigError if the
/// directory already holds results of a different config.
void prepare_output_dir(const std::string &dir, const ExperimentConfig &config);

void write_file(const std::string &path, const std::string &contents);

/// sweep.csv, report.json and one rho_Q<value>.json per threshold.
void write_sweep_outputs(const std::string &dir, const SweepResult &result);

}  // namespace cvdistill

#endif
