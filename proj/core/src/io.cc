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

#include "cvdistill/io.h"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "cvdistill/errors.h"
#include "json.hpp"

namespace cvdistill {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char *kStampFile = "cvdistill_config.json";
constexpr const char *kUnitsNote =
    "quadratures in units where vacuum variance is 1/4; Q bounds |x_A - x_B| in the same units";

json metadata_json(const RunMetadata &m) {
    return json{{"config_hash", m.config_hash}, {"seed", m.seed}, {"version", m.version}, {"units", kUnitsNote}};
}

json number_or_null(double v) {
    if (std::isnan(v)) {
        return nullptr;
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    return v;
}

json measures_json(const MeasureReport &r) {
    return json{{"E_n", number_or_null(r.log_negativity)},
                {"E_n_se", number_or_null(r.log_negativity_stderr)},
                {"purity", number_or_null(r.purity)},
                {"purity_se", number_or_null(r.purity_stderr)},
                {"I", number_or_null(r.total_variance)},
                {"I_se", number_or_null(r.total_variance_stderr)}};
}

json fockdm_to_json(const FockDM &rho) {
    json flat = json::array();
    for (Eigen::Index i = 0; i < rho.matrix.rows(); i++) {
        for (Eigen::Index j = 0; j < rho.matrix.cols(); j++) {
            flat.push_back(rho.matrix(i, j).real());
            flat.push_back(rho.matrix(i, j).imag());
        }
    }
    return json{{"dim", rho.dim}, {"rho", flat}};
}

}  // namespace

std::string format_number(double value) {
    if (std::isnan(value)) {
        return "";
    }
    if (std::isinf(value)) {
        return value > 0 ? "inf" : "-inf";
    }
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

std::string sweep_csv(const SweepResult &result) {
    std::ostringstream out;
    out << "# config_hash=" << result.metadata.config_hash << "\n";
    out << "# seed=" << result.metadata.seed << "\n";
    out << "# version=" << result.metadata.version << "\n";
    out << "# units: " << kUnitsNote << "\n";
    out << kSweepColumns << "\n";
    for (const auto &r : result.rows) {
        const auto &m = r.measures;
        out << to_string(r.mode) << ',' << format_number(r.threshold) << ',' << format_number(r.yield) << ','
            << format_number(r.acceptance_probability) << ',' << format_number(m.log_negativity) << ','
            << format_number(m.log_negativity_stderr) << ',' << format_number(m.purity) << ','
            << format_number(m.purity_stderr) << ',' << format_number(m.total_variance) << ','
            << format_number(m.total_variance_stderr) << ',' << r.accepts << ',' << r.attempts << "\n";
    }
    return out.str();
}

std::string fockdm_json(const FockDM &rho) {
    return fockdm_to_json(rho).dump();
}

FockDM fockdm_from_json(const std::string &text) {
    int dim = 0;
    std::vector<double> flat;
    try {
        const json j = json::parse(text);
        dim = j.at("dim").get<int>();
        flat = j.at("rho").get<std::vector<double>>();
    } catch (const json::exception &e) {
        throw std::invalid_argument(std::string("fockdm_from_json: ") + e.what());
    }
    const size_t n = static_cast<size_t>(dim) * dim;
    if (dim < 1 || flat.size() != 2 * n * n) {
        throw std::invalid_argument("fockdm_from_json: rho length does not match dim");
    }
    FockDM rho = FockDM::zero(dim);
    for (size_t i = 0; i < n; i++) {
        for (size_t k = 0; k < n; k++) {
            const size_t at = 2 * (i * n + k);
            rho.matrix(i, k) = {flat[at], flat[at + 1]};
        }
    }
    return rho;
}

std::string rho_file_name(double threshold) {
    return "rho_Q" + format_number(threshold) + ".json";
}

std::string rho_file_json(const SweepResult &result, double threshold) {
    json states = json::object();
    for (const auto &r : result.rows) {
        if (r.threshold == threshold && r.rho) {
            json s = fockdm_to_json(*r.rho);
            s["accepts"] = r.accepts;
            s["attempts"] = r.attempts;
            states[to_string(r.mode)] = s;
        }
    }
    json j{{"metadata", metadata_json(result.metadata)},
           {"Q", number_or_null(threshold)},
           {"index_order", "row n*dim+k, column l*dim+m for <n k|rho|l m>, mode A first"},
           {"states", states}};
    return j.dump(1);
}

std::string report_json(const SweepResult &result) {
    json rows = json::array();
    for (const auto &r : result.rows) {
        json row{{"mode", to_string(r.mode)},
                 {"Q", number_or_null(r.threshold)},
                 {"yield", r.yield},
                 {"acceptance_probability", r.acceptance_probability},
                 {"accepts", r.accepts},
                 {"attempts", r.attempts}};
        row.update(measures_json(r.measures));
        rows.push_back(row);
    }
    json be = json::array();
    for (const auto &b : result.break_even) {
        be.push_back({{"mode", to_string(b.mode)},
                      {"found", b.found},
                      {"Q", b.found ? number_or_null(b.threshold) : json(nullptr)},
                      {"acceptance_probability", b.found ? json(b.acceptance_probability) : json(nullptr)},
                      {"note", b.note}});
    }
    json j{{"metadata", metadata_json(result.metadata)},
           {"input", measures_json(result.input)},
           {"clean_pair", {{"E_n_gaussian", result.clean_pair_log_negativity}, {"I", result.clean_pair_total_variance}}},
           {"break_even", be},
           {"rows", rows},
           {"warnings", result.warnings}};
    return j.dump(1);
}

std::string comparison_json(const YieldComparison &c) {
    auto row = [](const YieldRow &r) {
        json j{{"mode", to_string(r.mode)},
               {"Q", number_or_null(r.point.threshold)},
               {"yield", r.point.yield},
               {"accepts", r.point.accepts},
               {"attempts", r.point.attempts},
               {"bisection_iterations", r.point.iterations},
               {"tomographed", r.tomographed}};
        j.update(measures_json(r.measures));
        return j;
    };
    json j{{"metadata", metadata_json(c.metadata)},
           {"target_yield", c.target_yield},
           {"single", row(c.single_stage)},
           {"iterative", row(c.iterative)},
           {"I_difference", c.total_variance_difference},
           {"I_difference_se", c.total_variance_difference_stderr}};
    return j.dump(1);
}

std::string samples_csv(std::span<const HomodyneRecord> samples) {
    std::ostringstream out;
    out << "# units: " << kUnitsNote << "\n";
    out << "x_A,x_B,theta_A,theta_B\n";
    for (const auto &s : samples) {
        out << format_number(s.x_a) << ',' << format_number(s.x_b) << ',' << format_number(s.theta_a) << ','
            << format_number(s.theta_b) << "\n";
    }
    return out.str();
}

void write_file(const std::string &path, const std::string &contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write '" + path + "'");
    }
    out << contents;
    if (!out) {
        throw std::runtime_error("write to '" + path + "' failed");
    }
}

void prepare_output_dir(const std::string &dir, const ExperimentConfig &config) {
    const std::string hash = config_hash(config);
    const fs::path stamp = fs::path(dir) / kStampFile;
    if (fs::exists(stamp)) {
        std::ifstream in(stamp);
        std::stringstream ss;
        ss << in.rdbuf();
        std::string existing;
        try {
            existing = json::parse(ss.str()).at("config_hash").get<std::string>();
        } catch (const json::exception &) {
            throw ConfigError("output directory '" + dir + "' has an unreadable " + kStampFile);
        }
        if (existing != hash) {
            throw ConfigError("output directory '" + dir + "' holds results of config " + existing +
                              "; refusing to overwrite with config " + hash);
        }
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
    }
    json stamp_json{{"config_hash", hash}, {"config", json::parse(canonical_config_json(config))}};
    write_file(stamp.string(), stamp_json.dump(1) + "\n");
}

void write_sweep_outputs(const std::string &dir, const SweepResult &result) {
    write_file((fs::path(dir) / "sweep.csv").string(), sweep_csv(result));
    write_file((fs::path(dir) / "report.json").string(), report_json(result) + "\n");
    std::set<double> qs;
    for (const auto &r : result.rows) {
        if (r.rho) {
            qs.insert(r.threshold);
        }
    }
    for (double q : qs) {
        write_file((fs::path(dir) / rho_file_name(q)).string(), rho_file_json(result, q) + "\n");
    }
}

}  // namespace cvdistill
