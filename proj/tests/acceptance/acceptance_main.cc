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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "cvdistill/config.h"
#include "cvdistill/harness.h"
#include "cvdistill/io.h"
#include "cvdistill/measures.h"
#include "cvdistill/pattern.h"
#include "cvdistill/source.h"
#include "cvdistill/tomography.h"

using namespace cvdistill;

namespace {

constexpr uint64_t kSeed = 20260317;
const SqueezerSpec kSource59{5.0, 9.0};

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char *f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

int workers() {
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

ExperimentConfig base_config(double sigma) {
    ExperimentConfig c = parse_config("{}");
    c.seed = kSeed;
    c.workers = workers();
    c.noise = NoiseSpec::uniform(sigma);
    return c;
}

std::vector<double> psi(int n_max, double x) {
    std::vector<double> p(static_cast<size_t>(n_max + 1));
    p[0] = std::pow(std::numbers::pi, -0.25) * std::exp(-x * x / 2);
    for (int n = 0; n < n_max; n++) {
        const double prev = n > 0 ? std::sqrt(static_cast<double>(n)) * p[static_cast<size_t>(n - 1)] : 0.0;
        p[static_cast<size_t>(n + 1)] = (std::sqrt(2.0) * x * p[static_cast<size_t>(n)] - prev) / std::sqrt(n + 1.0);
    }
    return p;
}

const SweepRow *find_row(const SweepResult &r, ProtocolMode mode, double q) {
    for (const auto &row : r.rows) {
        if (row.mode == mode && (row.threshold == q || (std::isinf(q) && std::isinf(row.threshold)))) {
            return &row;
        }
    }
    return nullptr;
}

// 1. Equal-yield anchor.
Outcome equal_yield_anchor(double sigma) {
    ExperimentConfig c = base_config(sigma);
    c.trials_per_point = 1000000;
    c.tomography.enabled = false;
    c.target_yield = 0.1;
    const YieldComparison y = equal_yield_compare(c);
    const double is = y.single_stage.measures.total_variance;
    const double ii = y.iterative.measures.total_variance;
    const double gap = is - ii;
    Outcome o;
    o.pass = is >= 0.833 && is <= 0.853 && ii < is && gap >= 0.001 && gap <= 0.015;
    o.detail = fmt("sigma=%.4f I_single=%.4f (yield %.4f) I_iter=%.4f (yield %.4f) gap=%.4f +- %.4f; want I_single in "
                   "[0.833,0.853], gap in [0.001,0.015]",
                   sigma, is, y.single_stage.point.yield, ii, y.iterative.point.yield, gap,
                   y.total_variance_difference_stderr);
    return o;
}

// 2. Break-even acceptance probabilities.
Outcome break_even(const SweepResult &r) {
    double p_single = std::nan("");
    double p_iter = std::nan("");
    for (const auto &b : r.break_even) {
        if (!b.found) {
            continue;
        }
        (b.mode == ProtocolMode::kSingleStage ? p_single : p_iter) = b.acceptance_probability;
    }
    Outcome o;
    o.pass = p_single > 0.55 && p_iter > 0.35;
    o.detail = fmt("input E_n=%.4f; break-even acceptance probability single=%.3f (want > 0.55), iterative=%.3f "
                   "(want > 0.35)",
                   r.input.log_negativity, p_single, p_iter);
    return o;
}

// 3. Gaussian no-go at sigma = 0.
Outcome no_go() {
    ExperimentConfig c = base_config(0.0);
    c.trials_per_point = 20000;
    c.thresholds = {0.1, 0.2, 0.4, 0.7, 1.0, kNoThreshold};
    c.tomography.plan = TomographyPlan::product_grid(10, 10, 100000);
    const SweepResult r = run_sweep(c);
    const double bound = r.clean_pair_log_negativity;
    double worst = -1e9;
    bool ok = r.rows.size() >= 10;
    for (const auto &row : r.rows) {
        if (row.accepts == 0) {
            continue;
        }
        const double z = (row.measures.log_negativity - bound) / row.measures.log_negativity_stderr;
        worst = std::max(worst, z);
        ok = ok && z <= 3.0;
    }
    Outcome o;
    o.pass = ok;
    o.detail = fmt("input Gaussian E_n=%.4f; %zu rows over %zu thresholds; max (E_n - input)/se = %.2f (want <= 3)", bound,
                   r.rows.size(), c.thresholds.size(), worst);
    return o;
}

// 4. Unconditioned degradation.
Outcome degradation(const SweepResult &r) {
    Outcome o;
    o.pass = true;
    std::string d = fmt("input E_n=%.4f+-%.4f purity=%.4f+-%.4f;", r.input.log_negativity, r.input.log_negativity_stderr,
                        r.input.purity, r.input.purity_stderr);
    for (ProtocolMode m : {ProtocolMode::kSingleStage, ProtocolMode::kIterative}) {
        const SweepRow *row = find_row(r, m, kNoThreshold);
        if (row == nullptr) {
            o.pass = false;
            continue;
        }
        const double ze = (r.input.log_negativity - row->measures.log_negativity) /
                          std::hypot(r.input.log_negativity_stderr, row->measures.log_negativity_stderr);
        const double zp =
            (r.input.purity - row->measures.purity) / std::hypot(r.input.purity_stderr, row->measures.purity_stderr);
        o.pass = o.pass && ze > 3 && zp > 3;
        d += fmt(" %s Q=inf E_n=%.4f (%.1f sigma below) purity=%.4f (%.1f sigma below);", to_string(m).c_str(),
                 row->measures.log_negativity, ze, row->measures.purity, zp);
    }
    o.detail = d;
    return o;
}

// 5. Iterative dominance at the three smallest thresholds.
Outcome dominance(const SweepResult &r, const std::vector<double> &thresholds) {
    Outcome o;
    o.pass = true;
    std::string d;
    for (size_t i = 0; i < 3; i++) {
        const double q = thresholds[i];
        const SweepRow *s = find_row(r, ProtocolMode::kSingleStage, q);
        const SweepRow *t = find_row(r, ProtocolMode::kIterative, q);
        if (s == nullptr || t == nullptr || t->accepts == 0) {
            o.pass = false;
            continue;
        }
        const double se_e = std::hypot(s->measures.log_negativity_stderr, t->measures.log_negativity_stderr);
        const double se_i = std::hypot(s->measures.total_variance_stderr, t->measures.total_variance_stderr);
        const bool ok_e = t->measures.log_negativity >= s->measures.log_negativity - 3 * se_e;
        const bool ok_i = t->measures.total_variance <= s->measures.total_variance + 3 * se_i;
        o.pass = o.pass && ok_e && ok_i;
        d += fmt(" Q=%g: E_n iter %.4f vs single %.4f (se %.4f), I iter %.4f vs single %.4f (se %.4f);", q,
                 t->measures.log_negativity, s->measures.log_negativity, se_e, t->measures.total_variance,
                 s->measures.total_variance, se_i);
    }
    o.detail = d;
    return o;
}

// 6. Sampled tomography vs the exact path.
Outcome tomography_equivalence() {
    const GaussianState pair = make_pair(make_squeezed(kSource59));
    const std::span<const GaussianState> one(&pair, 1);
    const auto plan = TomographyPlan::product_grid(10, 10, 30000);
    TomographyOptions opt;
    opt.workers = workers();
    const TomographyResult r = tomograph(one, plan, kSeed, opt);
    const FockDM exact = exact_rho(one, plan, kDefaultFockDim, workers());
    double worst = 0.0;
    for (Eigen::Index i = 0; i < exact.matrix.rows(); i++) {
        for (Eigen::Index j = 0; j < exact.matrix.cols(); j++) {
            const std::complex<double> diff = r.rho.matrix(i, j) - exact.matrix(i, j);
            if (r.stderr_re(i, j) > 0) {
                worst = std::max(worst, std::abs(diff.real()) / r.stderr_re(i, j));
            }
            if (r.stderr_im(i, j) > 0) {
                worst = std::max(worst, std::abs(diff.imag()) / r.stderr_im(i, j));
            }
        }
    }
    const double i_rho = total_variance_from_rho(r.rho);
    const double i_direct = total_variance(pair);
    const double rel = std::abs(i_rho / i_direct - 1);
    Outcome o;
    o.pass = worst < 5 && rel <= 0.02;
    o.detail = fmt("N=%llu: max |sampled - exact| / se = %.2f (want < 5); I from rho %.4f vs moments %.4f (%.2f%%, want "
                   "<= 2%%)",
                   static_cast<unsigned long long>(plan.total_samples()), worst, i_rho, i_direct, 100 * rel);
    return o;
}

// 7. Measure identities.
Outcome measure_identities() {
    const GaussianState vac = vacuum_state(2);
    TomographyPlan plan;
    plan.n_slices = 2;
    plan.samples_per_slice = 500000;
    plan.phase_schedule = {{0.0, 0.0}, {std::numbers::pi / 2, std::numbers::pi / 2}};
    const auto rec = acquire(std::span<const GaussianState>(&vac, 1), plan, kSeed);
    auto var = [&](size_t lo, double sign) {
        double s = 0.0;
        double s2 = 0.0;
        for (size_t i = lo; i < lo + plan.samples_per_slice; i++) {
            const double v = rec[i].x_a + sign * rec[i].x_b;
            s += v;
            s2 += v * v;
        }
        const double n = static_cast<double>(plan.samples_per_slice);
        return (s2 - s * s / n) / (n - 1);
    };
    const double i_vac = var(0, -1.0) + var(plan.samples_per_slice, 1.0);

    FockDM bell = FockDM::zero(5);
    for (int a : {0, 1}) {
        for (int b : {0, 1}) {
            bell(a, a, b, b) = 0.5;
        }
    }
    const double en_bell = log_negativity(bell);
    const double p_ground = purity(FockDM::outer(5, 0, 0, 0, 0));
    FockDM mix = FockDM::zero(5);
    mix(0, 0, 0, 0) = 0.5;
    mix(1, 1, 1, 1) = 0.5;
    const double p_mix = purity(mix);
    const GaussianState pure = make_pair(make_squeezed({5.0, 5.0}));
    const double p_pair = purity(exact_rho(std::span<const GaussianState>(&pure, 1), TomographyPlan::product_grid(10, 10, 1)));
    Outcome o;
    o.pass = std::abs(i_vac - 1) <= 0.002 && std::abs(en_bell - 1) <= 1e-9 && std::abs(p_ground - 1) < 1e-12 &&
             std::abs(p_mix - 0.5) < 1e-12 && p_pair >= 0.96 && p_pair <= 1.0;
    o.detail = fmt("vacuum I=%.5f (1e6 samples); Bell E_n=%.12f; purity |00>=%.3f, mixture=%.3f, pure pair (exact)=%.5f", i_vac,
                   en_bell, p_ground, p_mix, p_pair);
    return o;
}

// 8. Biorthogonality of the pattern functions, LO-phase averaged.
Outcome biorthogonality() {
    const int d = kDefaultFockDim;
    const int nx = 6000;
    const double a = -12.0;
    const double h = 24.0 / nx;
    // raw[n][m][k][l] = int f_nm psi_k psi_l dx (trapezoid).
    std::vector<double> raw(static_cast<size_t>(d * d * d * d), 0.0);
    for (int i = 0; i <= nx; i++) {
        const double x = a + i * h;
        const double w = (i == 0 || i == nx) ? 0.5 * h : h;
        const auto p = psi(d - 1, x);
        for (int n = 0; n < d; n++) {
            for (int m = 0; m < d; m++) {
                const double f = pattern_value(n, m, x);
                for (int k = 0; k < d; k++) {
                    for (int l = 0; l < d; l++) {
                        raw[static_cast<size_t>(((n * d + m) * d + k) * d + l)] +=
                            w * f * p[static_cast<size_t>(k)] * p[static_cast<size_t>(l)];
                    }
                }
            }
        }
    }
    // <n| (|k><l|) |m> reconstructed: (1/J) sum_j e^{i(n-m)theta_j} e^{-i(k-l)theta_j} * raw.
    const int n_theta = 100;
    double worst = 0.0;
    int count = 0;
    for (int n = 0; n < d; n++) {
        for (int m = 0; m < d; m++) {
            for (int k = 0; k < d; k++) {
                for (int l = 0; l < d; l++) {
                    std::complex<double> phase = 0.0;
                    for (int j = 0; j < n_theta; j++) {
                        const double th = std::numbers::pi * j / n_theta;
                        phase += std::polar(1.0, ((n - m) - (k - l)) * th);
                    }
                    phase /= static_cast<double>(n_theta);
                    const std::complex<double> v = phase * raw[static_cast<size_t>(((n * d + m) * d + k) * d + l)];
                    const double expected = (n == k && m == l) ? 1.0 : 0.0;
                    worst = std::max(worst, std::abs(v - expected));
                    count++;
                }
            }
        }
    }
    Outcome o;
    o.pass = count == 625 && worst < 1e-6;
    o.detail = fmt("%d integrals, max |value - delta| = %.2e (want < 1e-6)", count, worst);
    return o;
}

// 9. Determinism of sweep.csv.
Outcome determinism() {
    ExperimentConfig c = base_config(ExperimentConfig::kDefaultPhaseNoise);
    c.trials_per_point = 5000;
    c.thresholds = {0.3, 0.8, kNoThreshold};
    c.tomography.plan = TomographyPlan::product_grid(10, 10, 2000);
    const std::string a = sweep_csv(run_sweep(c));
    const std::string b = sweep_csv(run_sweep(c));
    Outcome o;
    o.pass = a == b && !a.empty();
    o.detail = fmt("two runs, %zu bytes each, %s", a.size(), a == b ? "bit-identical" : "DIFFER");
    return o;
}

// 10. Sample-size bias direction of the E_n estimator.
Outcome sample_size_bias(double sigma) {
    const GaussianEnsemble e = decohered_pair_ensemble(kSource59, NoiseSpec::uniform(sigma), 0, 2000, kSeed);
    TomographyOptions opt;
    opt.workers = workers();
    opt.n_blocks = 2;
    std::vector<double> means;
    std::vector<double> ses;
    for (uint64_t per_slice : {100u, 1000u, 10000u}) {
        const auto plan = TomographyPlan::product_grid(10, 10, per_slice);
        double s = 0.0;
        double s2 = 0.0;
        const int seeds = 20;
        for (int i = 0; i < seeds; i++) {
            const double en = log_negativity(tomograph(e.components, plan, kSeed + 1000 + i, opt).rho);
            s += en;
            s2 += en * en;
        }
        const double mean = s / seeds;
        means.push_back(mean);
        ses.push_back(std::sqrt((s2 / seeds - mean * mean) / (seeds - 1)));
    }
    Outcome o;
    o.pass = means[0] >= means[1] && means[1] >= means[2];
    o.detail = fmt("mean E_n over 20 seeds: N=1e4 %.4f+-%.4f, N=1e5 %.4f+-%.4f, N=1e6 %.4f+-%.4f (want non-increasing)",
                   means[0], ses[0], means[1], ses[1], means[2], ses[2]);
    return o;
}

}  // namespace

int main() {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    int failures = 0;
    auto emit = [&](int id, const char *name, const Outcome &o) {
        failures += o.pass ? 0 : 1;
        std::printf("[%s] criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
        std::fflush(stdout);
    };

    // Phase noise calibrated so that the single-stage distillate at 10% yield has I = 0.843.
    ExperimentConfig cal = base_config(ExperimentConfig::kDefaultPhaseNoise);
    cal.trials_per_point = 200000;
    cal.tomography.enabled = false;
    const double sigma = calibrate_sigma_to_distillate(0.843, cal, 1e-3);
    std::printf("calibrated sigma = %.5f\n", sigma);
    std::fflush(stdout);

    emit(1, "equal-yield anchor", equal_yield_anchor(sigma));

    ExperimentConfig sc = base_config(sigma);
    sc.trials_per_point = 50000;
    sc.thresholds = {0.2, 0.3, 0.45, 0.6, 0.75, 0.9, 1.2, kNoThreshold};
    const SweepResult sweep = run_sweep(sc);
    emit(2, "break-even probabilities", break_even(sweep));
    emit(3, "Gaussian no-go", no_go());
    emit(4, "unconditioned degradation", degradation(sweep));
    emit(5, "iterative dominance", dominance(sweep, sc.thresholds));
    emit(6, "tomography oracle equivalence", tomography_equivalence());
    emit(7, "measure identities", measure_identities());
    emit(8, "pattern-function biorthogonality", biorthogonality());
    emit(9, "determinism", determinism());
    emit(10, "estimator sample-size bias", sample_size_bias(sigma));

    const double secs = std::chrono::duration<double>(clock::now() - t0).count();
    std::printf("%d of 10 criteria passed (%.0f s)\n", 10 - failures, secs);
    return failures == 0 ? 0 : 1;
}
