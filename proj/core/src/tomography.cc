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

#include "cvdistill/tomography.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "cvdistill/errors.h"
#include "cvdistill/random.h"
#include "parallel.h"
#include "quadrature.h"

namespace cvdistill {

namespace {

constexpr uint64_t kSliceDomain = 0x534C494345ULL;
constexpr size_t kChunk = 2048;
// Composite Gauss-Legendre for exact_rho, in standard units.
constexpr int kPanelNodes = 12;
constexpr double kPanelWidth = 1.0;
constexpr double kGaussianReach = 8.0;

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Joint law of (x_thetaA on A, x_thetaB on B) for one component, quarter-vacuum units.
struct Marginal {
    double mean_a;
    double mean_b;
    double sd_a;
    double slope;  // coefficient of the A noise in x_B
    double sd_b_given_a;
};

Marginal marginal(const GaussianState &c, double ca, double sa, double cb, double sb) {
    const double *mu = c.mean().data();
    const Eigen::MatrixXd &s = c.cov();
    const double va = ca * ca * s(0, 0) + 2 * ca * sa * s(0, 1) + sa * sa * s(1, 1);
    const double vb = cb * cb * s(2, 2) + 2 * cb * sb * s(2, 3) + sb * sb * s(3, 3);
    const double cab = ca * cb * s(0, 2) + ca * sb * s(0, 3) + sa * cb * s(1, 2) + sa * sb * s(1, 3);
    if (!(va > 0.0)) {
        throw InvariantViolation("tomography: non-positive quadrature variance");
    }
    const double sd_a = std::sqrt(va);
    return {ca * mu[0] + sa * mu[1], cb * mu[2] + sb * mu[3], sd_a, cab / sd_a,
            std::sqrt(std::max(0.0, vb - cab * cab / va))};
}

Marginal marginal(const GaussianState &c, double theta_a, double theta_b) {
    return marginal(c, std::cos(theta_a), std::sin(theta_a), std::cos(theta_b), std::sin(theta_b));
}

void check_components(std::span<const GaussianState> components, const char *what) {
    if (components.empty()) {
        throw std::invalid_argument(std::string(what) + ": distillate has no components");
    }
    for (const auto &c : components) {
        if (c.n_modes() != 2) {
            throw std::invalid_argument(std::string(what) + ": components must be two-mode states");
        }
    }
}

// Draws the records of one slice in a fixed order; shared by acquire and tomograph.
class SliceSampler {
   public:
    SliceSampler(std::span<const GaussianState> components, double theta_a, double theta_b, uint64_t seed,
                 uint64_t slice)
        : rng_(substream(seed, kSliceDomain, slice)), pick_(0, components.size() - 1) {
        const double ca = std::cos(theta_a);
        const double sa = std::sin(theta_a);
        const double cb = std::cos(theta_b);
        const double sb = std::sin(theta_b);
        marginals_.reserve(components.size());
        for (const auto &c : components) {
            marginals_.push_back(marginal(c, ca, sa, cb, sb));
        }
    }

    /// Returns the component index; writes x_A, x_B in quarter-vacuum units.
    size_t next(double &x_a, double &x_b) {
        const size_t idx = marginals_.size() == 1 ? 0 : pick_(rng_);
        const Marginal &m = marginals_[idx];
        const double z1 = normal_(rng_);
        const double z2 = normal_(rng_);
        x_a = m.mean_a + m.sd_a * z1;
        x_b = m.mean_b + m.slope * z1 + m.sd_b_given_a * z2;
        return idx;
    }

   private:
    Rng rng_;
    std::uniform_int_distribution<size_t> pick_;
    std::normal_distribution<double> normal_;
    std::vector<Marginal> marginals_;
};

// exp(i d theta) for d = -(dim-1) .. dim-1, stored at d + dim - 1.
std::vector<std::complex<double>> phase_table(int dim, double theta) {
    std::vector<std::complex<double>> out(static_cast<size_t>(2 * dim - 1));
    for (int d = -(dim - 1); d <= dim - 1; d++) {
        out[static_cast<size_t>(d + dim - 1)] = std::polar(1.0, d * theta);
    }
    return out;
}

int n_upper(int dim) {
    return dim * (dim + 1) / 2;
}

// Position of f_{min(n,l) max(n,l)} in PatternTable::upper_values output.
std::vector<Eigen::Index> upper_index(int dim) {
    std::vector<Eigen::Index> idx(static_cast<size_t>(dim * dim));
    Eigen::Index q = 0;
    for (int n = 0; n < dim; n++) {
        for (int m = n; m < dim; m++) {
            idx[static_cast<size_t>(n * dim + m)] = q;
            idx[static_cast<size_t>(m * dim + n)] = q;
            q++;
        }
    }
    return idx;
}

// Adds scale * phase(n-l, k-m) * g[(n,l),(k,m)] into rho(n*dim+k, l*dim+m); g is indexed by upper pairs.
void scatter(Eigen::MatrixXcd &rho, const Eigen::MatrixXd &g, int dim, double theta_a, double theta_b,
             double scale) {
    const auto pa = phase_table(dim, theta_a);
    const auto pb = phase_table(dim, theta_b);
    const auto ui = upper_index(dim);
    for (int n = 0; n < dim; n++) {
        for (int l = 0; l < dim; l++) {
            const std::complex<double> fa = pa[static_cast<size_t>(n - l + dim - 1)] * scale;
            const Eigen::Index r = ui[static_cast<size_t>(n * dim + l)];
            for (int k = 0; k < dim; k++) {
                for (int m = 0; m < dim; m++) {
                    rho(n * dim + k, l * dim + m) +=
                        fa * pb[static_cast<size_t>(k - m + dim - 1)] * g(r, ui[static_cast<size_t>(k * dim + m)]);
                }
            }
        }
    }
}

void hermitize(Eigen::MatrixXcd &m) {
    m = (0.5 * (m + m.adjoint())).eval();
}

struct SliceAccumulator {
    std::vector<Eigen::MatrixXd> block_sums;
    std::vector<uint64_t> block_counts;
    Eigen::MatrixXd sum;
    uint64_t count = 0;
};

}  // namespace

FockDM FockDM::zero(int dim) {
    return {dim, Eigen::MatrixXcd::Zero(dim * dim, dim * dim)};
}

FockDM FockDM::outer(int dim, int n, int k, int l, int m) {
    FockDM out = zero(dim);
    out(n, k, l, m) = 1.0;
    return out;
}

TomographyPlan TomographyPlan::product_grid(int n_a, int n_b, uint64_t samples_per_slice) {
    if (n_a < 1 || n_b < 1) {
        throw std::invalid_argument("TomographyPlan: grid sizes must be >= 1");
    }
    TomographyPlan plan;
    plan.n_slices = n_a * n_b;
    plan.samples_per_slice = samples_per_slice;
    for (int i = 0; i < n_a; i++) {
        for (int j = 0; j < n_b; j++) {
            plan.phase_schedule.emplace_back(std::numbers::pi * i / n_a, std::numbers::pi * j / n_b);
        }
    }
    return plan;
}

TomographyPlan TomographyPlan::with_slices(int n_slices, uint64_t samples_per_slice) {
    if (n_slices < 1) {
        throw std::invalid_argument("TomographyPlan: n_slices must be >= 1");
    }
    int n_a = static_cast<int>(std::sqrt(static_cast<double>(n_slices)));
    while (n_slices % n_a != 0) {
        n_a--;
    }
    return product_grid(n_a, n_slices / n_a, samples_per_slice);
}

void TomographyPlan::validate() const {
    if (n_slices < 1 || samples_per_slice < 1) {
        throw std::invalid_argument("TomographyPlan: need at least one slice and one sample per slice");
    }
    if (phase_schedule.size() != static_cast<size_t>(n_slices)) {
        throw std::invalid_argument("TomographyPlan: phase schedule length differs from n_slices");
    }
}

std::vector<HomodyneRecord> acquire(std::span<const GaussianState> components, const TomographyPlan &plan,
                                    uint64_t seed) {
    check_components(components, "acquire");
    plan.validate();
    std::vector<HomodyneRecord> out;
    out.reserve(plan.total_samples());
    for (int j = 0; j < plan.n_slices; j++) {
        const auto [ta, tb] = plan.phase_schedule[static_cast<size_t>(j)];
        SliceSampler sampler(components, ta, tb, seed, static_cast<uint64_t>(j));
        for (uint64_t s = 0; s < plan.samples_per_slice; s++) {
            double xa;
            double xb;
            sampler.next(xa, xb);
            out.push_back({ta, tb, xa, xb});
        }
    }
    return out;
}

FockDM reconstruct(std::span<const HomodyneRecord> samples, int dim) {
    FockDM out = FockDM::zero(dim);
    if (samples.empty()) {
        return out;
    }
    const PatternTable &table = PatternTable::for_dim(dim);
    const Eigen::Index pairs = n_upper(dim);
    RowMatrix fa(static_cast<Eigen::Index>(kChunk), pairs);
    RowMatrix fb(static_cast<Eigen::Index>(kChunk), pairs);
    const double scale = 1.0 / static_cast<double>(samples.size());

    // Runs of equal angles share one phase factor and are accumulated with a GEMM.
    size_t begin = 0;
    while (begin < samples.size()) {
        const double ta = samples[begin].theta_a;
        const double tb = samples[begin].theta_b;
        size_t end = begin;
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(pairs, pairs);
        while (end < samples.size() && samples[end].theta_a == ta && samples[end].theta_b == tb) {
            const size_t stop = std::min(samples.size(), end + kChunk);
            size_t i = 0;
            for (; end < stop && samples[end].theta_a == ta && samples[end].theta_b == tb; end++, i++) {
                table.upper_values(kUnitBridge * samples[end].x_a,
                                   {fa.row(static_cast<Eigen::Index>(i)).data(), static_cast<size_t>(pairs)});
                table.upper_values(kUnitBridge * samples[end].x_b,
                                   {fb.row(static_cast<Eigen::Index>(i)).data(), static_cast<size_t>(pairs)});
            }
            const Eigen::Index rows = static_cast<Eigen::Index>(i);
            g.noalias() += fa.topRows(rows).transpose() * fb.topRows(rows);
        }
        scatter(out.matrix, g, dim, ta, tb, scale);
        begin = end;
    }
    hermitize(out.matrix);
    return out;
}

TomographyResult tomograph(std::span<const GaussianState> components, const TomographyPlan &plan, uint64_t seed,
                           const TomographyOptions &options) {
    check_components(components, "tomograph");
    plan.validate();
    if (options.n_blocks < 1) {
        throw std::invalid_argument("tomograph: n_blocks must be >= 1");
    }
    const int dim = options.dim;
    const PatternTable &table = PatternTable::for_dim(dim);
    const Eigen::Index pairs = n_upper(dim);
    const size_t n_blocks = static_cast<size_t>(options.n_blocks);
    const bool block_by_component = components.size() >= n_blocks;

    std::vector<SliceAccumulator> slices(static_cast<size_t>(plan.n_slices));
    internal::parallel_chunks(static_cast<uint64_t>(plan.n_slices), options.workers, [&](int, uint64_t lo,
                                                                                           uint64_t hi) {
        RowMatrix fa(static_cast<Eigen::Index>(kChunk), pairs);
        RowMatrix fb(static_cast<Eigen::Index>(kChunk), pairs);
        RowMatrix sa(static_cast<Eigen::Index>(kChunk), pairs);
        RowMatrix sb(static_cast<Eigen::Index>(kChunk), pairs);
        std::vector<size_t> block_of(kChunk);
        std::vector<size_t> order(kChunk);
        std::vector<size_t> start(n_blocks + 1);
        for (uint64_t j = lo; j < hi; j++) {
            SliceAccumulator &acc = slices[j];
            acc.block_sums.assign(n_blocks, Eigen::MatrixXd::Zero(pairs, pairs));
            acc.block_counts.assign(n_blocks, 0);
            acc.sum = Eigen::MatrixXd::Zero(pairs, pairs);
            const auto [ta, tb] = plan.phase_schedule[j];
            SliceSampler sampler(components, ta, tb, seed, j);
            uint64_t done = 0;
            while (done < plan.samples_per_slice) {
                const size_t rows = static_cast<size_t>(std::min<uint64_t>(kChunk, plan.samples_per_slice - done));
                std::fill(start.begin(), start.end(), 0);
                for (size_t i = 0; i < rows; i++) {
                    double xa;
                    double xb;
                    const size_t comp = sampler.next(xa, xb);
                    block_of[i] = block_by_component ? comp % n_blocks : (done + i) % n_blocks;
                    start[block_of[i] + 1]++;
                    table.upper_values(kUnitBridge * xa,
                                       {fa.row(static_cast<Eigen::Index>(i)).data(), static_cast<size_t>(pairs)});
                    table.upper_values(kUnitBridge * xb,
                                       {fb.row(static_cast<Eigen::Index>(i)).data(), static_cast<size_t>(pairs)});
                }
                for (size_t b = 0; b < n_blocks; b++) {
                    start[b + 1] += start[b];
                }
                std::vector<size_t> fill(start.begin(), start.end() - 1);
                for (size_t i = 0; i < rows; i++) {
                    order[fill[block_of[i]]++] = i;
                }
                for (size_t r = 0; r < rows; r++) {
                    sa.row(static_cast<Eigen::Index>(r)) = fa.row(static_cast<Eigen::Index>(order[r]));
                    sb.row(static_cast<Eigen::Index>(r)) = fb.row(static_cast<Eigen::Index>(order[r]));
                }
                for (size_t b = 0; b < n_blocks; b++) {
                    const Eigen::Index b0 = static_cast<Eigen::Index>(start[b]);
                    const Eigen::Index bn = static_cast<Eigen::Index>(start[b + 1] - start[b]);
                    if (bn == 0) {
                        continue;
                    }
                    acc.block_sums[b].noalias() += sa.middleRows(b0, bn).transpose() * sb.middleRows(b0, bn);
                    acc.block_counts[b] += static_cast<uint64_t>(bn);
                }
                done += rows;
            }
            for (const auto &bs : acc.block_sums) {
                acc.sum += bs;
            }
            acc.count = plan.samples_per_slice;
        }
    });

    TomographyResult out;
    out.rho = FockDM::zero(dim);
    out.blocks.assign(n_blocks, FockDM::zero(dim));
    const double inv_slices = 1.0 / plan.n_slices;
    for (size_t j = 0; j < slices.size(); j++) {
        const auto &acc = slices[j];
        const auto [ta, tb] = plan.phase_schedule[j];
        scatter(out.rho.matrix, acc.sum, dim, ta, tb, inv_slices / static_cast<double>(acc.count));
        for (size_t b = 0; b < n_blocks; b++) {
            if (acc.block_counts[b] > 0) {
                scatter(out.blocks[b].matrix, acc.block_sums[b], dim, ta, tb,
                        inv_slices / static_cast<double>(acc.block_counts[b]));
            }
        }
    }
    hermitize(out.rho.matrix);
    for (auto &b : out.blocks) {
        hermitize(b.matrix);
    }
    // Batch means: spread of the block estimates around their mean.
    const Eigen::Index d2 = dim * dim;
    out.stderr_re = Eigen::MatrixXd::Constant(d2, d2, std::numeric_limits<double>::quiet_NaN());
    out.stderr_im = out.stderr_re;
    if (n_blocks >= 2) {
        Eigen::MatrixXcd mean = Eigen::MatrixXcd::Zero(d2, d2);
        for (const auto &b : out.blocks) {
            mean += b.matrix;
        }
        mean /= static_cast<double>(n_blocks);
        Eigen::MatrixXd ss_re = Eigen::MatrixXd::Zero(d2, d2);
        Eigen::MatrixXd ss_im = Eigen::MatrixXd::Zero(d2, d2);
        for (const auto &b : out.blocks) {
            const Eigen::MatrixXcd dev = b.matrix - mean;
            ss_re += dev.real().cwiseAbs2();
            ss_im += dev.imag().cwiseAbs2();
        }
        const double norm = 1.0 / (static_cast<double>(n_blocks) * static_cast<double>(n_blocks - 1));
        out.stderr_re = (ss_re * norm).cwiseSqrt();
        out.stderr_im = (ss_im * norm).cwiseSqrt();
    }
    out.n_samples = plan.total_samples();
    return out;
}

namespace {

// Composite Gauss-Legendre nodes on [lo, hi] with panels no wider than width.
void panel_nodes(double lo, double hi, double width, const internal::QuadratureRule &unit, std::vector<double> &x,
                 std::vector<double> &w) {
    x.clear();
    w.clear();
    if (!(hi > lo)) {
        return;
    }
    const int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / width)));
    const double h = (hi - lo) / panels;
    for (int p = 0; p < panels; p++) {
        for (size_t k = 0; k < unit.nodes.size(); k++) {
            x.push_back(lo + h * (p + unit.nodes[k]));
            w.push_back(h * unit.weights[k]);
        }
    }
}

double normal_density(double x, double mu, double sd) {
    const double z = (x - mu) / sd;
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

// E[f(x_A) f(x_B)] over one slice's bivariate marginal, restricted to the
// table support (the table is zero outside it). x_A is integrated directly;
// x_B given x_A either on one local panel (narrow conditional) or on a shared
// grid tabulated once per slice.
void exact_slice(const Marginal &m, const PatternTable &table, double width, const internal::QuadratureRule &unit,
                 Eigen::MatrixXd &g) {
    const Eigen::Index pairs = g.rows();
    const size_t np = static_cast<size_t>(pairs);
    const double x_max = table.x_max();
    const double mu_a = kUnitBridge * m.mean_a;
    const double sd_a = kUnitBridge * m.sd_a;
    const double sd_b = kUnitBridge * m.sd_b_given_a;
    const double slope = kUnitBridge * m.slope / sd_a;  // d mu_b / d x_a
    const double mu_b0 = kUnitBridge * m.mean_b;

    std::vector<double> xa, wa;
    panel_nodes(std::max(-x_max, mu_a - kGaussianReach * sd_a), std::min(x_max, mu_a + kGaussianReach * sd_a), width,
                unit, xa, wa);
    g.setZero();
    if (xa.empty()) {
        return;
    }
    Eigen::VectorXd fa(pairs);
    Eigen::VectorXd hb(pairs);
    Eigen::VectorXd fb(pairs);
    const bool local = 2 * kGaussianReach * sd_b <= width;

    std::vector<double> xb, wb;
    RowMatrix grid_f;
    if (!local) {
        const double b1 = mu_b0 + slope * (xa.front() - mu_a);
        const double b2 = mu_b0 + slope * (xa.back() - mu_a);
        const double lo_b = std::max(-x_max, std::min(b1, b2) - kGaussianReach * sd_b);
        const double hi_b = std::min(x_max, std::max(b1, b2) + kGaussianReach * sd_b);
        panel_nodes(lo_b, hi_b, std::min(width, 1.5 * sd_b), unit, xb, wb);
        grid_f.resize(static_cast<Eigen::Index>(xb.size()), pairs);
        for (size_t q = 0; q < xb.size(); q++) {
            table.upper_values(xb[q], {grid_f.row(static_cast<Eigen::Index>(q)).data(), np});
        }
    }
    std::vector<double> xl, wl;
    for (size_t i = 0; i < xa.size(); i++) {
        const double mu_b = mu_b0 + slope * (xa[i] - mu_a);
        hb.setZero();
        if (sd_b < 1e-12) {
            table.upper_values(mu_b, {hb.data(), np});
        } else if (local) {
            panel_nodes(std::max(-x_max, mu_b - kGaussianReach * sd_b), std::min(x_max, mu_b + kGaussianReach * sd_b),
                        width, unit, xl, wl);
            for (size_t q = 0; q < xl.size(); q++) {
                table.upper_values(xl[q], {fb.data(), np});
                hb.noalias() += (wl[q] * normal_density(xl[q], mu_b, sd_b)) * fb;
            }
        } else if (!xb.empty()) {
            const auto first = std::lower_bound(xb.begin(), xb.end(), mu_b - kGaussianReach * sd_b);
            const auto last = std::upper_bound(first, xb.end(), mu_b + kGaussianReach * sd_b);
            const Eigen::Index q0 = first - xb.begin();
            const Eigen::Index nq = last - first;
            if (nq > 0) {
                Eigen::VectorXd wq(nq);
                for (Eigen::Index q = 0; q < nq; q++) {
                    const size_t k = static_cast<size_t>(q0 + q);
                    wq[q] = wb[k] * normal_density(xb[k], mu_b, sd_b);
                }
                hb.noalias() = grid_f.middleRows(q0, nq).transpose() * wq;
            }
        }
        table.upper_values(xa[i], {fa.data(), np});
        g.noalias() += (wa[i] * normal_density(xa[i], mu_a, sd_a)) * fa * hb.transpose();
    }
}

void exact_component(const GaussianState &c, const TomographyPlan &plan, const PatternTable &table, double width,
                     Eigen::MatrixXcd &rho_acc, double scale) {
    const Eigen::Index pairs = n_upper(table.dim());
    const auto unit = internal::gauss_legendre(kPanelNodes, 0.0, 1.0);
    Eigen::MatrixXd g(pairs, pairs);
    for (int j = 0; j < plan.n_slices; j++) {
        const auto [ta, tb] = plan.phase_schedule[static_cast<size_t>(j)];
        exact_slice(marginal(c, ta, tb), table, width, unit, g);
        scatter(rho_acc, g, table.dim(), ta, tb, scale / plan.n_slices);
    }
}

}  // namespace

FockDM exact_rho(std::span<const GaussianState> components, const TomographyPlan &plan, int dim, int workers) {
    check_components(components, "exact_rho");
    plan.validate();
    const PatternTable &table = PatternTable::for_dim(dim);
    const double scale = 1.0 / static_cast<double>(components.size());

    // Convergence probe on the broadest component: refining the rule must not move rho.
    size_t widest = 0;
    for (size_t i = 1; i < components.size(); i++) {
        if (components[i].cov().trace() > components[widest].cov().trace()) {
            widest = i;
        }
    }
    {
        Eigen::MatrixXcd coarse_rho = Eigen::MatrixXcd::Zero(dim * dim, dim * dim);
        Eigen::MatrixXcd fine_rho = coarse_rho;
        exact_component(components[widest], plan, table, kPanelWidth, coarse_rho, 1.0);
        exact_component(components[widest], plan, table, kPanelWidth / 2, fine_rho, 1.0);
        const double change = (fine_rho - coarse_rho).cwiseAbs().maxCoeff();
        if (change > 1e-8) {
            std::ostringstream msg;
            msg << "exact_rho: quadrature not converged (max change " << change << " on component "
                << widest << ", cov trace " << components[widest].cov().trace() << ")";
            throw NumericalFailure(msg.str());
        }
    }

    const size_t w = static_cast<size_t>(std::max(1, workers));
    std::vector<Eigen::MatrixXcd> partial(w, Eigen::MatrixXcd::Zero(dim * dim, dim * dim));
    internal::parallel_chunks(components.size(), workers, [&](int k, uint64_t lo, uint64_t hi) {
        for (uint64_t i = lo; i < hi; i++) {
            exact_component(components[i], plan, table, kPanelWidth, partial[static_cast<size_t>(k)], scale);
        }
    });
    FockDM out = FockDM::zero(dim);
    for (const auto &p : partial) {
        out.matrix += p;
    }
    hermitize(out.matrix);

    const double min_diag = out.matrix.diagonal().real().minCoeff();
    const double tr = out.trace();
    if (min_diag < -1e-4 || tr > 1.0 + 1e-6) {
        std::ostringstream msg;
        msg << "exact_rho: result outside the physical range (min diagonal " << min_diag << ", trace " << tr << ")";
        throw NumericalFailure(msg.str());
    }
    return out;
}

}  // namespace cvdistill
