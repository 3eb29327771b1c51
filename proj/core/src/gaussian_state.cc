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

#include "cvdistill/gaussian_state.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "cvdistill/errors.h"

namespace cvdistill {

namespace {

void require_mode(const GaussianState &state, size_t mode, const char *what) {
    if (mode >= state.n_modes()) {
        throw std::invalid_argument(std::string(what) + ": mode " + std::to_string(mode) + " out of range for " +
                                    std::to_string(state.n_modes()) + "-mode state");
    }
}

void symmetrize(Eigen::MatrixXd &m) {
    m = 0.5 * (m + m.transpose()).eval();
}

}  // namespace

GaussianState::GaussianState(Eigen::VectorXd mean, Eigen::MatrixXd cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
    if (mean_.size() % 2 != 0) {
        throw std::invalid_argument("GaussianState: mean length must be even");
    }
    if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size()) {
        throw std::invalid_argument("GaussianState: covariance shape does not match mean");
    }
    if (cov_.size() == 0) {
        return;
    }
    double scale = std::max(1.0, cov_.cwiseAbs().maxCoeff());
    if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw std::invalid_argument("GaussianState: covariance is not symmetric");
    }
}

GaussianEnsemble GaussianEnsemble::uniform(std::vector<GaussianState> components) {
    GaussianEnsemble out;
    out.weights.assign(components.size(), components.empty() ? 0.0 : 1.0 / static_cast<double>(components.size()));
    out.components = std::move(components);
    return out;
}

size_t GaussianEnsemble::n_modes() const {
    return components.empty() ? 0 : components.front().n_modes();
}

Eigen::MatrixXd symplectic_form(size_t n_modes) {
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * n_modes, 2 * n_modes);
    for (size_t k = 0; k < n_modes; k++) {
        omega(2 * k, 2 * k + 1) = 1.0;
        omega(2 * k + 1, 2 * k) = -1.0;
    }
    return omega;
}

double symplectic_defect(const Eigen::MatrixXd &s) {
    Eigen::MatrixXd omega = symplectic_form(static_cast<size_t>(s.rows() / 2));
    return (s * omega * s.transpose() - omega).cwiseAbs().maxCoeff();
}

Eigen::VectorXd symplectic_eigenvalues(const Eigen::MatrixXd &cov) {
    const Eigen::Index n = cov.rows() / 2;
    if (n == 0) {
        return {};
    }
    Eigen::MatrixXd m = symplectic_form(static_cast<size_t>(n)) * cov;
    Eigen::EigenSolver<Eigen::MatrixXd> solver(m, false);
    std::vector<double> all(static_cast<size_t>(cov.rows()));
    for (Eigen::Index k = 0; k < cov.rows(); k++) {
        all[static_cast<size_t>(k)] = std::abs(solver.eigenvalues()[k].imag());
    }
    std::sort(all.begin(), all.end());
    // Eigenvalues of Omega*cov come in +-i*nu pairs.
    Eigen::VectorXd nu(n);
    for (Eigen::Index k = 0; k < n; k++) {
        nu[k] = 0.5 * (all[static_cast<size_t>(2 * k)] + all[static_cast<size_t>(2 * k + 1)]);
    }
    return nu;
}

bool is_physical(const GaussianState &state, double tolerance) {
    if (state.n_modes() == 0) {
        return true;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(state.cov(), Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() <= 0.0) {
        return false;
    }
    return symplectic_eigenvalues(state.cov()).minCoeff() >= kVacuumVariance - tolerance;
}

double gaussian_purity(const GaussianState &state) {
    const double n = static_cast<double>(state.n_modes());
    return std::pow(kVacuumVariance, n) / std::sqrt(state.cov().determinant());
}

GaussianState vacuum_state(size_t n_modes) {
    if (n_modes == 0) {
        throw std::invalid_argument("vacuum_state: n_modes must be >= 1");
    }
    const Eigen::Index d = static_cast<Eigen::Index>(2 * n_modes);
    return GaussianState(Eigen::VectorXd::Zero(d), kVacuumVariance * Eigen::MatrixXd::Identity(d, d));
}

GaussianState apply(const GaussianState &state, const SymplecticOp &op) {
    if (op.matrix.rows() != state.mean().size() || op.matrix.cols() != state.mean().size()) {
        throw std::invalid_argument("apply: operator dimension does not match state");
    }
    Eigen::VectorXd mean = op.matrix * state.mean();
    if (op.displacement.size() == mean.size()) {
        mean += op.displacement;
    }
    Eigen::MatrixXd cov = op.matrix * state.cov() * op.matrix.transpose();
    symmetrize(cov);
    return GaussianState(std::move(mean), std::move(cov));
}

SymplecticOp phase_shift_op(size_t n_modes, size_t mode, double theta) {
    if (mode >= n_modes) {
        throw std::invalid_argument("phase_shift_op: mode out of range");
    }
    const Eigen::Index d = static_cast<Eigen::Index>(2 * n_modes);
    SymplecticOp op{Eigen::MatrixXd::Identity(d, d), Eigen::VectorXd::Zero(d)};
    const Eigen::Index k = static_cast<Eigen::Index>(2 * mode);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    op.matrix(k, k) = c;
    op.matrix(k, k + 1) = s;
    op.matrix(k + 1, k) = -s;
    op.matrix(k + 1, k + 1) = c;
    return op;
}

SymplecticOp beamsplitter_op(size_t n_modes, size_t i, size_t j, double transmittance) {
    if (i >= n_modes || j >= n_modes) {
        throw std::invalid_argument("beamsplitter_op: mode out of range");
    }
    if (i == j) {
        throw std::invalid_argument("beamsplitter_op: ports must differ");
    }
    if (!(transmittance >= 0.0 && transmittance <= 1.0)) {
        throw std::invalid_argument("beamsplitter_op: transmittance must lie in [0, 1]");
    }
    const Eigen::Index d = static_cast<Eigen::Index>(2 * n_modes);
    SymplecticOp op{Eigen::MatrixXd::Identity(d, d), Eigen::VectorXd::Zero(d)};
    const double t = std::sqrt(transmittance);
    const double r = std::sqrt(1.0 - transmittance);
    for (Eigen::Index q = 0; q < 2; q++) {
        const Eigen::Index a = static_cast<Eigen::Index>(2 * i) + q;
        const Eigen::Index b = static_cast<Eigen::Index>(2 * j) + q;
        op.matrix(a, a) = t;
        op.matrix(a, b) = r;
        op.matrix(b, a) = r;
        op.matrix(b, b) = -t;
    }
    return op;
}

// The two passive maps below touch only the affected rows and columns; they are
// the inner loop of every Monte Carlo trial.

GaussianState phase_shift(const GaussianState &state, size_t mode, double theta) {
    require_mode(state, mode, "phase_shift");
    const Eigen::Index k = static_cast<Eigen::Index>(2 * mode);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    Eigen::Matrix2d r;
    r << c, s, -s, c;

    Eigen::VectorXd mean = state.mean();
    mean.segment<2>(k) = r * state.mean().segment<2>(k);

    Eigen::MatrixXd cov = state.cov();
    cov.middleRows<2>(k) = r * cov.middleRows<2>(k);
    cov.middleCols<2>(k) = cov.middleCols<2>(k) * r.transpose();
    symmetrize(cov);
    return GaussianState(std::move(mean), std::move(cov));
}

GaussianState beamsplitter(const GaussianState &state, size_t i, size_t j, double transmittance) {
    require_mode(state, i, "beamsplitter");
    require_mode(state, j, "beamsplitter");
    if (i == j) {
        throw std::invalid_argument("beamsplitter: ports must differ");
    }
    if (!(transmittance >= 0.0 && transmittance <= 1.0)) {
        throw std::invalid_argument("beamsplitter: transmittance must lie in [0, 1]");
    }
    const double t = std::sqrt(transmittance);
    const double r = std::sqrt(1.0 - transmittance);
    const Eigen::Index a = static_cast<Eigen::Index>(2 * i);
    const Eigen::Index b = static_cast<Eigen::Index>(2 * j);

    Eigen::VectorXd mean = state.mean();
    Eigen::MatrixXd cov = state.cov();
    for (Eigen::Index q = 0; q < 2; q++) {
        const double ma = mean[a + q];
        const double mb = mean[b + q];
        mean[a + q] = t * ma + r * mb;
        mean[b + q] = r * ma - t * mb;

        Eigen::RowVectorXd ra = cov.row(a + q);
        Eigen::RowVectorXd rb = cov.row(b + q);
        cov.row(a + q) = t * ra + r * rb;
        cov.row(b + q) = r * ra - t * rb;
    }
    for (Eigen::Index q = 0; q < 2; q++) {
        Eigen::VectorXd ca = cov.col(a + q);
        Eigen::VectorXd cb = cov.col(b + q);
        cov.col(a + q) = t * ca + r * cb;
        cov.col(b + q) = r * ca - t * cb;
    }
    symmetrize(cov);
    return GaussianState(std::move(mean), std::move(cov));
}

GaussianState tensor(const GaussianState &a, const GaussianState &b) {
    const Eigen::Index da = a.mean().size();
    const Eigen::Index db = b.mean().size();
    Eigen::VectorXd mean(da + db);
    mean << a.mean(), b.mean();
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(da + db, da + db);
    cov.topLeftCorner(da, da) = a.cov();
    cov.bottomRightCorner(db, db) = b.cov();
    return GaussianState(std::move(mean), std::move(cov));
}

GaussianState keep_modes(const GaussianState &state, std::span<const size_t> modes) {
    if (modes.empty()) {
        throw std::invalid_argument("keep_modes: mode list is empty");
    }
    std::vector<bool> seen(state.n_modes(), false);
    std::vector<Eigen::Index> idx;
    idx.reserve(2 * modes.size());
    for (size_t m : modes) {
        require_mode(state, m, "keep_modes");
        if (seen[m]) {
            throw std::invalid_argument("keep_modes: duplicate mode " + std::to_string(m));
        }
        seen[m] = true;
        idx.push_back(static_cast<Eigen::Index>(2 * m));
        idx.push_back(static_cast<Eigen::Index>(2 * m + 1));
    }
    Eigen::VectorXd mean = state.mean()(idx);
    Eigen::MatrixXd cov = state.cov()(idx, idx);
    return GaussianState(std::move(mean), std::move(cov));
}

ConditionedState condition_on_value(const GaussianState &state, size_t mode, double lo_angle, double value) {
    require_mode(state, mode, "condition_on_value");
    const Eigen::Index d = state.mean().size();
    const Eigen::Index k = static_cast<Eigen::Index>(2 * mode);
    const Eigen::Vector2d c(std::cos(lo_angle), std::sin(lo_angle));

    const double m_theta = c.dot(state.mean().segment<2>(k));
    const double var_theta = c.dot(state.cov().block<2, 2>(k, k) * c);
    if (!(var_theta > 0.0)) {
        throw InvariantViolation("homodyne conditioning: measured quadrature variance " + std::to_string(var_theta) +
                                 " is not positive");
    }

    std::vector<Eigen::Index> rest;
    rest.reserve(static_cast<size_t>(d - 2));
    for (Eigen::Index q = 0; q < d; q++) {
        if (q != k && q != k + 1) {
            rest.push_back(q);
        }
    }
    const Eigen::VectorXd cross = state.cov()(rest, Eigen::seqN(k, 2)) * c;
    const double innovation = value - m_theta;

    Eigen::VectorXd mean = state.mean()(rest) + cross * (innovation / var_theta);
    Eigen::MatrixXd cov = state.cov()(rest, rest) - cross * cross.transpose() / var_theta;
    symmetrize(cov);

    const double density =
        std::exp(-0.5 * innovation * innovation / var_theta) / std::sqrt(2.0 * std::numbers::pi * var_theta);
    return {GaussianState(std::move(mean), std::move(cov)), density};
}

HomodyneOutcome homodyne_sample(const GaussianState &state, size_t mode, double lo_angle, Rng &rng) {
    require_mode(state, mode, "homodyne_sample");
    const Eigen::Index k = static_cast<Eigen::Index>(2 * mode);
    const Eigen::Vector2d c(std::cos(lo_angle), std::sin(lo_angle));
    const double m_theta = c.dot(state.mean().segment<2>(k));
    const double var_theta = c.dot(state.cov().block<2, 2>(k, k) * c);
    if (!(var_theta > 0.0)) {
        throw InvariantViolation("homodyne_sample: measured quadrature variance " + std::to_string(var_theta) +
                                 " is not positive");
    }
    const double value = m_theta + std::sqrt(var_theta) * standard_normal(rng);
    auto conditioned = condition_on_value(state, mode, lo_angle, value);
    return {value, std::move(conditioned.remaining), conditioned.likelihood_density};
}

QuadratureStats quadrature_stats(const GaussianState &state, std::span<const double> coefficients) {
    if (static_cast<Eigen::Index>(coefficients.size()) != state.mean().size()) {
        throw std::invalid_argument("quadrature_stats: expected " + std::to_string(state.mean().size()) +
                                    " coefficients, got " + std::to_string(coefficients.size()));
    }
    Eigen::Map<const Eigen::VectorXd> c(coefficients.data(), static_cast<Eigen::Index>(coefficients.size()));
    return {c.dot(state.mean()), c.dot(state.cov() * c)};
}

QuadratureStats quadrature_stats(const GaussianEnsemble &ensemble, std::span<const double> coefficients) {
    if (ensemble.components.empty()) {
        throw std::invalid_argument("quadrature_stats: empty ensemble");
    }
    if (ensemble.weights.size() != ensemble.components.size()) {
        throw std::invalid_argument("quadrature_stats: weights and components differ in length");
    }
    double total_weight = 0.0;
    double mean = 0.0;
    double second = 0.0;
    double within = 0.0;
    for (size_t i = 0; i < ensemble.components.size(); i++) {
        const auto s = quadrature_stats(ensemble.components[i], coefficients);
        const double w = ensemble.weights[i];
        total_weight += w;
        mean += w * s.mean;
        second += w * s.mean * s.mean;
        within += w * s.variance;
    }
    mean /= total_weight;
    const double between = second / total_weight - mean * mean;
    return {mean, within / total_weight + between};
}

}  // namespace cvdistill
