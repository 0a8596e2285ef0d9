// Copyright 2026 The spdevo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "spdevo/actuation.hpp"

#include <cmath>
#include <string>

#include "spdevo/error.hpp"

namespace spdevo {

namespace {

void check_width(double width)
{
    if (!(width > 0.0) || !std::isfinite(width)) {
        throw ConfigError("actuator width must be positive, got " + std::to_string(width));
    }
}

} // namespace

double actuator_value(double x, double center, double width)
{
    check_width(width);
    const double d = x - center;
    return std::exp(-d * d / (2.0 * width * width));
}

double actuator_value(std::array<double, 2> p, std::array<double, 2> center, double width)
{
    check_width(width);
    const double dx = p[0] - center[0];
    const double dy = p[1] - center[1];
    return std::exp(-(dx * dx + dy * dy) / (2.0 * width * width));
}

Eigen::VectorXd quadrature_weights(const Grid1D& grid)
{
    Eigen::VectorXd w(static_cast<Eigen::Index>(grid.node_count()));
    for (std::size_t k = 0; k < grid.node_count(); ++k) {
        w[static_cast<Eigen::Index>(k)] = grid.weight(k);
    }
    return w;
}

Eigen::VectorXd quadrature_weights(const Grid2D& grid)
{
    Eigen::VectorXd w(static_cast<Eigen::Index>(grid.node_count()));
    for (std::size_t j = 0; j < grid.ny(); ++j) {
        for (std::size_t i = 0; i < grid.nx(); ++i) {
            w[static_cast<Eigen::Index>(grid.index(i, j))] = grid.weight(i, j);
        }
    }
    return w;
}

Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& shapes, const Eigen::VectorXd& weights)
{
    const Eigen::Index n = shapes.cols();
    if (n < 1) {
        throw ConfigError("at least one actuator is required");
    }
    if (shapes.rows() != weights.size()) {
        throw DimensionError("gram_matrix: shape/weight size mismatch");
    }
    // Same accumulation for (i, j) and (j, i) keeps M exactly symmetric.
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            double s = 0.0;
            for (Eigen::Index k = 0; k < shapes.rows(); ++k) {
                s += weights[k] * (shapes(k, i) * shapes(k, j));
            }
            m(i, j) = s;
            m(j, i) = s;
        }
    }
    return m;
}

void ActuatorSet::finish(const Eigen::VectorXd& weights)
{
    weighted_ = weights.asDiagonal() * shapes_;
    gram_ = gram_matrix(shapes_, weights);
    factor_.compute(gram_);
    const Eigen::Index n = gram_.rows();
    bool ok = factor_.info() == Eigen::Success;
    if (ok) {
        // LLT succeeds on numerically singular matrices; reject tiny pivots too.
        const Eigen::VectorXd d = Eigen::MatrixXd(factor_.matrixL()).diagonal();
        const double scale = gram_.diagonal().maxCoeff();
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!(d[i] * d[i] > 1e-12 * scale)) {
                ok = false;
            }
        }
    }
    if (ok) {
        return;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double c = gram_(i, j) / std::sqrt(gram_(i, i) * gram_(j, j));
            if (c > 1.0 - 1e-9) {
                throw DegenerateActuationError("actuator Gram matrix is singular: actuators " + std::to_string(i + 1) +
                                               " and " + std::to_string(j + 1) + " coincide");
            }
        }
    }
    throw DegenerateActuationError("actuator Gram matrix is not positive definite");
}

ActuatorSet::ActuatorSet(const Grid1D& grid, std::vector<double> centers, std::vector<double> widths)
{
    if (centers.empty()) {
        throw ConfigError("at least one actuator is required");
    }
    if (widths.size() == 1 && centers.size() > 1) {
        widths.assign(centers.size(), widths.front());
    }
    if (widths.size() != centers.size()) {
        throw DimensionError("actuator centers and widths differ in length");
    }
    const auto n = static_cast<Eigen::Index>(grid.node_count());
    shapes_.resize(n, static_cast<Eigen::Index>(centers.size()));
    for (std::size_t l = 0; l < centers.size(); ++l) {
        check_width(widths[l]);
        for (Eigen::Index k = 0; k < n; ++k) {
            shapes_(k, static_cast<Eigen::Index>(l)) =
                actuator_value(grid.node(static_cast<std::size_t>(k)), centers[l], widths[l]);
        }
    }
    finish(quadrature_weights(grid));
}

ActuatorSet::ActuatorSet(const Grid2D& grid, std::vector<std::array<double, 2>> centers, std::vector<double> widths)
{
    if (centers.empty()) {
        throw ConfigError("at least one actuator is required");
    }
    if (widths.size() == 1 && centers.size() > 1) {
        widths.assign(centers.size(), widths.front());
    }
    if (widths.size() != centers.size()) {
        throw DimensionError("actuator centers and widths differ in length");
    }
    shapes_.resize(static_cast<Eigen::Index>(grid.node_count()), static_cast<Eigen::Index>(centers.size()));
    for (std::size_t l = 0; l < centers.size(); ++l) {
        check_width(widths[l]);
        for (std::size_t j = 0; j < grid.ny(); ++j) {
            for (std::size_t i = 0; i < grid.nx(); ++i) {
                shapes_(static_cast<Eigen::Index>(grid.index(i, j)), static_cast<Eigen::Index>(l)) =
                    actuator_value({grid.x_axis().node(i), grid.y_axis().node(j)}, centers[l], widths[l]);
            }
        }
    }
    finish(quadrature_weights(grid));
}

Eigen::VectorXd ActuatorSet::solve(const Eigen::VectorXd& v) const
{
    if (v.size() != gram_.rows()) {
        throw DimensionError("ActuatorSet::solve: vector size mismatch");
    }
    return factor_.solve(v);
}

std::vector<double> control_to_field(const ActuatorSet& set, std::span<const double> u)
{
    if (u.size() != set.size()) {
        throw DimensionError("control_to_field: got " + std::to_string(u.size()) + " controls for " +
                             std::to_string(set.size()) + " actuators");
    }
    std::vector<double> out(set.node_count(), 0.0);
    const auto& m = set.shapes();
    for (std::size_t l = 0; l < u.size(); ++l) {
        const double ul = u[l];
        for (std::size_t k = 0; k < out.size(); ++k) {
            out[k] += m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) * ul;
        }
    }
    return out;
}

NoiseProjection::NoiseProjection(const ActuatorSet& set, const SpectralBasis1D& basis)
{
    if (set.node_count() != basis.grid().node_count()) {
        throw DimensionError("NoiseProjection: actuator and basis grids differ");
    }
    coupling_ = set.weighted_shapes().transpose() * basis.synthesis();
}

NoiseProjection::NoiseProjection(const ActuatorSet& set, const SpectralBasis2D& basis)
{
    if (set.node_count() != basis.grid().node_count()) {
        throw DimensionError("NoiseProjection: actuator and basis grids differ");
    }
    const auto r = static_cast<Eigen::Index>(basis.modes_per_axis());
    const auto nx = static_cast<Eigen::Index>(basis.grid().nx());
    const auto ny = static_cast<Eigen::Index>(basis.grid().ny());
    coupling_.resize(static_cast<Eigen::Index>(set.size()), r * r);
    for (Eigen::Index l = 0; l < coupling_.rows(); ++l) {
        // <m_l, e_p e_q> = sum_ij w_ij m_l(x_i, y_j) e_p(x_i) e_q(y_j) = (Ex^T Wm Ey)(p, q)
        const Eigen::Map<const Eigen::MatrixXd> wm(set.weighted_shapes().col(l).data(), nx, ny);
        const Eigen::MatrixXd c = basis.x_values().transpose() * wm * basis.y_values();
        const Eigen::MatrixXd scaled = c.cwiseProduct(basis.amplitudes());
        coupling_.row(l) = Eigen::Map<const Eigen::RowVectorXd>(scaled.data(), r * r);
    }
}

std::vector<double> project_increment(const NoiseProjection& projection, std::span<const double> dbeta)
{
    if (dbeta.size() != projection.modes()) {
        throw DimensionError("project_increment: got " + std::to_string(dbeta.size()) + " increments for " +
                             std::to_string(projection.modes()) + " modes");
    }
    const Eigen::Map<const Eigen::VectorXd> b(dbeta.data(), static_cast<Eigen::Index>(dbeta.size()));
    const Eigen::VectorXd du = projection.coupling() * b;
    return {du.data(), du.data() + du.size()};
}

} // namespace spdevo
