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

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "spdevo/grid.hpp"
#include "spdevo/noise.hpp"

namespace spdevo {

/// exp(-(x - mu)^2 / (2 width^2)).
double actuator_value(double x, double center, double width);
/// Isotropic 2-D bump exp(-|p - mu|^2 / (2 width^2)).
double actuator_value(std::array<double, 2> p, std::array<double, 2> center, double width);

/**
 * Gaussian actuator shapes m_l sampled on a grid, with their Gram matrix
 * M_ij = <m_i, m_j> and its Cholesky factor.
 */
class ActuatorSet {
public:
    ActuatorSet(const Grid1D& grid, std::vector<double> centers, std::vector<double> widths);
    ActuatorSet(const Grid2D& grid, std::vector<std::array<double, 2>> centers, std::vector<double> widths);

    std::size_t size() const noexcept { return static_cast<std::size_t>(shapes_.cols()); }
    std::size_t node_count() const noexcept { return static_cast<std::size_t>(shapes_.rows()); }
    /// node_count x N, column l holds m_l(x_k).
    const Eigen::MatrixXd& shapes() const noexcept { return shapes_; }
    /// Shapes scaled by quadrature weights: projections are weighted_shapes^T f.
    const Eigen::MatrixXd& weighted_shapes() const noexcept { return weighted_; }
    const Eigen::MatrixXd& gram() const noexcept { return gram_; }
    const Eigen::LLT<Eigen::MatrixXd>& gram_factor() const noexcept { return factor_; }

    /// M^{-1} v via the cached factorization.
    Eigen::VectorXd solve(const Eigen::VectorXd& v) const;

private:
    void finish(const Eigen::VectorXd& weights);

    Eigen::MatrixXd shapes_;
    Eigen::MatrixXd weighted_;
    Eigen::MatrixXd gram_;
    Eigen::LLT<Eigen::MatrixXd> factor_;
};

/// Gram matrix of a shape set; throws DegenerateActuationError naming the
/// first pair of linearly dependent actuators when M is not positive definite.
Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& shapes, const Eigen::VectorXd& weights);

/// U(x_k) = sum_l m_l(x_k) u_l.
std::vector<double> control_to_field(const ActuatorSet& set, std::span<const double> u);

/**
 * Coupling P_ls = <m_l, sqrt(lambda_s) e_s> between actuators and noise
 * modes, so that the projected increment over one bin is du = P dbeta.
 */
class NoiseProjection {
public:
    NoiseProjection(const ActuatorSet& set, const SpectralBasis1D& basis);
    NoiseProjection(const ActuatorSet& set, const SpectralBasis2D& basis);

    const Eigen::MatrixXd& coupling() const noexcept { return coupling_; }
    std::size_t actuators() const noexcept { return static_cast<std::size_t>(coupling_.rows()); }
    std::size_t modes() const noexcept { return static_cast<std::size_t>(coupling_.cols()); }

private:
    Eigen::MatrixXd coupling_;
};

std::vector<double> project_increment(const NoiseProjection& projection, std::span<const double> dbeta);

/// Trapezoid weights of every node, in field storage order.
Eigen::VectorXd quadrature_weights(const Grid1D& grid);
Eigen::VectorXd quadrature_weights(const Grid2D& grid);

} // namespace spdevo
