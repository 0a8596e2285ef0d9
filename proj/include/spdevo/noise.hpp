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

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "spdevo/grid.hpp"
#include "spdevo/rng.hpp"

namespace spdevo {

/// Type-I discrete sine transform of the grid interior (1-D or 2-D).
class SineTransform;

/// e_j(x) = sqrt(2/a) sin(j pi x / a).
double basis_eval(std::size_t j, double x, double length);

/// Eigenvalue profile: lambda_j = j^(-2*decay). decay = 0 gives cylindrical noise.
std::vector<double> eigenvalue_profile(std::size_t modes, double decay);

/**
 * Truncated sine eigenbasis evaluated on a 1-D grid.
 *
 * Stores the synthesis matrix S with S(k, j) = sqrt(lambda_j) e_j(x_k), so a
 * field increment is S * dbeta.
 */
class SpectralBasis1D {
public:
    SpectralBasis1D(const Grid1D& grid, std::size_t modes, std::vector<double> eigenvalues);
    /// Cylindrical basis with `modes` modes (0 means one per interval, R = J).
    explicit SpectralBasis1D(const Grid1D& grid, std::size_t modes = 0);

    std::size_t modes() const noexcept { return eigenvalues_.size(); }
    const Grid1D& grid() const noexcept { return grid_; }
    std::span<const double> eigenvalues() const noexcept { return eigenvalues_; }
    /// Synthesis matrix, node_count x modes.
    const Eigen::MatrixXd& synthesis() const noexcept { return synthesis_; }
    /// Plain e_j values (without sqrt(lambda)), node_count x modes.
    const Eigen::MatrixXd& values() const noexcept { return values_; }

private:
    Grid1D grid_;
    std::vector<double> eigenvalues_;
    Eigen::MatrixXd values_;
    Eigen::MatrixXd synthesis_;
    std::shared_ptr<const SineTransform> transform_;
    std::vector<int> slots_;
    std::vector<double> gains_;

    friend void assemble_field_increment_into(const Eigen::Ref<const Eigen::VectorXd>&, const SpectralBasis1D&,
                                              Eigen::Ref<Eigen::VectorXd>);
};

/**
 * Tensor-product sine basis e_jk(x, y) = e_j(x) e_k(y) with R modes per axis.
 *
 * Mode increments are laid out as an R x R matrix B (B(j,k) for mode (j,k));
 * the flat vector form is column-major, index = k * R + j.
 */
class SpectralBasis2D {
public:
    SpectralBasis2D(const Grid2D& grid, std::size_t modes_per_axis, double decay = 0.0);

    std::size_t modes_per_axis() const noexcept { return modes_; }
    std::size_t modes() const noexcept { return modes_ * modes_; }
    const Grid2D& grid() const noexcept { return grid_; }
    /// sqrt(lambda_jk), R x R.
    const Eigen::MatrixXd& amplitudes() const noexcept { return amplitudes_; }
    /// e_j(x_i), nx x R and e_k(y_j), ny x R.
    const Eigen::MatrixXd& x_values() const noexcept { return ex_; }
    const Eigen::MatrixXd& y_values() const noexcept { return ey_; }

private:
    Grid2D grid_;
    std::size_t modes_;
    Eigen::MatrixXd amplitudes_;
    Eigen::MatrixXd ex_;
    Eigen::MatrixXd ey_;
    std::shared_ptr<const SineTransform> transform_;
    std::vector<int> slots_;
    std::vector<double> gains_;

    friend void assemble_field_increment_into(const Eigen::Ref<const Eigen::VectorXd>&, const SpectralBasis2D&,
                                              Eigen::MatrixXd&, Eigen::Ref<Eigen::VectorXd>);
};

/// R independent N(0, dt) draws for one (stream, bin).
std::vector<double> sample_mode_increments(std::size_t modes, double dt, const NormalStream& stream,
                                           std::uint64_t bin);

/// dW(x_k) = sum_j sqrt(lambda_j) e_j(x_k) dbeta_j.
std::vector<double> assemble_field_increment(std::span<const double> dbeta, const SpectralBasis1D& basis);
std::vector<double> assemble_field_increment(std::span<const double> dbeta, const SpectralBasis2D& basis);

/// Allocation-free variants used inside the rollout loop.
void assemble_field_increment_into(const Eigen::Ref<const Eigen::VectorXd>& dbeta, const SpectralBasis1D& basis,
                                   Eigen::Ref<Eigen::VectorXd> out);
void assemble_field_increment_into(const Eigen::Ref<const Eigen::VectorXd>& dbeta, const SpectralBasis2D& basis,
                                   Eigen::MatrixXd& scratch, Eigen::Ref<Eigen::VectorXd> out);

} // namespace spdevo
