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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "spdevo/grid.hpp"

namespace spdevo {

enum class ModelKind { Nagumo, Burgers1D, Heat1D, Heat2D };

std::string_view to_string(ModelKind kind) noexcept;
ModelKind parse_model_kind(std::string_view name);

enum class BoundaryType { Dirichlet, Neumann };

/// Condition on one end of a 1-D domain (or every edge of a 2-D one).
///
/// For Neumann sides `value` is the outward normal derivative dh/dn, so a
/// positive value injects heat at either end: h_x(0) = -value on the left,
/// h_x(a) = +value on the right.
struct BoundarySide {
    BoundaryType type = BoundaryType::Dirichlet;
    double value = 0.0;
};

struct BoundaryCondition {
    BoundarySide left;
    BoundarySide right;
    /// Neumann fluxes on both sides are control inputs (u1, u2).
    bool flux_controlled = false;

    static BoundaryCondition dirichlet(double value = 0.0) { return {{BoundaryType::Dirichlet, value}, {BoundaryType::Dirichlet, value}, false}; }
    static BoundaryCondition neumann(double flux = 0.0) { return {{BoundaryType::Neumann, flux}, {BoundaryType::Neumann, flux}, false}; }
};

struct ModelSpec {
    ModelKind kind = ModelKind::Heat1D;
    double diffusivity = 1.0;  ///< epsilon
    double alpha = 0.0;        ///< Nagumo threshold
    double sigma = 0.0;        ///< noise amplitude multiplying dW
    BoundaryCondition boundary = BoundaryCondition::dirichlet();

    void validate() const;
};

/// h (1 - h) (h - alpha).
double nagumo_reaction(double h, double alpha) noexcept;

/// (1 + exp(-(2 - x) / sqrt(2)))^-1, the travelling-front initial state.
double nagumo_initial_profile(double x);

/// -h_k (h_{k+1} - h_{k-1}) / (2 dx) at interior nodes, zero at the ends.
std::vector<double> burgers_advection(std::span<const double> h, const Grid1D& grid);

/// Scratch buffers reused across steps by one worker.
struct StepWorkspace {
    Eigen::VectorXd rhs;
    Eigen::VectorXd solution;
    Eigen::MatrixXd m1;
    Eigen::MatrixXd m2;
};

/// Neumann flux values for one step (ignored on Dirichlet sides).
struct BoundaryFlux {
    double left = 0.0;
    double right = 0.0;
};

/**
 * Semi-implicit Euler step for the 1-D models:
 *
 *   (I - dt eps L_h) h^{n+1} = h^n + dt f(h^n) + dt forcing + sigma dW
 *
 * L_h is the central second difference; Dirichlet ends are eliminated,
 * Neumann ends use the ghost node h_{-1} = h_1 + 2 dx q. The tridiagonal
 * system is factored once at construction.
 */
class Stepper1D {
public:
    Stepper1D(const Grid1D& grid, const ModelSpec& model, double dt);

    const Grid1D& grid() const noexcept { return grid_; }
    const ModelSpec& model() const noexcept { return model_; }
    double dt() const noexcept { return dt_; }
    std::size_t node_count() const noexcept { return grid_.node_count(); }

    /// Advances h in place; `forcing` and `noise` may be empty (treated as
    /// zero). Returns false if the new state is not finite.
    bool step(std::span<double> h, std::span<const double> forcing, std::span<const double> noise,
              BoundaryFlux flux, StepWorkspace& ws) const;

    /// Applies (I - dt eps L_h) restricted to the unknowns; used to check solves.
    Eigen::VectorXd apply_operator(const Eigen::VectorXd& unknowns) const;
    /// Solves (I - dt eps L_h) x = rhs over the unknowns.
    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
    std::size_t unknown_count() const noexcept { return diag_.size(); }

private:
    void solve_in_place(Eigen::Ref<Eigen::VectorXd> d) const;

    Grid1D grid_;
    ModelSpec model_;
    double dt_;
    std::size_t first_;  // first unknown node index
    std::vector<double> lower_, diag_, upper_;
    std::vector<double> upper_prime_, inv_denom_;
};

/**
 * Semi-implicit step for the 2-D heat equation with Dirichlet edges.
 *
 * The interior operator I - dt eps (L_x + L_y) is diagonalized once by the
 * eigenvectors of the 1-D difference operators, so each solve is four small
 * dense products.
 */
class Stepper2D {
public:
    Stepper2D(const Grid2D& grid, const ModelSpec& model, double dt);

    const Grid2D& grid() const noexcept { return grid_; }
    const ModelSpec& model() const noexcept { return model_; }
    double dt() const noexcept { return dt_; }
    std::size_t node_count() const noexcept { return grid_.node_count(); }

    bool step(std::span<double> h, std::span<const double> forcing, std::span<const double> noise,
              StepWorkspace& ws) const;

    /// Interior operator and solve, interior values stored x fastest.
    Eigen::VectorXd apply_operator(const Eigen::VectorXd& interior) const;
    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

private:
    Grid2D grid_;
    ModelSpec model_;
    double dt_;
    Eigen::MatrixXd vx_, vy_;     // orthonormal eigenvectors of -L_x, -L_y
    Eigen::MatrixXd inv_diag_;    // 1 / (1 + dt eps (mu_x + mu_y))
};

/// One step of a 1-D model, throwing DivergenceError on non-finite output.
FieldState step_semi_implicit(const FieldState& state, const Grid1D& grid, const ModelSpec& model,
                              std::span<const double> control_field, std::span<const double> noise_increment,
                              double dt, std::size_t step_index = 0);
FieldState step_semi_implicit(const FieldState& state, const Grid2D& grid, const ModelSpec& model,
                              std::span<const double> control_field, std::span<const double> noise_increment,
                              double dt, std::size_t step_index = 0);

/**
 * One step of the boundary-controlled 1-D heat equation.
 *
 * The outward normal derivative at each end is u_i + sigma_b dv_i / dt,
 * where dv are the boundary Brownian increments over the step.
 * `interior_noise` is the distributed dW (may be empty).
 */
FieldState step_boundary_controlled_heat(const FieldState& state, const Grid1D& grid, const ModelSpec& model,
                                         double u1, double u2, std::span<const double> boundary_noise,
                                         double boundary_sigma, double dt,
                                         std::span<const double> interior_noise = {}, std::size_t step_index = 0);

/// Discrete L2 norm sqrt(<h, h>) with trapezoid weights.
double l2_norm(std::span<const double> h, const Grid1D& grid);
double l2_norm(std::span<const double> h, const Grid2D& grid);

} // namespace spdevo
