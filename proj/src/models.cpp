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

#include "spdevo/models.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "spdevo/error.hpp"

namespace spdevo {

namespace {

// x * 0 is NaN exactly when x is infinite or NaN.
bool all_finite(std::span<const double> v) noexcept
{
    double probe = 0.0;
    for (double x : v) {
        probe += x * 0.0;
    }
    return probe == 0.0;
}

Eigen::MatrixXd second_difference_eigenvectors(std::size_t interior, double dx, Eigen::VectorXd& eigenvalues)
{
    const auto n = static_cast<Eigen::Index>(interior);
    Eigen::MatrixXd neg_lap = Eigen::MatrixXd::Zero(n, n);
    const double inv = 1.0 / (dx * dx);
    for (Eigen::Index i = 0; i < n; ++i) {
        neg_lap(i, i) = 2.0 * inv;
        if (i + 1 < n) {
            neg_lap(i, i + 1) = -inv;
            neg_lap(i + 1, i) = -inv;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(neg_lap);
    if (eig.info() != Eigen::Success) {
        throw NumericError("eigen-decomposition of the 1-D Laplacian failed");
    }
    eigenvalues = eig.eigenvalues();
    return eig.eigenvectors();
}

} // namespace

std::string_view to_string(ModelKind kind) noexcept
{
    switch (kind) {
    case ModelKind::Nagumo: return "nagumo";
    case ModelKind::Burgers1D: return "burgers";
    case ModelKind::Heat1D: return "heat1d";
    case ModelKind::Heat2D: return "heat2d";
    }
    return "unknown";
}

ModelKind parse_model_kind(std::string_view name)
{
    if (name == "nagumo") return ModelKind::Nagumo;
    if (name == "burgers" || name == "burgers1d") return ModelKind::Burgers1D;
    if (name == "heat1d" || name == "heat") return ModelKind::Heat1D;
    if (name == "heat2d") return ModelKind::Heat2D;
    throw ConfigError("unknown model kind '" + std::string(name) + "'");
}

void ModelSpec::validate() const
{
    if (!(diffusivity > 0.0) || !std::isfinite(diffusivity)) {
        throw ConfigError("diffusivity must be positive");
    }
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw ConfigError("noise amplitude sigma must be non-negative");
    }
    if (boundary.flux_controlled &&
        (boundary.left.type != BoundaryType::Neumann || boundary.right.type != BoundaryType::Neumann)) {
        throw ConfigError("boundary control needs Neumann conditions on both ends");
    }
    if (kind == ModelKind::Heat2D &&
        (boundary.left.type != BoundaryType::Dirichlet || boundary.right.type != BoundaryType::Dirichlet ||
         boundary.left.value != boundary.right.value)) {
        throw ConfigError("heat2d supports a single Dirichlet value on every edge");
    }
}

double nagumo_reaction(double h, double alpha) noexcept { return h * (1.0 - h) * (h - alpha); }

double nagumo_initial_profile(double x)
{
    return 1.0 / (1.0 + std::exp(-(2.0 - x) / std::numbers::sqrt2));
}

std::vector<double> burgers_advection(std::span<const double> h, const Grid1D& grid)
{
    const std::size_t n = grid.node_count();
    if (h.size() != n) {
        throw DimensionError("burgers_advection: field size does not match grid");
    }
    std::vector<double> out(n, 0.0);
    const double inv2dx = 0.5 / grid.spacing();
    for (std::size_t k = 1; k + 1 < n; ++k) {
        out[k] = -h[k] * (h[k + 1] - h[k - 1]) * inv2dx;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Stepper1D

Stepper1D::Stepper1D(const Grid1D& grid, const ModelSpec& model, double dt) : grid_(grid), model_(model), dt_(dt)
{
    model_.validate();
    if (model_.kind == ModelKind::Heat2D) {
        throw ConfigError("Stepper1D cannot integrate a 2-D model");
    }
    if (!(dt > 0.0)) {
        throw ConfigError("time step must be positive");
    }
    const std::size_t n_nodes = grid.node_count();
    const bool left_dir = model_.boundary.left.type == BoundaryType::Dirichlet;
    const bool right_dir = model_.boundary.right.type == BoundaryType::Dirichlet;
    first_ = left_dir ? 1 : 0;
    const std::size_t last = right_dir ? n_nodes - 2 : n_nodes - 1;
    const std::size_t n = last - first_ + 1;
    const double r = dt * model_.diffusivity / (grid.spacing() * grid.spacing());

    lower_.assign(n, -r);
    diag_.assign(n, 1.0 + 2.0 * r);
    upper_.assign(n, -r);
    lower_[0] = 0.0;
    upper_[n - 1] = 0.0;
    if (!left_dir) {
        upper_[0] = -2.0 * r;
    }
    if (!right_dir) {
        lower_[n - 1] = -2.0 * r;
    }

    upper_prime_.resize(n);
    inv_denom_.resize(n);
    double prev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double denom = diag_[i] - lower_[i] * prev;
        if (!(std::abs(denom) > 0.0) || !std::isfinite(denom)) {
            throw NumericError("tridiagonal factorization broke down at row " + std::to_string(i));
        }
        inv_denom_[i] = 1.0 / denom;
        upper_prime_[i] = upper_[i] * inv_denom_[i];
        prev = upper_prime_[i];
    }
}

void Stepper1D::solve_in_place(Eigen::Ref<Eigen::VectorXd> d) const
{
    const auto n = static_cast<Eigen::Index>(diag_.size());
    d[0] *= inv_denom_[0];
    for (Eigen::Index i = 1; i < n; ++i) {
        d[i] = (d[i] - lower_[static_cast<std::size_t>(i)] * d[i - 1]) * inv_denom_[static_cast<std::size_t>(i)];
    }
    for (Eigen::Index i = n - 2; i >= 0; --i) {
        d[i] -= upper_prime_[static_cast<std::size_t>(i)] * d[i + 1];
    }
}

Eigen::VectorXd Stepper1D::solve(const Eigen::VectorXd& rhs) const
{
    if (static_cast<std::size_t>(rhs.size()) != diag_.size()) {
        throw DimensionError("Stepper1D::solve: rhs size mismatch");
    }
    Eigen::VectorXd x = rhs;
    solve_in_place(x);
    return x;
}

Eigen::VectorXd Stepper1D::apply_operator(const Eigen::VectorXd& x) const
{
    const auto n = static_cast<Eigen::Index>(diag_.size());
    if (x.size() != n) {
        throw DimensionError("Stepper1D::apply_operator: size mismatch");
    }
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto s = static_cast<std::size_t>(i);
        double v = diag_[s] * x[i];
        if (i > 0) v += lower_[s] * x[i - 1];
        if (i + 1 < n) v += upper_[s] * x[i + 1];
        y[i] = v;
    }
    return y;
}

bool Stepper1D::step(std::span<double> h, std::span<const double> forcing, std::span<const double> noise,
                     BoundaryFlux flux, StepWorkspace& ws) const
{
    const std::size_t n_nodes = grid_.node_count();
    const auto n = static_cast<Eigen::Index>(diag_.size());
    ws.rhs.resize(n);
    const double dt = dt_;
    const double sigma = model_.sigma;
    const bool has_forcing = !forcing.empty();
    const bool has_noise = !noise.empty() && sigma != 0.0;
    const double inv2dx = 0.5 / grid_.spacing();

    double* rhs = ws.rhs.data();
    const double* hk = h.data() + first_;
    switch (model_.kind) {
    case ModelKind::Nagumo:
        for (Eigen::Index i = 0; i < n; ++i) rhs[i] = hk[i] + dt * nagumo_reaction(hk[i], model_.alpha);
        break;
    case ModelKind::Burgers1D:
        for (Eigen::Index i = 0; i < n; ++i) {
            const std::size_t k = first_ + static_cast<std::size_t>(i);
            const double f = (k > 0 && k + 1 < n_nodes) ? -h[k] * (h[k + 1] - h[k - 1]) * inv2dx : 0.0;
            rhs[i] = h[k] + dt * f;
        }
        break;
    default:
        for (Eigen::Index i = 0; i < n; ++i) rhs[i] = hk[i];
        break;
    }
    if (has_forcing) {
        const double* fk = forcing.data() + first_;
        for (Eigen::Index i = 0; i < n; ++i) rhs[i] += dt * fk[i];
    }
    if (has_noise) {
        const double* wk = noise.data() + first_;
        for (Eigen::Index i = 0; i < n; ++i) rhs[i] += sigma * wk[i];
    }

    const double r = dt * model_.diffusivity / (grid_.spacing() * grid_.spacing());
    const double g = 2.0 * dt * model_.diffusivity / grid_.spacing();
    const auto& bc = model_.boundary;
    if (bc.left.type == BoundaryType::Dirichlet) {
        ws.rhs[0] += r * bc.left.value;
    } else {
        ws.rhs[0] += g * (bc.left.value + flux.left);
    }
    if (bc.right.type == BoundaryType::Dirichlet) {
        ws.rhs[n - 1] += r * bc.right.value;
    } else {
        ws.rhs[n - 1] += g * (bc.right.value + flux.right);
    }

    solve_in_place(ws.rhs);

    for (Eigen::Index i = 0; i < n; ++i) {
        h[first_ + static_cast<std::size_t>(i)] = ws.rhs[i];
    }
    if (bc.left.type == BoundaryType::Dirichlet) {
        h[0] = bc.left.value;
    }
    if (bc.right.type == BoundaryType::Dirichlet) {
        h[n_nodes - 1] = bc.right.value;
    }
    return all_finite(h);
}

// ---------------------------------------------------------------------------
// Stepper2D

Stepper2D::Stepper2D(const Grid2D& grid, const ModelSpec& model, double dt) : grid_(grid), model_(model), dt_(dt)
{
    model_.validate();
    if (model_.kind != ModelKind::Heat2D) {
        throw ConfigError("Stepper2D only integrates the 2-D heat equation");
    }
    if (!(dt > 0.0)) {
        throw ConfigError("time step must be positive");
    }
    Eigen::VectorXd mux, muy;
    vx_ = second_difference_eigenvectors(grid.nx() - 2, grid.x_axis().spacing(), mux);
    vy_ = second_difference_eigenvectors(grid.ny() - 2, grid.y_axis().spacing(), muy);
    inv_diag_.resize(mux.size(), muy.size());
    for (Eigen::Index j = 0; j < muy.size(); ++j) {
        for (Eigen::Index i = 0; i < mux.size(); ++i) {
            inv_diag_(i, j) = 1.0 / (1.0 + dt * model_.diffusivity * (mux[i] + muy[j]));
        }
    }
}

Eigen::VectorXd Stepper2D::solve(const Eigen::VectorXd& rhs) const
{
    const auto nix = vx_.rows();
    const auto niy = vy_.rows();
    if (rhs.size() != nix * niy) {
        throw DimensionError("Stepper2D::solve: rhs size mismatch");
    }
    const Eigen::Map<const Eigen::MatrixXd> f(rhs.data(), nix, niy);
    Eigen::MatrixXd g = vx_.transpose() * f * vy_;
    g = g.cwiseProduct(inv_diag_);
    Eigen::MatrixXd u = vx_ * g * vy_.transpose();
    return Eigen::Map<Eigen::VectorXd>(u.data(), u.size());
}

Eigen::VectorXd Stepper2D::apply_operator(const Eigen::VectorXd& x) const
{
    const auto nix = vx_.rows();
    const auto niy = vy_.rows();
    if (x.size() != nix * niy) {
        throw DimensionError("Stepper2D::apply_operator: size mismatch");
    }
    const double rx = dt_ * model_.diffusivity / std::pow(grid_.x_axis().spacing(), 2);
    const double ry = dt_ * model_.diffusivity / std::pow(grid_.y_axis().spacing(), 2);
    const Eigen::Map<const Eigen::MatrixXd> u(x.data(), nix, niy);
    Eigen::MatrixXd y(nix, niy);
    for (Eigen::Index j = 0; j < niy; ++j) {
        for (Eigen::Index i = 0; i < nix; ++i) {
            double v = (1.0 + 2.0 * rx + 2.0 * ry) * u(i, j);
            if (i > 0) v -= rx * u(i - 1, j);
            if (i + 1 < nix) v -= rx * u(i + 1, j);
            if (j > 0) v -= ry * u(i, j - 1);
            if (j + 1 < niy) v -= ry * u(i, j + 1);
            y(i, j) = v;
        }
    }
    return Eigen::Map<Eigen::VectorXd>(y.data(), y.size());
}

bool Stepper2D::step(std::span<double> h, std::span<const double> forcing, std::span<const double> noise,
                     StepWorkspace& ws) const
{
    const std::size_t nx = grid_.nx();
    const std::size_t ny = grid_.ny();
    const auto nix = static_cast<Eigen::Index>(nx - 2);
    const auto niy = static_cast<Eigen::Index>(ny - 2);
    const double dt = dt_;
    const double sigma = model_.sigma;
    const bool has_forcing = !forcing.empty();
    const bool has_noise = !noise.empty() && sigma != 0.0;
    const double g = model_.boundary.left.value;
    const double rx = dt * model_.diffusivity / std::pow(grid_.x_axis().spacing(), 2);
    const double ry = dt * model_.diffusivity / std::pow(grid_.y_axis().spacing(), 2);

    ws.m1.resize(nix, niy);
    for (Eigen::Index jj = 0; jj < niy; ++jj) {
        const std::size_t j = static_cast<std::size_t>(jj) + 1;
        for (Eigen::Index ii = 0; ii < nix; ++ii) {
            const std::size_t i = static_cast<std::size_t>(ii) + 1;
            const std::size_t idx = grid_.index(i, j);
            double v = h[idx];
            if (has_forcing) v += dt * forcing[idx];
            if (has_noise) v += sigma * noise[idx];
            if (ii == 0) v += rx * g;
            if (ii + 1 == nix) v += rx * g;
            if (jj == 0) v += ry * g;
            if (jj + 1 == niy) v += ry * g;
            ws.m1(ii, jj) = v;
        }
    }
    ws.m2.noalias() = vx_.transpose() * ws.m1;
    ws.m1.noalias() = ws.m2 * vy_;
    ws.m1.array() *= inv_diag_.array();
    ws.m2.noalias() = vx_ * ws.m1;
    ws.m1.noalias() = ws.m2 * vy_.transpose();

    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            const bool edge = i == 0 || j == 0 || i + 1 == nx || j + 1 == ny;
            h[grid_.index(i, j)] =
                edge ? g : ws.m1(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j - 1));
        }
    }
    return all_finite(h);
}

// ---------------------------------------------------------------------------
// Free functions

namespace {

void check_optional_field(std::span<const double> f, std::size_t n, const char* name)
{
    if (!f.empty() && f.size() != n) {
        throw DimensionError(std::string(name) + " has " + std::to_string(f.size()) + " values, grid has " +
                             std::to_string(n) + " nodes");
    }
}

} // namespace

FieldState step_semi_implicit(const FieldState& state, const Grid1D& grid, const ModelSpec& model,
                              std::span<const double> control_field, std::span<const double> noise_increment,
                              double dt, std::size_t step_index)
{
    validate_field(state, grid.node_count());
    check_optional_field(control_field, grid.node_count(), "control field");
    check_optional_field(noise_increment, grid.node_count(), "noise increment");
    const Stepper1D stepper(grid, model, dt);
    StepWorkspace ws;
    FieldState next{state.values, state.time + dt};
    if (!stepper.step(next.values, control_field, noise_increment, {}, ws)) {
        throw DivergenceError("state became non-finite", step_index);
    }
    return next;
}

FieldState step_semi_implicit(const FieldState& state, const Grid2D& grid, const ModelSpec& model,
                              std::span<const double> control_field, std::span<const double> noise_increment,
                              double dt, std::size_t step_index)
{
    validate_field(state, grid.node_count());
    check_optional_field(control_field, grid.node_count(), "control field");
    check_optional_field(noise_increment, grid.node_count(), "noise increment");
    const Stepper2D stepper(grid, model, dt);
    StepWorkspace ws;
    FieldState next{state.values, state.time + dt};
    if (!stepper.step(next.values, control_field, noise_increment, ws)) {
        throw DivergenceError("state became non-finite", step_index);
    }
    return next;
}

FieldState step_boundary_controlled_heat(const FieldState& state, const Grid1D& grid, const ModelSpec& model,
                                         double u1, double u2, std::span<const double> boundary_noise,
                                         double boundary_sigma, double dt, std::span<const double> interior_noise,
                                         std::size_t step_index)
{
    if (model.kind != ModelKind::Heat1D || model.boundary.left.type != BoundaryType::Neumann ||
        model.boundary.right.type != BoundaryType::Neumann) {
        throw ConfigError("boundary control needs the 1-D heat model with Neumann ends");
    }
    if (!boundary_noise.empty() && boundary_noise.size() != 2) {
        throw DimensionError("boundary noise needs one increment per end");
    }
    validate_field(state, grid.node_count());
    check_optional_field(interior_noise, grid.node_count(), "noise increment");
    const Stepper1D stepper(grid, model, dt);
    StepWorkspace ws;
    BoundaryFlux flux{u1, u2};
    if (!boundary_noise.empty()) {
        flux.left += boundary_sigma * boundary_noise[0] / dt;
        flux.right += boundary_sigma * boundary_noise[1] / dt;
    }
    FieldState next{state.values, state.time + dt};
    if (!stepper.step(next.values, {}, interior_noise, flux, ws)) {
        throw DivergenceError("state became non-finite", step_index);
    }
    return next;
}

double l2_norm(std::span<const double> h, const Grid1D& grid) { return std::sqrt(inner_product(h, h, grid)); }

double l2_norm(std::span<const double> h, const Grid2D& grid) { return std::sqrt(inner_product(h, h, grid)); }

} // namespace spdevo
