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

#include "spdevo/controller.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "spdevo/error.hpp"

namespace spdevo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

} // namespace

// ---------------------------------------------------------------------------
// CostSpec

void CostSpec::validate(std::size_t node_count) const
{
    if (!(kappa > 0.0) || !std::isfinite(kappa)) {
        throw ConfigError("cost scale kappa must be positive");
    }
    if (mask.size() != node_count || desired.size() != node_count) {
        throw DimensionError("cost mask/desired profile do not match the grid");
    }
    for (auto m : mask) {
        if (m > 1) {
            throw ConfigError("cost mask must be 0 or 1");
        }
    }
    if (terminal_weight < 0.0) {
        throw ConfigError("terminal weight must be non-negative");
    }
    for (std::size_t i = 1; i < schedule.size(); ++i) {
        if (!(schedule[i].until > schedule[i - 1].until)) {
            throw ConfigError("target schedule times must increase");
        }
    }
}

double CostSpec::desired_at(double t, std::size_t k) const noexcept
{
    if (schedule.empty()) {
        return desired[k];
    }
    // A small slack keeps t = 0.4 from landing in the next segment through round-off.
    for (const auto& seg : schedule) {
        if (t <= seg.until + 1e-9) {
            return seg.value;
        }
    }
    return schedule.back().value;
}

double CostSpec::step_cost(double t, std::span<const double> h) const noexcept
{
    double sum = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k) {
        if (mask[k]) {
            const double e = h[k] - desired_at(t, k);
            sum += e * e;
        }
    }
    return kappa * sum;
}

double CostSpec::terminal_cost(double t, std::span<const double> h) const noexcept
{
    if (terminal_weight == 0.0) {
        return 0.0;
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k) {
        if (mask[k]) {
            const double e = h[k] - desired_at(t, k);
            sum += e * e;
        }
    }
    return terminal_weight * sum;
}

double trajectory_cost(std::span<const FieldState> path, const CostSpec& spec)
{
    if (path.empty()) {
        throw DomainError("trajectory_cost: empty path");
    }
    double cost = 0.0;
    for (const auto& state : path) {
        if (state.values.size() != spec.mask.size()) {
            throw DimensionError("trajectory_cost: state size does not match cost mask");
        }
        cost += spec.step_cost(state.time, state.values);
    }
    cost += spec.terminal_cost(path.back().time, path.back().values);
    return std::isfinite(cost) ? cost : kInf;
}

// ---------------------------------------------------------------------------
// ControlSequence / RolloutBatch / settings

ControlSequence::ControlSequence(std::size_t bins, std::size_t actuators, double dt)
    : bins_(bins), actuators_(actuators), dt_(dt), data_(bins * actuators, 0.0)
{
    if (bins < 1) {
        throw ConfigError("control sequence needs at least one bin");
    }
    if (actuators < 1) {
        throw ConfigError("control sequence needs at least one actuator");
    }
    if (!(dt > 0.0)) {
        throw ConfigError("control bin width must be positive");
    }
}

void ControlSequence::shift_left()
{
    if (bins_ < 2) {
        return;
    }
    std::copy(data_.begin() + static_cast<std::ptrdiff_t>(actuators_), data_.end(), data_.begin());
    // The last row now equals the old last row already; nothing to repeat.
}

RolloutBatch::RolloutBatch(std::size_t r, std::size_t l, std::size_t n)
    : rollouts(r), bins(l), actuators(n), state_cost(r, 0.0), correction(r, 0.0), delta_u(r * l * n, 0.0),
      weights(r, 0.0)
{
}

void OptimizerSettings::validate() const
{
    if (!(rho > 0.0) || !std::isfinite(rho)) {
        throw ConfigError("temperature rho must be positive");
    }
    if (rollouts < 1) {
        throw ConfigError("at least one rollout per iteration is required");
    }
    if (horizon_steps < 1 || total_steps < 1) {
        throw ConfigError("horizon and simulation length must be at least one step");
    }
}

// ---------------------------------------------------------------------------
// Update law

double girsanov_correction(const ControlSequence& u, std::span<const double> delta_u, const Eigen::MatrixXd& gram,
                           double rho, double dt)
{
    const std::size_t n = u.actuators();
    if (delta_u.size() != u.bins() * n) {
        throw DimensionError("girsanov_correction: projections do not match the control bins");
    }
    if (static_cast<std::size_t>(gram.rows()) != n || static_cast<std::size_t>(gram.cols()) != n) {
        throw DimensionError("girsanov_correction: Gram matrix does not match actuator count");
    }
    double linear = 0.0;
    double quadratic = 0.0;
    for (std::size_t k = 0; k < u.bins(); ++k) {
        const auto uk = u.bin(k);
        for (std::size_t i = 0; i < n; ++i) {
            linear += uk[i] * delta_u[k * n + i];
            double mu = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                mu += gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * uk[j];
            }
            quadratic += uk[i] * mu;
        }
    }
    return linear / std::sqrt(rho) + 0.5 * quadratic * dt;
}

GibbsWeights gibbs_weights(std::span<const double> costs, double rho)
{
    if (!(rho > 0.0)) {
        throw ConfigError("temperature rho must be positive");
    }
    double best = kInf;
    for (double c : costs) {
        if (std::isfinite(c)) {
            best = std::min(best, c);
        }
    }
    if (!std::isfinite(best)) {
        throw DegenerateBatchError("every rollout in the batch has infinite cost");
    }
    GibbsWeights out;
    out.weights.resize(costs.size(), 0.0);
    double total = 0.0;
    for (std::size_t r = 0; r < costs.size(); ++r) {
        if (std::isfinite(costs[r])) {
            out.weights[r] = std::exp(-rho * (costs[r] - best));
            total += out.weights[r];
        }
    }
    for (double& w : out.weights) {
        w /= total;
    }
    out.log_normalizer = -rho * best + std::log(total / static_cast<double>(costs.size()));
    return out;
}

double effective_sample_size(std::span<const double> weights) noexcept
{
    double sq = 0.0;
    for (double w : weights) {
        sq += w * w;
    }
    return sq > 0.0 ? 1.0 / sq : 0.0;
}

ControlSequence control_update(const ControlSequence& u, const RolloutBatch& batch,
                               const Eigen::LLT<Eigen::MatrixXd>& gram_factor, double rho, double dt)
{
    const std::size_t n = u.actuators();
    if (batch.bins != u.bins() || batch.actuators != n || batch.weights.size() != batch.rollouts ||
        batch.delta_u.size() != batch.rollouts * u.bins() * n) {
        throw DimensionError("control_update: batch does not match the control sequence");
    }
    if (gram_factor.info() != Eigen::Success || static_cast<std::size_t>(gram_factor.rows()) != n) {
        throw DegenerateActuationError("control_update: Gram factorization is unusable");
    }
    ControlSequence next = u;
    const double gain = 1.0 / (std::sqrt(rho) * dt);
    Eigen::VectorXd mean(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < u.bins(); ++j) {
        mean.setZero();
        for (std::size_t r = 0; r < batch.rollouts; ++r) {
            const double w = batch.weights[r];
            if (w == 0.0) {
                continue;
            }
            const double* du = batch.delta_u.data() + (r * u.bins() + j) * n;
            for (std::size_t i = 0; i < n; ++i) {
                mean[static_cast<Eigen::Index>(i)] += w * du[i];
            }
        }
        const Eigen::VectorXd step = gram_factor.solve(mean);
        auto row = next.bin(j);
        for (std::size_t i = 0; i < n; ++i) {
            row[i] += gain * step[static_cast<Eigen::Index>(i)];
        }
    }
    return next;
}

// ---------------------------------------------------------------------------
// Systems

DistributedSystem1D::DistributedSystem1D(const Grid1D& grid, const ModelSpec& model, ActuatorSet actuators,
                                         SpectralBasis1D basis, double dt)
    : stepper_(grid, model, dt), actuators_(std::move(actuators)), basis_(std::move(basis)),
      projection_(actuators_, basis_)
{
    if (actuators_.node_count() != grid.node_count() || !(basis_.grid() == grid)) {
        throw DimensionError("actuators, noise basis and model must share one grid");
    }
}

bool DistributedSystem1D::advance(std::span<double> h, std::span<const double> u, const NormalStream* stream,
                                  std::uint64_t bin, std::span<double> delta_u, SystemWorkspace& ws) const
{
    const auto n = static_cast<Eigen::Index>(node_count());
    ws.forcing.noalias() = actuators_.shapes() * Eigen::Map<const Eigen::VectorXd>(u.data(), static_cast<Eigen::Index>(u.size()));
    const bool noisy = stream != nullptr && stepper_.model().sigma > 0.0;
    Eigen::Map<Eigen::VectorXd> du(delta_u.data(), static_cast<Eigen::Index>(delta_u.size()));
    if (noisy) {
        ws.draws.resize(static_cast<Eigen::Index>(basis_.modes()));
        stream->fill_scaled(bin, std::sqrt(dt()), {ws.draws.data(), basis_.modes()});
        ws.field.resize(n);
        assemble_field_increment_into(ws.draws, basis_, ws.field);
        du.noalias() = projection_.coupling() * ws.draws;
    } else {
        du.setZero();
    }
    return stepper_.step(h, {ws.forcing.data(), static_cast<std::size_t>(n)},
                         noisy ? std::span<const double>(ws.field.data(), static_cast<std::size_t>(n))
                               : std::span<const double>{},
                         {}, ws.step);
}

DistributedSystem2D::DistributedSystem2D(const Grid2D& grid, const ModelSpec& model, ActuatorSet actuators,
                                         SpectralBasis2D basis, double dt)
    : stepper_(grid, model, dt), actuators_(std::move(actuators)), basis_(std::move(basis)),
      projection_(actuators_, basis_)
{
    if (actuators_.node_count() != grid.node_count() || !(basis_.grid() == grid)) {
        throw DimensionError("actuators, noise basis and model must share one grid");
    }
}

bool DistributedSystem2D::advance(std::span<double> h, std::span<const double> u, const NormalStream* stream,
                                  std::uint64_t bin, std::span<double> delta_u, SystemWorkspace& ws) const
{
    const auto n = static_cast<Eigen::Index>(node_count());
    ws.forcing.noalias() = actuators_.shapes() * Eigen::Map<const Eigen::VectorXd>(u.data(), static_cast<Eigen::Index>(u.size()));
    const bool noisy = stream != nullptr && stepper_.model().sigma > 0.0;
    Eigen::Map<Eigen::VectorXd> du(delta_u.data(), static_cast<Eigen::Index>(delta_u.size()));
    if (noisy) {
        ws.draws.resize(static_cast<Eigen::Index>(basis_.modes()));
        stream->fill_scaled(bin, std::sqrt(dt()), {ws.draws.data(), basis_.modes()});
        ws.field.resize(n);
        assemble_field_increment_into(ws.draws, basis_, ws.scratch, ws.field);
        du.noalias() = projection_.coupling() * ws.draws;
    } else {
        du.setZero();
    }
    return stepper_.step(h, {ws.forcing.data(), static_cast<std::size_t>(n)},
                         noisy ? std::span<const double>(ws.field.data(), static_cast<std::size_t>(n))
                               : std::span<const double>{},
                         ws.step);
}

BoundarySystem::BoundarySystem(const Grid1D& grid, const ModelSpec& model, SpectralBasis1D basis,
                               double boundary_sigma, double dt)
    : stepper_(grid, model, dt), basis_(std::move(basis)), boundary_sigma_(boundary_sigma),
      gram_(Eigen::MatrixXd::Identity(2, 2)), factor_(gram_)
{
    if (model.kind != ModelKind::Heat1D || model.boundary.left.type != BoundaryType::Neumann ||
        model.boundary.right.type != BoundaryType::Neumann) {
        throw ConfigError("boundary control needs the 1-D heat model with Neumann ends");
    }
    if (!(boundary_sigma >= 0.0)) {
        throw ConfigError("boundary noise amplitude must be non-negative");
    }
    if (!(basis_.grid() == grid)) {
        throw DimensionError("noise basis and model must share one grid");
    }
}

bool BoundarySystem::advance(std::span<double> h, std::span<const double> u, const NormalStream* stream,
                             std::uint64_t bin, std::span<double> delta_u, SystemWorkspace& ws) const
{
    const auto n = static_cast<std::size_t>(node_count());
    const std::size_t modes = basis_.modes();
    BoundaryFlux flux{u[0], u[1]};
    bool interior = false;
    delta_u[0] = 0.0;
    delta_u[1] = 0.0;
    if (stream != nullptr) {
        // Draw layout per bin: two boundary increments, then the interior modes.
        ws.draws.resize(static_cast<Eigen::Index>(2 + modes));
        stream->fill_scaled(bin, std::sqrt(dt()), {ws.draws.data(), 2 + modes});
        if (boundary_sigma_ > 0.0) {
            delta_u[0] = ws.draws[0];
            delta_u[1] = ws.draws[1];
            flux.left += boundary_sigma_ * ws.draws[0] / dt();
            flux.right += boundary_sigma_ * ws.draws[1] / dt();
        }
        if (stepper_.model().sigma > 0.0) {
            ws.field.resize(static_cast<Eigen::Index>(n));
            assemble_field_increment_into(ws.draws.tail(static_cast<Eigen::Index>(modes)), basis_, ws.field);
            interior = true;
        }
    }
    return stepper_.step(h, {}, interior ? std::span<const double>(ws.field.data(), n) : std::span<const double>{},
                         flux, ws.step);
}

// ---------------------------------------------------------------------------
// Drivers

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t, std::size_t)>& fn)
{
    workers = std::max<std::size_t>(1, std::min(workers, n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i, 0);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = next++; i < n; i = next++) {
                    fn(i, w);
                }
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

VariationalOptimizer::VariationalOptimizer(const ControlledSystem& system, const CostSpec& cost,
                                           OptimizerSettings settings)
    : system_(system), cost_(cost), settings_(settings)
{
    settings_.validate();
    cost_.validate(system_.node_count());
}

RolloutBatch VariationalOptimizer::sample_batch(std::span<const double> x0, double t0, const ControlSequence& u,
                                                std::uint64_t trial, std::uint64_t step,
                                                std::uint64_t iteration) const
{
    const std::size_t n_nodes = system_.node_count();
    const std::size_t n = system_.control_dim();
    if (x0.size() != n_nodes) {
        throw DimensionError("initial state does not match the system");
    }
    if (u.actuators() != n) {
        throw DimensionError("control sequence does not match the system");
    }
    const double dt = system_.dt();
    RolloutBatch batch(settings_.rollouts, u.bins(), n);
    const std::size_t workers = std::max<std::size_t>(1, std::min(settings_.workers, settings_.rollouts));
    std::vector<SystemWorkspace> spaces(workers);
    std::vector<std::vector<double>> states(workers, std::vector<double>(n_nodes));

    parallel_for(settings_.rollouts, workers, [&](std::size_t r, std::size_t w) {
        auto& h = states[w];
        std::copy(x0.begin(), x0.end(), h.begin());
        const NormalStream stream(StreamKey{settings_.seed, trial, StreamPhase::Rollout, step, iteration, r});
        auto du = batch.delta_u_of(r);
        double cost = 0.0;
        for (std::size_t j = 0; j < u.bins(); ++j) {
            if (!system_.advance(h, u.bin(j), &stream, j, du.subspan(j * n, n), spaces[w])) {
                cost = kInf;
                break;
            }
            cost += cost_.step_cost(t0 + static_cast<double>(j + 1) * dt, h);
        }
        if (std::isfinite(cost)) {
            cost += cost_.terminal_cost(t0 + static_cast<double>(u.bins()) * dt, h);
        }
        batch.state_cost[r] = std::isfinite(cost) ? cost : kInf;
        batch.correction[r] = girsanov_correction(u, du, system_.gram(), settings_.rho, dt);
    });

    std::vector<double> adjusted(settings_.rollouts);
    for (std::size_t r = 0; r < settings_.rollouts; ++r) {
        adjusted[r] = batch.state_cost[r] + batch.correction[r];
    }
    auto gibbs = gibbs_weights(adjusted, settings_.rho);
    batch.weights = std::move(gibbs.weights);
    batch.log_normalizer = gibbs.log_normalizer;
    return batch;
}

OptimizationResult VariationalOptimizer::optimize(std::span<const double> x0, double t0, ControlSequence initial,
                                                  std::uint64_t trial, std::uint64_t step) const
{
    OptimizationResult result{std::move(initial), {}};
    result.trace.reserve(settings_.iterations);
    for (std::size_t i = 0; i < settings_.iterations; ++i) {
        const RolloutBatch batch = sample_batch(x0, t0, result.controls, trial, step, i);
        IterationStats stats{i, 0.0, kInf, effective_sample_size(batch.weights)};
        std::size_t finite = 0;
        for (double c : batch.state_cost) {
            if (std::isfinite(c)) {
                stats.mean_cost += c;
                stats.min_cost = std::min(stats.min_cost, c);
                ++finite;
            }
        }
        stats.mean_cost /= static_cast<double>(finite);
        result.trace.push_back(stats);
        result.controls = control_update(result.controls, batch, system_.gram_factor(), settings_.rho, system_.dt());
    }
    return result;
}

ClosedLoopResult apply_open_loop(const ControlledSystem& system, const CostSpec& cost, const ControlSequence& u,
                                 std::span<const double> x0, std::uint64_t seed, std::uint64_t trial, bool noisy)
{
    if (x0.size() != system.node_count() || u.actuators() != system.control_dim()) {
        throw DimensionError("apply_open_loop: state or controls do not match the system");
    }
    const double dt = system.dt();
    const NormalStream plant(StreamKey{seed, trial, StreamPhase::Plant, 0, 0, 0});
    ClosedLoopResult out;
    out.trajectory.reserve(u.bins() + 1);
    out.trajectory.push_back({{x0.begin(), x0.end()}, 0.0});
    std::vector<double> h(x0.begin(), x0.end());
    std::vector<double> du(system.control_dim());
    SystemWorkspace ws;
    for (std::size_t k = 0; k < u.bins(); ++k) {
        if (!system.advance(h, u.bin(k), noisy ? &plant : nullptr, k, du, ws)) {
            throw DivergenceError("true system diverged", k);
        }
        const double t = static_cast<double>(k + 1) * dt;
        out.trajectory.push_back({h, t});
        out.realized_cost += cost.step_cost(t, h);
        out.applied.insert(out.applied.end(), u.bin(k).begin(), u.bin(k).end());
    }
    out.realized_cost += cost.terminal_cost(static_cast<double>(u.bins()) * dt, h);
    return out;
}

OptimizationResult optimize_open_loop(const ControlledSystem& system, const CostSpec& cost,
                                      const OptimizerSettings& settings, std::span<const double> x0,
                                      std::uint64_t trial, const ControlSequence* initial)
{
    const VariationalOptimizer optimizer(system, cost, settings);
    ControlSequence u = initial ? *initial : ControlSequence(settings.total_steps, system.control_dim(), system.dt());
    if (u.bins() != settings.total_steps || u.actuators() != system.control_dim()) {
        throw DimensionError("optimize_open_loop: initial sequence does not match settings");
    }
    return optimizer.optimize(x0, 0.0, std::move(u), trial, 0);
}

ClosedLoopResult run_mpc(const ControlledSystem& system, const CostSpec& cost, const OptimizerSettings& settings,
                         std::span<const double> x0, std::uint64_t trial, bool noisy_plant)
{
    if (settings.horizon_steps > settings.total_steps) {
        throw ConfigError("MPC horizon exceeds the simulation length");
    }
    if (x0.size() != system.node_count()) {
        throw DimensionError("run_mpc: initial state does not match the system");
    }
    const VariationalOptimizer optimizer(system, cost, settings);
    const double dt = system.dt();
    const std::size_t n = system.control_dim();
    const NormalStream plant(StreamKey{settings.seed, trial, StreamPhase::Plant, 0, 0, 0});

    ClosedLoopResult out;
    out.trajectory.reserve(settings.total_steps + 1);
    out.trajectory.push_back({{x0.begin(), x0.end()}, 0.0});
    out.applied.reserve(settings.total_steps * n);
    std::vector<double> h(x0.begin(), x0.end());
    std::vector<double> du(n);
    SystemWorkspace ws;
    ControlSequence u(settings.horizon_steps, n, dt);

    for (std::size_t k = 0; k < settings.total_steps; ++k) {
        const double t0 = static_cast<double>(k) * dt;
        OptimizationResult opt = optimizer.optimize(h, t0, std::move(u), trial, k);
        for (auto stats : opt.trace) {
            stats.iteration += k * settings.iterations;
            out.trace.push_back(stats);
        }
        u = std::move(opt.controls);
        const auto first = u.bin(0);
        if (!system.advance(h, first, noisy_plant ? &plant : nullptr, k, du, ws)) {
            throw DivergenceError("true system diverged", k);
        }
        const double t = t0 + dt;
        out.trajectory.push_back({h, t});
        out.realized_cost += cost.step_cost(t, h);
        out.applied.insert(out.applied.end(), first.begin(), first.end());
        u.shift_left();
    }
    out.realized_cost += cost.terminal_cost(static_cast<double>(settings.total_steps) * dt, h);
    return out;
}

ClosedLoopResult boundary_mpc(const BoundarySystem& system, const CostSpec& cost, const OptimizerSettings& settings,
                              std::span<const double> x0, std::uint64_t trial)
{
    return run_mpc(system, cost, settings, x0, trial, true);
}

} // namespace spdevo
