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
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "spdevo/actuation.hpp"
#include "spdevo/grid.hpp"
#include "spdevo/models.hpp"
#include "spdevo/noise.hpp"
#include "spdevo/rng.hpp"

namespace spdevo {

// ---------------------------------------------------------------------------
// Cost

/// Piecewise-constant target in time: `value` holds for t <= `until`.
struct ScheduleSegment {
    double until = 0.0;
    double value = 0.0;
};

/**
 * Quadratic tracking cost
 *
 *   J = sum_t sum_k kappa (h(t, x_k) - h_des(t, x_k))^2 1_S(x_k)
 *       + terminal_weight * sum_k (h(T, x_k) - h_des(T, x_k))^2 1_S(x_k)
 *
 * summed over the states reached after every step. When `schedule` is not
 * empty it overrides `desired` on every masked node.
 */
struct CostSpec {
    double kappa = 1.0;
    std::vector<std::uint8_t> mask;
    std::vector<double> desired;
    std::vector<ScheduleSegment> schedule;
    double terminal_weight = 0.0;

    void validate(std::size_t node_count) const;
    double desired_at(double t, std::size_t k) const noexcept;
    /// Running cost of one state at time t (without the terminal term).
    double step_cost(double t, std::span<const double> h) const noexcept;
    double terminal_cost(double t, std::span<const double> h) const noexcept;
};

/// Cost of a path of states; +inf if any value is non-finite.
double trajectory_cost(std::span<const FieldState> path, const CostSpec& spec);

// ---------------------------------------------------------------------------
// Control sequences and batches

/// Step-function control: u(t) = u_i on [i dt, (i+1) dt), i = 0..L-1.
class ControlSequence {
public:
    ControlSequence() = default;
    ControlSequence(std::size_t bins, std::size_t actuators, double dt);

    std::size_t bins() const noexcept { return bins_; }
    std::size_t actuators() const noexcept { return actuators_; }
    double dt() const noexcept { return dt_; }
    double horizon() const noexcept { return static_cast<double>(bins_) * dt_; }

    std::span<double> bin(std::size_t i) noexcept { return {data_.data() + i * actuators_, actuators_}; }
    std::span<const double> bin(std::size_t i) const noexcept { return {data_.data() + i * actuators_, actuators_}; }
    std::span<const double> flat() const noexcept { return data_; }
    std::span<double> flat() noexcept { return data_; }

    /// Drops the first bin and repeats the last one (receding-horizon warm start).
    void shift_left();

    bool operator==(const ControlSequence& other) const = default;

private:
    std::size_t bins_ = 0;
    std::size_t actuators_ = 0;
    double dt_ = 0.0;
    std::vector<double> data_;
};

/// Per-rollout data of one optimizer iteration.
struct RolloutBatch {
    std::size_t rollouts = 0;
    std::size_t bins = 0;
    std::size_t actuators = 0;
    std::vector<double> state_cost;  ///< J_r
    std::vector<double> correction;  ///< zeta_r
    std::vector<double> delta_u;     ///< r-major, then bin, then actuator
    std::vector<double> weights;     ///< normalized w_r
    double log_normalizer = 0.0;     ///< log((1/R) sum_r exp(-rho Jhat_r))

    RolloutBatch() = default;
    RolloutBatch(std::size_t rollouts, std::size_t bins, std::size_t actuators);

    std::span<double> delta_u_of(std::size_t r) noexcept
    {
        return {delta_u.data() + r * bins * actuators, bins * actuators};
    }
    std::span<const double> delta_u_of(std::size_t r) const noexcept
    {
        return {delta_u.data() + r * bins * actuators, bins * actuators};
    }
};

struct OptimizerSettings {
    double rho = 1.0;
    std::size_t iterations = 10;
    std::size_t rollouts = 100;
    std::size_t horizon_steps = 10;  ///< bins optimized per call (MPC horizon)
    std::size_t total_steps = 100;   ///< simulated steps of the true system
    std::uint64_t seed = 0;
    std::size_t workers = 1;

    void validate() const;
};

/**
 * zeta = (1/sqrt(rho)) sum_k u_k . du_k + (1/2) sum_k u_k^T M u_k dt.
 * `delta_u` is bin-major with one N-vector per bin.
 */
double girsanov_correction(const ControlSequence& u, std::span<const double> delta_u, const Eigen::MatrixXd& gram,
                           double rho, double dt);

struct GibbsWeights {
    std::vector<double> weights;
    double log_normalizer = 0.0;
};

/// w_r = exp(-rho (J_r - min J)) / sum; infinite costs get weight 0.
GibbsWeights gibbs_weights(std::span<const double> adjusted_costs, double rho);

/// u_j += (1 / (sqrt(rho) dt)) M^{-1} sum_r w_r du_{r,j} for every bin j.
ControlSequence control_update(const ControlSequence& u, const RolloutBatch& batch,
                               const Eigen::LLT<Eigen::MatrixXd>& gram_factor, double rho, double dt);

double effective_sample_size(std::span<const double> weights) noexcept;

// ---------------------------------------------------------------------------
// Controlled systems

/// Scratch buffers owned by one rollout worker.
struct SystemWorkspace {
    StepWorkspace step;
    Eigen::VectorXd draws;
    Eigen::VectorXd field;
    Eigen::VectorXd forcing;
    Eigen::VectorXd du;
    Eigen::MatrixXd scratch;
};

/**
 * A discretized SPDE together with the way controls and exploration noise
 * enter it. `advance` integrates one step under control u, draws the step's
 * noise from (stream, bin), and reports the control-channel projection du
 * of that noise.
 */
class ControlledSystem {
public:
    virtual ~ControlledSystem() = default;

    virtual std::size_t node_count() const = 0;
    virtual std::size_t control_dim() const = 0;
    virtual double dt() const = 0;
    virtual const Eigen::MatrixXd& gram() const = 0;
    virtual const Eigen::LLT<Eigen::MatrixXd>& gram_factor() const = 0;

    /// Returns false when the state became non-finite. A null stream means
    /// a noiseless step (du = 0).
    virtual bool advance(std::span<double> h, std::span<const double> u, const NormalStream* stream,
                         std::uint64_t bin, std::span<double> delta_u, SystemWorkspace& ws) const = 0;
};

/// Distributed Gaussian actuation of a 1-D model under sine-basis noise.
class DistributedSystem1D final : public ControlledSystem {
public:
    DistributedSystem1D(const Grid1D& grid, const ModelSpec& model, ActuatorSet actuators, SpectralBasis1D basis,
                        double dt);

    std::size_t node_count() const override { return stepper_.node_count(); }
    std::size_t control_dim() const override { return actuators_.size(); }
    double dt() const override { return stepper_.dt(); }
    const Eigen::MatrixXd& gram() const override { return actuators_.gram(); }
    const Eigen::LLT<Eigen::MatrixXd>& gram_factor() const override { return actuators_.gram_factor(); }
    bool advance(std::span<double> h, std::span<const double> u, const NormalStream* stream, std::uint64_t bin,
                 std::span<double> delta_u, SystemWorkspace& ws) const override;

    const ActuatorSet& actuators() const noexcept { return actuators_; }
    const SpectralBasis1D& basis() const noexcept { return basis_; }
    const NoiseProjection& projection() const noexcept { return projection_; }
    const Stepper1D& stepper() const noexcept { return stepper_; }

private:
    Stepper1D stepper_;
    ActuatorSet actuators_;
    SpectralBasis1D basis_;
    NoiseProjection projection_;
};

/// Distributed actuation of the 2-D heat equation.
class DistributedSystem2D final : public ControlledSystem {
public:
    DistributedSystem2D(const Grid2D& grid, const ModelSpec& model, ActuatorSet actuators, SpectralBasis2D basis,
                        double dt);

    std::size_t node_count() const override { return stepper_.node_count(); }
    std::size_t control_dim() const override { return actuators_.size(); }
    double dt() const override { return stepper_.dt(); }
    const Eigen::MatrixXd& gram() const override { return actuators_.gram(); }
    const Eigen::LLT<Eigen::MatrixXd>& gram_factor() const override { return actuators_.gram_factor(); }
    bool advance(std::span<double> h, std::span<const double> u, const NormalStream* stream, std::uint64_t bin,
                 std::span<double> delta_u, SystemWorkspace& ws) const override;

    const ActuatorSet& actuators() const noexcept { return actuators_; }
    const Stepper2D& stepper() const noexcept { return stepper_; }

private:
    Stepper2D stepper_;
    ActuatorSet actuators_;
    SpectralBasis2D basis_;
    NoiseProjection projection_;
};

/**
 * 1-D heat equation controlled through its two Neumann fluxes.
 *
 * Controls are the outward normal derivatives (u1 at x = 0, u2 at x = a);
 * the control channel carries boundary noise sigma_b dv / dt with
 * dv ~ N(0, dt I_2). M is the 2x2 identity and du = dv. The interior
 * additionally receives the model's distributed noise sigma dW.
 */
class BoundarySystem final : public ControlledSystem {
public:
    BoundarySystem(const Grid1D& grid, const ModelSpec& model, SpectralBasis1D basis, double boundary_sigma,
                   double dt);

    std::size_t node_count() const override { return stepper_.node_count(); }
    std::size_t control_dim() const override { return 2; }
    double dt() const override { return stepper_.dt(); }
    const Eigen::MatrixXd& gram() const override { return gram_; }
    const Eigen::LLT<Eigen::MatrixXd>& gram_factor() const override { return factor_; }
    bool advance(std::span<double> h, std::span<const double> u, const NormalStream* stream, std::uint64_t bin,
                 std::span<double> delta_u, SystemWorkspace& ws) const override;

    double boundary_sigma() const noexcept { return boundary_sigma_; }

private:
    Stepper1D stepper_;
    SpectralBasis1D basis_;
    double boundary_sigma_;
    Eigen::MatrixXd gram_;
    Eigen::LLT<Eigen::MatrixXd> factor_;
};

// ---------------------------------------------------------------------------
// Optimization drivers

struct IterationStats {
    std::size_t iteration = 0;
    double mean_cost = 0.0;
    double min_cost = 0.0;
    double effective_sample_size = 0.0;
};

struct OptimizationResult {
    ControlSequence controls;
    std::vector<IterationStats> trace;
};

/**
 * Samples rollouts of a controlled system and applies the importance-sampled
 * variational update. Rollouts of one iteration may run on several workers;
 * every reduction runs in rollout order so results do not depend on the
 * worker count.
 */
class VariationalOptimizer {
public:
    VariationalOptimizer(const ControlledSystem& system, const CostSpec& cost, OptimizerSettings settings);

    const OptimizerSettings& settings() const noexcept { return settings_; }

    /// Runs settings.iterations updates of `initial` starting from state x0
    /// at time t0. `step` and `trial` select the random streams.
    OptimizationResult optimize(std::span<const double> x0, double t0, ControlSequence initial, std::uint64_t trial,
                                std::uint64_t step) const;

    /// Samples one batch (costs, corrections, projections, weights) under u.
    RolloutBatch sample_batch(std::span<const double> x0, double t0, const ControlSequence& u, std::uint64_t trial,
                              std::uint64_t step, std::uint64_t iteration) const;

private:
    const ControlledSystem& system_;
    const CostSpec& cost_;
    OptimizerSettings settings_;
};

struct ClosedLoopResult {
    std::vector<FieldState> trajectory;  ///< initial state and every applied step
    std::vector<double> applied;         ///< total_steps x N applied controls
    std::vector<IterationStats> trace;   ///< concatenated per-step optimizer traces
    double realized_cost = 0.0;
};

/// Applies a fixed control sequence to the true system (plant noise from
/// the trial's plant stream; `noisy = false` runs it without noise).
ClosedLoopResult apply_open_loop(const ControlledSystem& system, const CostSpec& cost, const ControlSequence& u,
                                 std::span<const double> x0, std::uint64_t seed, std::uint64_t trial,
                                 bool noisy = true);

/// Optimizes over the whole horizon (settings.total_steps bins).
OptimizationResult optimize_open_loop(const ControlledSystem& system, const CostSpec& cost,
                                      const OptimizerSettings& settings, std::span<const double> x0,
                                      std::uint64_t trial = 0, const ControlSequence* initial = nullptr);

/// Receding-horizon control: at every step re-optimize the horizon, apply
/// its first bin to the noisy true system, then shift the sequence.
ClosedLoopResult run_mpc(const ControlledSystem& system, const CostSpec& cost, const OptimizerSettings& settings,
                         std::span<const double> x0, std::uint64_t trial = 0, bool noisy_plant = true);

/// MPC of a boundary-controlled system (N = 2, M = I).
ClosedLoopResult boundary_mpc(const BoundarySystem& system, const CostSpec& cost, const OptimizerSettings& settings,
                              std::span<const double> x0, std::uint64_t trial = 0);

/// Runs fn(index, worker) for index in [0, n) on up to `workers` threads.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t, std::size_t)>& fn);

} // namespace spdevo
