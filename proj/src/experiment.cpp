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

#include "spdevo/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>

#include "spdevo/csv.hpp"
#include "spdevo/error.hpp"

namespace spdevo {

namespace {

constexpr double kFractionSlack = 1e-9;

bool within(double v, double lo, double hi) { return v >= lo - kFractionSlack && v <= hi + kFractionSlack; }

std::string trial_file(const char* stem, std::size_t trial)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_trial%03zu.csv", stem, trial);
    return buf;
}

ModelSpec model_spec(const ExperimentConfig& c)
{
    ModelSpec m;
    m.kind = c.model.kind;
    m.diffusivity = c.model.diffusivity;
    m.alpha = c.model.alpha;
    m.sigma = c.model.sigma;
    m.boundary = c.model.boundary == BoundaryType::Dirichlet ? BoundaryCondition::dirichlet(c.model.boundary_value)
                                                             : BoundaryCondition::neumann(c.model.boundary_value);
    m.boundary.flux_controlled = c.actuation.type == ActuationType::Boundary;
    m.validate();
    return m;
}

std::vector<double> scaled(const std::vector<double>& fractions, double a)
{
    std::vector<double> out(fractions);
    for (double& v : out) v *= a;
    return out;
}

OptimizerSettings settings_for(const ExperimentConfig& c, ControlMode mode, std::uint64_t seed, std::size_t workers)
{
    const auto& o = c.optimizer;
    OptimizerSettings s;
    s.rho = o.rho;
    s.seed = seed;
    s.workers = workers;
    s.total_steps = o.total_steps();
    if (mode == ControlMode::Mpc) {
        s.iterations = o.iterations;
        s.rollouts = o.rollouts;
        s.horizon_steps = o.horizon_steps();
    } else {
        s.iterations = o.open_loop_iterations ? o.open_loop_iterations : o.iterations;
        s.rollouts = o.open_loop_rollouts ? o.open_loop_rollouts : o.rollouts;
        s.horizon_steps = s.total_steps;
    }
    return s;
}

TrialResult run_trial(const ExperimentConfig& c, const ExperimentSetup& setup, ControlMode mode, std::uint64_t seed,
                      std::size_t trial, std::size_t workers)
{
    const auto x0 = initial_state(c, setup, seed, trial);
    const OptimizerSettings s = settings_for(c, mode, seed, workers);
    TrialResult out;
    ClosedLoopResult run;
    if (mode == ControlMode::Mpc) {
        run = run_mpc(*setup.system, setup.cost, s, x0, trial, true);
        out.trace = std::move(run.trace);
    } else {
        OptimizationResult plan = optimize_open_loop(*setup.system, setup.cost, s, x0, trial);
        run = apply_open_loop(*setup.system, setup.cost, plan.controls, x0, seed, trial, true);
        out.trace = std::move(plan.trace);
    }
    out.trajectory = std::move(run.trajectory);
    out.applied = std::move(run.applied);
    out.realized_cost = run.realized_cost;
    out.profile = second_half_average(out.trajectory, c.optimizer.t_sim);
    return out;
}

double trial_rmse(std::span<const double> profile, std::span<const double> desired,
                  std::span<const std::uint8_t> mask)
{
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < profile.size(); ++k) {
        if (mask[k]) {
            const double d = profile[k] - desired[k];
            sum += d * d;
            ++count;
        }
    }
    if (count == 0) {
        throw MetricsError("metrics region contains no grid nodes");
    }
    return std::sqrt(sum / static_cast<double>(count));
}

// Writes x (and y) coordinate cells of node k.
void push_coords(std::vector<CsvCell>& row, const ExperimentSetup& setup, std::size_t k)
{
    if (const auto* g = std::get_if<Grid1D>(&setup.grid)) {
        row.emplace_back(g->node(k));
    } else {
        const auto& g2 = std::get<Grid2D>(setup.grid);
        row.emplace_back(g2.x_axis().node(k % g2.nx()));
        row.emplace_back(g2.y_axis().node(k / g2.nx()));
    }
}

std::vector<std::string> with_coords(const ExperimentSetup& setup, std::vector<std::string> head,
                                     std::vector<std::string> tail)
{
    head.emplace_back("x");
    if (std::holds_alternative<Grid2D>(setup.grid)) {
        head.emplace_back("y");
    }
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
}

void write_trial_files(const ExperimentConfig& c, const ExperimentSetup& setup, const std::filesystem::path& dir,
                       std::size_t trial, const TrialResult& r)
{
    if (c.output.trajectories) {
        CsvWriter traj(dir / trial_file("trajectory", trial), with_coords(setup, {"t"}, {"h"}));
        const std::size_t last = r.trajectory.size() - 1;
        for (std::size_t s = 0; s < r.trajectory.size(); ++s) {
            if (s % c.output.trajectory_stride != 0 && s != last) {
                continue;
            }
            const auto& state = r.trajectory[s];
            for (std::size_t k = 0; k < state.values.size(); ++k) {
                std::vector<CsvCell> row{state.time};
                push_coords(row, setup, k);
                row.emplace_back(state.values[k]);
                traj.row(row);
            }
        }
        traj.flush();
    }
    CsvWriter trace(dir / trial_file("trace", trial), {"iteration", "mean_cost", "min_cost", "effective_sample_size"});
    for (const auto& s : r.trace) {
        trace.row({static_cast<std::uint64_t>(s.iteration), s.mean_cost, s.min_cost, s.effective_sample_size});
    }
    trace.flush();
}

void write_summary(const ExperimentResult& res, const ExperimentSetup& setup, const std::filesystem::path& dir,
                   const std::vector<std::size_t>& done, bool timing, const std::string& failure)
{
    const auto& c = res.config;
    const std::size_t n = res.control_dim;
    const double dt = c.optimizer.dt;

    std::vector<std::string> head{"trial", "t"};
    for (std::size_t l = 0; l < n; ++l) head.push_back("u" + std::to_string(l + 1));
    CsvWriter controls(dir / "controls.csv", head);
    CsvWriter profiles(dir / "profiles.csv", with_coords(setup, {"trial"}, {"h", "desired", "masked"}));
    for (std::size_t t : done) {
        const auto& r = res.trials[t];
        const std::size_t steps = n ? r.applied.size() / n : 0;
        for (std::size_t k = 0; k < steps; ++k) {
            std::vector<CsvCell> row{static_cast<std::uint64_t>(t), static_cast<double>(k) * dt};
            for (std::size_t l = 0; l < n; ++l) row.emplace_back(r.applied[k * n + l]);
            controls.row(row);
        }
        for (std::size_t k = 0; k < r.profile.size(); ++k) {
            std::vector<CsvCell> row{static_cast<std::uint64_t>(t)};
            push_coords(row, setup, k);
            row.emplace_back(r.profile[k]);
            row.emplace_back(setup.cost.desired_at(c.optimizer.t_sim, k));
            row.emplace_back(static_cast<std::uint64_t>(setup.cost.mask[k] ? 1 : 0));
            profiles.row(row);
        }
    }
    controls.flush();
    profiles.flush();

    const std::string mode(to_string(res.mode));
    const CsvCell runtime = timing ? CsvCell{res.runtime_s} : CsvCell{std::string()};
    CsvWriter metrics(dir / "metrics.csv", {"experiment", "mode", "trials", "region", "rmse", "avg_sigma", "runtime_s"});
    if (failure.empty()) {
        for (std::size_t i = 0; i < res.regions.size(); ++i) {
            metrics.row({c.name, mode, static_cast<std::uint64_t>(done.size()), c.cost.regions[i].name,
                         res.regions[i].rmse, res.regions[i].avg_sigma, runtime});
        }
        CsvWriter per_trial(dir / "trial_metrics.csv", {"trial", "region", "rmse"});
        for (std::size_t t : done) {
            for (std::size_t i = 0; i < res.regions.size(); ++i) {
                per_trial.row({static_cast<std::uint64_t>(t), c.cost.regions[i].name, res.trial_rmse[t][i]});
            }
        }
        per_trial.flush();
    } else {
        metrics.row({c.name, mode, static_cast<std::uint64_t>(done.size()), "FAILED: " + failure, std::string(),
                     std::string(), runtime});
    }
    metrics.flush();
}

} // namespace

RegionMetrics compute_metrics(const std::vector<std::vector<double>>& profiles, std::span<const double> desired,
                              std::span<const std::uint8_t> mask)
{
    if (profiles.empty()) {
        throw MetricsError("metrics need at least one trial");
    }
    const std::size_t nodes = desired.size();
    if (mask.size() != nodes) {
        throw DimensionError("metrics mask and desired profile differ in size");
    }
    for (const auto& p : profiles) {
        if (p.size() != nodes) {
            throw DimensionError("trial profile does not match the desired profile");
        }
    }
    const double trials = static_cast<double>(profiles.size());
    double sq = 0.0;
    double sigma = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < nodes; ++k) {
        if (!mask[k]) {
            continue;
        }
        double mean = 0.0;
        for (const auto& p : profiles) mean += p[k];
        mean /= trials;
        double var = 0.0;
        for (const auto& p : profiles) var += (p[k] - mean) * (p[k] - mean);
        sq += (mean - desired[k]) * (mean - desired[k]);
        sigma += std::sqrt(var / trials);
        ++count;
    }
    if (count == 0) {
        throw MetricsError("metrics mask selects no grid nodes");
    }
    return {std::sqrt(sq / static_cast<double>(count)), sigma / static_cast<double>(count)};
}

std::vector<double> second_half_average(std::span<const FieldState> trajectory, double t_end)
{
    if (trajectory.empty()) {
        throw MetricsError("empty trajectory");
    }
    std::vector<double> avg(trajectory.front().values.size(), 0.0);
    std::size_t count = 0;
    for (const auto& s : trajectory) {
        if (s.time + kFractionSlack * std::max(1.0, t_end) >= 0.5 * t_end) {
            for (std::size_t k = 0; k < avg.size(); ++k) avg[k] += s.values[k];
            ++count;
        }
    }
    if (count == 0) {
        throw MetricsError("trajectory does not reach the averaging window");
    }
    for (double& v : avg) v /= static_cast<double>(count);
    return avg;
}

std::vector<std::uint8_t> region_mask(const Grid1D& grid, const RegionBlock& region)
{
    std::vector<std::uint8_t> mask(grid.node_count(), 0);
    for (std::size_t k = 0; k < mask.size(); ++k) {
        mask[k] = within(grid.node(k) / grid.length(), region.x_lo, region.x_hi) ? 1 : 0;
    }
    return mask;
}

std::vector<std::uint8_t> region_mask(const Grid2D& grid, const RegionBlock& region)
{
    std::vector<std::uint8_t> mask(grid.node_count(), 0);
    const double a = grid.length();
    for (std::size_t j = 0; j < grid.ny(); ++j) {
        for (std::size_t i = 0; i < grid.nx(); ++i) {
            mask[grid.index(i, j)] = within(grid.x_axis().node(i) / a, region.x_lo, region.x_hi) &&
                                             within(grid.y_axis().node(j) / a, region.y_lo, region.y_hi)
                                         ? 1
                                         : 0;
        }
    }
    return mask;
}

ExperimentSetup build_setup(const ExperimentConfig& c)
{
    c.validate();
    const ModelSpec model = model_spec(c);
    const double a = c.model.length;
    const double dt = c.optimizer.dt;
    const std::size_t modes = c.model.modes ? c.model.modes : c.model.intervals;
    ExperimentSetup setup{Grid1D(a, c.model.intervals), nullptr, {}, {}, {}};

    if (c.is_2d()) {
        const Grid2D grid(a, c.model.intervals);
        setup.grid = grid;
        std::vector<std::array<double, 2>> centers = c.actuation.centers_2d;
        for (auto& p : centers) {
            p[0] *= a;
            p[1] *= a;
        }
        ActuatorSet act(grid, std::move(centers), scaled(c.actuation.widths, a));
        setup.system = std::make_unique<DistributedSystem2D>(grid, model, std::move(act),
                                                             SpectralBasis2D(grid, modes, c.model.noise_decay), dt);
        for (const auto& r : c.cost.regions) setup.region_masks.push_back(region_mask(grid, r));
    } else {
        const Grid1D grid(a, c.model.intervals);
        setup.grid = grid;
        SpectralBasis1D basis(grid, modes, eigenvalue_profile(modes, c.model.noise_decay));
        if (c.actuation.type == ActuationType::Boundary) {
            setup.system = std::make_unique<BoundarySystem>(grid, model, std::move(basis),
                                                            c.actuation.boundary_sigma.value_or(c.model.sigma), dt);
        } else {
            ActuatorSet act(grid, scaled(c.actuation.centers, a), scaled(c.actuation.widths, a));
            setup.system = std::make_unique<DistributedSystem1D>(grid, model, std::move(act), std::move(basis), dt);
        }
        for (const auto& r : c.cost.regions) setup.region_masks.push_back(region_mask(grid, r));
    }

    const std::size_t nodes = setup.system->node_count();
    setup.cost.kappa = c.cost.kappa;
    setup.cost.terminal_weight = c.cost.terminal_weight;
    setup.cost.schedule = c.cost.schedule;
    setup.cost.mask.assign(nodes, 0);
    setup.cost.desired.assign(nodes, 0.0);
    for (std::size_t i = 0; i < c.cost.regions.size(); ++i) {
        setup.region_targets.push_back(c.cost.regions[i].desired);
        for (std::size_t k = 0; k < nodes; ++k) {
            if (setup.region_masks[i][k]) {
                setup.cost.mask[k] = 1;
                setup.cost.desired[k] = c.cost.regions[i].desired;
            }
        }
    }
    setup.cost.validate(nodes);
    return setup;
}

std::vector<double> initial_state(const ExperimentConfig& c, const ExperimentSetup& setup, std::uint64_t seed,
                                  std::uint64_t trial)
{
    const std::size_t nodes = setup.system->node_count();
    std::vector<double> h(nodes, 0.0);
    switch (c.model.initial) {
    case InitialProfile::NagumoFront: {
        const auto& g = std::get<Grid1D>(setup.grid);
        for (std::size_t k = 0; k < nodes; ++k) h[k] = nagumo_initial_profile(g.node(k));
        break;
    }
    case InitialProfile::Zero:
        break;
    case InitialProfile::Constant:
        std::fill(h.begin(), h.end(), c.model.initial_value);
        break;
    case InitialProfile::Random: {
        const NormalStream stream(StreamKey{seed, trial, StreamPhase::Initial, 0, 0, 0});
        stream.fill_scaled(0, c.model.initial_sigma, h);
        for (double& v : h) v += c.model.initial_value;
        break;
    }
    }
    if (c.model.boundary == BoundaryType::Dirichlet) {
        const double g = c.model.boundary_value;
        if (const auto* g2 = std::get_if<Grid2D>(&setup.grid)) {
            for (std::size_t j = 0; j < g2->ny(); ++j) {
                for (std::size_t i = 0; i < g2->nx(); ++i) {
                    if (i == 0 || j == 0 || i + 1 == g2->nx() || j + 1 == g2->ny()) h[g2->index(i, j)] = g;
                }
            }
        } else {
            h.front() = g;
            h.back() = g;
        }
    }
    return h;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOverrides& ov)
{
    ExperimentResult res;
    res.config = config;
    auto& c = res.config;
    if (ov.mode) c.optimizer.mode = *ov.mode;
    if (ov.seed) c.trials.seed = *ov.seed;
    if (ov.trials) c.trials.count = *ov.trials;
    if (ov.workers) c.optimizer.workers = *ov.workers;
    if (ov.out) c.output.directory = *ov.out;
    c.validate();
    res.mode = c.optimizer.mode;

    const auto start = std::chrono::steady_clock::now();
    const ExperimentSetup setup = build_setup(c);
    res.control_dim = setup.system->control_dim();
    const std::size_t count = c.trials.count;
    const std::size_t workers = std::max<std::size_t>(1, c.optimizer.workers);
    const bool trial_parallel = workers > 1 && count >= workers;
    const std::filesystem::path dir = c.output.directory;
    if (ov.write_files) {
        std::filesystem::create_directories(dir);
    }

    std::vector<std::optional<TrialResult>> slots(count);
    std::string failure;
    std::exception_ptr error;
    try {
        parallel_for(count, trial_parallel ? workers : 1, [&](std::size_t t, std::size_t) {
            slots[t] = run_trial(c, setup, res.mode, c.trials.seed, t, trial_parallel ? 1 : workers);
        });
    } catch (const std::exception& e) {
        failure = e.what();
        error = std::current_exception();
    }

    std::vector<std::size_t> done;
    res.trials.resize(count);
    for (std::size_t t = 0; t < count; ++t) {
        if (slots[t]) {
            res.trials[t] = std::move(*slots[t]);
            done.push_back(t);
        }
    }

    if (failure.empty()) {
        std::vector<std::vector<double>> profiles;
        for (const auto& r : res.trials) profiles.push_back(r.profile);
        res.mean_profile.assign(setup.system->node_count(), 0.0);
        for (const auto& p : profiles) {
            for (std::size_t k = 0; k < p.size(); ++k) res.mean_profile[k] += p[k] / static_cast<double>(count);
        }
        res.trial_rmse.assign(count, {});
        for (std::size_t i = 0; i < setup.region_masks.size(); ++i) {
            std::vector<double> desired(setup.system->node_count());
            for (std::size_t k = 0; k < desired.size(); ++k) {
                desired[k] = c.cost.schedule.empty() ? setup.region_targets[i]
                                                     : setup.cost.desired_at(c.optimizer.t_sim, k);
            }
            res.regions.push_back(compute_metrics(profiles, desired, setup.region_masks[i]));
            for (std::size_t t = 0; t < count; ++t) {
                res.trial_rmse[t].push_back(trial_rmse(profiles[t], desired, setup.region_masks[i]));
            }
        }
    }
    res.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (ov.write_files) {
        for (std::size_t t : done) {
            write_trial_files(c, setup, dir, t, res.trials[t]);
        }
        write_summary(res, setup, dir, done, ov.timing, failure);
    }
    if (error) {
        std::rethrow_exception(error);
    }
    return res;
}

} // namespace spdevo
