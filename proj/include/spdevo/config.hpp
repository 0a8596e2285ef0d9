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
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spdevo/controller.hpp"
#include "spdevo/models.hpp"

namespace spdevo {

enum class ControlMode { OpenLoop, Mpc };

std::string_view to_string(ControlMode mode) noexcept;
ControlMode parse_control_mode(std::string_view name);

enum class ActuationType { Distributed, Boundary };

/// Initial field: nagumo_front, zero, constant (initial_value) or random
/// (N(initial_value, initial_sigma) at interior nodes).
enum class InitialProfile { NagumoFront, Zero, Constant, Random };

struct ModelBlock {
    ModelKind kind = ModelKind::Heat1D;
    double length = 1.0;
    std::size_t intervals = 128;
    double diffusivity = 1.0;
    double alpha = 0.0;
    double sigma = 0.0;
    BoundaryType boundary = BoundaryType::Dirichlet;
    double boundary_value = 0.0;
    InitialProfile initial = InitialProfile::Zero;
    double initial_value = 0.0;
    double initial_sigma = 0.0;
    std::size_t modes = 0;  ///< 0: one mode per interval
    double noise_decay = 0.0;
};

struct ActuationBlock {
    ActuationType type = ActuationType::Distributed;
    std::vector<double> centers;                   ///< 1-D, fractions of a
    std::vector<std::array<double, 2>> centers_2d; ///< 2-D, fractions of a
    std::vector<double> widths;                    ///< fractions of a
    std::optional<double> boundary_sigma;          ///< defaults to the model sigma
};

/// Target region; bounds are fractions of a and inclusive.
struct RegionBlock {
    std::string name;
    double x_lo = 0.0, x_hi = 1.0;
    double y_lo = 0.0, y_hi = 1.0;
    double desired = 0.0;
};

struct CostBlock {
    double kappa = 1.0;
    std::vector<RegionBlock> regions;
    std::vector<ScheduleSegment> schedule;
    double terminal_weight = 0.0;
};

struct OptimizerBlock {
    double rho = 1.0;
    double dt = 0.01;
    double horizon = 0.1;
    std::size_t iterations = 10;
    std::size_t rollouts = 100;
    std::size_t open_loop_iterations = 0;  ///< 0: same as iterations
    std::size_t open_loop_rollouts = 0;    ///< 0: same as rollouts
    ControlMode mode = ControlMode::Mpc;
    double t_sim = 1.0;
    std::size_t workers = 1;

    std::size_t horizon_steps() const;
    std::size_t total_steps() const;
};

struct TrialsBlock {
    std::size_t count = 1;
    std::uint64_t seed = 0;
};

struct OutputBlock {
    std::filesystem::path directory = "out";
    bool trajectories = true;
    std::size_t trajectory_stride = 1;
};

struct ExperimentConfig {
    std::string name;
    std::string description;
    std::filesystem::path source;
    ModelBlock model;
    ActuationBlock actuation;
    CostBlock cost;
    OptimizerBlock optimizer;
    TrialsBlock trials;
    OutputBlock output;

    bool is_2d() const noexcept { return model.kind == ModelKind::Heat2D; }
    /// Throws ConfigError naming the first invalid field.
    void validate() const;
    /// Non-fatal findings, e.g. sigma != 1/sqrt(rho).
    std::vector<std::string> warnings() const;
};

/// Parses an INI-style experiment file. A top-level `extends = other.cfg`
/// loads the referenced file first (relative to this one) and overlays the
/// keys given here. Unknown sections or keys are rejected.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Same, from text; `origin` resolves `extends` and names the source.
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& origin = {});

/// Directory holding the bundled experiment files.
std::filesystem::path bundled_config_dir();

struct BundledExperiment {
    std::string name;
    std::string description;
    std::filesystem::path path;
};

std::vector<BundledExperiment> list_experiments(const std::filesystem::path& dir = bundled_config_dir());

} // namespace spdevo
