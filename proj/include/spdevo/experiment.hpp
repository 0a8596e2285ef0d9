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
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "spdevo/config.hpp"
#include "spdevo/controller.hpp"

namespace spdevo {

/// Tracking quality of the cross-trial mean profile over one node set.
struct RegionMetrics {
    double rmse = 0.0;
    double avg_sigma = 0.0;
};

/// RMSE of the cross-trial mean against `desired` and the mean population
/// standard deviation across trials, both over nodes with mask != 0.
RegionMetrics compute_metrics(const std::vector<std::vector<double>>& profiles, std::span<const double> desired,
                              std::span<const std::uint8_t> mask);

/// Time average of the states with t >= t_end / 2 (final state included).
std::vector<double> second_half_average(std::span<const FieldState> trajectory, double t_end);

/// A configured model: grid, controlled system and the cost it is run under.
struct ExperimentSetup {
    std::variant<Grid1D, Grid2D> grid;
    std::unique_ptr<ControlledSystem> system;
    CostSpec cost;
    /// One 0/1 mask and one desired value per configured region.
    std::vector<std::vector<std::uint8_t>> region_masks;
    std::vector<double> region_targets;
};

ExperimentSetup build_setup(const ExperimentConfig& config);

/// Node mask of a region; bounds are fractions of a, inclusive.
std::vector<std::uint8_t> region_mask(const Grid1D& grid, const RegionBlock& region);
std::vector<std::uint8_t> region_mask(const Grid2D& grid, const RegionBlock& region);

/// Initial field of one trial (random profiles use the trial's initial stream).
std::vector<double> initial_state(const ExperimentConfig& config, const ExperimentSetup& setup, std::uint64_t seed,
                                  std::uint64_t trial);

struct RunOverrides {
    std::optional<ControlMode> mode;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::optional<std::filesystem::path> out;
    std::optional<std::size_t> workers;
    bool write_files = true;
    bool timing = false;  ///< fill the runtime_s column
};

struct TrialResult {
    std::vector<FieldState> trajectory;
    std::vector<double> applied;  ///< steps x N
    std::vector<IterationStats> trace;
    std::vector<double> profile;  ///< second-half average
    double realized_cost = 0.0;
};

struct ExperimentResult {
    ExperimentConfig config;  ///< after overrides
    ControlMode mode = ControlMode::Mpc;
    std::size_t control_dim = 0;
    std::vector<TrialResult> trials;
    std::vector<double> mean_profile;
    std::vector<RegionMetrics> regions;  ///< one per configured region
    std::vector<std::vector<double>> trial_rmse;  ///< [trial][region]
    double runtime_s = 0.0;
};

/// Runs every trial of an experiment and writes its CSV artifacts. On
/// failure the completed trials and a failure marker row are written before
/// the error propagates.
ExperimentResult run_experiment(const ExperimentConfig& config, const RunOverrides& overrides = {});

} // namespace spdevo
