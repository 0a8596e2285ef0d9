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

// Command-line front end: run, validate and list bundled experiments.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "spdevo/config.hpp"
#include "spdevo/error.hpp"
#include "spdevo/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitDiverged = 3;

void print_warnings(const spdevo::ExperimentConfig& cfg)
{
    for (const auto& w : cfg.warnings()) {
        std::cerr << "warning: " << w << '\n';
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Sampling-based variational control of stochastic PDEs"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::optional<std::size_t> workers;
    std::optional<std::string> mode;
    std::optional<std::string> out;
    bool timing = false;

    auto* run = app.add_subcommand("run", "Run an experiment and write its CSV outputs");
    run->add_option("config", config_path, "Experiment file")->required();
    run->add_option("--seed", seed, "Master seed");
    run->add_option("--trials", trials, "Number of trials");
    run->add_option("--mode", mode, "open-loop or mpc")->check(CLI::IsMember({"open-loop", "mpc"}));
    run->add_option("--out", out, "Output directory");
    run->add_option("--workers", workers, "Worker threads");
    run->add_flag("--timing", timing, "Record wall-clock runtime in metrics.csv");

    auto* validate = app.add_subcommand("validate", "Check an experiment file");
    validate->add_option("config", config_path, "Experiment file")->required();

    auto* list = app.add_subcommand("list-experiments", "List bundled experiments");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInvalid;
    }

    if (*list) {
        try {
            for (const auto& e : spdevo::list_experiments()) {
                std::cout << e.name << "\t" << e.description << "\n";
            }
        } catch (const spdevo::ConfigError& e) {
            std::cerr << "error: " << e.what() << '\n';
            return kExitInvalid;
        }
        return kExitOk;
    }

    spdevo::ExperimentConfig cfg;
    try {
        cfg = spdevo::load_config(config_path);
    } catch (const spdevo::ConfigError& e) {
        std::cerr << "invalid config: " << e.what() << '\n';
        return kExitInvalid;
    }

    if (*validate) {
        print_warnings(cfg);
        std::cout << cfg.name << ": ok (" << cfg.optimizer.total_steps() << " steps, "
                  << cfg.trials.count << " trials, " << spdevo::to_string(cfg.optimizer.mode) << ")\n";
        return kExitOk;
    }

    spdevo::RunOverrides ov;
    ov.seed = seed;
    ov.trials = trials;
    ov.workers = workers;
    ov.timing = timing;
    if (out) ov.out = *out;
    try {
        if (mode) ov.mode = spdevo::parse_control_mode(*mode);
        print_warnings(cfg);
        const auto res = spdevo::run_experiment(cfg, ov);
        for (std::size_t i = 0; i < res.regions.size(); ++i) {
            std::printf("%s %s region=%s rmse=%.6g avg_sigma=%.6g\n", res.config.name.c_str(),
                        std::string(spdevo::to_string(res.mode)).c_str(), res.config.cost.regions[i].name.c_str(),
                        res.regions[i].rmse, res.regions[i].avg_sigma);
        }
        return kExitOk;
    } catch (const spdevo::ConfigError& e) {
        std::cerr << "invalid config: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const spdevo::DegenerateActuationError& e) {
        std::cerr << "invalid config: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const spdevo::DegenerateBatchError& e) {
        std::cerr << "diverged: " << e.what() << '\n';
        return kExitDiverged;
    } catch (const spdevo::DivergenceError& e) {
        std::cerr << "diverged: " << e.what() << '\n';
        return kExitDiverged;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}
