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


#include <doctest.h>

#include <algorithm>
#include <string>

#include "spdevo/config.hpp"
#include "spdevo/error.hpp"

using namespace spdevo;

namespace {

const char* kMinimal = R"(
name = minimal
[model]
kind = heat1d
intervals = 16
[actuation]
centers = 0.5
widths = 0.1
[cost]
regions = 0.4:0.6
desired = 1
[optimizer]
horizon = 0.05
t_sim = 0.1
)";

} // namespace

TEST_CASE("bundled nagumo suppression parameters")
{
    const auto cfg = load_config(bundled_config_dir() / "nagumo_suppress.cfg");
    CHECK(cfg.name == "nagumo_suppress");
    CHECK(cfg.model.kind == ModelKind::Nagumo);
    CHECK(cfg.model.length == 5.0);
    CHECK(cfg.model.diffusivity == 1.0);
    CHECK(cfg.model.alpha == -0.5);
    CHECK(cfg.cost.kappa == 10000.0);
    CHECK(cfg.optimizer.dt == 0.01);
    CHECK(cfg.optimizer.t_sim == 5.0);
    CHECK(cfg.optimizer.total_steps() == 500);
    CHECK(cfg.optimizer.horizon_steps() == 10);
    REQUIRE(cfg.cost.regions.size() == 1);
    CHECK(cfg.cost.regions[0].x_lo == 0.7);
    CHECK(cfg.cost.regions[0].x_hi == 0.99);
}

TEST_CASE("bundled burgers parameters")
{
    const auto cfg = load_config(bundled_config_dir() / "burgers_track.cfg");
    CHECK(cfg.model.kind == ModelKind::Burgers1D);
    CHECK(cfg.model.length == 2.0);
    CHECK(cfg.model.intervals == 128);
    CHECK(cfg.model.boundary == BoundaryType::Dirichlet);
    CHECK(cfg.model.boundary_value == 1.0);
    REQUIRE(cfg.cost.regions.size() == 3);
    CHECK(cfg.cost.regions[0].desired == 2.0);
    CHECK(cfg.cost.regions[1].desired == 1.0);
    CHECK(cfg.cost.regions[2].desired == 2.0);
    CHECK(cfg.cost.regions[1].name == "S2");
}

TEST_CASE("every bundled experiment validates")
{
    const auto all = list_experiments();
    CHECK(all.size() >= 5);
    CHECK(std::is_sorted(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.name < b.name; }));
    for (const auto& e : all) {
        CAPTURE(e.name);
        CHECK_NOTHROW(load_config(e.path).validate());
        CHECK(!e.description.empty());
    }
}

TEST_CASE("defaults and overlays")
{
    const auto cfg = parse_config(kMinimal);
    CHECK(cfg.model.kind == ModelKind::Heat1D);
    CHECK(cfg.optimizer.rho == 1.0);
    CHECK(cfg.trials.count == 1);
    CHECK(cfg.actuation.widths == std::vector<double>{0.1});

    const auto desk = load_config(bundled_config_dir() / "nagumo_suppress.desk.cfg");
    CHECK(desk.model.length == 5.0);
    CHECK(desk.trials.count == 16);
    CHECK(desk.optimizer.open_loop_iterations == 50);
    CHECK(desk.optimizer.open_loop_rollouts == 64);
}

TEST_CASE("validation failures name the field")
{
    std::string text = kMinimal;
    text.replace(text.find("horizon = 0.05"), 14, "horizon = 0.5");
    try {
        parse_config(text).validate();
        FAIL("expected a validation error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("optimizer.horizon") != std::string::npos);
    }

    CHECK_THROWS_AS(parse_config(std::string(kMinimal) + "colour = red\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(std::string(kMinimal) + "[extras]\nfoo = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(std::string(kMinimal) + "[model]\nvoltage = 3\n"), ConfigError);

    text = kMinimal;
    text.replace(text.find("regions = 0.4:0.6"), 17, "regions = 0.4:1.6");
    CHECK_THROWS_AS(parse_config(text).validate(), ConfigError);
    text = kMinimal;
    text.replace(text.find("intervals = 16"), 14, "intervals = many");
    CHECK_THROWS_AS(parse_config(text), ConfigError);
}

TEST_CASE("syntax errors carry the line")
{
    try {
        parse_config("name = x\n[model\nkind = heat1d\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("lists, regions and schedules")
{
    std::string text = kMinimal;
    text.replace(text.find("regions = 0.4:0.6"), 17, "regions = 0.6:0.4, 0.1:0.2\nregion_names = A, B");
    text.replace(text.find("t_sim = 0.1"), 11, "t_sim = 0.1\nmode = open-loop");
    auto cfg = parse_config(text);
    CHECK(cfg.cost.regions[0].x_lo == 0.4);
    CHECK(cfg.cost.regions[0].x_hi == 0.6);
    CHECK(cfg.cost.regions[1].name == "B");
    CHECK(cfg.cost.regions[1].desired == 1.0);
    CHECK(cfg.optimizer.mode == ControlMode::OpenLoop);

    const auto b = load_config(bundled_config_dir() / "heat1d_boundary.cfg");
    CHECK(b.actuation.type == ActuationType::Boundary);
    REQUIRE(b.cost.schedule.size() == 2);
    CHECK(b.cost.schedule[0].until == 0.4);
    CHECK(b.cost.schedule[0].value == 1.0);
    CHECK(b.cost.schedule[1].value == 3.0);

    const auto h = load_config(bundled_config_dir() / "heat2d_track.cfg");
    CHECK(h.is_2d());
    CHECK(h.actuation.centers_2d.size() == 5);
    CHECK(h.cost.regions.size() == 5);
}

TEST_CASE("control modes and warnings")
{
    CHECK(parse_control_mode("mpc") == ControlMode::Mpc);
    CHECK(parse_control_mode("open-loop") == ControlMode::OpenLoop);
    CHECK(parse_control_mode("open_loop") == ControlMode::OpenLoop);
    CHECK_THROWS_AS(parse_control_mode("sideways"), ConfigError);

    auto cfg = parse_config(kMinimal);
    cfg.model.sigma = 0.5;
    cfg.optimizer.rho = 100.0;
    CHECK(!cfg.warnings().empty());
    cfg.model.sigma = 0.1;
    CHECK(cfg.warnings().empty());
}
