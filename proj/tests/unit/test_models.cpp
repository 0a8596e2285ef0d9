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

#include <cmath>
#include <numbers>
#include <vector>

#include "spdevo/error.hpp"
#include "spdevo/models.hpp"

using namespace spdevo;

namespace {

double trapezoid_mean(const std::vector<double>& h, const Grid1D& g)
{
    const std::vector<double> one(h.size(), 1.0);
    return inner_product(h, one, g) / g.length();
}

ModelSpec heat(double eps = 1.0, BoundaryCondition bc = BoundaryCondition::dirichlet())
{
    ModelSpec m;
    m.kind = ModelKind::Heat1D;
    m.diffusivity = eps;
    m.boundary = bc;
    return m;
}

} // namespace

TEST_CASE("nagumo reaction and front profile")
{
    CHECK(nagumo_reaction(0.0, -0.5) == 0.0);
    CHECK(nagumo_reaction(1.0, -0.5) == 0.0);
    CHECK(nagumo_reaction(0.5, -0.5) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(nagumo_reaction(0.2, 0.3) == doctest::Approx(0.2 * 0.8 * -0.1).epsilon(1e-15));

    CHECK(nagumo_initial_profile(2.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(nagumo_initial_profile(0.0) == doctest::Approx(1.0 / (1.0 + std::exp(-std::sqrt(2.0)))).epsilon(1e-14));
    CHECK(nagumo_initial_profile(0.0) == doctest::Approx(0.80444).epsilon(1e-5));
    CHECK(nagumo_initial_profile(5.0) == doctest::Approx(0.10705).epsilon(1e-4));
}

TEST_CASE("burgers advection")
{
    const auto g = make_grid_1d(1.0, 10);
    CHECK(burgers_advection(std::vector<double>(11, 3.0), g) == std::vector<double>(11, 0.0));
    CHECK(burgers_advection(std::vector<double>(11, 0.0), g) == std::vector<double>(11, 0.0));
    std::vector<double> x(11);
    for (std::size_t k = 0; k < 11; ++k) x[k] = g.node(k);
    const auto a = burgers_advection(x, g);
    CHECK(a.front() == 0.0);
    CHECK(a.back() == 0.0);
    for (std::size_t k = 1; k < 10; ++k) CHECK(a[k] == doctest::Approx(-x[k]).epsilon(1e-12));
    CHECK_THROWS_AS(burgers_advection(std::vector<double>(5, 0.0), g), DimensionError);
}

TEST_CASE("model validation")
{
    ModelSpec m = heat(0.0);
    CHECK_THROWS_AS(m.validate(), ConfigError);
    m = heat();
    m.sigma = -1.0;
    CHECK_THROWS_AS(m.validate(), ConfigError);
    CHECK(parse_model_kind("nagumo") == ModelKind::Nagumo);
    CHECK(parse_model_kind(to_string(ModelKind::Heat2D)) == ModelKind::Heat2D);
    CHECK_THROWS_AS(parse_model_kind("wave"), ConfigError);
    CHECK_THROWS_AS(Stepper1D(make_grid_1d(1.0, 8), heat(), 0.0), ConfigError);
}

TEST_CASE("tridiagonal solve inverts the operator")
{
    for (auto bc : {BoundaryCondition::dirichlet(0.3), BoundaryCondition::neumann(0.0)}) {
        const Stepper1D s(make_grid_1d(2.0, 40), heat(0.7, bc), 0.01);
        Eigen::VectorXd rhs(static_cast<Eigen::Index>(s.unknown_count()));
        for (Eigen::Index i = 0; i < rhs.size(); ++i) rhs[i] = std::sin(0.3 * double(i)) + 0.01 * double(i);
        const Eigen::VectorXd x = s.solve(rhs);
        CHECK((s.apply_operator(x) - rhs).norm() <= 1e-10 * rhs.norm());
    }
    const Stepper2D s2(make_grid_2d(0.5, 16), [] {
        ModelSpec m = heat(1.0);
        m.kind = ModelKind::Heat2D;
        return m;
    }(), 0.01);
    Eigen::VectorXd rhs = Eigen::VectorXd::LinSpaced(15 * 15, -1.0, 2.0);
    const Eigen::VectorXd x = s2.solve(rhs);
    CHECK((s2.apply_operator(x) - rhs).norm() <= 1e-10 * rhs.norm());
}

TEST_CASE("implicit heat step contracts the L2 norm")
{
    const auto g = make_grid_1d(1.0, 64);
    const ModelSpec m = heat(1.0);
    FieldState s{std::vector<double>(65), 0.0};
    for (std::size_t k = 0; k < 65; ++k) s.values[k] = std::sin(std::numbers::pi * g.node(k)) + 0.3 * std::sin(9 * std::numbers::pi * g.node(k));
    double prev = l2_norm(s.values, g);
    for (int n = 0; n < 200; ++n) {
        s = step_semi_implicit(s, g, m, {}, {}, 0.01, n);
        const double now = l2_norm(s.values, g);
        CHECK(now <= prev);
        prev = now;
    }
    CHECK(s.time == doctest::Approx(2.0));
}

TEST_CASE("heat step decays the first mode at the discrete rate")
{
    const auto g = make_grid_1d(1.0, 32);
    const double dt = 0.001;
    FieldState s{std::vector<double>(33), 0.0};
    for (std::size_t k = 0; k < 33; ++k) s.values[k] = std::sin(std::numbers::pi * g.node(k));
    const auto next = step_semi_implicit(s, g, heat(1.0), {}, {}, dt);
    const double dx = g.spacing();
    const double mu = 4.0 / (dx * dx) * std::pow(std::sin(std::numbers::pi * dx / 2.0), 2);
    for (std::size_t k = 1; k < 32; ++k)
        CHECK(next.values[k] == doctest::Approx(s.values[k] / (1.0 + dt * mu)).epsilon(1e-12));
}

TEST_CASE("burgers fixed point")
{
    const auto g = make_grid_1d(2.0, 128);
    ModelSpec m;
    m.kind = ModelKind::Burgers1D;
    m.diffusivity = 0.1;
    m.boundary = BoundaryCondition::dirichlet(1.0);
    FieldState s{std::vector<double>(129, 1.0), 0.0};
    for (int n = 0; n < 100; ++n) s = step_semi_implicit(s, g, m, {}, {}, 0.01, n);
    for (double v : s.values) CHECK(std::abs(v - 1.0) <= 1e-10);
}

TEST_CASE("controls and noise enter additively")
{
    const auto g = make_grid_1d(1.0, 16);
    ModelSpec m = heat(0.5);
    m.sigma = 0.2;
    const FieldState s{std::vector<double>(17, 0.0), 0.0};
    std::vector<double> u(17, 0.0), w(17, 0.0);
    u[8] = 1.0;
    w[4] = 1.0;
    const auto a = step_semi_implicit(s, g, m, u, {}, 0.01);
    const auto b = step_semi_implicit(s, g, m, {}, w, 0.01);
    const auto c = step_semi_implicit(s, g, m, u, w, 0.01);
    for (std::size_t k = 0; k < 17; ++k) CHECK(c.values[k] == doctest::Approx(a.values[k] + b.values[k]).epsilon(1e-14));
    CHECK(b.values[4] > 0.0);
    CHECK_THROWS_AS(step_semi_implicit(s, g, m, std::vector<double>(3), {}, 0.01), DimensionError);
}

TEST_CASE("divergence is reported with its step")
{
    const auto g = make_grid_1d(1.0, 16);
    ModelSpec m = heat(1.0);
    m.sigma = 1.0;
    const FieldState s{std::vector<double>(17, 0.0), 0.0};
    std::vector<double> w(17, 0.0);
    w[3] = std::numeric_limits<double>::infinity();
    try {
        step_semi_implicit(s, g, m, {}, w, 0.01, 42);
        FAIL("expected divergence");
    } catch (const DivergenceError& e) {
        CHECK(e.step() == 42);
    }
}

TEST_CASE("nagumo front propagates across the domain")
{
    const auto g = make_grid_1d(5.0, 128);
    ModelSpec m;
    m.kind = ModelKind::Nagumo;
    m.diffusivity = 1.0;
    m.alpha = -0.5;
    m.boundary = BoundaryCondition::neumann(0.0);
    const Stepper1D stepper(g, m, 0.01);
    StepWorkspace ws;
    std::vector<double> h(129);
    for (std::size_t k = 0; k < 129; ++k) h[k] = nagumo_initial_profile(g.node(k));
    const std::size_t probe = 127;  // x = 0.99a within half a cell
    double previous = h[probe];
    for (int n = 0; n < 500; ++n) {
        REQUIRE(stepper.step(h, {}, {}, {}, ws));
        CHECK(h[probe] >= previous - 1e-12);
        previous = h[probe];
    }
    CHECK(h[probe] > 0.9);
}

TEST_CASE("neumann heat: zero flux keeps constants, flux moves the mean exactly")
{
    const auto g = make_grid_1d(1.0, 128);
    ModelSpec m = heat(1.0, BoundaryCondition::neumann(0.0));
    FieldState s{std::vector<double>(129, 0.7), 0.0};
    for (int n = 0; n < 50; ++n) {
        s = step_boundary_controlled_heat(s, g, m, 0.0, 0.0, {}, 0.0, 0.01, {}, n);
    }
    for (double v : s.values) CHECK(std::abs(v - 0.7) <= 1e-10);

    const double c = 0.8, dt = 0.01;
    double mean = trapezoid_mean(s.values, g);
    for (int n = 0; n < 20; ++n) {
        s = step_boundary_controlled_heat(s, g, m, c, 0.5 * c, {}, 0.0, dt, {}, n);
        const double now = trapezoid_mean(s.values, g);
        CHECK(now > mean);
        CHECK(now - mean == doctest::Approx(dt * 1.0 * (c + 0.5 * c) / 1.0).epsilon(1e-10));
        mean = now;
    }
    // Positive outward derivative at x = 0 means heat flows in: left end warmer.
    CHECK(s.values.front() > s.values[64]);

    const std::vector<double> dv{0.001, -0.002};
    const auto noisy = step_boundary_controlled_heat(s, g, m, 0.0, 0.0, dv, 0.5, dt);
    CHECK(trapezoid_mean(noisy.values, g) - trapezoid_mean(s.values, g) ==
          doctest::Approx(dt * 0.5 * (dv[0] + dv[1]) / dt).epsilon(1e-9));
    CHECK_THROWS_AS(step_boundary_controlled_heat(s, g, heat(), 0.0, 0.0, {}, 0.0, dt), ConfigError);
}

TEST_CASE("2-D heat relaxes toward its boundary value")
{
    const auto g = make_grid_2d(0.5, 16);
    ModelSpec m = heat(1.0, BoundaryCondition::dirichlet(0.0));
    m.kind = ModelKind::Heat2D;
    FieldState s{std::vector<double>(g.node_count(), 0.0), 0.0};
    for (std::size_t j = 1; j < 16; ++j)
        for (std::size_t i = 1; i < 16; ++i) s.values[g.index(i, j)] = 1.0;
    double prev = l2_norm(s.values, g);
    for (int n = 0; n < 50; ++n) {
        s = step_semi_implicit(s, g, m, {}, {}, 0.01, n);
        const double now = l2_norm(s.values, g);
        CHECK(now <= prev);
        prev = now;
    }
    // Separable product of 1-D modes decays with the summed rate.
    const double dx = g.x_axis().spacing();
    const double mu1 = 4.0 / (dx * dx) * std::pow(std::sin(std::numbers::pi * dx / (2 * 0.5)), 2);
    FieldState p{std::vector<double>(g.node_count(), 0.0), 0.0};
    for (std::size_t j = 0; j <= 16; ++j)
        for (std::size_t i = 0; i <= 16; ++i)
            p.values[g.index(i, j)] = std::sin(std::numbers::pi * i / 16.0) * std::sin(std::numbers::pi * j / 16.0);
    const auto q = step_semi_implicit(p, g, m, {}, {}, 0.001);
    CHECK(q.values[g.index(5, 9)] == doctest::Approx(p.values[g.index(5, 9)] / (1.0 + 0.001 * 2.0 * mu1)).epsilon(1e-12));
}

TEST_CASE("backward Euler converges at first order in time")
{
    const auto g = make_grid_1d(5.0, 64);
    ModelSpec m;
    m.kind = ModelKind::Nagumo;
    m.alpha = -0.5;
    m.boundary = BoundaryCondition::neumann(0.0);
    auto run = [&](double dt) {
        const Stepper1D s(g, m, dt);
        StepWorkspace ws;
        std::vector<double> h(65);
        for (std::size_t k = 0; k < 65; ++k) h[k] = nagumo_initial_profile(g.node(k));
        const int steps = static_cast<int>(std::lround(0.5 / dt));
        for (int n = 0; n < steps; ++n) s.step(h, {}, {}, {}, ws);
        return h;
    };
    const auto a = run(0.01), b = run(0.005), c = run(0.0025);
    double e1 = 0.0, e2 = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        e1 = std::max(e1, std::abs(a[k] - b[k]));
        e2 = std::max(e2, std::abs(b[k] - c[k]));
    }
    CHECK(std::log2(e1 / e2) >= 0.9);
}
