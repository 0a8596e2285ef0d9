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
#include "spdevo/grid.hpp"
#include "spdevo/noise.hpp"

using namespace spdevo;

TEST_CASE("grid nodes and spacing")
{
    const auto g = make_grid_1d(1.0, 2);
    REQUIRE(g.node_count() == 3);
    CHECK(g.node(0) == 0.0);
    CHECK(g.node(1) == 0.5);
    CHECK(g.node(2) == 1.0);

    CHECK(make_grid_1d(5.0, 128).spacing() == doctest::Approx(0.0390625).epsilon(1e-15));
    CHECK(make_grid_2d(0.5, 64).x_axis().spacing() == doctest::Approx(0.0078125).epsilon(1e-15));
    CHECK(make_grid_2d(0.5, 64).node_count() == 65 * 65);
}

TEST_CASE("grid construction rejects bad sizes")
{
    CHECK_THROWS_AS(make_grid_1d(0.0, 8), ConfigError);
    CHECK_THROWS_AS(make_grid_1d(-1.0, 8), ConfigError);
    CHECK_THROWS_AS(make_grid_1d(1.0, 1), ConfigError);
    CHECK_THROWS_AS(make_grid_2d(1.0, 0), ConfigError);
}

TEST_CASE("2-D storage is x fastest")
{
    const Grid2D g(1.0, 4, 2);
    CHECK(g.nx() == 5);
    CHECK(g.ny() == 3);
    CHECK(g.index(2, 1) == 7);
    CHECK(g.weight(0, 0) == doctest::Approx(0.25 * 0.5 * 0.5 * 0.5));
}

TEST_CASE("trapezoid inner product")
{
    const auto g = make_grid_1d(1.0, 4);
    const std::vector<double> one(5, 1.0), zero(5, 0.0);
    CHECK(inner_product(one, one, g) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(inner_product(one, zero, g) == 0.0);

    // Linear f: trapezoid is exact for x on [0, 1].
    std::vector<double> x(5);
    for (std::size_t k = 0; k < 5; ++k) x[k] = g.node(k);
    CHECK(inner_product(x, one, g) == doctest::Approx(0.5).epsilon(1e-15));

    const std::vector<double> wrong(4, 1.0);
    CHECK_THROWS_AS(inner_product(one, wrong, g), DimensionError);

    const auto g2 = make_grid_2d(2.0, 8);
    const std::vector<double> one2(g2.node_count(), 1.0);
    CHECK(inner_product(one2, one2, g2) == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("sine basis is orthonormal under the trapezoid rule")
{
    const auto g = make_grid_1d(1.0, 128);
    auto mode = [&](std::size_t j) {
        std::vector<double> v(g.node_count());
        for (std::size_t k = 0; k < v.size(); ++k) v[k] = std::sqrt(2.0) * std::sin(j * std::numbers::pi * g.node(k));
        return v;
    };
    CHECK(std::abs(inner_product(mode(1), mode(1), g) - 1.0) <= 1e-3);
    for (std::size_t j = 1; j <= 32; ++j) {
        for (std::size_t k = j + 1; k <= 32; ++k) {
            CHECK(std::abs(inner_product(mode(j), mode(k), g)) <= 1e-3);
        }
    }
}

TEST_CASE("inner product is symmetric and bilinear")
{
    const auto g = make_grid_1d(3.0, 16);
    std::vector<double> f(17), h(17), s(17);
    for (std::size_t k = 0; k < 17; ++k) {
        f[k] = std::cos(0.7 * k);
        h[k] = 0.1 * k * k - 1.0;
        s[k] = 2.0 * f[k] - 3.0 * h[k];
    }
    CHECK(inner_product(f, h, g) == doctest::Approx(inner_product(h, f, g)).epsilon(1e-14));
    CHECK(inner_product(s, f, g) ==
          doctest::Approx(2.0 * inner_product(f, f, g) - 3.0 * inner_product(h, f, g)).epsilon(1e-12));
}

TEST_CASE("field validation")
{
    FieldState s{{0.0, 1.0, 2.0}, 0.0};
    CHECK_NOTHROW(validate_field(s, 3));
    CHECK_THROWS_AS(validate_field(s, 4), DimensionError);
    s.values[1] = std::nan("");
    CHECK_THROWS(validate_field(s, 3));
}
