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

#include "spdevo/grid.hpp"

#include <cmath>
#include <string>

#include "spdevo/error.hpp"

namespace spdevo {

Grid1D::Grid1D(double length, std::size_t intervals) : length_(length), intervals_(intervals)
{
    if (!(length > 0.0) || !std::isfinite(length)) {
        throw ConfigError("grid length must be positive, got " + std::to_string(length));
    }
    if (intervals < 2) {
        throw ConfigError("grid needs at least 2 intervals, got " + std::to_string(intervals));
    }
    spacing_ = length / static_cast<double>(intervals);
    nodes_.resize(intervals + 1);
    for (std::size_t k = 0; k <= intervals; ++k) {
        nodes_[k] = length * static_cast<double>(k) / static_cast<double>(intervals);
    }
    nodes_.back() = length;
}

Grid2D::Grid2D(double length, std::size_t intervals_x, std::size_t intervals_y)
    : x_(length, intervals_x), y_(length, intervals_y)
{
}

Grid1D make_grid_1d(double length, std::size_t intervals) { return Grid1D(length, intervals); }

Grid2D make_grid_2d(double length, std::size_t intervals) { return Grid2D(length, intervals); }

double inner_product(std::span<const double> f, std::span<const double> g, const Grid1D& grid)
{
    const std::size_t n = grid.node_count();
    if (f.size() != n || g.size() != n) {
        throw DimensionError("inner_product: field sizes " + std::to_string(f.size()) + "/" +
                             std::to_string(g.size()) + " do not match grid of " + std::to_string(n) +
                             " nodes");
    }
    // Interior and endpoint terms are accumulated separately so that the
    // result is bitwise symmetric in (f, g).
    double interior = 0.0;
    for (std::size_t k = 1; k + 1 < n; ++k) {
        interior += f[k] * g[k];
    }
    const double ends = f[0] * g[0] + f[n - 1] * g[n - 1];
    return grid.spacing() * (interior + 0.5 * ends);
}

double inner_product(std::span<const double> f, std::span<const double> g, const Grid2D& grid)
{
    const std::size_t n = grid.node_count();
    if (f.size() != n || g.size() != n) {
        throw DimensionError("inner_product: field sizes " + std::to_string(f.size()) + "/" +
                             std::to_string(g.size()) + " do not match grid of " + std::to_string(n) +
                             " nodes");
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < grid.ny(); ++j) {
        const double wy = grid.y_axis().weight(j);
        double row = 0.0;
        for (std::size_t i = 0; i < grid.nx(); ++i) {
            const std::size_t idx = grid.index(i, j);
            row += grid.x_axis().weight(i) * (f[idx] * g[idx]);
        }
        sum += wy * row;
    }
    return sum;
}

void validate_field(const FieldState& state, std::size_t node_count)
{
    if (state.values.size() != node_count) {
        throw DimensionError("field has " + std::to_string(state.values.size()) + " values, grid has " +
                             std::to_string(node_count) + " nodes");
    }
    for (double v : state.values) {
        if (!std::isfinite(v)) {
            throw DomainError("field contains non-finite values");
        }
    }
}

} // namespace spdevo
