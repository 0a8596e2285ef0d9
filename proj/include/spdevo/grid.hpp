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
#include <span>
#include <vector>

namespace spdevo {

/**
 * Uniform grid on [0, a] with J intervals and J+1 nodes x_k = a*k/J.
 *
 * Fields live on every node, boundary nodes included. Immutable after
 * construction, so a single instance can be shared by all rollout workers.
 */
class Grid1D {
public:
    Grid1D(double length, std::size_t intervals);

    double length() const noexcept { return length_; }
    std::size_t intervals() const noexcept { return intervals_; }
    std::size_t node_count() const noexcept { return intervals_ + 1; }
    double spacing() const noexcept { return spacing_; }
    double node(std::size_t k) const noexcept { return nodes_[k]; }
    std::span<const double> nodes() const noexcept { return nodes_; }

    /// Trapezoid weight of node k: dx inside, dx/2 at the two endpoints.
    double weight(std::size_t k) const noexcept
    {
        return (k == 0 || k == intervals_) ? 0.5 * spacing_ : spacing_;
    }

    bool operator==(const Grid1D& other) const noexcept
    {
        return length_ == other.length_ && intervals_ == other.intervals_;
    }

private:
    double length_;
    std::size_t intervals_;
    double spacing_;
    std::vector<double> nodes_;
};

/// Tensor-product grid on [0, a]^2. Values are stored row-major with x
/// varying fastest: index = j * nx + i for node (x_i, y_j).
class Grid2D {
public:
    Grid2D(double length, std::size_t intervals_x, std::size_t intervals_y);
    Grid2D(double length, std::size_t intervals) : Grid2D(length, intervals, intervals) {}

    const Grid1D& x_axis() const noexcept { return x_; }
    const Grid1D& y_axis() const noexcept { return y_; }
    double length() const noexcept { return x_.length(); }
    std::size_t nx() const noexcept { return x_.node_count(); }
    std::size_t ny() const noexcept { return y_.node_count(); }
    std::size_t node_count() const noexcept { return nx() * ny(); }
    std::size_t index(std::size_t i, std::size_t j) const noexcept { return j * nx() + i; }
    double weight(std::size_t i, std::size_t j) const noexcept { return x_.weight(i) * y_.weight(j); }

    bool operator==(const Grid2D& other) const noexcept { return x_ == other.x_ && y_ == other.y_; }

private:
    Grid1D x_;
    Grid1D y_;
};

/// Field values at one time instant.
struct FieldState {
    std::vector<double> values;
    double time = 0.0;
};

Grid1D make_grid_1d(double length, std::size_t intervals);
Grid2D make_grid_2d(double length, std::size_t intervals);

/// Discrete L2 inner product using the trapezoid rule.
double inner_product(std::span<const double> f, std::span<const double> g, const Grid1D& grid);
double inner_product(std::span<const double> f, std::span<const double> g, const Grid2D& grid);

/// Checks value count against the grid and that every value is finite.
void validate_field(const FieldState& state, std::size_t node_count);

} // namespace spdevo
