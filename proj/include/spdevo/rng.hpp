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
#include <cstdint>
#include <span>

namespace spdevo {

/// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// SplitMix64 finalizer; used to fold stream coordinates into one id.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Role of a random stream inside an experiment.
enum class StreamPhase : std::uint32_t {
    Rollout = 1,  ///< noise of sampled trajectories inside the optimizer
    Plant = 2,    ///< disturbance applied to the true system
    Initial = 3,  ///< random initial condition
    Test = 4,
};

/**
 * Coordinates of one independent Gaussian stream.
 *
 * Every draw is a pure function of (seed, trial, phase, step, iteration,
 * rollout, bin, index), so results do not depend on how rollouts are
 * scheduled across threads.
 */
struct StreamKey {
    std::uint64_t seed = 0;
    std::uint64_t trial = 0;
    StreamPhase phase = StreamPhase::Rollout;
    std::uint64_t step = 0;
    std::uint64_t iteration = 0;
    std::uint64_t rollout = 0;

    std::uint64_t stream_id() const noexcept;
};

/// Counter-based standard normal source for one stream key.
class NormalStream {
public:
    explicit NormalStream(const StreamKey& key) noexcept;

    /// Fills `out` with independent N(0,1) draws for time bin `bin`.
    void fill(std::uint64_t bin, std::span<double> out) const noexcept;

    /// Same draws scaled by `scale`.
    void fill_scaled(std::uint64_t bin, double scale, std::span<double> out) const noexcept;

private:
    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
};

} // namespace spdevo
