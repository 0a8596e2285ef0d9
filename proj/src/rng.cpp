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

#include "spdevo/rng.hpp"

#include <boost/random/normal_distribution.hpp>

namespace spdevo {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53U;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57U;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9U;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85U;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept
{
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline std::array<std::uint32_t, 4> philox_block(std::array<std::uint32_t, 4> ctr,
                                                 std::array<std::uint32_t, 2> key) noexcept
{
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
        mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kPhiloxW0;
        key[1] += kPhiloxW1;
    }
    return ctr;
}

} // namespace

/// Sequential 32-bit words of one (stream, bin) counter range, consumed by
/// the ziggurat sampler.
class PhiloxEngine {
public:
    using result_type = std::uint32_t;

    PhiloxEngine(std::array<std::uint32_t, 2> key, std::uint64_t bin, std::uint64_t stream) noexcept
        : key_(key),
          ctr_{0U, static_cast<std::uint32_t>(bin) ^ (static_cast<std::uint32_t>(bin >> 32) * 0x85EBCA6BU),
               static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)}
    {
    }

    static constexpr result_type min() noexcept { return 0U; }
    static constexpr result_type max() noexcept { return 0xFFFFFFFFU; }

    result_type operator()() noexcept
    {
        if (used_ == 4) {
            block_ = philox_block(ctr_, key_);
            ++ctr_[0];
            used_ = 0;
        }
        return block_[used_++];
    }

private:
    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> ctr_;
    std::array<std::uint32_t, 4> block_{};
    int used_ = 4;
};

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) noexcept
{
    return philox_block(ctr, key);
}

std::uint64_t StreamKey::stream_id() const noexcept
{
    std::uint64_t h = mix64(trial);
    h = mix64(h ^ static_cast<std::uint64_t>(phase));
    h = mix64(h ^ step);
    h = mix64(h ^ iteration);
    h = mix64(h ^ rollout);
    return h;
}

NormalStream::NormalStream(const StreamKey& key) noexcept : stream_(key.stream_id())
{
    const std::uint64_t k = mix64(key.seed);
    key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

void NormalStream::fill(std::uint64_t bin, std::span<double> out) const noexcept
{
    fill_scaled(bin, 1.0, out);
}

void NormalStream::fill_scaled(std::uint64_t bin, double scale, std::span<double> out) const noexcept
{
    PhiloxEngine engine(key_, bin, stream_);
    boost::random::normal_distribution<double> normal;
    for (double& v : out) {
        v = scale * normal(engine);
    }
}

} // namespace spdevo
