/*
 *   Copyright 2026 The beamlab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "beamlab/rng.hpp"

#include <cmath>
#include <limits>

namespace beamlab
{

namespace
{
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr double kTwoPow53Inv = 1.0 / 9007199254740992.0;
} // namespace

std::uint64_t splitmix64_mix(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t hash_name(std::string_view name)
{
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : name)
    {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::uint64_t RandomStream::next_u64()
{
    ++counter_;
    return splitmix64_mix(key_ + counter_ * kGolden);
}

double RandomStream::uniform()
{
    return static_cast<double>(next_u64() >> 11) * kTwoPow53Inv;
}

double RandomStream::normal()
{
    const double u1 = 1.0 - uniform(); // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

Complex RandomStream::complex_normal(double variance)
{
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-variance * std::log(u1)); // sqrt(variance / 2) * sqrt(-2 ln u1)
    return {r * std::cos(2.0 * kPi * u2), r * std::sin(2.0 * kPi * u2)};
}

std::uint64_t RandomStream::uniform_index(std::uint64_t n)
{
    if (n <= 1)
        return 0;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = next_u64();
    while (x >= limit)
        x = next_u64();
    return x % n;
}

RandomStream RandomStream::split(std::uint64_t child_id) const
{
    return RandomStream(splitmix64_mix(key_ ^ splitmix64_mix(child_id + kGolden)));
}

RandomStream seed_trial(std::uint64_t master_seed, std::string_view experiment,
                        std::uint64_t snr_index, std::uint64_t trial_index)
{
    std::uint64_t k = splitmix64_mix(master_seed ^ splitmix64_mix(hash_name(experiment)));
    k = splitmix64_mix(k + snr_index);
    k = splitmix64_mix(k + trial_index);
    return RandomStream(k);
}

} // namespace beamlab
