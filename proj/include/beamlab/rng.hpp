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

#ifndef BEAMLAB_RNG_HPP
#define BEAMLAB_RNG_HPP

#include "beamlab/types.hpp"

#include <cstdint>
#include <string_view>

namespace beamlab
{

/// Counter-based random stream.
///
/// Draw i of a stream with key k is splitmix64_mix(k + (i + 1) * 0x9E3779B97F4A7C15),
/// so the sequence is a pure function of (key, index) and can be reproduced in any
/// language. Uniforms take the top 53 bits; normals use the Box-Muller cosine branch
/// on two consecutive uniforms (u1 mapped to (0, 1]); complex normals use both
/// branches of one Box-Muller pair.
class RandomStream
{
public:
    RandomStream() = default;
    explicit RandomStream(std::uint64_t key) : key_(key) {}

    std::uint64_t key() const { return key_; }
    std::uint64_t position() const { return counter_; }

    std::uint64_t next_u64();

    /// Uniform on [0, 1).
    double uniform();

    /// Standard normal N(0, 1).
    double normal();

    /// Circularly symmetric complex normal CN(0, variance).
    Complex complex_normal(double variance);

    /// Integer uniform on [0, n). Uses rejection so the result is unbiased.
    std::uint64_t uniform_index(std::uint64_t n);

    /// Independent child stream. The parent is not advanced.
    RandomStream split(std::uint64_t child_id) const;

private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64_mix(std::uint64_t z);

/// FNV-1a 64-bit hash, used to turn experiment names into stream keys.
std::uint64_t hash_name(std::string_view name);

/// Stream for one Monte Carlo trial:
/// key = mix(mix(mix(master ^ mix(hash_name(experiment))) + snr_index) + trial_index).
RandomStream seed_trial(std::uint64_t master_seed, std::string_view experiment,
                        std::uint64_t snr_index, std::uint64_t trial_index);

} // namespace beamlab

#endif // BEAMLAB_RNG_HPP
