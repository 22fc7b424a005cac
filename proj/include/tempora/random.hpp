/* Copyright 2026 The Tempora Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

	http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
--------------------------------------------------------------------------------------------------------------*/

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace tempora {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t hash_purpose(std::string_view purpose) noexcept
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : purpose) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Counter-based sub-seed: a pure function of (master, purpose, counter).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view purpose, std::uint64_t counter = 0) noexcept
{
    return splitmix64(splitmix64(master ^ hash_purpose(purpose)) + splitmix64(counter + 0x632be59bd9b4e019ULL));
}

inline Rng make_stream(std::uint64_t master, std::string_view purpose, std::uint64_t counter = 0)
{
    return Rng(derive_seed(master, purpose, counter));
}

// Uniform double in [0, 1) built from the top 53 bits; identical across standard libraries.
inline double uniform01(Rng& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, bound) by rejection; identical across standard libraries.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound)
{
    if (bound <= 1) {
        return 0;
    }
    const std::uint64_t limit = (~std::uint64_t{0} / bound) * bound;
    std::uint64_t x = rng();
    while (x >= limit) {
        x = rng();
    }
    return x % bound;
}

// Standard normal variate via Box-Muller; uses two uniforms per call.
inline double standard_normal(Rng& rng)
{
    double u1 = uniform01(rng);
    while (u1 <= 0.0) {
        u1 = uniform01(rng);
    }
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925 * u2);
}

} // namespace tempora
