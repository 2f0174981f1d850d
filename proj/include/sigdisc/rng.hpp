/******************************************************************************
 * Copyright 2026 The sigdisc Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * 	http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 * @file rng.hpp Seed derivation. Every random stream in the pipeline is keyed
 * by (root seed, names...) so results do not depend on processing order.
 *
 *****************************************************************************/

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace sigdisc {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a(std::string_view s,
                              std::uint64_t h = 0xcbf29ce484222325ULL)
{
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr std::uint64_t derive_seed(std::uint64_t root, std::string_view a)
{
    return mix64(root ^ mix64(fnv1a(a)));
}

constexpr std::uint64_t derive_seed(std::uint64_t root, std::string_view a,
                                    std::string_view b)
{
    // The separator byte keeps ("ab","c") and ("a","bc") apart.
    return mix64(derive_seed(root, a) ^ mix64(fnv1a(b, fnv1a("\x1f"))));
}

constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index)
{
    return mix64(mix64(root) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

}  // namespace sigdisc
