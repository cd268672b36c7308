// Copyright 2026 The tbssim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TBSSIM_RANDOM_H
#define TBSSIM_RANDOM_H

#include <cstdint>
#include <functional>
#include <random>

namespace tbssim {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr uint64_t mix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed for an independent stream identified by (seed, stream, substream).
/// Monte Carlo loops key their generators by point index so results do not
/// depend on how points are distributed over workers.
constexpr uint64_t derive_seed(uint64_t seed, uint64_t stream, uint64_t substream = 0) {
    return mix64(mix64(mix64(seed) ^ stream) ^ (substream * 0xD1B54A32D192ED03ULL));
}

inline Rng make_rng(uint64_t seed, uint64_t stream, uint64_t substream = 0) {
    return Rng(derive_seed(seed, stream, substream));
}

/// Runs body(i) for i in [0, n) on up to `workers` threads. workers == 0
/// uses the hardware concurrency.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)> &body);

}  // namespace tbssim

#endif
