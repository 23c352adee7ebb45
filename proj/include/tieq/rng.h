// Copyright 2026 The tieq Authors
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

#ifndef TIEQ_RNG_H
#define TIEQ_RNG_H

#include <cstdint>
#include <initializer_list>
#include <random>

namespace tieq {

using Rng = std::mt19937_64;

/// Derives an independent stream seed from a master seed and a tuple of stream coordinates
/// (sweep point, frame index, plane, ...). The mapping is a fixed SplitMix64 chain, so a
/// given (master, coordinates) pair yields the same stream on every run and every thread.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> coordinates);

inline Rng make_rng(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    return Rng(seq);
}

}  // namespace tieq

#endif
