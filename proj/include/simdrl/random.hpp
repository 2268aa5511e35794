// Copyright 2026 The simdrl Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace simdrl {

/// Generator used everywhere. Reproducibility holds for a given standard
/// library build.
using Rng = std::mt19937_64;

/// Stream splitting: the seed of a derived stream is a SplitMix64 hash of
/// (base seed, index, FNV-1a(purpose)). Streams for distinct
/// (index, purpose) pairs are statistically independent, and adding a new
/// purpose never perturbs existing ones.
///
/// Conventions used by the harness and trainer:
///   (seed, trial, "channel")       UE placement and SIM-to-UE fading of a trial
///   (seed, trial, "direct")        BS-to-UE fading of the digital benchmark
///   (seed, trial, "<scheme>")      scheme-private randomness
///   (stream, episode, "episode")   per-episode placement/fading in training
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index, std::string_view purpose);

inline Rng make_stream(std::uint64_t seed, std::uint64_t index, std::string_view purpose) {
  return Rng(derive_seed(seed, index, purpose));
}

/// Draws a 64-bit seed from `rng` for handing to a child component.
inline std::uint64_t split(Rng& rng) { return rng(); }

}  // namespace simdrl
