// Copyright 2026 The flowprint Authors
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

#pragma once

#include <cstdint>
#include <random>

namespace flowprint {

using Rng = std::mt19937_64;

// Independent random streams inside one trial. Adding a role never perturbs
// the streams of existing roles.
enum class StreamRole : std::uint64_t {
  kInputTraffic = 1,
  kWillieNull = 2,
  kSlowdown = 3,
  kInterference = 4,
  kService = 5,
  kSelection = 6,
  kCodeword = 7,
  kExcessRelease = 8,
  kQueue = 9,
  kCalibration = 10,
};

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed derivation is index-based so results do not depend on scheduling.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                    std::uint64_t b = 0,
                                    std::uint64_t c = 0) noexcept {
  std::uint64_t h = mix64(master);
  h = mix64(h ^ a);
  h = mix64(h ^ (b + 0x632be59bd9b4e019ULL));
  h = mix64(h ^ (c + 0x85157af5ULL));
  return h;
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                                    std::uint64_t flow,
                                    StreamRole role) noexcept {
  return derive_seed(master, index, flow, static_cast<std::uint64_t>(role));
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

}  // namespace flowprint
