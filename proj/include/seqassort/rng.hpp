// Copyright 2025 The seqassort Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <vector>

namespace seqassort {

// splitmix64 step (Steele/Lea/Flood). Small state, trivially seedable, and
// platform-independent, which keeps every sampled quantity byte-reproducible.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_keys(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a + 0x9E3779B97F4A7C15ULL * (b + 1);
  return splitmix64(s);
}

// Independent deterministic stream addressed by (seed, trial, slot). Item
// slots are the item ids; auxiliary consumers use the reserved tags below so
// adding parallelism or reordering draws can never change what is sampled.
inline constexpr std::uint64_t kOrderStreamTag = 1u << 20;
inline constexpr std::uint64_t kCoinStreamTag = (1u << 20) + 1;

class RngStream {
 public:
  explicit RngStream(std::uint64_t state) : state_(state) {}
  RngStream(std::uint64_t seed, std::uint64_t trial, std::uint64_t slot)
      : state_(mix_keys(mix_keys(seed, trial), slot)) {}

  std::uint64_t next_u64() { return splitmix64(state_); }

  // Uniform in [0,1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [0, n) via the fixed-point multiply reduction.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

 private:
  std::uint64_t state_;
};

// In-place Fisher-Yates shuffle driven by the given stream.
template <typename T>
void shuffle(std::vector<T>& v, RngStream& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace seqassort
