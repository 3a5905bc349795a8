// Copyright (c) 2026 The nvsr Authors. All Rights Reserved.
//
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

// Draws defined on the raw 64-bit Mersenne Twister output so that results do
// not depend on the standard library's distribution implementations.

#include <cstdint>
#include <random>
#include <vector>

namespace nvsr {

using Rng = std::mt19937_64;

/// Uniform on [lo, hi); exactly lo when lo == hi.
inline double uniform_draw(Rng& rng, double lo, double hi) {
  if (lo == hi) return lo;
  const double u = double(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

/// Index in [0, n). The modulo bias is irrelevant for the small n used here.
inline std::size_t index_draw(Rng& rng, std::size_t n) { return std::size_t(rng() % n); }

/// Fisher-Yates over 0..n-1.
inline std::vector<std::size_t> shuffled_indices(Rng& rng, std::size_t n) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[index_draw(rng, i)]);
  return order;
}

/// Decorrelated stream seed for (seed, stream); splitmix64 finalizer.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace nvsr
