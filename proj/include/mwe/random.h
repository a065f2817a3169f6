/*
 * Copyright 2026 The MWE Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef MWE_RANDOM_H_
#define MWE_RANDOM_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace mwe {

using Rng = std::mt19937_64;

// splitmix64 finalizer.
inline std::uint64_t MixBits(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives an independent seed for a named stream, so every stage can draw
// from the one global seed without sharing a generator.
inline std::uint64_t DeriveSeed(std::uint64_t seed, std::string_view stream,
                                std::uint64_t index = 0) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : stream) {
    h = (h ^ c) * 0x100000001b3ULL;
  }
  return MixBits(MixBits(seed ^ h) + index);
}

// Uniform integer in [0, n). n must be positive.
template <typename Int>
Int UniformIndex(Rng& rng, Int n) {
  return std::uniform_int_distribution<Int>(0, n - 1)(rng);
}

// Uniform real in [0, 1).
inline double UniformUnit(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace mwe

#endif  // MWE_RANDOM_H_
