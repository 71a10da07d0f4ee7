// Copyright 2026 The IntDiff Authors
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

#ifndef INTDIFF__RNG_HPP_
#define INTDIFF__RNG_HPP_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace intdiff
{

/// SplitMix64 finalizer. Used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Fold a list of identifiers (seed, epoch, index, ...) into one 64-bit seed.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts);

/**
 * @brief Reproducible random source.
 *
 * The engine is std::mt19937_64, whose output sequence is fixed by the C++
 * standard. Distributions are implemented here rather than taken from
 * <random> because the standard distributions are not required to be
 * identical across library implementations:
 *  - uniform():  top 53 bits of one engine output, scaled to [0, 1).
 *  - uniform_int(n): rejection sampling on the raw 64-bit output.
 *  - normal():  Box-Muller, both variates used, second one cached.
 */
class Rng
{
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_int(std::uint64_t n);
  double normal();

private:
  std::mt19937_64 engine_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace intdiff

#endif  // INTDIFF__RNG_HPP_
