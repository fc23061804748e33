// Copyright 2026 The sqzw Authors
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

#include <cstdint>

namespace sqzw {

/// Counter-based generator: every draw is a pure function of
/// (seed, stream, counter), so any slice of a random sequence can be produced
/// independently and in any order.
///
///   key        = mix(seed + 0x9E3779B97F4A7C15 * (stream + 1))
///   bits(n)    = mix(key ^ mix(n + 0x9E3779B97F4A7C15))
///   uniform(n) = ((bits(n) >> 11) + 1) * 2^-53            in (0, 1]
///   gaussian(i) = sqrt(-2 ln uniform(2i)) * cos(2 pi uniform(2i + 1))
///
/// where mix is the SplitMix64 finalizer. Only the cosine branch of
/// Box-Muller is used so that sample i never depends on sample i ^ 1.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  std::uint64_t bits(std::uint64_t counter) const noexcept;
  double uniform(std::uint64_t counter) const noexcept;
  double gaussian(std::uint64_t index) const noexcept;

  static std::uint64_t mix(std::uint64_t z) noexcept;

 private:
  std::uint64_t key_;
};

}  // namespace sqzw
