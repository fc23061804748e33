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

// Wall-clock synthesis benchmark on synthetic conditioning.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sqzw/feature_map.hpp"
#include "sqzw/model.hpp"

namespace sqzw {

// Deterministic log-mel-like input: N(-5, 2^2) per bin.
FeatureMap synthetic_mel(std::size_t n_mels, std::size_t frames, std::uint64_t seed);

struct BenchOptions {
  double seconds = 10.0;
  unsigned threads = 1;
  std::size_t warmup = 1;
  std::size_t runs = 5;
  std::uint64_t seed = 0;
};

struct BenchResult {
  std::size_t samples = 0;           // per run
  std::vector<double> run_seconds;   // timed runs only
  double median_seconds = 0.0;
  double variance = 0.0;             // of run_seconds, population
  double samples_per_second = 0.0;   // samples / median_seconds
  double real_time_factor = 0.0;     // samples_per_second / sample_rate
};

BenchResult benchmark(const Model& model, const BenchOptions& options = {});

}  // namespace sqzw
