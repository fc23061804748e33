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

#include "sqzw/bench.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

#include "sqzw/analyzer.hpp"
#include "sqzw/errors.hpp"
#include "sqzw/rng.hpp"
#include "sqzw/vocoder.hpp"

namespace sqzw {

FeatureMap synthetic_mel(std::size_t n_mels, std::size_t frames, std::uint64_t seed) {
  FeatureMap mel(n_mels, frames);
  const CounterRng rng(seed, 0x6D656CULL);
  auto data = mel.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = static_cast<float>(-5.0 + 2.0 * rng.gaussian(i));
  }
  return mel;
}

BenchResult benchmark(const Model& model, const BenchOptions& options) {
  if (options.runs == 0) throw ConfigError("benchmark needs at least one timed run");
  const ModelConfig& cfg = model.config;
  const FeatureMap mel =
      synthetic_mel(cfg.n_mels, frames_for_seconds(cfg, options.seconds), options.seed);

  BenchResult r;
  using Clock = std::chrono::steady_clock;
  for (std::size_t i = 0; i < options.warmup + options.runs; ++i) {
    const auto start = Clock::now();
    const std::vector<float> audio = infer(mel, 1.0, model, options.seed, options.threads);
    const std::chrono::duration<double> elapsed = Clock::now() - start;
    r.samples = audio.size();
    if (i >= options.warmup) r.run_seconds.push_back(elapsed.count());
  }

  std::vector<double> sorted = r.run_seconds;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  r.median_seconds = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(n);
  for (const double s : sorted) r.variance += (s - mean) * (s - mean);
  r.variance /= static_cast<double>(n);
  r.samples_per_second = static_cast<double>(r.samples) / r.median_seconds;
  r.real_time_factor = r.samples_per_second / cfg.sample_rate;
  return r;
}

}  // namespace sqzw
