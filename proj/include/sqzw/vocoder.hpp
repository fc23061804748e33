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

// Whole-model passes: audio grouping, mel conditioning, the training-direction
// pass (audio -> latent, with log-determinant), synthesis (latent -> audio)
// and negative log-likelihood.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sqzw/feature_map.hpp"
#include "sqzw/model.hpp"

namespace sqzw {

// Element (c, t) = wave[t * group + c].
FeatureMap group_audio(std::span<const float> wave, std::size_t group);
std::vector<float> ungroup_audio(const FeatureMap& grouped);

/// Mel conditioning aligned to a window of `length` time steps, shared by all
/// flows. When `upsample_after` is set, each flow's cond_layer runs at mel
/// resolution and is upsampled afterwards.
struct AlignedMel {
  FeatureMap features;
  bool upsample_after = false;
  std::size_t length = 0;
};

AlignedMel align_mel(const FeatureMap& mel, const Model& model, std::size_t length);
// cond_layer output of one flow at `aligned.length` time steps.
FeatureMap flow_conditioning(const AlignedMel& aligned, const Model& model, std::size_t flow);
FeatureMap prepare_conditioning(const FeatureMap& mel, const Model& model, std::size_t flow,
                                std::size_t length);

/// One latent per audio sample. Blocks are the early outputs in emission
/// order followed by the final live channels; each block is a channel-major
/// (channels x length) map flattened into `values`.
struct LatentVector {
  std::size_t length = 0;
  std::vector<std::size_t> block_channels;
  std::vector<float> values;

  std::size_t block_count() const { return block_channels.size(); }
  FeatureMap block(std::size_t i) const;
  static LatentVector from_blocks(std::span<const FeatureMap> blocks);
};

// Block layout for a window of `length` time steps, zero-filled.
LatentVector latent_layout(const ModelConfig& config, std::size_t length);

// z ~ N(0, sigma^2) drawn from CounterRng(seed, window).
LatentVector sample_latent(const ModelConfig& config, std::size_t length, double sigma,
                           std::uint64_t seed, std::uint64_t window);

struct ForwardResult {
  LatentVector z;
  double log_det = 0.0;
};

// Audio -> latent for one window. audio.size() must be a multiple of
// group_size; the mel must cover it after alignment.
ForwardResult forward(std::span<const float> audio, const FeatureMap& mel, const Model& model);

// Latent -> audio for one window (exact inverse of forward).
std::vector<float> inverse(const LatentVector& z, const FeatureMap& mel, const Model& model);

// Synthesizes a whole utterance: the mel is cut into windows of
// config.window_frames frames (the last one zero-padded), each window uses its
// own latent stream, output is trimmed to frames * hop samples. Windows are
// spread over `threads` workers; the result does not depend on the count.
std::vector<float> infer(const FeatureMap& mel, double sigma, const Model& model,
                         std::uint64_t seed, unsigned threads = 1);

// [sum z^2 / (2 sigma^2) - log_det] / audio.size() for one window. The
// constant 0.5 log(2 pi sigma^2) per sample is not included.
double nll(std::span<const float> audio, const FeatureMap& mel, double sigma, const Model& model);

}  // namespace sqzw
