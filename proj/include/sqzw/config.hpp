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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sqzw/flow.hpp"

namespace sqzw {

/// Full architectural description of a vocoder. Serialized field by field, in
/// declaration order, into the model file header.
struct ModelConfig {
  std::uint32_t sample_rate = 22050;
  std::uint32_t group_size = 8;  // C_g: audio samples per time step
  std::uint32_t n_flows = 12;
  std::uint32_t n_early_every = 4;  // 0 disables early outputs
  std::uint32_t n_early_size = 2;
  std::uint32_t wn_layers = 8;
  std::uint32_t wn_width = 256;
  std::uint32_t wn_kernel = 3;
  Variant variant = Variant::kWaveGlow;
  bool cond_before_upsample = false;
  std::uint32_t n_mels = 80;
  std::uint32_t hop = 256;
  // 0 selects nearest-neighbour mel upsampling. Otherwise the mel goes through
  // a learned transposed convolution (kernel = upsample_kernel, stride = hop)
  // and the result is grouped like the audio into n_mels * group_size channels.
  std::uint32_t upsample_kernel = 0;
  std::uint32_t window_frames = 63;  // mel frames per synthesis window

  // Throws ConfigError describing the first violated constraint.
  void validate() const;

  std::size_t window_samples() const { return std::size_t{window_frames} * hop; }
  std::size_t window_length() const { return window_samples() / group_size; }
  // Input channels of every cond_layer.
  std::size_t cond_channels() const;
  bool emits_early_before(std::size_t flow) const;
  // Live channel count entering each flow step (after any early output).
  std::vector<std::size_t> flow_channels() const;
  std::size_t final_channels() const;
  std::size_t early_output_count() const;
  WnShape wn_shape(std::size_t flow) const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

const std::vector<std::string>& preset_names();
// Accepts canonical names ("sw-128l") and spellings like "SW_128L".
ModelConfig preset(std::string_view name);

// `key = value` lines, keys are ModelConfig field names, '#' starts a comment.
// Unlisted keys keep ModelConfig's defaults.
ModelConfig parse_config(std::string_view text);
ModelConfig load_config(const std::filesystem::path& path);
std::string format_config(const ModelConfig& config);

}  // namespace sqzw
