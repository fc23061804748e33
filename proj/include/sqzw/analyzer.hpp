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

// Analytical cost model: multiply-accumulates and parameters of every layer of
// a ModelConfig, without building the model.
//
// One MAC is one multiply-accumulate of a convolution or channel mix. Biases,
// activations, gates and nearest-neighbour upsampling cost nothing.
// "Synthesizing s seconds" means running the model on the mel of an s-second
// clip: floor(s * sample_rate / hop) + 1 centred frames, producing
// frames * hop samples.

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sqzw/config.hpp"
#include "sqzw/ops.hpp"

namespace sqzw {

enum class LayerClass : std::uint8_t {
  kStart,
  kInLayer,
  kCondLayer,
  kResSkipLayer,
  kEnd,
  kInv1x1,
  kUpsample,
};
inline constexpr std::size_t kLayerClassCount = 7;

const char* to_string(LayerClass c);

struct LayerCost {
  std::string name;
  LayerClass layer_class = LayerClass::kStart;
  std::uint64_t macs = 0;
  std::uint64_t params = 0;
};

struct CostReport {
  std::vector<LayerCost> layers;
  std::array<std::uint64_t, kLayerClassCount> class_macs{};
  std::array<std::uint64_t, kLayerClassCount> class_params{};
  std::uint64_t total_macs = 0;
  std::uint64_t total_params = 0;
  std::size_t frames = 0;
  double seconds = 0.0;
  double gmacs_per_second = 0.0;

  std::uint64_t macs(LayerClass c) const { return class_macs[static_cast<std::size_t>(c)]; }
  std::uint64_t params(LayerClass c) const { return class_params[static_cast<std::size_t>(c)]; }
  // Fraction of total MACs spent in class c.
  double share(LayerClass c) const;
};

// K * C_in * C_out * L_out.
std::uint64_t macs_dense_conv(const ConvSpec& spec, std::size_t output_length);
// K * C_in * L_in + C_in * C_out * L_in.
std::uint64_t macs_separable_conv(const ConvSpec& spec, std::size_t input_length);
std::uint64_t conv_params(const ConvSpec& spec);

std::size_t frames_for_seconds(const ModelConfig& config, double seconds);

// Cost of synthesizing from a mel of `frames` frames; exactly linear in frames.
CostReport analyze_frames(const ModelConfig& config, std::size_t frames);
CostReport analyze(const ModelConfig& config, double seconds);

std::uint64_t count_params(const ModelConfig& config);

// a.total_macs / b.total_macs.
double compare(const CostReport& a, const CostReport& b);

std::string format_table(const CostReport& report);
// One CSV record per layer: name,class,macs,params.
std::string format_records(const CostReport& report);

}  // namespace sqzw
