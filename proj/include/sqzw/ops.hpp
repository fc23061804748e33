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

// 1-D neural-network kernels over FeatureMap: dense, dilated and depthwise-
// separable convolution, transposed convolution, nearest upsampling and the
// WaveNet gate. All kernels are pure; multiply-accumulates are reported to the
// innermost active MacCounter on the calling thread.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sqzw/feature_map.hpp"

namespace sqzw {

struct ConvSpec {
  std::size_t kernel_size = 1;
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t dilation = 1;
  std::size_t padding = 0;
  bool separable = false;

  // L_out = L_in + 2p - d(K-1); throws ShapeError when that is < 1.
  std::size_t output_length(std::size_t input_length) const;
  void validate() const;

  // Zero-padded convolution whose output length equals its input length.
  static ConvSpec same(std::size_t kernel, std::size_t in, std::size_t out,
                       std::size_t dilation = 1, bool separable = false);
  static ConvSpec pointwise(std::size_t in, std::size_t out) { return same(1, in, out); }

  friend bool operator==(const ConvSpec&, const ConvSpec&) = default;
};

// Dense layers fill weight [C_out][C_in][K] and bias [C_out]. Separable layers
// fill dw_weight [C_in][K], dw_bias [C_in], pw_weight [C_out][C_in], pw_bias [C_out].
struct ConvWeights {
  std::vector<float> weight;
  std::vector<float> bias;
  std::vector<float> dw_weight;
  std::vector<float> dw_bias;
  std::vector<float> pw_weight;
  std::vector<float> pw_bias;

  static ConvWeights zeros(const ConvSpec& spec);
  void validate(const ConvSpec& spec) const;
  std::size_t parameter_count() const;

  friend bool operator==(const ConvWeights&, const ConvWeights&) = default;
};

struct ConvLayer {
  ConvSpec spec;
  ConvWeights weights;

  static ConvLayer zeros(const ConvSpec& spec) { return {spec, ConvWeights::zeros(spec)}; }
  FeatureMap operator()(const FeatureMap& input) const;

  friend bool operator==(const ConvLayer&, const ConvLayer&) = default;
};

FeatureMap conv1d(const FeatureMap& input, const ConvSpec& spec, const ConvWeights& weights);
FeatureMap depthwise_separable_conv1d(const FeatureMap& input, const ConvSpec& spec,
                                      const ConvWeights& weights);
// Dispatches on spec.separable.
FeatureMap apply_conv(const FeatureMap& input, const ConvSpec& spec, const ConvWeights& weights);

/// Transposed convolution with stride, no padding. Weight layout is
/// [C_in][C_out][K]; output length is (L_in - 1) * stride + K.
struct TransposedConvSpec {
  std::size_t channels_in = 1;
  std::size_t channels_out = 1;
  std::size_t kernel_size = 1;
  std::size_t stride = 1;

  std::size_t output_length(std::size_t input_length) const {
    return (input_length - 1) * stride + kernel_size;
  }
  friend bool operator==(const TransposedConvSpec&, const TransposedConvSpec&) = default;
};

FeatureMap conv_transpose1d(const FeatureMap& input, const TransposedConvSpec& spec,
                            const std::vector<float>& weight, const std::vector<float>& bias);

// Frame t of the output is input frame t / f with f = ceil(target / L_in).
FeatureMap upsample_nearest(const FeatureMap& input, std::size_t target_length);

// tanh(a) * sigmoid(b), element-wise.
FeatureMap gated_activation(const FeatureMap& a, const FeatureMap& b);

// y(:, t) = M x(:, t) for a row-major n x n matrix M.
FeatureMap channel_mix(const FeatureMap& input, const std::vector<float>& matrix);

/// Counts multiply-accumulates executed by the kernels above on this thread
/// while the counter is alive. Counters nest; only the innermost one counts.
class MacCounter {
 public:
  MacCounter();
  ~MacCounter();
  MacCounter(const MacCounter&) = delete;
  MacCounter& operator=(const MacCounter&) = delete;

  std::uint64_t total() const noexcept { return total_; }
  void add(std::uint64_t macs) noexcept { total_ += macs; }

 private:
  std::uint64_t total_ = 0;
  MacCounter* previous_ = nullptr;
};

namespace detail {
void record_macs(std::uint64_t macs) noexcept;
}

}  // namespace sqzw
