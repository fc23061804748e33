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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sqzw/config.hpp"
#include "sqzw/flow.hpp"
#include "sqzw/ops.hpp"

namespace sqzw {

// Learned mel upsampler (transposed convolution, stride = hop).
struct Upsampler {
  TransposedConvSpec spec;
  std::vector<float> weight;  // [n_mels][n_mels][K]
  std::vector<float> bias;    // [n_mels]

  friend bool operator==(const Upsampler&, const Upsampler&) = default;
};

/// A config plus every learned weight. Immutable once built; share freely
/// across threads.
struct Model {
  ModelConfig config;
  std::vector<FlowStep> flows;
  std::optional<Upsampler> upsampler;

  // Throws on any shape disagreement with `config`.
  void validate() const;

  friend bool operator==(const Model&, const Model&) = default;
};

// Identity mixing matrices, all-zero WN and upsampler: every flow step is the
// identity map.
Model identity_model(const ModelConfig& config);

// Random orthogonal 1x1 matrices (det = +1), conv weights drawn i.i.d. from
// N(0, 0.05^2) except the WN end layers (N(0, 0.01^2)), zero biases.
// Deterministic in (config, seed).
Model random_model(const ModelConfig& config, std::uint64_t seed);

struct TensorInfo {
  std::string name;
  std::vector<std::uint32_t> dims;

  std::size_t numel() const;
  friend bool operator==(const TensorInfo&, const TensorInfo&) = default;
};

// Canonical tensor names and shapes, in file order, computed from the config
// alone.
std::vector<TensorInfo> tensor_schema(const ModelConfig& config);

// Tensors of a built model in canonical order, as views into the model.
struct TensorView {
  TensorInfo info;
  std::span<const float> data;
};
std::vector<TensorView> model_tensors(const Model& model);

inline constexpr std::uint32_t kModelFormatVersion = 1;

std::vector<std::uint8_t> serialize_model(const Model& model);
Model deserialize_model(std::span<const std::uint8_t> bytes);
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace sqzw
