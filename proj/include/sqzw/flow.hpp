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

// Building blocks of one flow step: invertible 1x1 channel mixing, the WN
// coupling network (WaveGlow and SqueezeWave layouts) and the affine coupling.
//
// Split convention used in both directions: x_a = channels [0, c/2),
// x_b = channels [c/2, c). WN output channels [0, c/2) are log s, the rest t.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sqzw/feature_map.hpp"
#include "sqzw/ops.hpp"

namespace sqzw {

enum class Variant : std::uint8_t { kWaveGlow = 0, kSqueezeWave = 1 };

const char* to_string(Variant v);

/// n x n channel-mixing matrix with its inverse and log|det| cached at
/// construction. Matrices with |det| <= 1e-12 are rejected.
class InvertiblePointwise {
 public:
  static constexpr double kMinAbsDet = 1e-12;

  InvertiblePointwise(std::size_t n, std::vector<float> matrix);
  static InvertiblePointwise identity(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  const std::vector<float>& matrix() const noexcept { return matrix_; }
  const std::vector<float>& inverse() const noexcept { return inverse_; }
  double log_abs_det() const noexcept { return log_abs_det_; }

  friend bool operator==(const InvertiblePointwise& a, const InvertiblePointwise& b) {
    return a.n_ == b.n_ && a.matrix_ == b.matrix_;
  }

 private:
  std::size_t n_;
  std::vector<float> matrix_;
  std::vector<float> inverse_;
  double log_abs_det_ = 0.0;
};

// Partial-pivot Gaussian elimination on a row-major n x n matrix. Returns
// log|det|; fills `inverse` (row-major) when non-null. Throws
// InvertibilityError when |det| <= InvertiblePointwise::kMinAbsDet.
double invert_matrix(const std::vector<double>& matrix, std::size_t n,
                     std::vector<double>* inverse);

struct Transformed {
  FeatureMap value;
  double log_det = 0.0;
};

Transformed inv1x1_forward(const FeatureMap& x, const InvertiblePointwise& w);
FeatureMap inv1x1_inverse(const FeatureMap& y, const InvertiblePointwise& w);

/// Layer geometry of one WN network; every layer shape follows from these.
struct WnShape {
  Variant variant = Variant::kWaveGlow;
  std::size_t flow_channels = 2;  // c_flow; WN input is c_flow / 2
  std::size_t width = 8;          // W_wn
  std::size_t layers = 1;
  std::size_t kernel = 3;
  std::size_t cond_channels = 1;  // input channels of cond_layer

  std::size_t dilation(std::size_t layer) const;
  ConvSpec start_spec() const;
  ConvSpec in_layer_spec(std::size_t layer) const;
  ConvSpec cond_spec() const;
  ConvSpec res_skip_spec(std::size_t layer) const;
  ConvSpec end_spec() const;
  void validate() const;

  friend bool operator==(const WnShape&, const WnShape&) = default;
};

struct WnWeights {
  ConvLayer start;
  std::vector<ConvLayer> in_layers;
  ConvLayer cond;
  std::vector<ConvLayer> res_skip;
  ConvLayer end;

  static WnWeights zeros(const WnShape& shape);
  // Throws ShapeError naming the first layer that disagrees with `shape`.
  void validate(const WnShape& shape) const;
  // Geometry implied by the stored layers for the given variant.
  WnShape implied_shape(Variant variant) const;

  friend bool operator==(const WnWeights&, const WnWeights&) = default;
};

struct CouplingCoeffs {
  FeatureMap log_s;
  FeatureMap t;
};

// WN network on pre-computed conditioning: `cond` is the cond_layer output,
// 2 * W_wn * layers channels, aligned to x_a's length.
CouplingCoeffs wn_from_cond(const FeatureMap& x_a, const FeatureMap& cond,
                            const WnWeights& weights, Variant variant);

// WN network applying its own cond_layer to an already aligned mel.
CouplingCoeffs wn(const FeatureMap& x_a, const FeatureMap& mel, const WnWeights& weights,
                  Variant variant);

Transformed coupling_forward(const FeatureMap& x_b, const CouplingCoeffs& coeffs);
FeatureMap coupling_inverse(const FeatureMap& y_b, const CouplingCoeffs& coeffs);

struct FlowStep {
  InvertiblePointwise mix;
  WnWeights wn;

  friend bool operator==(const FlowStep&, const FlowStep&) = default;
};

// `cond` is the step's conditioning (cond_layer output aligned to x).
Transformed flow_step_forward(const FeatureMap& x, const FeatureMap& cond, const FlowStep& step,
                              Variant variant);
FeatureMap flow_step_inverse(const FeatureMap& y, const FeatureMap& cond, const FlowStep& step,
                             Variant variant);

}  // namespace sqzw
