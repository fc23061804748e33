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

#include "sqzw/flow.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "sqzw/errors.hpp"

namespace sqzw {

const char* to_string(Variant v) {
  return v == Variant::kWaveGlow ? "waveglow" : "squeezewave";
}

double invert_matrix(const std::vector<double>& matrix, std::size_t n,
                     std::vector<double>* inverse) {
  if (n == 0 || matrix.size() != n * n) throw ShapeError("invert_matrix: matrix is not n x n");
  std::vector<double> a = matrix;
  std::vector<double> inv(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) inv[i * n + i] = 1.0;

  double log_det = 0.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
    }
    const double p = a[pivot * n + col];
    if (p == 0.0) throw InvertibilityError("matrix is singular (zero pivot in column " +
                                           std::to_string(col) + ")");
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(a[pivot * n + j], a[col * n + j]);
        std::swap(inv[pivot * n + j], inv[col * n + j]);
      }
    }
    log_det += std::log(std::abs(p));
    for (std::size_t j = 0; j < n; ++j) {
      a[col * n + j] /= p;
      inv[col * n + j] /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r * n + col];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a[r * n + j] -= f * a[col * n + j];
        inv[r * n + j] -= f * inv[col * n + j];
      }
    }
  }
  if (log_det <= std::log(InvertiblePointwise::kMinAbsDet)) {
    throw InvertibilityError("matrix is numerically singular (log|det| = " +
                             std::to_string(log_det) + ")");
  }
  if (inverse != nullptr) *inverse = std::move(inv);
  return log_det;
}

InvertiblePointwise::InvertiblePointwise(std::size_t n, std::vector<float> matrix)
    : n_(n), matrix_(std::move(matrix)) {
  if (n_ == 0 || matrix_.size() != n_ * n_) {
    throw ShapeError("1x1 weight has " + std::to_string(matrix_.size()) + " values, expected " +
                     std::to_string(n_) + "x" + std::to_string(n_));
  }
  std::vector<double> inv;
  log_abs_det_ = invert_matrix(std::vector<double>(matrix_.begin(), matrix_.end()), n_, &inv);
  inverse_.assign(inv.begin(), inv.end());
}

InvertiblePointwise InvertiblePointwise::identity(std::size_t n) {
  std::vector<float> m(n * n, 0.0f);
  for (std::size_t i = 0; i < n; ++i) m[i * n + i] = 1.0f;
  return InvertiblePointwise(n, std::move(m));
}

Transformed inv1x1_forward(const FeatureMap& x, const InvertiblePointwise& w) {
  if (x.channels() != w.size()) {
    throw ShapeError("1x1 conv: input has " + std::to_string(x.channels()) +
                     " channels, matrix is " + std::to_string(w.size()));
  }
  return {channel_mix(x, w.matrix()), static_cast<double>(x.length()) * w.log_abs_det()};
}

FeatureMap inv1x1_inverse(const FeatureMap& y, const InvertiblePointwise& w) {
  if (y.channels() != w.size()) {
    throw ShapeError("1x1 conv inverse: input has " + std::to_string(y.channels()) +
                     " channels, matrix is " + std::to_string(w.size()));
  }
  return channel_mix(y, w.inverse());
}

std::size_t WnShape::dilation(std::size_t layer) const {
  return variant == Variant::kWaveGlow ? std::size_t{1} << layer : 1;
}

ConvSpec WnShape::start_spec() const { return ConvSpec::pointwise(flow_channels / 2, width); }

ConvSpec WnShape::in_layer_spec(std::size_t layer) const {
  return ConvSpec::same(kernel, width, 2 * width, dilation(layer),
                        variant == Variant::kSqueezeWave);
}

ConvSpec WnShape::cond_spec() const {
  return ConvSpec::pointwise(cond_channels, 2 * width * layers);
}

ConvSpec WnShape::res_skip_spec(std::size_t layer) const {
  const bool split = variant == Variant::kWaveGlow && layer + 1 < layers;
  return ConvSpec::pointwise(width, split ? 2 * width : width);
}

ConvSpec WnShape::end_spec() const { return ConvSpec::pointwise(width, flow_channels); }

void WnShape::validate() const {
  if (flow_channels < 2 || flow_channels % 2 != 0) {
    throw ShapeError("WN flow channel count must be even and >= 2, got " +
                     std::to_string(flow_channels));
  }
  if (width == 0 || layers == 0 || cond_channels == 0) {
    throw ShapeError("WN width, layer count and cond channels must be positive");
  }
  if (kernel == 0 || kernel % 2 == 0) throw ShapeError("WN kernel must be odd");
  if (variant == Variant::kWaveGlow && layers > 30) throw ShapeError("too many dilated layers");
}

WnWeights WnWeights::zeros(const WnShape& shape) {
  shape.validate();
  WnWeights w;
  w.start = ConvLayer::zeros(shape.start_spec());
  for (std::size_t i = 0; i < shape.layers; ++i) {
    w.in_layers.push_back(ConvLayer::zeros(shape.in_layer_spec(i)));
    w.res_skip.push_back(ConvLayer::zeros(shape.res_skip_spec(i)));
  }
  w.cond = ConvLayer::zeros(shape.cond_spec());
  w.end = ConvLayer::zeros(shape.end_spec());
  return w;
}

namespace {

void check_layer(const ConvLayer& layer, const ConvSpec& expected, const std::string& name) {
  if (!(layer.spec == expected)) {
    throw ShapeError("WN layer " + name + " has spec K=" + std::to_string(layer.spec.kernel_size) +
                     " " + std::to_string(layer.spec.in_channels) + "->" +
                     std::to_string(layer.spec.out_channels) + " d=" +
                     std::to_string(layer.spec.dilation) +
                     (layer.spec.separable ? " separable" : " dense") + ", expected K=" +
                     std::to_string(expected.kernel_size) + " " +
                     std::to_string(expected.in_channels) + "->" +
                     std::to_string(expected.out_channels) + " d=" +
                     std::to_string(expected.dilation) +
                     (expected.separable ? " separable" : " dense"));
  }
  layer.weights.validate(layer.spec);
}

}  // namespace

void WnWeights::validate(const WnShape& shape) const {
  shape.validate();
  if (in_layers.size() != shape.layers || res_skip.size() != shape.layers) {
    throw ShapeError("WN has " + std::to_string(in_layers.size()) + " in_layers and " +
                     std::to_string(res_skip.size()) + " res_skip layers, expected " +
                     std::to_string(shape.layers));
  }
  check_layer(start, shape.start_spec(), "start");
  for (std::size_t i = 0; i < shape.layers; ++i) {
    check_layer(in_layers[i], shape.in_layer_spec(i), "in" + std::to_string(i));
    check_layer(res_skip[i], shape.res_skip_spec(i), "res_skip" + std::to_string(i));
  }
  check_layer(cond, shape.cond_spec(), "cond");
  check_layer(end, shape.end_spec(), "end");
}

WnShape WnWeights::implied_shape(Variant variant) const {
  WnShape s;
  s.variant = variant;
  s.flow_channels = end.spec.out_channels;
  s.width = start.spec.out_channels;
  s.layers = in_layers.size();
  s.kernel = in_layers.empty() ? 1 : in_layers.front().spec.kernel_size;
  s.cond_channels = cond.spec.in_channels;
  return s;
}

namespace {

void add_rows(FeatureMap& dst, const FeatureMap& src, std::size_t src_first) {
  const std::size_t n = dst.size();
  const float* s = src.data().data() + src_first * src.length();
  float* d = dst.data().data();
  for (std::size_t i = 0; i < n; ++i) d[i] += s[i];
}

}  // namespace

CouplingCoeffs wn_from_cond(const FeatureMap& x_a, const FeatureMap& cond,
                            const WnWeights& weights, Variant variant) {
  const WnShape shape = weights.implied_shape(variant);
  weights.validate(shape);
  if (x_a.channels() != shape.flow_channels / 2) {
    throw ShapeError("WN input has " + std::to_string(x_a.channels()) + " channels, expected " +
                     std::to_string(shape.flow_channels / 2));
  }
  const std::size_t width = shape.width, length = x_a.length();
  if (cond.channels() != 2 * width * shape.layers || cond.length() != length) {
    throw ShapeError("WN conditioning is " + std::to_string(cond.channels()) + "x" +
                     std::to_string(cond.length()) + ", expected " +
                     std::to_string(2 * width * shape.layers) + "x" + std::to_string(length));
  }

  FeatureMap h = weights.start(x_a);
  FeatureMap skip(width, length);
  FeatureMap gate(width, length);
  for (std::size_t i = 0; i < shape.layers; ++i) {
    FeatureMap acts = weights.in_layers[i](h);
    add_rows(acts, cond, 2 * width * i);
    const float* a = acts.data().data();
    const float* b = a + width * length;
    float* g = gate.data().data();
    for (std::size_t k = 0; k < width * length; ++k) {
      g[k] = std::tanh(a[k]) / (1.0f + std::exp(-b[k]));
    }
    const FeatureMap r = weights.res_skip[i](gate);
    const bool last = i + 1 == shape.layers;
    if (last) {
      add_rows(skip, r, 0);
    } else if (variant == Variant::kWaveGlow) {
      add_rows(h, r, 0);
      add_rows(skip, r, width);
    } else {
      add_rows(h, r, 0);
      add_rows(skip, r, 0);
    }
  }
  const FeatureMap out = weights.end(skip);
  const std::size_t half = shape.flow_channels / 2;
  return {out.slice_channels(0, half), out.slice_channels(half, half)};
}

CouplingCoeffs wn(const FeatureMap& x_a, const FeatureMap& mel, const WnWeights& weights,
                  Variant variant) {
  if (mel.length() != x_a.length()) {
    throw ShapeError("WN: mel length " + std::to_string(mel.length()) +
                     " does not match audio length " + std::to_string(x_a.length()));
  }
  return wn_from_cond(x_a, weights.cond(mel), weights, variant);
}

namespace {

void check_coeffs(const FeatureMap& x, const CouplingCoeffs& c) {
  if (!x.same_shape(c.log_s) || !x.same_shape(c.t)) {
    throw ShapeError("coupling: coefficients do not match the " + std::to_string(x.channels()) +
                     "x" + std::to_string(x.length()) + " input");
  }
}

}  // namespace

Transformed coupling_forward(const FeatureMap& x_b, const CouplingCoeffs& coeffs) {
  check_coeffs(x_b, coeffs);
  FeatureMap out(x_b.channels(), x_b.length());
  const auto x = x_b.data();
  const auto ls = coeffs.log_s.data();
  const auto t = coeffs.t.data();
  auto o = out.data();
  double log_det = 0.0;
  for (std::size_t i = 0; i < o.size(); ++i) {
    o[i] = x[i] * std::exp(ls[i]) + t[i];
    log_det += ls[i];
  }
  return {std::move(out), log_det};
}

FeatureMap coupling_inverse(const FeatureMap& y_b, const CouplingCoeffs& coeffs) {
  check_coeffs(y_b, coeffs);
  FeatureMap out(y_b.channels(), y_b.length());
  const auto y = y_b.data();
  const auto ls = coeffs.log_s.data();
  const auto t = coeffs.t.data();
  auto o = out.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = (y[i] - t[i]) * std::exp(-ls[i]);
  return out;
}

Transformed flow_step_forward(const FeatureMap& x, const FeatureMap& cond, const FlowStep& step,
                              Variant variant) {
  Transformed mixed = inv1x1_forward(x, step.mix);
  const std::size_t half = x.channels() / 2;
  FeatureMap x_a = mixed.value.slice_channels(0, half);
  const CouplingCoeffs coeffs = wn_from_cond(x_a, cond, step.wn, variant);
  Transformed coupled = coupling_forward(mixed.value.slice_channels(half, half), coeffs);
  return {concat_channels(x_a, coupled.value), mixed.log_det + coupled.log_det};
}

FeatureMap flow_step_inverse(const FeatureMap& y, const FeatureMap& cond, const FlowStep& step,
                             Variant variant) {
  if (y.channels() != step.mix.size()) {
    throw ShapeError("flow step inverse: input has " + std::to_string(y.channels()) +
                     " channels, step expects " + std::to_string(step.mix.size()));
  }
  const std::size_t half = y.channels() / 2;
  FeatureMap x_a = y.slice_channels(0, half);
  const CouplingCoeffs coeffs = wn_from_cond(x_a, cond, step.wn, variant);
  FeatureMap x_b = coupling_inverse(y.slice_channels(half, half), coeffs);
  return inv1x1_inverse(concat_channels(x_a, x_b), step.mix);
}

}  // namespace sqzw
