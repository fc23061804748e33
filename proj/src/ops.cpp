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

#include "sqzw/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>

#include "sqzw/errors.hpp"

namespace sqzw {

namespace {

using RowMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixView = Eigen::Map<RowMatrix>;
using ConstStridedView =
    Eigen::Map<const RowMatrix, Eigen::Unaligned, Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>>;
using ConstRowsView = Eigen::Map<const RowMatrix, Eigen::Unaligned, Eigen::OuterStride<>>;

thread_local MacCounter* active_counter = nullptr;

std::string shape_str(std::size_t c, std::size_t l) {
  return std::to_string(c) + "x" + std::to_string(l);
}

void expect_size(const std::vector<float>& v, std::size_t n, const char* what) {
  if (v.size() != n) {
    throw ShapeError(std::string(what) + " has " + std::to_string(v.size()) +
                     " values, expected " + std::to_string(n));
  }
}

// Input copied into a zero-padded buffer of row length L + 2p. Returns the
// input itself when p == 0.
struct Padded {
  std::vector<float> storage;
  const float* data;
  std::size_t row_length;
};

Padded pad_input(const FeatureMap& input, std::size_t padding) {
  if (padding == 0) return {{}, input.data().data(), input.length()};
  const std::size_t row = input.length() + 2 * padding;
  Padded p{std::vector<float>(input.channels() * row, 0.0f), nullptr, row};
  for (std::size_t c = 0; c < input.channels(); ++c) {
    const auto src = input.row(c);
    std::copy(src.begin(), src.end(), p.storage.begin() + static_cast<std::ptrdiff_t>(c * row + padding));
  }
  p.data = p.storage.data();
  return p;
}

void check_input(const FeatureMap& input, const ConvSpec& spec) {
  if (input.channels() != spec.in_channels) {
    throw ShapeError("conv input has " + std::to_string(input.channels()) +
                     " channels, layer expects " + std::to_string(spec.in_channels));
  }
}

}  // namespace

std::size_t ConvSpec::output_length(std::size_t input_length) const {
  const auto span = static_cast<long long>(dilation * (kernel_size - 1));
  const auto out = static_cast<long long>(input_length + 2 * padding) - span;
  if (out < 1) {
    throw ShapeError("conv output length " + std::to_string(out) + " < 1 (L_in=" +
                     std::to_string(input_length) + ", K=" + std::to_string(kernel_size) +
                     ", d=" + std::to_string(dilation) + ", p=" + std::to_string(padding) + ")");
  }
  return static_cast<std::size_t>(out);
}

void ConvSpec::validate() const {
  if (kernel_size == 0 || kernel_size % 2 == 0) {
    throw ShapeError("kernel size must be odd and positive, got " + std::to_string(kernel_size));
  }
  if (in_channels == 0 || out_channels == 0) throw ShapeError("conv channel counts must be positive");
  if (dilation == 0) throw ShapeError("dilation must be >= 1");
}

ConvSpec ConvSpec::same(std::size_t kernel, std::size_t in, std::size_t out,
                        std::size_t dilation, bool separable) {
  ConvSpec s{kernel, in, out, dilation, dilation * (kernel - 1) / 2, separable};
  s.validate();
  return s;
}

ConvWeights ConvWeights::zeros(const ConvSpec& spec) {
  spec.validate();
  ConvWeights w;
  const auto k = spec.kernel_size, ci = spec.in_channels, co = spec.out_channels;
  if (spec.separable) {
    w.dw_weight.assign(ci * k, 0.0f);
    w.dw_bias.assign(ci, 0.0f);
    w.pw_weight.assign(co * ci, 0.0f);
    w.pw_bias.assign(co, 0.0f);
  } else {
    w.weight.assign(co * ci * k, 0.0f);
    w.bias.assign(co, 0.0f);
  }
  return w;
}

void ConvWeights::validate(const ConvSpec& spec) const {
  spec.validate();
  const auto k = spec.kernel_size, ci = spec.in_channels, co = spec.out_channels;
  if (spec.separable) {
    if (!weight.empty() || !bias.empty()) throw ShapeError("separable layer carries dense weights");
    expect_size(dw_weight, ci * k, "depthwise weight");
    expect_size(dw_bias, ci, "depthwise bias");
    expect_size(pw_weight, co * ci, "pointwise weight");
    expect_size(pw_bias, co, "pointwise bias");
  } else {
    if (!dw_weight.empty() || !pw_weight.empty()) throw ShapeError("dense layer carries separable weights");
    expect_size(weight, co * ci * k, "conv weight");
    expect_size(bias, co, "conv bias");
  }
}

std::size_t ConvWeights::parameter_count() const {
  return weight.size() + bias.size() + dw_weight.size() + dw_bias.size() + pw_weight.size() +
         pw_bias.size();
}

FeatureMap ConvLayer::operator()(const FeatureMap& input) const {
  return apply_conv(input, spec, weights);
}

FeatureMap conv1d(const FeatureMap& input, const ConvSpec& spec, const ConvWeights& weights) {
  if (spec.separable) throw ShapeError("conv1d called with a separable spec");
  weights.validate(spec);
  check_input(input, spec);
  const std::size_t k_size = spec.kernel_size, c_in = spec.in_channels, c_out = spec.out_channels;
  const std::size_t l_out = spec.output_length(input.length());

  FeatureMap out(c_out, l_out);
  for (std::size_t o = 0; o < c_out; ++o) {
    auto row = out.row(o);
    std::fill(row.begin(), row.end(), weights.bias[o]);
  }
  const Padded x = pad_input(input, spec.padding);
  MatrixView y(out.data().data(), static_cast<Eigen::Index>(c_out), static_cast<Eigen::Index>(l_out));
  for (std::size_t k = 0; k < k_size; ++k) {
    ConstStridedView w_k(weights.weight.data() + k, static_cast<Eigen::Index>(c_out),
                         static_cast<Eigen::Index>(c_in),
                         Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>(
                             static_cast<Eigen::Index>(c_in * k_size),
                             static_cast<Eigen::Index>(k_size)));
    ConstRowsView x_k(x.data + k * spec.dilation, static_cast<Eigen::Index>(c_in),
                      static_cast<Eigen::Index>(l_out),
                      Eigen::OuterStride<>(static_cast<Eigen::Index>(x.row_length)));
    y.noalias() += w_k * x_k;
  }
  detail::record_macs(static_cast<std::uint64_t>(k_size) * c_in * c_out * l_out);
  return out;
}

FeatureMap depthwise_separable_conv1d(const FeatureMap& input, const ConvSpec& spec,
                                      const ConvWeights& weights) {
  if (!spec.separable) throw ShapeError("depthwise_separable_conv1d called with a dense spec");
  weights.validate(spec);
  check_input(input, spec);
  const std::size_t k_size = spec.kernel_size, c_in = spec.in_channels, c_out = spec.out_channels;
  const std::size_t l_out = spec.output_length(input.length());
  const Padded x = pad_input(input, spec.padding);

  FeatureMap mid(c_in, l_out);
  for (std::size_t c = 0; c < c_in; ++c) {
    const float* src = x.data + c * x.row_length;
    const float* taps = weights.dw_weight.data() + c * k_size;
    auto dst = mid.row(c);
    for (std::size_t t = 0; t < l_out; ++t) {
      double acc = weights.dw_bias[c];
      for (std::size_t k = 0; k < k_size; ++k) {
        acc += static_cast<double>(taps[k]) * src[t + k * spec.dilation];
      }
      dst[t] = static_cast<float>(acc);
    }
  }
  detail::record_macs(static_cast<std::uint64_t>(k_size) * c_in * l_out);

  FeatureMap out(c_out, l_out);
  for (std::size_t o = 0; o < c_out; ++o) {
    auto row = out.row(o);
    std::fill(row.begin(), row.end(), weights.pw_bias[o]);
  }
  Eigen::Map<const RowMatrix> pw(weights.pw_weight.data(), static_cast<Eigen::Index>(c_out),
                                 static_cast<Eigen::Index>(c_in));
  Eigen::Map<const RowMatrix> m(mid.data().data(), static_cast<Eigen::Index>(c_in),
                                static_cast<Eigen::Index>(l_out));
  MatrixView y(out.data().data(), static_cast<Eigen::Index>(c_out), static_cast<Eigen::Index>(l_out));
  y.noalias() += pw * m;
  detail::record_macs(static_cast<std::uint64_t>(c_in) * c_out * l_out);
  return out;
}

FeatureMap apply_conv(const FeatureMap& input, const ConvSpec& spec, const ConvWeights& weights) {
  return spec.separable ? depthwise_separable_conv1d(input, spec, weights)
                        : conv1d(input, spec, weights);
}

FeatureMap conv_transpose1d(const FeatureMap& input, const TransposedConvSpec& spec,
                            const std::vector<float>& weight, const std::vector<float>& bias) {
  const std::size_t ci = spec.channels_in, co = spec.channels_out, k_size = spec.kernel_size;
  if (input.channels() != ci) {
    throw ShapeError("transposed conv input has " + std::to_string(input.channels()) +
                     " channels, layer expects " + std::to_string(ci));
  }
  if (input.length() == 0 || spec.stride == 0 || k_size == 0) {
    throw ShapeError("transposed conv needs non-empty input, stride and kernel");
  }
  expect_size(weight, ci * co * k_size, "transposed conv weight");
  expect_size(bias, co, "transposed conv bias");
  const std::size_t l_in = input.length();

  // cols(o*K + k, l) = sum_c W(c, o, k) x(c, l), then scattered to o, l*stride + k.
  Eigen::Map<const RowMatrix> w(weight.data(), static_cast<Eigen::Index>(ci),
                                static_cast<Eigen::Index>(co * k_size));
  Eigen::Map<const RowMatrix> x(input.data().data(), static_cast<Eigen::Index>(ci),
                                static_cast<Eigen::Index>(l_in));
  const RowMatrix cols = w.transpose() * x;
  detail::record_macs(static_cast<std::uint64_t>(ci) * co * k_size * l_in);

  FeatureMap out(co, spec.output_length(l_in));
  for (std::size_t o = 0; o < co; ++o) {
    auto row = out.row(o);
    std::fill(row.begin(), row.end(), bias[o]);
    for (std::size_t k = 0; k < k_size; ++k) {
      const float* src = cols.data() + (o * k_size + k) * l_in;
      for (std::size_t l = 0; l < l_in; ++l) row[l * spec.stride + k] += src[l];
    }
  }
  return out;
}

FeatureMap upsample_nearest(const FeatureMap& input, std::size_t target_length) {
  if (input.length() == 0) throw ShapeError("upsample_nearest: empty input");
  if (target_length < input.length()) {
    throw ShapeError("upsample_nearest: target length " + std::to_string(target_length) +
                     " shorter than input length " + std::to_string(input.length()));
  }
  const std::size_t factor = (target_length + input.length() - 1) / input.length();
  FeatureMap out(input.channels(), target_length);
  for (std::size_t c = 0; c < input.channels(); ++c) {
    const auto src = input.row(c);
    auto dst = out.row(c);
    for (std::size_t t = 0; t < target_length; ++t) dst[t] = src[t / factor];
  }
  return out;
}

FeatureMap gated_activation(const FeatureMap& a, const FeatureMap& b) {
  if (!a.same_shape(b)) {
    throw ShapeError("gated_activation: " + shape_str(a.channels(), a.length()) + " vs " +
                     shape_str(b.channels(), b.length()));
  }
  FeatureMap out(a.channels(), a.length());
  const auto av = a.data();
  const auto bv = b.data();
  auto ov = out.data();
  for (std::size_t i = 0; i < ov.size(); ++i) {
    ov[i] = std::tanh(av[i]) / (1.0f + std::exp(-bv[i]));
  }
  return out;
}

FeatureMap channel_mix(const FeatureMap& input, const std::vector<float>& matrix) {
  const std::size_t n = input.channels();
  expect_size(matrix, n * n, "channel mixing matrix");
  FeatureMap out(n, input.length());
  Eigen::Map<const RowMatrix> m(matrix.data(), static_cast<Eigen::Index>(n),
                                static_cast<Eigen::Index>(n));
  Eigen::Map<const RowMatrix> x(input.data().data(), static_cast<Eigen::Index>(n),
                                static_cast<Eigen::Index>(input.length()));
  MatrixView y(out.data().data(), static_cast<Eigen::Index>(n),
               static_cast<Eigen::Index>(input.length()));
  y.noalias() = m * x;
  detail::record_macs(static_cast<std::uint64_t>(n) * n * input.length());
  return out;
}

MacCounter::MacCounter() : previous_(active_counter) { active_counter = this; }

MacCounter::~MacCounter() { active_counter = previous_; }

namespace detail {
void record_macs(std::uint64_t macs) noexcept {
  if (active_counter != nullptr) active_counter->add(macs);
}
}  // namespace detail

}  // namespace sqzw
