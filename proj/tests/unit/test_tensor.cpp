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

#include <doctest.h>

#include <cmath>
#include <set>

#include "helpers.hpp"
#include "sqzw/errors.hpp"
#include "sqzw/ops.hpp"

using namespace sqzw;
using sqzw::testing::max_abs_diff;
using sqzw::testing::random_map;
using sqzw::testing::random_vector;

namespace {

// Direct summation over (o, t, c, k) with explicit zero padding.
FeatureMap conv_oracle(const FeatureMap& x, const ConvSpec& s, const std::vector<float>& w,
                       const std::vector<float>& b) {
  const long lout = static_cast<long>(x.length() + 2 * s.padding) -
                    static_cast<long>(s.dilation * (s.kernel_size - 1));
  FeatureMap y(s.out_channels, static_cast<std::size_t>(lout));
  for (std::size_t o = 0; o < s.out_channels; ++o) {
    for (long t = 0; t < lout; ++t) {
      double acc = b.empty() ? 0.0 : b[o];
      for (std::size_t c = 0; c < s.in_channels; ++c) {
        for (std::size_t k = 0; k < s.kernel_size; ++k) {
          const long src = t + static_cast<long>(k * s.dilation) - static_cast<long>(s.padding);
          if (src < 0 || src >= static_cast<long>(x.length())) continue;
          acc += static_cast<double>(w[(o * s.in_channels + c) * s.kernel_size + k]) * x(c, src);
        }
      }
      y(o, t) = static_cast<float>(acc);
    }
  }
  return y;
}

ConvWeights dense_weights(const ConvSpec& s, std::uint32_t seed, bool with_bias = true) {
  ConvWeights w = ConvWeights::zeros(s);
  w.weight = random_vector(w.weight.size(), seed);
  if (with_bias) w.bias = random_vector(w.bias.size(), seed + 1);
  return w;
}

}  // namespace

TEST_CASE("conv1d matches the worked example") {
  const ConvSpec s{3, 1, 1, 1, 1, false};
  ConvWeights w = ConvWeights::zeros(s);
  w.weight = {1, 1, 1};
  const FeatureMap y = conv1d(FeatureMap(1, 3, {1, 2, 3}), s, w);
  CHECK(y == FeatureMap(1, 3, {3, 6, 5}));
}

TEST_CASE("conv1d matches direct summation") {
  struct Case { std::size_t k, ci, co, d, p, l; };
  for (const Case c : {Case{3, 4, 5, 1, 1, 9}, Case{3, 3, 2, 4, 4, 7}, Case{5, 2, 6, 2, 0, 12},
                       Case{1, 7, 3, 1, 0, 4}, Case{3, 2, 2, 1, 3, 2}}) {
    const ConvSpec s{c.k, c.ci, c.co, c.d, c.p, false};
    const ConvWeights w = dense_weights(s, static_cast<std::uint32_t>(c.k * 100 + c.d));
    const FeatureMap x = random_map(c.ci, c.l, static_cast<std::uint32_t>(c.l));
    const FeatureMap got = conv1d(x, s, w);
    const FeatureMap want = conv_oracle(x, s, w.weight, w.bias);
    REQUIRE(got.same_shape(want));
    CHECK(max_abs_diff(got.data(), want.data()) < 1e-5);
  }
}

TEST_CASE("conv1d identity and zero kernels") {
  const FeatureMap x = random_map(5, 11, 7);
  const ConvSpec s = ConvSpec::pointwise(5, 5);
  ConvWeights w = ConvWeights::zeros(s);
  CHECK(conv1d(x, s, w) == FeatureMap(5, 11));
  for (std::size_t i = 0; i < 5; ++i) w.weight[i * 5 + i] = 1.0f;
  CHECK(conv1d(x, s, w) == x);
}

TEST_CASE("conv1d rejects bad shapes") {
  const ConvSpec s{3, 2, 2, 1, 0, false};
  const ConvWeights w = ConvWeights::zeros(s);
  CHECK_THROWS_AS(conv1d(FeatureMap(3, 8), s, w), ShapeError);
  CHECK_THROWS_AS(conv1d(FeatureMap(2, 2), s, w), ShapeError);
  ConvWeights bad = w;
  bad.weight.pop_back();
  CHECK_THROWS_AS(conv1d(FeatureMap(2, 8), s, bad), ShapeError);
  CHECK_THROWS_AS(ConvSpec::same(2, 1, 1), ShapeError);
}

TEST_CASE("conv1d is linear") {
  const ConvSpec s = ConvSpec::same(3, 4, 6, 2);
  const ConvWeights w = dense_weights(s, 3, false);
  const FeatureMap x = random_map(4, 20, 1), y = random_map(4, 20, 2);
  const float a = 0.7f, b = -1.3f;
  FeatureMap mix(4, 20);
  for (std::size_t i = 0; i < mix.size(); ++i) mix.data()[i] = a * x.data()[i] + b * y.data()[i];
  const FeatureMap cx = conv1d(x, s, w), cy = conv1d(y, s, w), cm = conv1d(mix, s, w);
  double worst = 0.0;
  for (std::size_t i = 0; i < cm.size(); ++i) {
    const double want = a * cx.data()[i] + b * cy.data()[i];
    worst = std::max(worst, std::fabs(cm.data()[i] - want) / std::max(1.0, std::fabs(want)));
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("separable conv equals the composed dense kernel") {
  for (std::uint32_t trial = 0; trial < 10; ++trial) {
    const std::size_t ci = 4, co = 3 + trial % 4, d = 1 + trial % 3;
    const ConvSpec sep = ConvSpec::same(3, ci, co, d, true);
    ConvWeights w = ConvWeights::zeros(sep);
    w.dw_weight = random_vector(w.dw_weight.size(), trial * 4 + 1);
    w.dw_bias = random_vector(w.dw_bias.size(), trial * 4 + 2);
    w.pw_weight = random_vector(w.pw_weight.size(), trial * 4 + 3);
    w.pw_bias = random_vector(w.pw_bias.size(), trial * 4 + 4);

    // w(o,c,k) = pw(o,c) dw(c,k); b(o) = pw_b(o) + sum_c pw(o,c) dw_b(c).
    // Zero padding makes the depthwise bias appear at every position, so the
    // composed bias is exact.
    ConvSpec dense = sep;
    dense.separable = false;
    std::vector<float> cw(co * ci * 3), cb(co);
    for (std::size_t o = 0; o < co; ++o) {
      double bias = w.pw_bias[o];
      for (std::size_t c = 0; c < ci; ++c) {
        bias += static_cast<double>(w.pw_weight[o * ci + c]) * w.dw_bias[c];
        for (std::size_t k = 0; k < 3; ++k) {
          cw[(o * ci + c) * 3 + k] = w.pw_weight[o * ci + c] * w.dw_weight[c * 3 + k];
        }
      }
      cb[o] = static_cast<float>(bias);
    }
    const FeatureMap x = random_map(ci, 8, 100 + trial);
    const FeatureMap got = depthwise_separable_conv1d(x, sep, w);
    const FeatureMap want = conv_oracle(x, dense, cw, cb);
    REQUIRE(got.same_shape(want));
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(std::fabs(got.data()[i] - want.data()[i]) <= 1e-5 * std::max(1.0f, std::fabs(want.data()[i])));
    }
  }
}

TEST_CASE("separable conv identity cases") {
  const ConvSpec s = ConvSpec::same(3, 2, 2, 1, true);
  ConvWeights w = ConvWeights::zeros(s);
  w.pw_weight = {1, 0, 0, 1};
  const FeatureMap x(2, 3, {1, 2, 3, 4, 5, 6});
  // Centre tap only: pure depthwise result equals the input.
  w.dw_weight = {0, 1, 0, 0, 1, 0};
  CHECK(depthwise_separable_conv1d(x, s, w) == x);
  // A [1, 0, 0] kernel reads one step to the left.
  w.dw_weight = {1, 0, 0, 1, 0, 0};
  CHECK(depthwise_separable_conv1d(x, s, w) == FeatureMap(2, 3, {0, 1, 2, 0, 4, 5}));
  CHECK_THROWS_AS(depthwise_separable_conv1d(FeatureMap(3, 3), s, w), ShapeError);
}

TEST_CASE("upsample_nearest") {
  const FeatureMap x(1, 3, {1, 2, 3});
  CHECK(upsample_nearest(x, 7) == FeatureMap(1, 7, {1, 1, 1, 2, 2, 2, 3}));
  CHECK(upsample_nearest(x, 3) == x);
  CHECK_THROWS_AS(upsample_nearest(x, 2), ShapeError);

  const FeatureMap mel = random_map(80, 64, 5);
  const FeatureMap up = upsample_nearest(mel, 128);
  REQUIRE(up.channels() == 80);
  REQUIRE(up.length() == 128);
  for (std::size_t c = 0; c < 80; ++c) {
    for (std::size_t t = 0; t < 128; ++t) CHECK(up(c, t) == mel(c, t / 2));
  }

  // Never invents values. Frames survive whenever the truncation leaves the
  // last repeat group non-empty, i.e. target > (L - 1) * f.
  for (std::size_t target : {3u, 4u, 7u, 9u, 10u, 31u}) {
    const FeatureMap u = upsample_nearest(x, target);
    const std::set<float> seen(u.data().begin(), u.data().end());
    const std::size_t f = (target + 2) / 3;
    for (float v : seen) CHECK((v == 1 || v == 2 || v == 3));
    if (target > 2 * f) CHECK(seen.size() == 3);
  }
  // target 4 from 3 frames: f = 2 gives [1,1,2,2,3,3] cut to [1,1,2,2].
  CHECK(upsample_nearest(x, 4) == FeatureMap(1, 4, {1, 1, 2, 2}));
}

TEST_CASE("gated_activation") {
  const FeatureMap a = random_map(3, 50, 9, 4.0f), b = random_map(3, 50, 10, 4.0f);
  CHECK(gated_activation(FeatureMap(3, 50), b) == FeatureMap(3, 50));
  const FeatureMap half = gated_activation(a, FeatureMap(3, 50));
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(half.data()[i] == doctest::Approx(0.5 * std::tanh(a.data()[i])).epsilon(1e-6));
  }
  const float one = gated_activation(FeatureMap(1, 1, 1.0f), FeatureMap(1, 1, 1.0f))(0, 0);
  CHECK(one == doctest::Approx(std::tanh(1.0) / (1.0 + std::exp(-1.0))).epsilon(1e-6));
  const FeatureMap g = gated_activation(a, b);
  for (float v : g.data()) CHECK((v > -1.0f && v < 1.0f));
  CHECK_THROWS_AS(gated_activation(a, FeatureMap(3, 49)), ShapeError);
}

TEST_CASE("conv_transpose1d matches scatter oracle") {
  const TransposedConvSpec s{3, 2, 5, 2};
  const FeatureMap x = random_map(3, 4, 21);
  const auto w = random_vector(3 * 2 * 5, 22);
  const auto b = random_vector(2, 23);
  const FeatureMap y = conv_transpose1d(x, s, w, b);
  REQUIRE(y.length() == (4 - 1) * 2 + 5);
  std::vector<double> want(2 * y.length());
  for (std::size_t o = 0; o < 2; ++o) {
    for (std::size_t t = 0; t < y.length(); ++t) want[o * y.length() + t] = b[o];
  }
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t o = 0; o < 2; ++o) {
      for (std::size_t t = 0; t < 4; ++t) {
        for (std::size_t k = 0; k < 5; ++k) {
          want[o * y.length() + t * 2 + k] += static_cast<double>(x(i, t)) * w[(i * 2 + o) * 5 + k];
        }
      }
    }
  }
  for (std::size_t i = 0; i < want.size(); ++i) CHECK(y.data()[i] == doctest::Approx(want[i]).epsilon(1e-5));
}

TEST_CASE("MAC counters record analytic costs and nest") {
  const ConvSpec dense = ConvSpec::same(3, 4, 6, 2);
  const ConvSpec sep = ConvSpec::same(3, 4, 6, 1, true);
  const FeatureMap x = random_map(4, 10, 1);
  MacCounter outer;
  {
    MacCounter inner;
    conv1d(x, dense, ConvWeights::zeros(dense));
    CHECK(inner.total() == 3 * 4 * 6 * 10);
  }
  CHECK(outer.total() == 0);
  depthwise_separable_conv1d(x, sep, ConvWeights::zeros(sep));
  CHECK(outer.total() == 3 * 4 * 10 + 4 * 6 * 10);
}

TEST_CASE("FeatureMap channel slicing and concatenation") {
  const FeatureMap x = random_map(5, 3, 4);
  const FeatureMap a = x.slice_channels(0, 2), b = x.slice_channels(2, 3);
  CHECK(concat_channels(a, b) == x);
  CHECK(b(0, 1) == x(2, 1));
  CHECK_THROWS_AS(x.slice_channels(4, 2), ShapeError);
  CHECK_THROWS_AS(concat_channels(a, FeatureMap(1, 4)), ShapeError);
  CHECK_THROWS_AS(FeatureMap(2, 2, std::vector<float>(3)), ShapeError);
}
