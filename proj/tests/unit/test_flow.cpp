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

#include <Eigen/Dense>

#include "helpers.hpp"
#include "sqzw/errors.hpp"
#include "sqzw/flow.hpp"

using namespace sqzw;
using namespace sqzw::testing;

namespace {

void randomize(ConvLayer& layer, std::uint32_t seed, float scale) {
  auto& w = layer.weights;
  std::uint32_t k = 0;
  for (auto* v : {&w.weight, &w.bias, &w.dw_weight, &w.dw_bias, &w.pw_weight, &w.pw_bias}) {
    if (!v->empty()) *v = random_vector(v->size(), seed * 16 + k, scale);
    ++k;
  }
}

WnWeights random_wn(const WnShape& shape, std::uint32_t seed, float scale = 0.3f) {
  WnWeights w = WnWeights::zeros(shape);
  std::uint32_t s = seed * 101;
  randomize(w.start, ++s, scale);
  for (auto& l : w.in_layers) randomize(l, ++s, scale);
  randomize(w.cond, ++s, scale);
  for (auto& l : w.res_skip) randomize(l, ++s, scale);
  randomize(w.end, ++s, scale);
  return w;
}

// Well-conditioned, deliberately non-orthogonal mixing matrix.
std::vector<float> random_mix(std::size_t n, std::uint32_t seed) {
  auto m = random_vector(n * n, seed, 0.3f);
  for (std::size_t i = 0; i < n; ++i) m[i * n + i] += 1.5f;
  return m;
}

// Straight-line WN: no layer objects, every convolution an explicit loop.
struct ScalarWn {
  const WnShape& s;
  const WnWeights& w;

  using Grid = std::vector<std::vector<double>>;

  static double at(const Grid& g, std::size_t c, long t) {
    return (t < 0 || t >= static_cast<long>(g[c].size())) ? 0.0 : g[c][t];
  }

  Grid run(const FeatureMap& x_a, const FeatureMap& mel) const {
    const std::size_t L = x_a.length(), W = s.width, half = s.flow_channels / 2;
    Grid h(W, std::vector<double>(L)), skip(W, std::vector<double>(L, 0.0));
    for (std::size_t o = 0; o < W; ++o) {
      for (std::size_t t = 0; t < L; ++t) {
        double a = w.start.weights.bias[o];
        for (std::size_t c = 0; c < half; ++c) a += w.start.weights.weight[o * half + c] * x_a(c, t);
        h[o][t] = a;
      }
    }
    const std::size_t cm = s.cond_channels;
    for (std::size_t i = 0; i < s.layers; ++i) {
      const long d = s.variant == Variant::kWaveGlow ? (1L << i) : 1;
      const ConvWeights& in = w.in_layers[i].weights;
      Grid pre(2 * W, std::vector<double>(L));
      for (std::size_t o = 0; o < 2 * W; ++o) {
        for (std::size_t t = 0; t < L; ++t) {
          double a = 0.0;
          if (s.variant == Variant::kWaveGlow) {
            a = in.bias[o];
            for (std::size_t c = 0; c < W; ++c) {
              for (long k = 0; k < 3; ++k) {
                a += in.weight[(o * W + c) * 3 + k] * at(h, c, static_cast<long>(t) + (k - 1) * d);
              }
            }
          } else {
            a = in.pw_bias[o];
            for (std::size_t c = 0; c < W; ++c) {
              double dw = in.dw_bias[c];
              for (long k = 0; k < 3; ++k) dw += in.dw_weight[c * 3 + k] * at(h, c, static_cast<long>(t) + k - 1);
              a += in.pw_weight[o * W + c] * dw;
            }
          }
          const std::size_t co = 2 * W * i + o;
          double cond = w.cond.weights.bias[co];
          for (std::size_t m = 0; m < cm; ++m) cond += w.cond.weights.weight[co * cm + m] * mel(m, t);
          pre[o][t] = a + cond;
        }
      }
      Grid g(W, std::vector<double>(L));
      for (std::size_t c = 0; c < W; ++c) {
        for (std::size_t t = 0; t < L; ++t) {
          g[c][t] = std::tanh(pre[c][t]) / (1.0 + std::exp(-pre[W + c][t]));
        }
      }
      const ConvWeights& rs = w.res_skip[i].weights;
      const std::size_t rs_out = rs.bias.size();
      const bool last = i + 1 == s.layers;
      for (std::size_t o = 0; o < rs_out; ++o) {
        for (std::size_t t = 0; t < L; ++t) {
          double r = rs.bias[o];
          for (std::size_t c = 0; c < W; ++c) r += rs.weight[o * W + c] * g[c][t];
          if (s.variant == Variant::kWaveGlow) {
            if (last) skip[o][t] += r;
            else if (o < W) h[o][t] += r;
            else skip[o - W][t] += r;
          } else {
            if (!last) h[o][t] += r;
            skip[o][t] += r;
          }
        }
      }
    }
    Grid out(s.flow_channels, std::vector<double>(L));
    for (std::size_t o = 0; o < s.flow_channels; ++o) {
      for (std::size_t t = 0; t < L; ++t) {
        double a = w.end.weights.bias[o];
        for (std::size_t c = 0; c < W; ++c) a += w.end.weights.weight[o * W + c] * skip[c][t];
        out[o][t] = a;
      }
    }
    return out;
  }
};

}  // namespace

TEST_CASE("inv1x1 forward on simple matrices") {
  const FeatureMap x = random_map(2, 3, 1);
  const auto id = inv1x1_forward(x, InvertiblePointwise::identity(2));
  CHECK(id.value == x);
  CHECK(id.log_det == 0.0);

  const auto doubled = inv1x1_forward(x, InvertiblePointwise(2, {2, 0, 0, 2}));
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(doubled.value.data()[i] == 2 * x.data()[i]);
  CHECK(doubled.log_det == doctest::Approx(3 * std::log(4.0)).epsilon(1e-12));

  const InvertiblePointwise diag(2, {2, 0, 0, 4});
  CHECK(inv1x1_inverse(FeatureMap(2, 1, {2, 4}), diag) == FeatureMap(2, 1, {1, 1}));
  CHECK(inv1x1_inverse(x, InvertiblePointwise::identity(2)) == x);
}

TEST_CASE("inv1x1 log-det of an orthogonal matrix is zero") {
  for (std::uint32_t seed = 0; seed < 5; ++seed) {
    const std::size_t n = 8;
    const auto g = random_vector(n * n, seed);
    Eigen::MatrixXd a(n, n);
    for (std::size_t i = 0; i < n * n; ++i) a(i / n, i % n) = g[i];
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
    std::vector<float> m(n * n);
    for (std::size_t i = 0; i < n * n; ++i) m[i] = static_cast<float>(q(i / n, i % n));
    const InvertiblePointwise w(n, m);
    CHECK(std::fabs(w.log_abs_det()) < 1e-6);
    CHECK(std::fabs(inv1x1_forward(random_map(n, 4, seed), w).log_det) < 4e-6);
  }
}

TEST_CASE("inv1x1 inverse matches an elimination oracle and round-trips") {
  const std::size_t n = 8;
  const auto m = random_mix(n, 3);
  const InvertiblePointwise w(n, m);
  Eigen::MatrixXd a(n, n);
  for (std::size_t i = 0; i < n * n; ++i) a(i / n, i % n) = m[i];
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  const Eigen::MatrixXd inv = lu.inverse();
  for (std::size_t i = 0; i < n * n; ++i) CHECK(w.inverse()[i] == doctest::Approx(inv(i / n, i % n)).epsilon(1e-5));
  CHECK(w.log_abs_det() == doctest::Approx(std::log(std::fabs(lu.determinant()))).epsilon(1e-9));

  const FeatureMap x = random_map(n, 16, 4);
  const auto y = inv1x1_forward(x, w);
  CHECK(y.log_det == doctest::Approx(16 * std::log(std::fabs(lu.determinant()))).epsilon(1e-9));
  CHECK(max_abs_diff(inv1x1_inverse(y.value, w).data(), x.data()) < 1e-4);
}

TEST_CASE("singular mixing matrices are rejected") {
  CHECK_THROWS_AS(InvertiblePointwise(2, {1, 2, 2, 4}), InvertibilityError);
  CHECK_THROWS_AS(InvertiblePointwise(2, {0, 0, 0, 0}), InvertibilityError);
  CHECK_THROWS_AS(InvertiblePointwise(3, {1e-5f, 0, 0, 0, 1e-5f, 0, 0, 0, 1e-5f}), InvertibilityError);
  CHECK_THROWS_AS(InvertiblePointwise(2, {1, 0, 0}), ShapeError);
  CHECK_THROWS_AS(inv1x1_forward(FeatureMap(3, 2), InvertiblePointwise::identity(2)), ShapeError);
}

TEST_CASE("zero WN produces zero coefficients") {
  for (const Variant v : {Variant::kWaveGlow, Variant::kSqueezeWave}) {
    const WnShape shape{v, 4, 8, 3, 3, 5};
    const auto c = wn(random_map(2, 9, 1), random_map(5, 9, 2), WnWeights::zeros(shape), v);
    CHECK(c.log_s == FeatureMap(2, 9));
    CHECK(c.t == FeatureMap(2, 9));
  }
}

TEST_CASE("WN matches a straight-line scalar implementation") {
  for (const Variant v : {Variant::kWaveGlow, Variant::kSqueezeWave}) {
    for (std::uint32_t seed = 1; seed <= 3; ++seed) {
      const WnShape shape{v, 4, 8, 2, 3, 6};
      const WnWeights w = random_wn(shape, seed);
      const FeatureMap x_a = random_map(2, 11, seed * 7), mel = random_map(6, 11, seed * 7 + 1);
      const auto got = wn(x_a, mel, w, v);
      const auto want = ScalarWn{shape, w}.run(x_a, mel);
      for (std::size_t c = 0; c < 2; ++c) {
        for (std::size_t t = 0; t < 11; ++t) {
          CHECK(got.log_s(c, t) == doctest::Approx(want[c][t]).epsilon(1e-5));
          CHECK(got.t(c, t) == doctest::Approx(want[c + 2][t]).epsilon(1e-5));
        }
      }
    }
  }
}

TEST_CASE("WN receptive field reflects the dilation schedule") {
  const std::size_t L = 41, centre = 20, layers = 3;
  for (const Variant v : {Variant::kWaveGlow, Variant::kSqueezeWave}) {
    const WnShape shape{v, 4, 8, layers, 3, 2};
    const WnWeights w = random_wn(shape, 11);
    const FeatureMap mel(2, L);
    FeatureMap delta(2, L);
    delta(0, centre) = 1.0f;
    const auto base = wn(FeatureMap(2, L), mel, w, v);
    const auto hit = wn(delta, mel, w, v);
    // Radius is the sum of per-layer dilations: 1+2+4 dilated, 1+1+1 plain.
    const long radius = v == Variant::kWaveGlow ? 7 : 3;
    for (std::size_t t = 0; t < L; ++t) {
      double diff = 0.0;
      for (std::size_t c = 0; c < 2; ++c) diff += std::fabs(hit.t(c, t) - base.t(c, t));
      const bool inside = std::labs(static_cast<long>(t) - static_cast<long>(centre)) <= radius;
      if (inside) CHECK(diff > 1e-6);
      else CHECK(diff < 1e-7);
    }
    for (std::size_t i = 0; i < layers; ++i) {
      CHECK(shape.dilation(i) == (v == Variant::kWaveGlow ? std::size_t{1} << i : 1));
    }
  }
}

TEST_CASE("WN weight validation names the offending layer") {
  const WnShape shape{Variant::kWaveGlow, 4, 8, 2, 3, 6};
  WnWeights w = WnWeights::zeros(shape);
  CHECK_NOTHROW(w.validate(shape));
  CHECK(w.implied_shape(Variant::kWaveGlow) == shape);
  w.res_skip[0] = ConvLayer::zeros(ConvSpec::pointwise(8, 8));
  try {
    w.validate(shape);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    CHECK(std::string(e.what()).find("res_skip") != std::string::npos);
  }
  // SqueezeWave layers do not fit the WaveGlow layout.
  const WnShape sq{Variant::kSqueezeWave, 4, 8, 2, 3, 6};
  CHECK_THROWS_AS(WnWeights::zeros(sq).validate(shape), ShapeError);
}

TEST_CASE("affine coupling") {
  const FeatureMap x = random_map(2, 3, 5);
  const CouplingCoeffs zero{FeatureMap(2, 3), FeatureMap(2, 3)};
  const auto id = coupling_forward(x, zero);
  CHECK(id.value == x);
  CHECK(id.log_det == 0.0);
  CHECK(coupling_inverse(x, zero) == x);

  const CouplingCoeffs c{FeatureMap(2, 3, static_cast<float>(std::log(2.0))), FeatureMap(2, 3, 1.0f)};
  const auto y = coupling_forward(x, c);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(y.value.data()[i] == doctest::Approx(2 * x.data()[i] + 1));
  CHECK(y.log_det == doctest::Approx(6 * std::log(2.0)));
  CHECK(coupling_inverse(FeatureMap(1, 1, 5.0f),
                         {FeatureMap(1, 1, static_cast<float>(std::log(2.0))), FeatureMap(1, 1, 1.0f)})(0, 0) ==
        doctest::Approx(2.0));

  const CouplingCoeffs r{random_map(3, 4, 6, 0.5f), random_map(3, 4, 7)};
  const FeatureMap xb = random_map(3, 4, 8);
  const auto fwd = coupling_forward(xb, r);
  CHECK(max_abs_diff(coupling_inverse(fwd.value, r).data(), xb.data()) < 1e-4);
  const double numeric = numerical_log_abs_det(
      [&](const std::vector<float>& v) {
        return std::move(coupling_forward(FeatureMap(3, 4, v), r).value).release();
      },
      std::vector<float>(xb.data().begin(), xb.data().end()));
  CHECK(relative_error(fwd.log_det, numeric) < 1e-3);
  CHECK_THROWS_AS(coupling_forward(FeatureMap(3, 5), r), ShapeError);
}

TEST_CASE("flow step identity, passthrough and inverse") {
  for (const Variant v : {Variant::kWaveGlow, Variant::kSqueezeWave}) {
    const WnShape shape{v, 6, 8, 3, 3, 4};
    const FeatureMap x = random_map(6, 10, 1), cond = random_map(2 * 8 * 3, 10, 2);

    const FlowStep id{InvertiblePointwise::identity(6), WnWeights::zeros(shape)};
    const auto same = flow_step_forward(x, cond, id, v);
    CHECK(same.value == x);
    CHECK(same.log_det == 0.0);

    for (std::uint32_t seed = 0; seed < 4; ++seed) {
      const FlowStep step{InvertiblePointwise(6, random_mix(6, seed)), random_wn(shape, seed)};
      const FeatureMap in = random_map(6, 10, 50 + seed);
      const auto out = flow_step_forward(in, cond, step, v);
      // x_a passes through the coupling untouched.
      const auto mixed = inv1x1_forward(in, step.mix);
      CHECK(out.value.slice_channels(0, 3) == mixed.value.slice_channels(0, 3));
      CHECK(max_abs_diff(flow_step_inverse(out.value, cond, step, v).data(), in.data()) < 1e-4);
    }
  }
}

TEST_CASE("flow step log-det matches the numerical Jacobian") {
  for (const Variant v : {Variant::kWaveGlow, Variant::kSqueezeWave}) {
    for (std::uint32_t seed = 0; seed < 5; ++seed) {
      const WnShape shape{v, 4, 8, 2, 3, 3};
      const FlowStep step{InvertiblePointwise(4, random_mix(4, seed + 30)), random_wn(shape, seed + 30)};
      const FeatureMap cond = step.wn.cond(random_map(3, 3, seed + 40));
      const FeatureMap x = random_map(4, 3, seed + 50);
      const auto out = flow_step_forward(x, cond, step, v);
      const double numeric = numerical_log_abs_det(
          [&](const std::vector<float>& in) {
            return std::move(flow_step_forward(FeatureMap(4, 3, in), cond, step, v).value).release();
          },
          std::vector<float>(x.data().begin(), x.data().end()));
      CHECK(relative_error(out.log_det, numeric) < 1e-3);
    }
  }
}
