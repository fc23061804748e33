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

#include "sqzw/verify.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "sqzw/bench.hpp"
#include "sqzw/errors.hpp"
#include "sqzw/rng.hpp"
#include "sqzw/vocoder.hpp"

namespace sqzw {

namespace {

double max_abs_diff(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw ShapeError("roundtrip changed the signal length");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::fabs(static_cast<double>(a[i]) - b[i]));
  }
  return m;
}

}  // namespace

RoundtripErrors roundtrip_errors(const Model& model, std::uint64_t seed) {
  const ModelConfig& c = model.config;
  const FeatureMap mel = synthetic_mel(c.n_mels, c.window_frames, seed);
  const LatentVector z = sample_latent(c, c.window_length(), 1.0, seed, 0);
  RoundtripErrors e;
  const std::vector<float> audio = inverse(z, mel, model);
  e.latent = max_abs_diff(forward(audio, mel, model).z.values, z.values);

  const LatentVector other = sample_latent(c, c.window_length(), 1.0, seed, 1);
  const std::vector<float> x = inverse(other, mel, model);
  e.audio = max_abs_diff(inverse(forward(x, mel, model).z, mel, model), x);
  return e;
}

ModelConfig tiny_config(const ModelConfig& family) {
  ModelConfig c = family;
  c.group_size = 4;
  c.n_flows = 2;
  c.n_early_every = 0;
  c.wn_layers = 2;
  c.wn_width = 8;
  c.n_mels = 4;
  c.hop = 4;
  c.window_frames = c.cond_before_upsample ? 2 : 4;
  if (c.cond_before_upsample) c.hop = 8;
  c.upsample_kernel = family.upsample_kernel > 0 ? 2 * c.hop : 0;
  c.validate();
  return c;
}

Model tiny_model(const ModelConfig& family, std::uint64_t seed) {
  Model m = random_model(tiny_config(family), seed);
  for (std::size_t i = 0; i < m.flows.size(); ++i) {
    FlowStep& f = m.flows[i];
    auto w = f.mix.matrix();
    const std::size_t n = f.mix.size();
    for (std::size_t k = 0; k < n; ++k) w[k * n + k] *= 1.0f + 0.3f * static_cast<float>(i + 1);
    f.mix = InvertiblePointwise(n, std::move(w));
    for (auto& v : f.wn.end.weights.weight) v *= 20.0f;
  }
  return m;
}

JacobianCheck jacobian_check(const Model& model, std::uint64_t seed) {
  const ModelConfig& c = model.config;
  const FeatureMap mel = synthetic_mel(c.n_mels, c.window_frames, seed);
  std::vector<float> x(c.window_samples());
  const CounterRng rng(seed, 7);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<float>(rng.gaussian(i));

  const std::size_t n = x.size();
  const double h = 1e-2;
  Eigen::MatrixXd jac(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<float> up = x, down = x;
    up[j] += static_cast<float>(h);
    down[j] -= static_cast<float>(h);
    const double step = static_cast<double>(up[j]) - down[j];
    const auto fu = forward(up, mel, model).z.values;
    const auto fd = forward(down, mel, model).z.values;
    for (std::size_t i = 0; i < n; ++i) jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
        (static_cast<double>(fu[i]) - fd[i]) / step;
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
  JacobianCheck r;
  for (Eigen::Index i = 0; i < lu.matrixLU().rows(); ++i) r.numeric += std::log(std::fabs(lu.matrixLU()(i, i)));
  r.analytic = forward(x, mel, model).log_det;
  r.relative_error = std::fabs(r.analytic - r.numeric) / std::max(1e-12, std::fabs(r.numeric));
  return r;
}

}  // namespace sqzw
