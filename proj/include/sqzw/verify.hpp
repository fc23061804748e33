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

// Self-checks used by the command-line roundtrip command.

#include <cstdint>
#include <vector>

#include "sqzw/config.hpp"
#include "sqzw/model.hpp"

namespace sqzw {

struct RoundtripErrors {
  double latent = 0.0;  // max |forward(inverse(z)) - z|
  double audio = 0.0;   // max |inverse(forward(x)) - x|
};

// One window of each direction on a seeded mel and latent.
RoundtripErrors roundtrip_errors(const Model& model, std::uint64_t seed);

// Smallest model of the same family: 4-sample groups, two flows, no early
// outputs, 4 time steps (16 latent elements).
ModelConfig tiny_config(const ModelConfig& family);

// Random tiny model with stretched (non-orthogonal) 1x1 matrices and WN end
// layers scaled up to std 0.2, so both log-det terms are well away from zero.
Model tiny_model(const ModelConfig& family, std::uint64_t seed);

struct JacobianCheck {
  double analytic = 0.0;
  double numeric = 0.0;
  double relative_error = 0.0;
};

// Analytic log-det of forward() against log|det| of a central-difference
// Jacobian (LU in double). Only sensible for tiny models.
JacobianCheck jacobian_check(const Model& model, std::uint64_t seed);

}  // namespace sqzw
