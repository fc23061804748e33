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

#include "sqzw/feature_map.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "sqzw/errors.hpp"

namespace sqzw {

FeatureMap::FeatureMap(std::size_t channels, std::size_t length, float fill)
    : channels_(channels), length_(length), data_(channels * length, fill) {}

FeatureMap::FeatureMap(std::size_t channels, std::size_t length, std::vector<float> data)
    : channels_(channels), length_(length), data_(std::move(data)) {
  if (data_.size() != channels * length) {
    throw ShapeError("feature map data has " + std::to_string(data_.size()) +
                     " values, expected " + std::to_string(channels) + "x" +
                     std::to_string(length));
  }
}

FeatureMap FeatureMap::slice_channels(std::size_t begin, std::size_t count) const {
  if (begin + count > channels_) {
    throw ShapeError("channel slice [" + std::to_string(begin) + ", " +
                     std::to_string(begin + count) + ") out of range for " +
                     std::to_string(channels_) + " channels");
  }
  const auto first = data_.begin() + static_cast<std::ptrdiff_t>(begin * length_);
  return FeatureMap(count, length_,
                    std::vector<float>(first, first + static_cast<std::ptrdiff_t>(count * length_)));
}

FeatureMap concat_channels(const FeatureMap& a, const FeatureMap& b) {
  if (a.length() != b.length()) {
    throw ShapeError("concat_channels: lengths " + std::to_string(a.length()) + " and " +
                     std::to_string(b.length()) + " differ");
  }
  std::vector<float> out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.data().begin(), a.data().end());
  out.insert(out.end(), b.data().begin(), b.data().end());
  return FeatureMap(a.channels() + b.channels(), a.length(), std::move(out));
}

}  // namespace sqzw
