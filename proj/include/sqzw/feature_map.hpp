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

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace sqzw {

/// Channels x length block of 32-bit floats, channel-major:
/// element (c, t) lives at index c * length + t.
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(std::size_t channels, std::size_t length, float fill = 0.0f);
  FeatureMap(std::size_t channels, std::size_t length, std::vector<float> data);

  std::size_t channels() const noexcept { return channels_; }
  std::size_t length() const noexcept { return length_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  float& operator()(std::size_t c, std::size_t t) { return data_[c * length_ + t]; }
  float operator()(std::size_t c, std::size_t t) const { return data_[c * length_ + t]; }

  std::span<float> data() noexcept { return data_; }
  std::span<const float> data() const noexcept { return data_; }
  std::span<float> row(std::size_t c) { return {data_.data() + c * length_, length_}; }
  std::span<const float> row(std::size_t c) const {
    return {data_.data() + c * length_, length_};
  }

  // Copy of channels [begin, begin + count).
  FeatureMap slice_channels(std::size_t begin, std::size_t count) const;

  // Moves the storage out; the map is left empty.
  std::vector<float> release() && { channels_ = length_ = 0; return std::move(data_); }

  bool same_shape(const FeatureMap& other) const noexcept {
    return channels_ == other.channels_ && length_ == other.length_;
  }

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;

 private:
  std::size_t channels_ = 0;
  std::size_t length_ = 0;
  std::vector<float> data_;
};

// Stacks a on top of b along the channel axis. Lengths must agree.
FeatureMap concat_channels(const FeatureMap& a, const FeatureMap& b);

}  // namespace sqzw
