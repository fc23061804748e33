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

// Little-endian tensor container shared by model ("SQZW") and mel ("SQZM")
// files: magic, u32 version, payload-specific header, u32 tensor count, then
// per tensor u16 name length + UTF-8 name, u8 rank, u32 dims, f32 payload.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sqzw {

class ByteWriter {
 public:
  void u8(std::uint8_t v) { buffer_.push_back(v); }
  void u16(std::uint16_t v);
  void u32(std::uint32_t v);
  void bytes(std::string_view s) { buffer_.insert(buffer_.end(), s.begin(), s.end()); }
  void f32(std::span<const float> values);

  const std::vector<std::uint8_t>& buffer() const noexcept { return buffer_; }
  std::vector<std::uint8_t> take() && { return std::move(buffer_); }

 private:
  std::vector<std::uint8_t> buffer_;
};

// Every read past the end throws FormatError mentioning `what`.
class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> data, std::string what)
      : data_(data), what_(std::move(what)) {}

  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  std::string string(std::size_t n);
  std::vector<float> f32(std::size_t count);

  std::size_t remaining() const noexcept { return data_.size() - pos_; }
  bool at_end() const noexcept { return pos_ == data_.size(); }

 private:
  std::span<const std::uint8_t> take(std::size_t n);

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
  std::string what_;
};

struct TensorRecord {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<float> data;
};

std::size_t element_count(std::span<const std::uint32_t> dims);

void write_tensor(ByteWriter& out, std::string_view name, std::span<const std::uint32_t> dims,
                  std::span<const float> data);
TensorRecord read_tensor(ByteReader& in);

// Checks the 4-byte magic (SchemaError) and the version (FormatError).
void expect_header(ByteReader& in, std::string_view magic, std::uint32_t version);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace sqzw
