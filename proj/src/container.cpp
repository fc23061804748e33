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

#include "sqzw/container.hpp"

#include <bit>
#include <fstream>
#include <limits>

#include "sqzw/errors.hpp"

namespace sqzw {

void ByteWriter::u16(std::uint16_t v) {
  buffer_.push_back(static_cast<std::uint8_t>(v & 0xFF));
  buffer_.push_back(static_cast<std::uint8_t>(v >> 8));
}

void ByteWriter::u32(std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) {
    buffer_.push_back(static_cast<std::uint8_t>((v >> shift) & 0xFF));
  }
}

void ByteWriter::f32(std::span<const float> values) {
  buffer_.reserve(buffer_.size() + values.size() * 4);
  for (const float v : values) u32(std::bit_cast<std::uint32_t>(v));
}

std::span<const std::uint8_t> ByteReader::take(std::size_t n) {
  if (n > remaining()) {
    throw FormatError("corrupt " + what_ + ": truncated at byte " + std::to_string(pos_) +
                      " (needed " + std::to_string(n) + " more bytes, " +
                      std::to_string(remaining()) + " available)");
  }
  auto out = data_.subspan(pos_, n);
  pos_ += n;
  return out;
}

std::uint8_t ByteReader::u8() { return take(1)[0]; }

std::uint16_t ByteReader::u16() {
  const auto b = take(2);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint32_t ByteReader::u32() {
  const auto b = take(4);
  return std::uint32_t{b[0]} | (std::uint32_t{b[1]} << 8) | (std::uint32_t{b[2]} << 16) |
         (std::uint32_t{b[3]} << 24);
}

std::string ByteReader::string(std::size_t n) {
  const auto b = take(n);
  return std::string(b.begin(), b.end());
}

std::vector<float> ByteReader::f32(std::size_t count) {
  if (count > remaining() / 4) take(count * 4);  // throws with a size diagnostic
  const auto b = take(count * 4);
  std::vector<float> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto* p = b.data() + 4 * i;
    const std::uint32_t bits = std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) |
                               (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24);
    out[i] = std::bit_cast<float>(bits);
  }
  return out;
}

std::size_t element_count(std::span<const std::uint32_t> dims) {
  std::size_t n = 1;
  for (const auto d : dims) {
    if (d != 0 && n > std::numeric_limits<std::size_t>::max() / d) {
      throw FormatError("tensor dimensions overflow");
    }
    n *= d;
  }
  return n;
}

void write_tensor(ByteWriter& out, std::string_view name, std::span<const std::uint32_t> dims,
                  std::span<const float> data) {
  if (name.size() > std::numeric_limits<std::uint16_t>::max()) throw FormatError("tensor name too long");
  if (dims.size() > std::numeric_limits<std::uint8_t>::max()) throw FormatError("tensor rank too large");
  if (element_count(dims) != data.size()) {
    throw ShapeError("tensor " + std::string(name) + " payload does not match its dims");
  }
  out.u16(static_cast<std::uint16_t>(name.size()));
  out.bytes(name);
  out.u8(static_cast<std::uint8_t>(dims.size()));
  for (const auto d : dims) out.u32(d);
  out.f32(data);
}

TensorRecord read_tensor(ByteReader& in) {
  TensorRecord t;
  t.name = in.string(in.u16());
  const std::size_t rank = in.u8();
  for (std::size_t i = 0; i < rank; ++i) t.dims.push_back(in.u32());
  t.data = in.f32(element_count(t.dims));
  return t;
}

void expect_header(ByteReader& in, std::string_view magic, std::uint32_t version) {
  const std::string got = in.string(magic.size());
  if (got != magic) {
    throw SchemaError("bad magic: expected '" + std::string(magic) + "', found '" + got + "'");
  }
  const std::uint32_t v = in.u32();
  if (v != version) {
    throw FormatError("unsupported " + std::string(magic) + " format version " +
                      std::to_string(v) + " (this build reads version " +
                      std::to_string(version) + ")");
  }
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = in.tellg();
  in.seekg(0, std::ios::beg);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
  in.read(reinterpret_cast<char*>(bytes.data()), size);
  if (!in) throw Error("failed reading " + path.string());
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace sqzw
