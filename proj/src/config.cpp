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

#include "sqzw/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "sqzw/errors.hpp"

namespace sqzw {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

void ModelConfig::validate() const {
  require(sample_rate > 0, "sample_rate must be positive");
  require(group_size >= 2 && group_size % 2 == 0,
          "group_size must be even and >= 2, got " + std::to_string(group_size));
  require(n_mels > 0, "n_mels must be positive");
  require(hop > 0, "hop must be positive");
  require(window_frames > 0, "window_frames must be positive");
  require(window_samples() % group_size == 0,
          "window_frames * hop must be divisible by group_size");
  require(!(variant == Variant::kWaveGlow && cond_before_upsample),
          "the waveglow variant conditions after upsampling (cond_before_upsample must be 0)");
  require(!(cond_before_upsample && upsample_kernel > 0),
          "cond_before_upsample requires nearest-neighbour upsampling (upsample_kernel = 0)");
  require(upsample_kernel == 0 || upsample_kernel >= hop,
          "upsample_kernel must be 0 or >= hop");
  if (n_flows == 0) return;
  require(wn_layers > 0, "wn_layers must be positive");
  require(wn_width > 0, "wn_width must be positive");
  require(wn_kernel % 2 == 1, "wn_kernel must be odd");
  require(variant == Variant::kSqueezeWave || wn_layers <= 30, "too many dilated WN layers");
  if (n_early_every > 0) {
    std::size_t c = group_size;
    for (std::size_t i = 1; i < n_flows; ++i) {
      if (i % n_early_every != 0) continue;
      require(n_early_size > 0 && n_early_size % 2 == 0,
              "n_early_size must be even and positive when early outputs are enabled");
      require(c >= 2 * std::size_t{n_early_size},
              "early output before flow " + std::to_string(i) + " needs " +
                  std::to_string(2 * n_early_size) + " live channels, only " +
                  std::to_string(c) + " remain");
      c -= n_early_size;
    }
  }
}

std::size_t ModelConfig::cond_channels() const {
  return upsample_kernel > 0 ? std::size_t{n_mels} * group_size : n_mels;
}

bool ModelConfig::emits_early_before(std::size_t flow) const {
  return n_early_every > 0 && flow > 0 && flow % n_early_every == 0;
}

std::vector<std::size_t> ModelConfig::flow_channels() const {
  std::vector<std::size_t> out;
  std::size_t c = group_size;
  for (std::size_t i = 0; i < n_flows; ++i) {
    if (emits_early_before(i)) c -= n_early_size;
    out.push_back(c);
  }
  return out;
}

std::size_t ModelConfig::final_channels() const {
  return n_flows == 0 ? group_size : flow_channels().back();
}

std::size_t ModelConfig::early_output_count() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < n_flows; ++i) n += emits_early_before(i) ? 1 : 0;
  return n;
}

WnShape ModelConfig::wn_shape(std::size_t flow) const {
  WnShape s;
  s.variant = variant;
  s.flow_channels = flow_channels().at(flow);
  s.width = wn_width;
  s.layers = wn_layers;
  s.kernel = wn_kernel;
  s.cond_channels = cond_channels();
  return s;
}

namespace {

ModelConfig make_waveglow() {
  ModelConfig c;
  c.group_size = 8;
  c.n_flows = 12;
  c.n_early_every = 4;
  c.n_early_size = 2;
  c.wn_layers = 8;
  c.wn_width = 256;
  c.wn_kernel = 3;
  c.variant = Variant::kWaveGlow;
  c.cond_before_upsample = false;
  c.upsample_kernel = 1024;
  c.window_frames = 63;
  return c;
}

// SqueezeWave family: 64 mel frames (16384 samples) per window, reshaped to
// L = 16384 / group_size time steps; early outputs keep WaveGlow's schedule
// with a quarter of the grouped channels per emission.
ModelConfig make_squeezewave(std::uint32_t length, std::uint32_t width) {
  ModelConfig c;
  c.group_size = 16384 / length;
  c.n_flows = 12;
  c.n_early_every = 4;
  c.n_early_size = c.group_size / 4;
  c.wn_layers = 8;
  c.wn_width = width;
  c.wn_kernel = 3;
  c.variant = Variant::kSqueezeWave;
  c.cond_before_upsample = length > 64;
  c.upsample_kernel = 0;
  c.window_frames = 64;
  return c;
}

std::string canonical_name(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) {
    return ch == '_' ? '-' : static_cast<char>(std::tolower(ch));
  });
  return s;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"waveglow", "sw-128l", "sw-128s", "sw-64l",
                                                 "sw-64s"};
  return names;
}

ModelConfig preset(std::string_view name) {
  const std::string n = canonical_name(name);
  if (n == "waveglow") return make_waveglow();
  if (n == "sw-128l") return make_squeezewave(128, 256);
  if (n == "sw-128s") return make_squeezewave(128, 128);
  if (n == "sw-64l") return make_squeezewave(64, 256);
  if (n == "sw-64s") return make_squeezewave(64, 128);
  std::string valid;
  for (const auto& p : preset_names()) valid += (valid.empty() ? "" : ", ") + p;
  throw ConfigError("unknown preset '" + std::string(name) + "' (valid presets: " + valid + ")");
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::uint32_t parse_u32(const std::string& key, const std::string& value) {
  std::uint32_t out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError("config key '" + key + "': '" + value + "' is not an unsigned integer");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true") return true;
  if (value == "0" || value == "false") return false;
  throw ConfigError("config key '" + key + "': '" + value + "' is not a boolean");
}

}  // namespace

ModelConfig parse_config(std::string_view text) {
  ModelConfig c;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(stripped).substr(0, eq));
    const std::string value = trim(std::string_view(stripped).substr(eq + 1));
    if (key == "sample_rate") c.sample_rate = parse_u32(key, value);
    else if (key == "group_size") c.group_size = parse_u32(key, value);
    else if (key == "n_flows") c.n_flows = parse_u32(key, value);
    else if (key == "n_early_every") c.n_early_every = parse_u32(key, value);
    else if (key == "n_early_size") c.n_early_size = parse_u32(key, value);
    else if (key == "wn_layers") c.wn_layers = parse_u32(key, value);
    else if (key == "wn_width") c.wn_width = parse_u32(key, value);
    else if (key == "wn_kernel") c.wn_kernel = parse_u32(key, value);
    else if (key == "variant") {
      if (value == "waveglow" || value == "0") c.variant = Variant::kWaveGlow;
      else if (value == "squeezewave" || value == "1") c.variant = Variant::kSqueezeWave;
      else throw ConfigError("config key 'variant': expected waveglow or squeezewave");
    } else if (key == "cond_before_upsample") c.cond_before_upsample = parse_bool(key, value);
    else if (key == "n_mels") c.n_mels = parse_u32(key, value);
    else if (key == "hop") c.hop = parse_u32(key, value);
    else if (key == "upsample_kernel") c.upsample_kernel = parse_u32(key, value);
    else if (key == "window_frames") c.window_frames = parse_u32(key, value);
    else throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  c.validate();
  return c;
}

ModelConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string format_config(const ModelConfig& c) {
  std::ostringstream out;
  out << "sample_rate = " << c.sample_rate << '\n'
      << "group_size = " << c.group_size << '\n'
      << "n_flows = " << c.n_flows << '\n'
      << "n_early_every = " << c.n_early_every << '\n'
      << "n_early_size = " << c.n_early_size << '\n'
      << "wn_layers = " << c.wn_layers << '\n'
      << "wn_width = " << c.wn_width << '\n'
      << "wn_kernel = " << c.wn_kernel << '\n'
      << "variant = " << to_string(c.variant) << '\n'
      << "cond_before_upsample = " << (c.cond_before_upsample ? "true" : "false") << '\n'
      << "n_mels = " << c.n_mels << '\n'
      << "hop = " << c.hop << '\n'
      << "upsample_kernel = " << c.upsample_kernel << '\n'
      << "window_frames = " << c.window_frames << '\n';
  return out.str();
}

}  // namespace sqzw
