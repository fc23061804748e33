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

#include "sqzw/analyzer.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "sqzw/errors.hpp"
#include "sqzw/model.hpp"

namespace sqzw {

const char* to_string(LayerClass c) {
  switch (c) {
    case LayerClass::kStart: return "start";
    case LayerClass::kInLayer: return "in_layer";
    case LayerClass::kCondLayer: return "cond_layer";
    case LayerClass::kResSkipLayer: return "res_skip_layer";
    case LayerClass::kEnd: return "end";
    case LayerClass::kInv1x1: return "inv1x1";
    case LayerClass::kUpsample: return "upsample";
  }
  return "?";
}

double CostReport::share(LayerClass c) const {
  return total_macs == 0 ? 0.0 : static_cast<double>(macs(c)) / static_cast<double>(total_macs);
}

std::uint64_t macs_dense_conv(const ConvSpec& spec, std::size_t output_length) {
  return std::uint64_t{spec.kernel_size} * spec.in_channels * spec.out_channels * output_length;
}

std::uint64_t macs_separable_conv(const ConvSpec& spec, std::size_t input_length) {
  return std::uint64_t{spec.kernel_size} * spec.in_channels * input_length +
         std::uint64_t{spec.in_channels} * spec.out_channels * input_length;
}

std::uint64_t conv_params(const ConvSpec& s) {
  if (s.separable) {
    return std::uint64_t{s.kernel_size} * s.in_channels + s.in_channels +
           std::uint64_t{s.in_channels} * s.out_channels + s.out_channels;
  }
  return std::uint64_t{s.kernel_size} * s.in_channels * s.out_channels + s.out_channels;
}

std::size_t frames_for_seconds(const ModelConfig& config, double seconds) {
  if (!(seconds > 0.0)) throw ConfigError("audio duration must be positive");
  return static_cast<std::size_t>(std::floor(seconds * config.sample_rate / config.hop)) + 1;
}

namespace {

void add(CostReport& r, std::string name, LayerClass c, std::uint64_t macs, std::uint64_t params) {
  r.class_macs[static_cast<std::size_t>(c)] += macs;
  r.class_params[static_cast<std::size_t>(c)] += params;
  r.total_macs += macs;
  r.total_params += params;
  r.layers.push_back({std::move(name), c, macs, params});
}

std::uint64_t conv_macs(const ConvSpec& s, std::size_t length) {
  return s.separable ? macs_separable_conv(s, length) : macs_dense_conv(s, s.output_length(length));
}

}  // namespace

CostReport analyze_frames(const ModelConfig& config, std::size_t frames) {
  config.validate();
  if (frames == 0) throw ConfigError("cannot analyze zero frames");
  CostReport r;
  r.frames = frames;
  const std::size_t samples = frames * config.hop;
  if (samples % config.group_size != 0) {
    throw ConfigError("frames * hop is not a multiple of group_size");
  }
  const std::size_t length = samples / config.group_size;
  const std::size_t cond_length = config.cond_before_upsample ? frames : length;

  if (config.upsample_kernel > 0) {
    const std::uint64_t c = config.n_mels;
    add(r, "upsample", LayerClass::kUpsample, c * c * config.upsample_kernel * frames,
        c * c * config.upsample_kernel + c);
  }
  const auto channels = config.flow_channels();
  for (std::size_t i = 0; i < config.n_flows; ++i) {
    const std::string p = "flow" + std::to_string(i);
    const WnShape s = config.wn_shape(i);
    const std::uint64_t c = channels[i];
    add(r, p + ".inv1x1", LayerClass::kInv1x1, c * c * length, c * c);
    add(r, p + ".wn.start", LayerClass::kStart, conv_macs(s.start_spec(), length),
        conv_params(s.start_spec()));
    for (std::size_t j = 0; j < s.layers; ++j) {
      const ConvSpec in = s.in_layer_spec(j);
      add(r, p + ".wn.in" + std::to_string(j), LayerClass::kInLayer, conv_macs(in, length),
          conv_params(in));
    }
    add(r, p + ".wn.cond", LayerClass::kCondLayer, conv_macs(s.cond_spec(), cond_length),
        conv_params(s.cond_spec()));
    for (std::size_t j = 0; j < s.layers; ++j) {
      const ConvSpec rs = s.res_skip_spec(j);
      add(r, p + ".wn.res_skip" + std::to_string(j), LayerClass::kResSkipLayer,
          conv_macs(rs, length), conv_params(rs));
    }
    add(r, p + ".wn.end", LayerClass::kEnd, conv_macs(s.end_spec(), length),
        conv_params(s.end_spec()));
  }
  r.seconds = static_cast<double>(samples) / config.sample_rate;
  r.gmacs_per_second = static_cast<double>(r.total_macs) / r.seconds / 1e9;
  return r;
}

CostReport analyze(const ModelConfig& config, double seconds) {
  CostReport r = analyze_frames(config, frames_for_seconds(config, seconds));
  r.seconds = seconds;
  r.gmacs_per_second = static_cast<double>(r.total_macs) / seconds / 1e9;
  return r;
}

std::uint64_t count_params(const ModelConfig& config) {
  std::uint64_t n = 0;
  for (const auto& t : tensor_schema(config)) n += t.numel();
  return n;
}

double compare(const CostReport& a, const CostReport& b) {
  if (b.total_macs == 0) throw Error("compare: reference report has zero MACs");
  return static_cast<double>(a.total_macs) / static_cast<double>(b.total_macs);
}

std::string format_table(const CostReport& report) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-16s %16s %8s %14s\n", "class", "MACs", "share", "params");
  out << line;
  for (std::size_t i = 0; i < kLayerClassCount; ++i) {
    const auto c = static_cast<LayerClass>(i);
    if (report.macs(c) == 0 && report.params(c) == 0) continue;
    std::snprintf(line, sizeof line, "%-16s %16llu %7.2f%% %14llu\n", to_string(c),
                  static_cast<unsigned long long>(report.macs(c)), 100.0 * report.share(c),
                  static_cast<unsigned long long>(report.params(c)));
    out << line;
  }
  std::snprintf(line, sizeof line, "%-16s %16llu %7.2f%% %14llu\n", "total",
                static_cast<unsigned long long>(report.total_macs), 100.0,
                static_cast<unsigned long long>(report.total_params));
  out << line;
  std::snprintf(line, sizeof line, "audio: %.3f s (%zu mel frames)\nGMACs per second: %.3f\nparams: %.2f M\n",
                report.seconds, report.frames, report.gmacs_per_second,
                static_cast<double>(report.total_params) / 1e6);
  out << line;
  return out.str();
}

std::string format_records(const CostReport& report) {
  std::ostringstream out;
  out << "name,class,macs,params\n";
  for (const auto& l : report.layers) {
    out << l.name << ',' << to_string(l.layer_class) << ',' << l.macs << ',' << l.params << '\n';
  }
  return out.str();
}

}  // namespace sqzw
