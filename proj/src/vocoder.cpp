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

#include "sqzw/vocoder.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "sqzw/errors.hpp"
#include "sqzw/flow.hpp"
#include "sqzw/rng.hpp"

namespace sqzw {

FeatureMap group_audio(std::span<const float> wave, std::size_t group) {
  if (group == 0 || wave.size() % group != 0 || wave.empty()) {
    throw ShapeError("group_audio: " + std::to_string(wave.size()) +
                     " samples are not a positive multiple of group size " + std::to_string(group));
  }
  const std::size_t length = wave.size() / group;
  FeatureMap out(group, length);
  for (std::size_t t = 0; t < length; ++t) {
    for (std::size_t c = 0; c < group; ++c) out(c, t) = wave[t * group + c];
  }
  return out;
}

std::vector<float> ungroup_audio(const FeatureMap& grouped) {
  std::vector<float> wave(grouped.size());
  const std::size_t group = grouped.channels();
  for (std::size_t c = 0; c < group; ++c) {
    const auto row = grouped.row(c);
    for (std::size_t t = 0; t < row.size(); ++t) wave[t * group + c] = row[t];
  }
  return wave;
}

AlignedMel align_mel(const FeatureMap& mel, const Model& model, std::size_t length) {
  const ModelConfig& cfg = model.config;
  if (mel.channels() != cfg.n_mels) {
    throw ShapeError("mel has " + std::to_string(mel.channels()) + " channels, model expects " +
                     std::to_string(cfg.n_mels));
  }
  if (mel.length() == 0) throw ShapeError("mel has no frames");
  if (model.upsampler) {
    const FeatureMap up = conv_transpose1d(mel, model.upsampler->spec, model.upsampler->weight,
                                           model.upsampler->bias);
    const std::size_t group = cfg.group_size;
    if (up.length() < length * group) {
      throw ShapeError("upsampled mel covers " + std::to_string(up.length()) +
                       " samples, window needs " + std::to_string(length * group));
    }
    FeatureMap grouped(cfg.n_mels * group, length);
    for (std::size_t m = 0; m < cfg.n_mels; ++m) {
      const auto src = up.row(m);
      for (std::size_t g = 0; g < group; ++g) {
        auto dst = grouped.row(m * group + g);
        for (std::size_t t = 0; t < length; ++t) dst[t] = src[t * group + g];
      }
    }
    return {std::move(grouped), false, length};
  }
  if (mel.length() > length) {
    throw ShapeError("mel has " + std::to_string(mel.length()) +
                     " frames, longer than the window's " + std::to_string(length) + " steps");
  }
  if (cfg.cond_before_upsample) return {mel, true, length};
  return {upsample_nearest(mel, length), false, length};
}

FeatureMap flow_conditioning(const AlignedMel& aligned, const Model& model, std::size_t flow) {
  FeatureMap cond = model.flows.at(flow).wn.cond(aligned.features);
  if (aligned.upsample_after) return upsample_nearest(cond, aligned.length);
  return cond;
}

FeatureMap prepare_conditioning(const FeatureMap& mel, const Model& model, std::size_t flow,
                                std::size_t length) {
  return flow_conditioning(align_mel(mel, model, length), model, flow);
}

FeatureMap LatentVector::block(std::size_t i) const {
  std::size_t offset = 0;
  for (std::size_t k = 0; k < i; ++k) offset += block_channels.at(k) * length;
  const std::size_t n = block_channels.at(i) * length;
  const auto first = values.begin() + static_cast<std::ptrdiff_t>(offset);
  return FeatureMap(block_channels[i], length,
                    std::vector<float>(first, first + static_cast<std::ptrdiff_t>(n)));
}

LatentVector LatentVector::from_blocks(std::span<const FeatureMap> blocks) {
  LatentVector z;
  if (blocks.empty()) return z;
  z.length = blocks.front().length();
  for (const auto& b : blocks) {
    if (b.length() != z.length) throw ShapeError("latent blocks differ in length");
    z.block_channels.push_back(b.channels());
    z.values.insert(z.values.end(), b.data().begin(), b.data().end());
  }
  return z;
}

LatentVector latent_layout(const ModelConfig& config, std::size_t length) {
  LatentVector z;
  z.length = length;
  z.block_channels.assign(config.early_output_count(), config.n_early_size);
  z.block_channels.push_back(config.final_channels());
  z.values.assign(std::size_t{config.group_size} * length, 0.0f);
  return z;
}

LatentVector sample_latent(const ModelConfig& config, std::size_t length, double sigma,
                           std::uint64_t seed, std::uint64_t window) {
  if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
  LatentVector z = latent_layout(config, length);
  const CounterRng rng(seed, window);
  for (std::size_t i = 0; i < z.values.size(); ++i) {
    z.values[i] = static_cast<float>(sigma * rng.gaussian(i));
  }
  return z;
}

ForwardResult forward(std::span<const float> audio, const FeatureMap& mel, const Model& model) {
  const ModelConfig& cfg = model.config;
  FeatureMap x = group_audio(audio, cfg.group_size);
  const std::size_t length = x.length();
  std::vector<FeatureMap> blocks;
  double log_det = 0.0;
  if (cfg.n_flows > 0) {
    const AlignedMel aligned = align_mel(mel, model, length);
    for (std::size_t i = 0; i < cfg.n_flows; ++i) {
      if (cfg.emits_early_before(i)) {
        blocks.push_back(x.slice_channels(0, cfg.n_early_size));
        x = x.slice_channels(cfg.n_early_size, x.channels() - cfg.n_early_size);
      }
      Transformed step =
          flow_step_forward(x, flow_conditioning(aligned, model, i), model.flows[i], cfg.variant);
      x = std::move(step.value);
      log_det += step.log_det;
    }
  }
  blocks.push_back(std::move(x));
  return {LatentVector::from_blocks(blocks), log_det};
}

std::vector<float> inverse(const LatentVector& z, const FeatureMap& mel, const Model& model) {
  const ModelConfig& cfg = model.config;
  const LatentVector layout = latent_layout(cfg, z.length);
  if (z.block_channels != layout.block_channels || z.values.size() != layout.values.size()) {
    throw ShapeError("latent layout does not match the model's early-output schedule");
  }
  std::size_t next_block = z.block_count() - 1;
  FeatureMap x = z.block(next_block);
  if (cfg.n_flows > 0) {
    const AlignedMel aligned = align_mel(mel, model, z.length);
    for (std::size_t i = cfg.n_flows; i-- > 0;) {
      x = flow_step_inverse(x, flow_conditioning(aligned, model, i), model.flows[i], cfg.variant);
      if (cfg.emits_early_before(i)) x = concat_channels(z.block(--next_block), x);
    }
  }
  return ungroup_audio(x);
}

std::vector<float> infer(const FeatureMap& mel, double sigma, const Model& model,
                         std::uint64_t seed, unsigned threads) {
  const ModelConfig& cfg = model.config;
  if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
  if (mel.channels() != cfg.n_mels) {
    throw ShapeError("mel has " + std::to_string(mel.channels()) + " channels, model expects " +
                     std::to_string(cfg.n_mels));
  }
  if (mel.length() == 0) throw ShapeError("mel has no frames");
  const std::size_t frames_per_window = cfg.window_frames;
  const std::size_t windows = (mel.length() + frames_per_window - 1) / frames_per_window;
  const std::size_t window_samples = cfg.window_samples();
  std::vector<float> out(windows * window_samples);

  auto run_window = [&](std::size_t w) {
    FeatureMap chunk(cfg.n_mels, frames_per_window);
    const std::size_t first = w * frames_per_window;
    const std::size_t count = std::min(frames_per_window, mel.length() - first);
    for (std::size_t m = 0; m < cfg.n_mels; ++m) {
      const auto src = mel.row(m).subspan(first, count);
      std::copy(src.begin(), src.end(), chunk.row(m).begin());
    }
    const LatentVector z = sample_latent(cfg, cfg.window_length(), sigma, seed, w);
    const std::vector<float> audio = inverse(z, chunk, model);
    std::copy(audio.begin(), audio.end(),
              out.begin() + static_cast<std::ptrdiff_t>(w * window_samples));
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(windows)));
  if (workers == 1) {
    for (std::size_t w = 0; w < windows; ++w) run_window(w);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < workers; ++i) {
      pool.emplace_back([&] {
        for (std::size_t w = next++; w < windows; w = next++) {
          try {
            run_window(w);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
  }
  out.resize(mel.length() * cfg.hop);
  return out;
}

double nll(std::span<const float> audio, const FeatureMap& mel, double sigma, const Model& model) {
  if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
  const ForwardResult r = forward(audio, mel, model);
  double sum_sq = 0.0;
  for (const float v : r.z.values) sum_sq += static_cast<double>(v) * v;
  return (sum_sq / (2.0 * sigma * sigma) - r.log_det) / static_cast<double>(audio.size());
}

}  // namespace sqzw
