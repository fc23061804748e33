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

// WAV I/O and the log-mel front end (1024-point STFT, hop 256, 80 Slaney mel
// bands between 0 and 8 kHz, natural log with a 1e-5 floor).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "sqzw/feature_map.hpp"

namespace sqzw {

struct Waveform {
  std::vector<float> samples;  // in [-1, 1]
  std::uint32_t sample_rate = 22050;
};

// 16-bit PCM mono only. Samples are scaled by 1/32768 on read; on write they
// are clamped to [-1, 1], scaled by 32768, rounded and clipped to 32767.
Waveform decode_wav(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_wav(const Waveform& wave);
Waveform read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, const Waveform& wave);

struct MelConfig {
  std::uint32_t sample_rate = 22050;
  std::size_t n_fft = 1024;
  std::size_t hop = 256;
  std::size_t win_length = 1024;
  std::size_t n_mels = 80;
  double f_min = 0.0;
  double f_max = 8000.0;
  double log_floor = 1e-5;
};

// Periodic Hann window of length n.
std::vector<double> hann_window(std::size_t n);

// Slaney mel scale: linear below 1 kHz, logarithmic above.
double hz_to_mel(double hz);
double mel_to_hz(double mel);

// n_mels x (n_fft / 2 + 1) triangular filters, each scaled to unit area in
// the mel domain (2 / bandwidth in Hz).
FeatureMap mel_filterbank(const MelConfig& config = {});

// floor(samples / hop) + 1 centred frames.
std::size_t frame_count(std::size_t samples, std::size_t hop);

// (n_fft / 2 + 1) x frames magnitude STFT of the reflect-padded signal.
FeatureMap stft_magnitude(std::span<const float> samples, const MelConfig& config = {});

FeatureMap mel_spectrogram(const Waveform& wave, const MelConfig& config = {});

inline constexpr std::uint32_t kMelFormatVersion = 1;

std::vector<std::uint8_t> serialize_mel(const FeatureMap& mel);
FeatureMap deserialize_mel(std::span<const std::uint8_t> bytes);
void save_mel(const std::filesystem::path& path, const FeatureMap& mel);
FeatureMap load_mel(const std::filesystem::path& path);

}  // namespace sqzw
