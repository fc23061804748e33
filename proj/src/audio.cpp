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

#include "sqzw/audio.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <numbers>
#include <string>

#include <unsupported/Eigen/FFT>

#include "sqzw/container.hpp"
#include "sqzw/errors.hpp"

namespace sqzw {

namespace {

class WavReader {
 public:
  explicit WavReader(std::span<const std::uint8_t> b) : bytes_(b) {}

  std::span<const std::uint8_t> take(std::size_t n) {
    if (n > bytes_.size() - pos_) throw AudioFormatError("malformed WAV: truncated header or chunk");
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::string tag() {
    const auto s = take(4);
    return std::string(s.begin(), s.end());
  }
  std::uint16_t u16() {
    const auto s = take(2);
    return static_cast<std::uint16_t>(s[0] | (s[1] << 8));
  }
  std::uint32_t u32() {
    const auto s = take(4);
    return std::uint32_t{s[0]} | (std::uint32_t{s[1]} << 8) | (std::uint32_t{s[2]} << 16) |
           (std::uint32_t{s[3]} << 24);
  }
  bool at_end() const { return pos_ >= bytes_.size(); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) out.push_back(static_cast<std::uint8_t>((v >> s) & 0xFF));
}

}  // namespace

Waveform decode_wav(std::span<const std::uint8_t> bytes) {
  WavReader r(bytes);
  if (r.tag() != "RIFF") throw AudioFormatError("malformed WAV: missing RIFF tag");
  r.u32();
  if (r.tag() != "WAVE") throw AudioFormatError("malformed WAV: missing WAVE tag");

  bool have_fmt = false;
  std::uint16_t channels = 0, bits = 0;
  Waveform wave;
  while (!r.at_end()) {
    const std::string id = r.tag();
    const std::uint32_t size = r.u32();
    if (id == "fmt ") {
      if (size < 16) throw AudioFormatError("malformed WAV: fmt chunk too small");
      const std::uint16_t format = r.u16();
      channels = r.u16();
      wave.sample_rate = r.u32();
      r.u32();  // byte rate
      r.u16();  // block align
      bits = r.u16();
      r.take(size - 16 + (size & 1));
      if (format != 1) {
        throw AudioFormatError("unsupported WAV encoding: format tag " + std::to_string(format) +
                               " (only 16-bit PCM is supported)");
      }
      if (channels != 1) {
        throw AudioFormatError("unsupported WAV encoding: " + std::to_string(channels) +
                               " channels (only mono is supported)");
      }
      if (bits != 16) {
        throw AudioFormatError("unsupported WAV encoding: " + std::to_string(bits) +
                               "-bit samples (only 16-bit PCM is supported)");
      }
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw AudioFormatError("malformed WAV: data chunk before fmt chunk");
      if (size % 2 != 0) throw AudioFormatError("malformed WAV: odd-sized 16-bit data chunk");
      const auto payload = r.take(size);
      wave.samples.resize(size / 2);
      for (std::size_t i = 0; i < wave.samples.size(); ++i) {
        const auto v = static_cast<std::int16_t>(payload[2 * i] | (payload[2 * i + 1] << 8));
        wave.samples[i] = static_cast<float>(v) / 32768.0f;
      }
      return wave;
    } else {
      r.take(std::min<std::size_t>(size + (size & 1), r.remaining()));
    }
  }
  throw AudioFormatError("malformed WAV: no data chunk");
}

std::vector<std::uint8_t> encode_wav(const Waveform& wave) {
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(wave.samples.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_u32(out, 16);
  put_u16(out, 1);
  put_u16(out, 1);
  put_u32(out, wave.sample_rate);
  put_u32(out, wave.sample_rate * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32(out, data_bytes);
  for (const float s : wave.samples) {
    // Scaling by 32768 (not 32767) makes write-then-read exact to half an LSB
    // everywhere except +1.0, which clips to 32767.
    const float clamped = std::clamp(std::isnan(s) ? 0.0f : s, -1.0f, 1.0f);
    const long q = std::clamp(std::lround(static_cast<double>(clamped) * 32768.0), -32768L, 32767L);
    const auto v = static_cast<std::int16_t>(q);
    put_u16(out, static_cast<std::uint16_t>(v));
  }
  return out;
}

Waveform read_wav(const std::filesystem::path& path) { return decode_wav(read_file(path)); }

void write_wav(const std::filesystem::path& path, const Waveform& wave) {
  write_file(path, encode_wav(wave));
}

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  }
  return w;
}

namespace {
constexpr double kMelLinearStep = 200.0 / 3.0;  // Hz per mel below the break
constexpr double kMelBreakHz = 1000.0;
constexpr double kMelBreak = kMelBreakHz / kMelLinearStep;
const double kMelLogStep = std::log(6.4) / 27.0;
}  // namespace

double hz_to_mel(double hz) {
  if (hz >= kMelBreakHz) return kMelBreak + std::log(hz / kMelBreakHz) / kMelLogStep;
  return hz / kMelLinearStep;
}

double mel_to_hz(double mel) {
  if (mel >= kMelBreak) return kMelBreakHz * std::exp(kMelLogStep * (mel - kMelBreak));
  return mel * kMelLinearStep;
}

FeatureMap mel_filterbank(const MelConfig& cfg) {
  const std::size_t bins = cfg.n_fft / 2 + 1;
  const double lo = hz_to_mel(cfg.f_min), hi = hz_to_mel(cfg.f_max);
  std::vector<double> edges(cfg.n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(cfg.n_mels + 1));
  }
  FeatureMap fb(cfg.n_mels, bins);
  for (std::size_t m = 0; m < cfg.n_mels; ++m) {
    const double left = edges[m], centre = edges[m + 1], right = edges[m + 2];
    const double norm = 2.0 / (right - left);
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * cfg.sample_rate / static_cast<double>(cfg.n_fft);
      const double rising = (f - left) / (centre - left);
      const double falling = (right - f) / (right - centre);
      fb(m, k) = static_cast<float>(std::max(0.0, std::min(rising, falling)) * norm);
    }
  }
  return fb;
}

std::size_t frame_count(std::size_t samples, std::size_t hop) { return samples / hop + 1; }

namespace {

// Index into a signal of length n extended by repeated mirror reflection
// about its end samples (edge samples are not repeated).
std::size_t reflect_index(long long i, long long n) {
  if (n == 1) return 0;
  const long long period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  if (i >= n) i = period - i;
  return static_cast<std::size_t>(i);
}

}  // namespace

FeatureMap stft_magnitude(std::span<const float> samples, const MelConfig& cfg) {
  if (samples.empty()) throw AudioFormatError("cannot compute a spectrogram of empty audio");
  if (cfg.win_length > cfg.n_fft) throw ConfigError("win_length exceeds n_fft");
  const std::size_t frames = frame_count(samples.size(), cfg.hop);
  const std::size_t bins = cfg.n_fft / 2 + 1;
  // Shorter windows are centred inside the FFT frame.
  std::vector<double> window(cfg.n_fft, 0.0);
  const auto hann = hann_window(cfg.win_length);
  std::copy(hann.begin(), hann.end(), window.begin() + static_cast<std::ptrdiff_t>((cfg.n_fft - cfg.win_length) / 2));

  const auto n = static_cast<long long>(samples.size());
  const auto half = static_cast<long long>(cfg.n_fft / 2);
  FeatureMap out(bins, frames);
  Eigen::FFT<double> engine;
  engine.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<double> buf(cfg.n_fft);
  std::vector<std::complex<double>> spectrum;
  for (std::size_t f = 0; f < frames; ++f) {
    const long long start = static_cast<long long>(f * cfg.hop) - half;
    for (std::size_t k = 0; k < cfg.n_fft; ++k) {
      buf[k] = samples[reflect_index(start + static_cast<long long>(k), n)] * window[k];
    }
    engine.fwd(spectrum, buf);
    for (std::size_t k = 0; k < bins; ++k) out(k, f) = static_cast<float>(std::abs(spectrum[k]));
  }
  return out;
}

FeatureMap mel_spectrogram(const Waveform& wave, const MelConfig& cfg) {
  if (wave.sample_rate != cfg.sample_rate) {
    throw AudioFormatError("mel front end expects " + std::to_string(cfg.sample_rate) +
                           " Hz audio, got " + std::to_string(wave.sample_rate) + " Hz");
  }
  const FeatureMap spec = stft_magnitude(wave.samples, cfg);
  const FeatureMap fb = mel_filterbank(cfg);
  FeatureMap mel(cfg.n_mels, spec.length());
  std::vector<double> acc(spec.length());
  for (std::size_t m = 0; m < cfg.n_mels; ++m) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t k = 0; k < spec.channels(); ++k) {
      const double w = fb(m, k);
      if (w == 0.0) continue;
      const auto row = spec.row(k);
      for (std::size_t t = 0; t < row.size(); ++t) acc[t] += w * row[t];
    }
    auto dst = mel.row(m);
    for (std::size_t t = 0; t < acc.size(); ++t) {
      dst[t] = static_cast<float>(std::log(std::max(acc[t], cfg.log_floor)));
    }
  }
  return mel;
}

namespace {
constexpr std::string_view kMelMagic = "SQZM";
}

std::vector<std::uint8_t> serialize_mel(const FeatureMap& mel) {
  ByteWriter w;
  w.bytes(kMelMagic);
  w.u32(kMelFormatVersion);
  w.u32(1);
  const std::uint32_t dims[] = {static_cast<std::uint32_t>(mel.channels()),
                                static_cast<std::uint32_t>(mel.length())};
  write_tensor(w, "mel", dims, mel.data());
  return std::move(w).take();
}

FeatureMap deserialize_mel(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "mel file");
  expect_header(r, kMelMagic, kMelFormatVersion);
  const std::uint32_t count = r.u32();
  if (count != 1) throw SchemaError("mel file holds " + std::to_string(count) + " tensors, expected 1");
  TensorRecord t = read_tensor(r);
  if (t.name != "mel") throw SchemaError("unknown tensor '" + t.name + "' in mel file");
  if (t.dims.size() != 2) throw SchemaError("mel tensor must have rank 2");
  if (!r.at_end()) throw FormatError("corrupt mel file: trailing bytes");
  return FeatureMap(t.dims[0], t.dims[1], std::move(t.data));
}

void save_mel(const std::filesystem::path& path, const FeatureMap& mel) {
  write_file(path, serialize_mel(mel));
}

FeatureMap load_mel(const std::filesystem::path& path) { return deserialize_mel(read_file(path)); }

}  // namespace sqzw
