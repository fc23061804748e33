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

// sqzw: synthesis, cost analysis, benchmarking and self-checks for flow
// vocoders.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sqzw/analyzer.hpp"
#include "sqzw/audio.hpp"
#include "sqzw/bench.hpp"
#include "sqzw/config.hpp"
#include "sqzw/errors.hpp"
#include "sqzw/model.hpp"
#include "sqzw/verify.hpp"
#include "sqzw/vocoder.hpp"

namespace {

using namespace sqzw;

struct ConfigSource {
  std::string preset_name;
  std::string config_path;

  ModelConfig resolve() const {
    if (!config_path.empty()) return load_config(config_path);
    if (preset_name.empty()) throw ConfigError("one of --preset or --config is required");
    return preset(preset_name);
  }
};

void add_config_source(CLI::App* cmd, ConfigSource& src) {
  auto* p = cmd->add_option("--preset", src.preset_name, "Named preset (waveglow, sw-128l, ...)");
  auto* c = cmd->add_option("--config", src.config_path, "Config file of key = value lines");
  p->excludes(c);
  c->excludes(p);
}

// Mel of a WAV file keeping only the frames that start inside
// `usable_samples`, so the synthesized length matches the input.
FeatureMap mel_for_model(const Waveform& wave, std::size_t usable_samples, std::size_t hop) {
  const FeatureMap mel = mel_spectrogram(wave);
  const std::size_t frames = usable_samples / hop;
  if (frames == 0) throw AudioFormatError("audio is shorter than one hop");
  FeatureMap out(mel.channels(), frames);
  for (std::size_t m = 0; m < mel.channels(); ++m) {
    const auto row = mel.row(m).first(frames);
    std::copy(row.begin(), row.end(), out.row(m).begin());
  }
  return out;
}

int run_synthesize(const std::string& model_path, const std::string& mel_path,
                   const std::string& wav_path, const std::string& out, double sigma,
                   std::uint64_t seed, unsigned threads) {
  const Model model = load_model(model_path);
  FeatureMap mel;
  if (!mel_path.empty()) {
    mel = load_mel(mel_path);
  } else {
    const Waveform wave = read_wav(wav_path);
    mel = mel_for_model(wave, wave.samples.size(), model.config.hop);
  }
  const auto start = std::chrono::steady_clock::now();
  Waveform result;
  result.sample_rate = model.config.sample_rate;
  result.samples = infer(mel, sigma, model, seed, threads);
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  write_wav(out, result);
  std::printf("wrote %zu samples to %s\nsamples/sec: %.1f\n", result.samples.size(), out.c_str(),
              static_cast<double>(result.samples.size()) / elapsed.count());
  return 0;
}

int run_analyze(const ConfigSource& src, double seconds, const std::string& format) {
  const ModelConfig config = src.resolve();
  const CostReport report = analyze(config, seconds);
  if (format == "records") {
    std::cout << format_records(report);
    return 0;
  }
  std::cout << format_table(report);
  const CostReport reference = analyze(preset("waveglow"), seconds);
  if (report.total_macs > 0) {
    std::printf("ratio vs waveglow: %.1fx fewer MACs\n", compare(reference, report));
  }
  return 0;
}

int run_benchmark(const std::string& model_path, const std::string& preset_name, double seconds,
                  unsigned threads, std::uint64_t seed) {
  const Model model = model_path.empty() ? random_model(preset(preset_name), seed) : load_model(model_path);
  BenchOptions opts;
  opts.seconds = seconds;
  opts.threads = threads;
  opts.seed = seed;
  const BenchResult r = benchmark(model, opts);
  std::printf("samples per run: %zu\n", r.samples);
  std::printf("runs (s):");
  for (double s : r.run_seconds) std::printf(" %.4f", s);
  std::printf("\nmedian: %.4f s  variance: %.3g s^2\n", r.median_seconds, r.variance);
  std::printf("samples/sec: %.1f\nreal-time factor: %.3f\n", r.samples_per_second, r.real_time_factor);
  return 0;
}

int run_roundtrip(const std::string& preset_name, std::uint64_t seed, bool inject_singular) {
  constexpr double kTolerance = 1e-3;
  const ModelConfig config = preset(preset_name);
  Model model = random_model(config, seed);
  if (inject_singular) {
    auto w = model.flows.front().mix.matrix();
    const std::size_t n = model.flows.front().mix.size();
    for (std::size_t j = 0; j < n; ++j) w[n + j] = w[j];  // row 1 := row 0
    model.flows.front().mix = InvertiblePointwise(n, std::move(w));
  }
  const RoundtripErrors e = roundtrip_errors(model, seed);
  const JacobianCheck j = jacobian_check(tiny_model(config, seed), seed);
  std::printf("inverse->forward max-abs error: %.3g\n", e.latent);
  std::printf("forward->inverse max-abs error: %.3g\n", e.audio);
  std::printf("tiny-config log-det: analytic %.6f numeric %.6f relative error %.3g\n", j.analytic,
              j.numeric, j.relative_error);
  const bool pass = e.latent < kTolerance && e.audio < kTolerance && j.relative_error < kTolerance;
  std::printf("%s\n", pass ? "PASS" : "FAIL");
  return pass ? 0 : 1;
}

int run_nll(const std::string& model_path, const std::string& wav_path, double sigma) {
  const Model model = load_model(model_path);
  const Waveform wave = read_wav(wav_path);
  const std::size_t hop = model.config.hop;
  const std::size_t usable = wave.samples.size() / hop * hop;
  const FeatureMap mel = mel_for_model(wave, usable, hop);
  const std::span<const float> audio(wave.samples.data(), usable);
  std::printf("%.9g\n", nll(audio, mel, sigma, model));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flow-vocoder inference engine and cost analyzer"};
  app.require_subcommand(1);

  std::string model_path, mel_path, wav_path, out_path, format = "table", preset_name;
  double sigma = 1.0, seconds = 1.0;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool inject_singular = false;
  ConfigSource src;

  auto* synth = app.add_subcommand("synthesize", "Mel (or WAV) to waveform");
  synth->add_option("--model", model_path, "Model file")->required();
  auto* mel_opt = synth->add_option("--mel", mel_path, "Mel file");
  auto* wav_opt = synth->add_option("--wav", wav_path, "Compute the mel from this WAV");
  mel_opt->excludes(wav_opt);
  wav_opt->excludes(mel_opt);
  synth->add_option("--out", out_path, "Output WAV")->required();
  synth->add_option("--sigma", sigma, "Latent standard deviation")->capture_default_str();
  synth->add_option("--seed", seed, "Latent seed")->capture_default_str();
  synth->add_option("--threads", threads, "Worker threads")->capture_default_str();

  auto* analyze_cmd = app.add_subcommand("analyze", "MAC and parameter report");
  add_config_source(analyze_cmd, src);
  analyze_cmd->add_option("--seconds", seconds, "Audio duration")->capture_default_str();
  analyze_cmd->add_option("--format", format, "table or records")
      ->check(CLI::IsMember({"table", "records"}))
      ->capture_default_str();

  double bench_seconds = 10.0;
  auto* bench = app.add_subcommand("benchmark", "Timed synthesis of synthetic conditioning");
  auto* bm = bench->add_option("--model", model_path, "Model file");
  auto* bp = bench->add_option("--preset", preset_name, "Preset with seeded random weights");
  bm->excludes(bp);
  bp->excludes(bm);
  bench->add_option("--seconds", bench_seconds, "Audio seconds per run")->capture_default_str();
  bench->add_option("--threads", threads, "Worker threads")->capture_default_str();
  bench->add_option("--seed", seed, "Weight and input seed")->capture_default_str();

  auto* rt = app.add_subcommand("roundtrip", "Bijectivity and log-det self-check");
  rt->add_option("--preset", preset_name, "Preset")->required();
  rt->add_option("--seed", seed, "Weight seed")->capture_default_str();
  rt->add_flag("--inject-singular", inject_singular, "Make the first 1x1 matrix singular");

  auto* nll_cmd = app.add_subcommand("nll", "Per-sample negative log-likelihood of a WAV");
  nll_cmd->add_option("--model", model_path, "Model file")->required();
  nll_cmd->add_option("--wav", wav_path, "Audio")->required();
  nll_cmd->add_option("--sigma", sigma, "Latent standard deviation")->capture_default_str();

  auto* gen = app.add_subcommand("gen-random-model", "Write a seeded random model");
  add_config_source(gen, src);
  gen->add_option("--seed", seed, "Weight seed")->capture_default_str();
  gen->add_option("--out", out_path, "Output model file")->required();

  auto* mel_cmd = app.add_subcommand("mel", "Log-mel spectrogram of a WAV");
  mel_cmd->add_option("--wav", wav_path, "Input WAV")->required();
  mel_cmd->add_option("--out", out_path, "Output mel file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*synth) {
      if (mel_path.empty() && wav_path.empty()) throw Error("synthesize needs --mel or --wav");
      return run_synthesize(model_path, mel_path, wav_path, out_path, sigma, seed, threads);
    }
    if (*analyze_cmd) return run_analyze(src, seconds, format);
    if (*bench) {
      if (model_path.empty() && preset_name.empty()) throw Error("benchmark needs --model or --preset");
      return run_benchmark(model_path, preset_name, bench_seconds, threads, seed);
    }
    if (*rt) return run_roundtrip(preset_name, seed, inject_singular);
    if (*nll_cmd) return run_nll(model_path, wav_path, sigma);
    if (*gen) {
      save_model(random_model(src.resolve(), seed), out_path);
      std::printf("wrote %s\n", out_path.c_str());
      return 0;
    }
    if (*mel_cmd) {
      const FeatureMap mel = mel_spectrogram(read_wav(wav_path));
      save_mel(out_path, mel);
      std::printf("wrote %zux%zu mel to %s\n", mel.channels(), mel.length(), out_path.c_str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
