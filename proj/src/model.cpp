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

#include "sqzw/model.hpp"

#include <Eigen/Dense>
#include <map>
#include <type_traits>
#include <utility>

#include "sqzw/container.hpp"
#include "sqzw/errors.hpp"
#include "sqzw/rng.hpp"

namespace sqzw {

namespace {

constexpr std::string_view kModelMagic = "SQZW";
constexpr double kInitStddev = 0.05;
// The WN end layer sets log_s. At 0.05 the per-flow scales compound over
// twelve flows (wide WNs reach |log_s| ~ 1) and the roundtrip loses float
// precision, so it is drawn five times narrower.
constexpr double kEndInitStddev = 0.01;

std::uint32_t u32(std::size_t v) { return static_cast<std::uint32_t>(v); }

std::string flow_prefix(std::size_t i) { return "flow" + std::to_string(i); }

// Appends the tensor infos of one conv layer, in canonical order.
void conv_infos(std::vector<TensorInfo>& out, const std::string& name, const ConvSpec& s) {
  if (s.separable) {
    out.push_back({name + ".dw_weight", {u32(s.in_channels), u32(s.kernel_size)}});
    out.push_back({name + ".dw_bias", {u32(s.in_channels)}});
    out.push_back({name + ".pw_weight", {u32(s.out_channels), u32(s.in_channels)}});
    out.push_back({name + ".pw_bias", {u32(s.out_channels)}});
  } else {
    out.push_back({name + ".weight", {u32(s.out_channels), u32(s.in_channels), u32(s.kernel_size)}});
    out.push_back({name + ".bias", {u32(s.out_channels)}});
  }
}

// Storage of one conv layer in the same order as conv_infos.
template <class Layer>
auto conv_storage(Layer& layer) {
  using Vec = std::conditional_t<std::is_const_v<Layer>, const std::vector<float>, std::vector<float>>;
  auto& w = layer.weights;
  if (layer.spec.separable) {
    return std::vector<Vec*>{&w.dw_weight, &w.dw_bias, &w.pw_weight, &w.pw_bias};
  }
  return std::vector<Vec*>{&w.weight, &w.bias};
}

// Calls fn(name, spec, layer) for every conv layer of a flow, canonical order.
template <class Wn, class Fn>
void for_each_conv(Wn& wn, const std::string& prefix, Fn&& fn) {
  fn(prefix + ".wn.start", wn.start);
  for (std::size_t j = 0; j < wn.in_layers.size(); ++j) {
    fn(prefix + ".wn.in" + std::to_string(j), wn.in_layers[j]);
  }
  fn(prefix + ".wn.cond", wn.cond);
  for (std::size_t j = 0; j < wn.res_skip.size(); ++j) {
    fn(prefix + ".wn.res_skip" + std::to_string(j), wn.res_skip[j]);
  }
  fn(prefix + ".wn.end", wn.end);
}

std::optional<Upsampler> zero_upsampler(const ModelConfig& c) {
  if (c.upsample_kernel == 0) return std::nullopt;
  Upsampler u;
  u.spec = {c.n_mels, c.n_mels, c.upsample_kernel, c.hop};
  u.weight.assign(std::size_t{c.n_mels} * c.n_mels * c.upsample_kernel, 0.0f);
  u.bias.assign(c.n_mels, 0.0f);
  return u;
}

}  // namespace

std::size_t TensorInfo::numel() const { return element_count(dims); }

void Model::validate() const {
  config.validate();
  if (flows.size() != config.n_flows) {
    throw ShapeError("model has " + std::to_string(flows.size()) + " flows, config says " +
                     std::to_string(config.n_flows));
  }
  const auto channels = config.flow_channels();
  for (std::size_t i = 0; i < flows.size(); ++i) {
    if (flows[i].mix.size() != channels[i]) {
      throw ShapeError("flow " + std::to_string(i) + " 1x1 matrix is " +
                       std::to_string(flows[i].mix.size()) + " wide, expected " +
                       std::to_string(channels[i]));
    }
    flows[i].wn.validate(config.wn_shape(i));
  }
  const auto expected = zero_upsampler(config);
  if (expected.has_value() != upsampler.has_value()) {
    throw ShapeError("upsampler presence disagrees with upsample_kernel");
  }
  if (upsampler && (!(upsampler->spec == expected->spec) ||
                    upsampler->weight.size() != expected->weight.size() ||
                    upsampler->bias.size() != expected->bias.size())) {
    throw ShapeError("upsampler weights do not match the config");
  }
}

Model identity_model(const ModelConfig& config) {
  config.validate();
  Model m;
  m.config = config;
  const auto channels = config.flow_channels();
  for (std::size_t i = 0; i < config.n_flows; ++i) {
    m.flows.push_back({InvertiblePointwise::identity(channels[i]),
                       WnWeights::zeros(config.wn_shape(i))});
  }
  m.upsampler = zero_upsampler(config);
  return m;
}

namespace {

std::vector<float> random_orthogonal(std::size_t n, const CounterRng& rng) {
  Eigen::MatrixXd g(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::uint64_t k = 0;
  for (Eigen::Index r = 0; r < g.rows(); ++r) {
    for (Eigen::Index c = 0; c < g.cols(); ++c) g(r, c) = rng.gaussian(k++);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index c = 0; c < q.cols(); ++c) {
    if (r(c, c) < 0) q.col(c) *= -1.0;
  }
  if (q.determinant() < 0) q.col(0) *= -1.0;
  std::vector<float> out(n * n);
  for (std::size_t r2 = 0; r2 < n; ++r2) {
    for (std::size_t c = 0; c < n; ++c) {
      out[r2 * n + c] = static_cast<float>(q(static_cast<Eigen::Index>(r2), static_cast<Eigen::Index>(c)));
    }
  }
  return out;
}

void fill_gaussian(std::vector<float>& v, const CounterRng& rng, double stddev) {
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<float>(stddev * rng.gaussian(i));
}

}  // namespace

Model random_model(const ModelConfig& config, std::uint64_t seed) {
  Model m = identity_model(config);
  std::uint64_t stream = 0;
  const auto channels = config.flow_channels();
  for (std::size_t i = 0; i < m.flows.size(); ++i) {
    m.flows[i].mix = InvertiblePointwise(channels[i], random_orthogonal(channels[i], CounterRng(seed, stream++)));
    for_each_conv(m.flows[i].wn, flow_prefix(i), [&](const std::string& name, ConvLayer& layer) {
      auto& w = layer.weights;
      const double stddev = name.ends_with(".wn.end") ? kEndInitStddev : kInitStddev;
      // Biases stay zero; each weight tensor gets its own stream.
      for (auto* t : {&w.weight, &w.dw_weight, &w.pw_weight}) {
        if (!t->empty()) fill_gaussian(*t, CounterRng(seed, stream), stddev);
        ++stream;
      }
    });
  }
  if (m.upsampler) fill_gaussian(m.upsampler->weight, CounterRng(seed, stream++), kInitStddev);
  return m;
}

std::vector<TensorInfo> tensor_schema(const ModelConfig& config) {
  config.validate();
  std::vector<TensorInfo> out;
  const auto channels = config.flow_channels();
  for (std::size_t i = 0; i < config.n_flows; ++i) {
    const std::string p = flow_prefix(i);
    const WnShape s = config.wn_shape(i);
    out.push_back({p + ".inv1x1.W", {u32(channels[i]), u32(channels[i])}});
    conv_infos(out, p + ".wn.start", s.start_spec());
    for (std::size_t j = 0; j < s.layers; ++j) {
      conv_infos(out, p + ".wn.in" + std::to_string(j), s.in_layer_spec(j));
    }
    conv_infos(out, p + ".wn.cond", s.cond_spec());
    for (std::size_t j = 0; j < s.layers; ++j) {
      conv_infos(out, p + ".wn.res_skip" + std::to_string(j), s.res_skip_spec(j));
    }
    conv_infos(out, p + ".wn.end", s.end_spec());
  }
  if (config.upsample_kernel > 0) {
    out.push_back({"upsample.weight", {config.n_mels, config.n_mels, config.upsample_kernel}});
    out.push_back({"upsample.bias", {config.n_mels}});
  }
  return out;
}

std::vector<TensorView> model_tensors(const Model& model) {
  std::vector<TensorView> out;
  for (std::size_t i = 0; i < model.flows.size(); ++i) {
    const auto& f = model.flows[i];
    const std::string p = flow_prefix(i);
    out.push_back({{p + ".inv1x1.W", {u32(f.mix.size()), u32(f.mix.size())}}, f.mix.matrix()});
    for_each_conv(f.wn, p, [&](const std::string& name, const ConvLayer& layer) {
      std::vector<TensorInfo> infos;
      conv_infos(infos, name, layer.spec);
      const auto storage = conv_storage(layer);
      for (std::size_t k = 0; k < infos.size(); ++k) out.push_back({infos[k], *storage[k]});
    });
  }
  if (model.upsampler) {
    const auto& u = model.upsampler->spec;
    out.push_back({{"upsample.weight", {u32(u.channels_in), u32(u.channels_out), u32(u.kernel_size)}},
                   model.upsampler->weight});
    out.push_back({{"upsample.bias", {u32(u.channels_out)}}, model.upsampler->bias});
  }
  return out;
}

std::vector<std::uint8_t> serialize_model(const Model& model) {
  model.validate();
  const ModelConfig& c = model.config;
  ByteWriter w;
  w.bytes(kModelMagic);
  w.u32(kModelFormatVersion);
  w.u32(c.sample_rate);
  w.u32(c.group_size);
  w.u32(c.n_flows);
  w.u32(c.n_early_every);
  w.u32(c.n_early_size);
  w.u32(c.wn_layers);
  w.u32(c.wn_width);
  w.u32(c.wn_kernel);
  w.u8(static_cast<std::uint8_t>(c.variant));
  w.u8(c.cond_before_upsample ? 1 : 0);
  w.u32(c.n_mels);
  w.u32(c.hop);
  w.u32(c.upsample_kernel);
  w.u32(c.window_frames);
  const auto tensors = model_tensors(model);
  w.u32(u32(tensors.size()));
  for (const auto& t : tensors) write_tensor(w, t.info.name, t.info.dims, t.data);
  return std::move(w).take();
}

namespace {

class TensorPool {
 public:
  explicit TensorPool(std::map<std::string, TensorRecord> records) : records_(std::move(records)) {}

  std::vector<float> take(const TensorInfo& info) {
    auto it = records_.find(info.name);
    if (it == records_.end()) throw SchemaError("missing tensor '" + info.name + "'");
    if (it->second.dims != info.dims) {
      auto dims = [](const std::vector<std::uint32_t>& d) {
        std::string s;
        for (auto x : d) s += (s.empty() ? "" : "x") + std::to_string(x);
        return s;
      };
      throw ShapeError("tensor '" + info.name + "' has shape " + dims(it->second.dims) +
                       ", expected " + dims(info.dims));
    }
    std::vector<float> data = std::move(it->second.data);
    records_.erase(it);
    return data;
  }

 private:
  std::map<std::string, TensorRecord> records_;
};

}  // namespace

Model deserialize_model(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "model file");
  expect_header(r, kModelMagic, kModelFormatVersion);
  ModelConfig c;
  c.sample_rate = r.u32();
  c.group_size = r.u32();
  c.n_flows = r.u32();
  c.n_early_every = r.u32();
  c.n_early_size = r.u32();
  c.wn_layers = r.u32();
  c.wn_width = r.u32();
  c.wn_kernel = r.u32();
  const std::uint8_t variant = r.u8();
  if (variant > 1) throw FormatError("unknown variant code " + std::to_string(variant));
  c.variant = static_cast<Variant>(variant);
  c.cond_before_upsample = r.u8() != 0;
  c.n_mels = r.u32();
  c.hop = r.u32();
  c.upsample_kernel = r.u32();
  c.window_frames = r.u32();
  c.validate();

  const auto schema = tensor_schema(c);
  std::map<std::string, std::size_t> expected;
  for (std::size_t i = 0; i < schema.size(); ++i) expected.emplace(schema[i].name, i);

  const std::uint32_t count = r.u32();
  std::map<std::string, TensorRecord> records;
  for (std::uint32_t i = 0; i < count; ++i) {
    TensorRecord t = read_tensor(r);
    if (!expected.contains(t.name)) throw SchemaError("unknown tensor '" + t.name + "'");
    const std::string name = t.name;
    if (!records.emplace(name, std::move(t)).second) {
      throw SchemaError("duplicate tensor '" + name + "'");
    }
  }
  if (!r.at_end()) {
    throw FormatError("corrupt model file: " + std::to_string(r.remaining()) +
                      " trailing bytes after the last tensor");
  }
  TensorPool pool(std::move(records));

  Model m = identity_model(c);
  const auto channels = c.flow_channels();
  std::size_t next = 0;
  for (std::size_t i = 0; i < m.flows.size(); ++i) {
    m.flows[i].mix = InvertiblePointwise(channels[i], pool.take(schema[next++]));
    for_each_conv(m.flows[i].wn, flow_prefix(i), [&](const std::string&, ConvLayer& layer) {
      for (auto* v : conv_storage(layer)) *v = pool.take(schema[next++]);
    });
  }
  if (m.upsampler) {
    m.upsampler->weight = pool.take(schema[next++]);
    m.upsampler->bias = pool.take(schema[next++]);
  }
  m.validate();
  return m;
}

void save_model(const Model& model, const std::filesystem::path& path) {
  write_file(path, serialize_model(model));
}

Model load_model(const std::filesystem::path& path) { return deserialize_model(read_file(path)); }

}  // namespace sqzw
