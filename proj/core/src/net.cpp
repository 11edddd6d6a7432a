/* Copyright 2026 The CAPad Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include "capad/net.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "capad/hash.hpp"

namespace capad {
namespace {

using layers::Batch;

int EncConvIndex(int i) { return 3 * i; }
int EncBnIndex(int i) { return 3 * i + 1; }
int DecConvIndex(int depth, int i) { return 3 * depth + 2 * (depth - 1 - i) + 1; }
int HeadIndex(int depth) { return 5 * depth; }

int EncInChannels(const NetConfig& c, int i) {
  return i == 0 ? c.in_channels : c.base_channels << (i - 1);
}
int EncOutChannels(const NetConfig& c, int i) { return c.base_channels << i; }
int DecInChannels(const NetConfig& c, int i) {
  return c.base_channels << std::min(i + 1, c.depth - 1);
}

Layer MakeConv(int out, int in, std::mt19937_64* rng) {
  Layer l;
  l.kind = LayerKind::kConv;
  l.kernel = ConvKernel(out, in, 3);
  l.bias.assign(out, 0.0);
  if (rng) {
    const double bound = std::sqrt(6.0 / (in * 9));
    for (double& w : l.kernel.weights) {
      const double u = static_cast<double>((*rng)() >> 11) * 0x1.0p-53;
      w = (2.0 * u - 1.0) * bound;
    }
  }
  return l;
}

Layer MakeBatchNorm(int channels) {
  Layer l;
  l.kind = LayerKind::kBatchNorm;
  l.gamma.assign(channels, 1.0);
  l.beta.assign(channels, 0.0);
  l.running_mean.assign(channels, 0.0);
  l.running_var.assign(channels, 1.0);
  return l;
}

Layer MakeResample(LayerKind kind) {
  Layer l;
  l.kind = kind;
  l.factor = 2;
  return l;
}

void CheckConv(const Layer& l, int out, int in, const std::string& where) {
  if (l.kind != LayerKind::kConv || l.kernel.out_channels != out ||
      l.kernel.in_channels != in || l.kernel.size != 3 ||
      l.kernel.weights.size() != static_cast<std::size_t>(out) * in * 9 ||
      static_cast<int>(l.bias.size()) != out) {
    throw std::invalid_argument(where + ": expected 3x3 conv " +
                                std::to_string(in) + "->" + std::to_string(out));
  }
}

Batch AddBatch(Batch a, const Batch& b) {
  for (std::size_t n = 0; n < a.size(); ++n) {
    auto dst = a[n].values();
    auto src = b[n].values();
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
  }
  return a;
}

layers::BatchNormParams BnParams(const Layer& l) {
  return {l.gamma, l.beta, l.running_mean, l.running_var, kBatchNormEps};
}

void FlipKernel(ConvKernel& k, bool horizontal) {
  const int s = k.size;
  for (int o = 0; o < k.out_channels; ++o)
    for (int i = 0; i < k.in_channels; ++i)
      for (int a = 0; a < s; ++a)
        for (int b = 0; b < s / 2; ++b) {
          if (horizontal) {
            std::swap(k.at(o, i, a, b), k.at(o, i, a, s - 1 - b));
          } else {
            std::swap(k.at(o, i, b, a), k.at(o, i, s - 1 - b, a));
          }
        }
}

Network FlipNetwork(const Network& net, bool horizontal) {
  CheckStructure(net);
  Network out = net;
  for (Layer& l : out.layers)
    if (l.kind == LayerKind::kConv) FlipKernel(l.kernel, horizontal);
  Layer& head = out.layers.back();
  const int channel = horizontal ? 0 : 1;
  for (int i = 0; i < head.kernel.in_channels; ++i)
    for (int ky = 0; ky < 3; ++ky)
      for (int kx = 0; kx < 3; ++kx)
        head.kernel.at(channel, i, ky, kx) = -head.kernel.at(channel, i, ky, kx);
  head.bias[channel] = -head.bias[channel];
  return out;
}

}  // namespace

void NetConfig::Validate() const {
  if (depth < 1 || depth > 2) throw std::invalid_argument("net depth must be 1 or 2");
  if (base_channels < 1) throw std::invalid_argument("base channels must be positive");
  if (in_channels < 1) throw std::invalid_argument("input channels must be positive");
}

Network NetInit(const NetConfig& cfg) {
  cfg.Validate();
  std::mt19937_64 rng(cfg.seed);
  Network net{cfg, {}};
  for (int i = 0; i < cfg.depth; ++i) {
    net.layers.push_back(MakeConv(EncOutChannels(cfg, i), EncInChannels(cfg, i), &rng));
    net.layers.push_back(MakeBatchNorm(EncOutChannels(cfg, i)));
    net.layers.push_back(MakeResample(LayerKind::kMaxPool));
  }
  for (int i = cfg.depth - 1; i >= 0; --i) {
    net.layers.push_back(MakeResample(LayerKind::kUpsample));
    net.layers.push_back(MakeConv(EncOutChannels(cfg, i), DecInChannels(cfg, i), &rng));
  }
  net.layers.push_back(MakeConv(2, cfg.base_channels, nullptr));
  return net;
}

void CheckStructure(const Network& net) {
  const NetConfig& cfg = net.config;
  cfg.Validate();
  const int d = cfg.depth;
  if (static_cast<int>(net.layers.size()) != 5 * d + 1) {
    throw std::invalid_argument("network has " + std::to_string(net.layers.size()) +
                                " layers, expected " + std::to_string(5 * d + 1));
  }
  for (int i = 0; i < d; ++i) {
    const std::string name = "enc" + std::to_string(i);
    CheckConv(net.layers[EncConvIndex(i)], EncOutChannels(cfg, i),
              EncInChannels(cfg, i), name);
    const Layer& bn = net.layers[EncBnIndex(i)];
    const std::size_t c = EncOutChannels(cfg, i);
    if (bn.kind != LayerKind::kBatchNorm || bn.gamma.size() != c ||
        bn.beta.size() != c || bn.running_mean.size() != c ||
        bn.running_var.size() != c) {
      throw std::invalid_argument(name + ": malformed batchnorm");
    }
    for (double v : bn.running_var)
      if (!(v >= 0.0)) throw std::invalid_argument(name + ": negative running variance");
    const Layer& pool = net.layers[3 * i + 2];
    if (pool.kind != LayerKind::kMaxPool || pool.factor != 2) {
      throw std::invalid_argument(name + ": expected 2x maxpool");
    }
    const Layer& up = net.layers[DecConvIndex(d, i) - 1];
    if (up.kind != LayerKind::kUpsample || up.factor != 2) {
      throw std::invalid_argument("dec" + std::to_string(i) + ": expected 2x upsample");
    }
    CheckConv(net.layers[DecConvIndex(d, i)], EncOutChannels(cfg, i),
              DecInChannels(cfg, i), "dec" + std::to_string(i));
  }
  CheckConv(net.layers[HeadIndex(d)], 2, cfg.base_channels, "head");
}

std::size_t ParameterCount(const Network& net) {
  std::size_t n = 0;
  for (auto span : TrainableParameters(net)) n += span.size();
  return n;
}

std::vector<NamedParameter> TrainableParameters(Network& net) {
  CheckStructure(net);
  const int d = net.config.depth;
  std::vector<std::string> names;
  for (int i = 0; i < d; ++i) {
    names.push_back("enc" + std::to_string(i) + ".conv");
    names.push_back("enc" + std::to_string(i) + ".bn");
    names.push_back("");
  }
  for (int i = d - 1; i >= 0; --i) {
    names.push_back("");
    names.push_back("dec" + std::to_string(i) + ".conv");
  }
  names.push_back("head.conv");

  std::vector<NamedParameter> out;
  for (std::size_t j = 0; j < net.layers.size(); ++j) {
    Layer& l = net.layers[j];
    if (l.kind == LayerKind::kConv) {
      out.push_back({names[j] + ".weight", l.kernel.weights});
      out.push_back({names[j] + ".bias", l.bias});
    } else if (l.kind == LayerKind::kBatchNorm) {
      out.push_back({names[j] + ".gamma", l.gamma});
      out.push_back({names[j] + ".beta", l.beta});
    }
  }
  return out;
}

std::vector<std::span<const double>> TrainableParameters(const Network& net) {
  CheckStructure(net);
  std::vector<std::span<const double>> out;
  for (const Layer& l : net.layers) {
    if (l.kind == LayerKind::kConv) {
      out.emplace_back(l.kernel.weights);
      out.emplace_back(l.bias);
    } else if (l.kind == LayerKind::kBatchNorm) {
      out.emplace_back(l.gamma);
      out.emplace_back(l.beta);
    }
  }
  return out;
}

std::uint64_t ParameterFingerprint(const Network& net) {
  std::uint64_t h = kFnvOffset;
  for (auto span : TrainableParameters(net)) h = Fnv1a(span, h);
  return h;
}

PadPlacement PlacementFor(Side side) {
  switch (side) {
    case Side::kLeft: return {false, false};
    case Side::kRight: return {true, false};
    case Side::kTop: return {false, false};
    case Side::kBottom: return {false, true};
  }
  return {};
}

NetOutput NetForward(const Network& net, std::span<const Tensor> batch,
                     bool training, PadPlacement placement) {
  CheckStructure(net);
  layers::CheckBatch(batch);
  const NetConfig& cfg = net.config;
  const int d = cfg.depth;
  if (batch[0].channels() != cfg.in_channels) {
    throw std::invalid_argument("net expects " + std::to_string(cfg.in_channels) +
                                " input channels, got " +
                                std::to_string(batch[0].channels()));
  }
  const int h = batch[0].height(), w = batch[0].width();
  const int div = cfg.divisor();
  const int ph = (h + div - 1) / div * div, pw = (w + div - 1) / div * div;

  NetOutput result;
  NetCache& cache = result.cache;
  cache.training = training;
  cache.height = h;
  cache.width = w;
  cache.y_offset = placement.y_before ? ph - h : 0;
  cache.x_offset = placement.x_before ? pw - w : 0;
  cache.fingerprint = training ? ParameterFingerprint(net) : 0;

  Batch x;
  x.reserve(batch.size());
  for (const Tensor& t : batch) {
    if (ph == h && pw == w) {
      x.push_back(t);
    } else {
      Tensor padded(t.channels(), ph, pw);
      Paste(t, cache.y_offset, cache.x_offset, padded);
      x.push_back(std::move(padded));
    }
  }
  if (training) cache.input = x;

  std::vector<Batch> skips(d);
  for (int i = 0; i < d; ++i) {
    const Layer& conv = net.layers[EncConvIndex(i)];
    const Layer& bn = net.layers[EncBnIndex(i)];
    if (training) cache.enc_input.push_back(x);
    x = layers::ConvForward(x, conv.kernel, conv.bias, 1);
    layers::BatchNormState state;
    x = layers::BatchNormForward(x, BnParams(bn), training,
                                 training ? &state : nullptr);
    x = layers::ReluForward(x);
    std::vector<std::vector<int>> argmax;
    Batch pooled = layers::MaxPoolForward(x, training ? &argmax : nullptr);
    skips[i] = std::move(x);
    x = std::move(pooled);
    if (training) {
      cache.enc_bn.push_back(std::move(state));
      cache.enc_argmax.push_back(std::move(argmax));
    }
  }
  if (training) {
    cache.enc_relu_out = skips;
    cache.dec_input.resize(d);
    cache.dec_upsampled.resize(d);
    cache.dec_relu_out.resize(d);
  }
  for (int i = d - 1; i >= 0; --i) {
    const Layer& conv = net.layers[DecConvIndex(d, i)];
    if (training) cache.dec_input[i] = x;
    x = layers::UpsampleForward(x);
    if (training) cache.dec_upsampled[i] = x;
    x = layers::ConvForward(x, conv.kernel, conv.bias, 1);
    x = layers::ReluForward(x);
    if (training) cache.dec_relu_out[i] = x;
    if (cfg.skip_connections) x = AddBatch(std::move(x), skips[i]);
  }
  const Layer& head = net.layers[HeadIndex(d)];
  if (training) cache.head_input = x;
  Batch out = layers::ConvForward(x, head.kernel, head.bias, 1);

  result.fields.reserve(out.size());
  for (const Tensor& t : out) {
    result.fields.push_back(DisplacementField::FromChannels(
        Crop(t, cache.y_offset, cache.x_offset, h, w)));
  }
  return result;
}

DisplacementField Predict(const Network& net, const Tensor& input,
                          PadPlacement placement) {
  return std::move(
      NetForward(net, std::span<const Tensor>(&input, 1), false, placement)
          .fields.front());
}

NetGradients NetBackward(const Network& net, const NetCache& cache,
                         std::span<const DisplacementField> grad_fields) {
  CheckStructure(net);
  if (!cache.training || cache.input.empty()) {
    throw std::invalid_argument("net backward needs a training-mode forward cache");
  }
  if (cache.fingerprint != ParameterFingerprint(net)) {
    throw std::invalid_argument("stale forward cache: parameters changed");
  }
  if (grad_fields.size() != cache.input.size()) {
    throw std::invalid_argument("net backward: batch size mismatch");
  }
  const int d = net.config.depth;
  const int ph = cache.input[0].height(), pw = cache.input[0].width();

  NetGradients g{net, {}};
  for (Layer& l : g.params.layers) {
    std::fill(l.kernel.weights.begin(), l.kernel.weights.end(), 0.0);
    for (auto* v : {&l.bias, &l.gamma, &l.beta, &l.running_mean, &l.running_var})
      std::fill(v->begin(), v->end(), 0.0);
  }

  Batch go;
  for (const DisplacementField& f : grad_fields) {
    if (f.height() != cache.height || f.width() != cache.width) {
      throw std::invalid_argument("net backward: field shape mismatch");
    }
    Tensor padded(2, ph, pw);
    Paste(f.ToChannels(), cache.y_offset, cache.x_offset, padded);
    go.push_back(std::move(padded));
  }

  auto store_conv = [&](int index, layers::ConvGrads& cg) {
    g.params.layers[index].kernel = std::move(cg.weights);
    g.params.layers[index].bias = std::move(cg.bias);
  };

  const Layer& head = net.layers[HeadIndex(d)];
  layers::ConvGrads cg = layers::ConvBackward(cache.head_input, head.kernel, go, 1);
  go = std::move(cg.input);
  store_conv(HeadIndex(d), cg);

  std::vector<Batch> skip_grads(d);
  for (int i = 0; i < d; ++i) {
    if (net.config.skip_connections) skip_grads[i] = go;
    go = layers::ReluBackward(cache.dec_relu_out[i], go);
    const int index = DecConvIndex(d, i);
    cg = layers::ConvBackward(cache.dec_upsampled[i], net.layers[index].kernel, go, 1);
    store_conv(index, cg);
    go = layers::UpsampleBackward(cache.dec_input[i], cg.input);
  }
  for (int i = d - 1; i >= 0; --i) {
    go = layers::MaxPoolBackward(cache.enc_relu_out[i], cache.enc_argmax[i], go);
    if (net.config.skip_connections) go = AddBatch(std::move(go), skip_grads[i]);
    go = layers::ReluBackward(cache.enc_relu_out[i], go);
    const Layer& bn = net.layers[EncBnIndex(i)];
    layers::BatchNormGrads bg = layers::BatchNormBackward(cache.enc_bn[i], bn.gamma, go);
    g.params.layers[EncBnIndex(i)].gamma = std::move(bg.gamma);
    g.params.layers[EncBnIndex(i)].beta = std::move(bg.beta);
    const int index = EncConvIndex(i);
    cg = layers::ConvBackward(cache.enc_input[i], net.layers[index].kernel, bg.input, 1);
    store_conv(index, cg);
    go = std::move(cg.input);
  }

  for (const Tensor& t : go)
    g.input.push_back(Crop(t, cache.y_offset, cache.x_offset, cache.height, cache.width));
  return g;
}

void UpdateRunningStatistics(Network& net, const NetCache& cache) {
  CheckStructure(net);
  if (!cache.training || static_cast<int>(cache.enc_bn.size()) != net.config.depth) {
    throw std::invalid_argument("running statistics need a training-mode cache");
  }
  for (int i = 0; i < net.config.depth; ++i) {
    Layer& bn = net.layers[EncBnIndex(i)];
    const layers::BatchNormState& s = cache.enc_bn[i];
    const double n = static_cast<double>(s.count);
    const double correction = s.count > 1 ? n / (n - 1.0) : 1.0;
    for (std::size_t c = 0; c < bn.running_mean.size(); ++c) {
      bn.running_mean[c] = (1.0 - kBatchNormMomentum) * bn.running_mean[c] +
                           kBatchNormMomentum * s.mean[c];
      bn.running_var[c] = (1.0 - kBatchNormMomentum) * bn.running_var[c] +
                          kBatchNormMomentum * s.variance[c] * correction;
    }
  }
}

Network FlipNetworkHorizontal(const Network& net) { return FlipNetwork(net, true); }
Network FlipNetworkVertical(const Network& net) { return FlipNetwork(net, false); }

}  // namespace capad
