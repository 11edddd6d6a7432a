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
#include "capad/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <stdexcept>
#include <string>

#include "capad/image_io.hpp"

namespace capad {
namespace {

class Writer {
 public:
  void U8(std::uint8_t v) { bytes_.push_back(v); }
  void U32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void U64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void Floats(std::span<const double> values) {
    for (double v : values) U32(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t U8() {
    Need(1);
    return bytes_[pos_++];
  }
  std::uint32_t U32() {
    Need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t U64() {
    Need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  std::vector<double> Floats(std::size_t n) {
    Need(4 * n);
    std::vector<double> out(n);
    for (double& v : out) v = std::bit_cast<float>(U32());
    return out;
  }
  // Dimension field, bounded so corrupt files fail before allocating.
  int Dim() {
    const std::uint32_t v = U32();
    if (v == 0 || v > (1u << 16)) throw std::runtime_error("CAPM: implausible dimension");
    return static_cast<int>(v);
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void Need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw std::runtime_error("CAPM: truncated checkpoint");
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> SerializeNetwork(const Network& net, Side direction) {
  CheckStructure(net);
  Writer w;
  for (char c : {'C', 'A', 'P', 'M'}) w.U8(static_cast<std::uint8_t>(c));
  w.U8(kCheckpointVersion);
  w.U8(static_cast<std::uint8_t>(direction));
  w.U32(net.config.depth);
  w.U32(net.config.base_channels);
  w.U32(net.config.in_channels);
  w.U8(net.config.skip_connections ? 1 : 0);
  w.U64(net.config.seed);
  w.U32(static_cast<std::uint32_t>(net.layers.size()));
  for (const Layer& l : net.layers) {
    w.U8(static_cast<std::uint8_t>(l.kind));
    switch (l.kind) {
      case LayerKind::kConv:
        w.U32(l.kernel.out_channels);
        w.U32(l.kernel.in_channels);
        w.U32(l.kernel.size);
        w.Floats(l.kernel.weights);
        w.Floats(l.bias);
        break;
      case LayerKind::kBatchNorm:
        w.U32(static_cast<std::uint32_t>(l.gamma.size()));
        w.Floats(l.gamma);
        w.Floats(l.beta);
        w.Floats(l.running_mean);
        w.Floats(l.running_var);
        break;
      case LayerKind::kMaxPool:
      case LayerKind::kUpsample:
        w.U32(l.factor);
        break;
    }
  }
  return w.take();
}

Checkpoint DeserializeNetwork(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "CAPM", 4) != 0) {
    throw std::runtime_error("not a CAPM checkpoint");
  }
  Reader r(bytes.subspan(4));
  const std::uint8_t version = r.U8();
  if (version != kCheckpointVersion) {
    throw std::runtime_error("unsupported CAPM version " + std::to_string(version));
  }
  const std::uint8_t dir = r.U8();
  if (dir > 3) throw std::runtime_error("CAPM: bad direction tag " + std::to_string(dir));
  Checkpoint ck;
  ck.direction = static_cast<Side>(dir);
  NetConfig& cfg = ck.net.config;
  cfg.depth = r.Dim();
  cfg.base_channels = r.Dim();
  cfg.in_channels = r.Dim();
  cfg.skip_connections = r.U8() != 0;
  cfg.seed = r.U64();
  const std::uint32_t count = r.U32();
  if (count > 64) throw std::runtime_error("CAPM: implausible layer count");
  for (std::uint32_t j = 0; j < count; ++j) {
    Layer l;
    const std::uint8_t kind = r.U8();
    if (kind > 3) throw std::runtime_error("CAPM: bad layer kind " + std::to_string(kind));
    l.kind = static_cast<LayerKind>(kind);
    switch (l.kind) {
      case LayerKind::kConv: {
        const int out = r.Dim(), in = r.Dim(), k = r.Dim();
        l.kernel = ConvKernel(out, in, k);
        l.kernel.weights = r.Floats(l.kernel.weights.size());
        l.bias = r.Floats(out);
        break;
      }
      case LayerKind::kBatchNorm: {
        const int c = r.Dim();
        l.gamma = r.Floats(c);
        l.beta = r.Floats(c);
        l.running_mean = r.Floats(c);
        l.running_var = r.Floats(c);
        break;
      }
      case LayerKind::kMaxPool:
      case LayerKind::kUpsample:
        l.factor = r.Dim();
        break;
    }
    ck.net.layers.push_back(std::move(l));
  }
  if (!r.done()) throw std::runtime_error("CAPM: trailing bytes");
  try {
    CheckStructure(ck.net);
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("CAPM: ") + e.what());
  }
  return ck;
}

void SaveCheckpoint(const Network& net, Side direction,
                    const std::filesystem::path& path) {
  WriteFileAtomic(path, SerializeNetwork(net, direction));
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  try {
    return DeserializeNetwork(ReadFileBytes(path));
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

Network RoundToStorage(const Network& net) {
  Network out = net;
  auto round = [](std::vector<double>& v) {
    for (double& x : v) x = static_cast<float>(x);
  };
  for (Layer& l : out.layers) {
    round(l.kernel.weights);
    round(l.bias);
    round(l.gamma);
    round(l.beta);
    round(l.running_mean);
    round(l.running_var);
  }
  return out;
}

}  // namespace capad
