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
#ifndef CAPAD_NET_HPP_
#define CAPAD_NET_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "capad/conv.hpp"
#include "capad/layers.hpp"
#include "capad/tensor.hpp"
#include "capad/warp.hpp"

namespace capad {

struct NetConfig {
  int depth = 2;  // encoder units, 1 or 2
  int base_channels = 16;
  int in_channels = 3;
  bool skip_connections = true;
  std::uint64_t seed = 0;

  void Validate() const;
  // Spatial dims are padded to a multiple of this before the encoder.
  int divisor() const { return 1 << depth; }

  friend bool operator==(const NetConfig&, const NetConfig&) = default;
};

// Numeric values are part of the CAPM checkpoint format.
enum class LayerKind : std::uint8_t {
  kConv = 0,
  kBatchNorm = 1,
  kMaxPool = 2,
  kUpsample = 3,
};

struct Layer {
  LayerKind kind = LayerKind::kConv;
  ConvKernel kernel;  // conv
  std::vector<double> bias;
  std::vector<double> gamma;  // batchnorm
  std::vector<double> beta;
  std::vector<double> running_mean;
  std::vector<double> running_var;
  int factor = 2;  // maxpool, upsample

  friend bool operator==(const Layer&, const Layer&) = default;
};

// Encoder-decoder displacement network.  Layer order:
//   encoder i = 0..depth-1:  conv, batchnorm, maxpool   (relu after batchnorm)
//   decoder i = depth-1..0:  upsample, conv             (relu, then skip add)
//   head:                    conv with 2 outputs (dx, dy)
struct Network {
  NetConfig config;
  std::vector<Layer> layers;

  const Layer& encoder_conv(int i) const { return layers[3 * i]; }
  const Layer& encoder_bn(int i) const { return layers[3 * i + 1]; }
  // Decoder for resolution level i.
  const Layer& decoder_conv(int i) const {
    return layers[3 * config.depth + 2 * (config.depth - 1 - i) + 1];
  }
  const Layer& head() const { return layers.back(); }

  friend bool operator==(const Network&, const Network&) = default;
};

inline constexpr double kBatchNormEps = 1e-5;
inline constexpr double kBatchNormMomentum = 0.1;

// Deterministic given cfg.seed: conv weights uniform in +-sqrt(6 / fan_in),
// biases 0, gamma 1, beta 0, running mean 0 and variance 1.  The head is all
// zeros so a fresh network predicts the identity warp.
Network NetInit(const NetConfig& cfg);

// Throws unless the layer list has the structure NetInit produces.
void CheckStructure(const Network& net);

// Number of trainable values (conv weights and biases, gamma, beta).
std::size_t ParameterCount(const Network& net);

struct NamedParameter {
  std::string name;  // e.g. "enc0.conv.weight"
  std::span<double> values;
};

// Trainable parameters in a fixed order.  Two networks with the same config
// enumerate identically shaped spans.
std::vector<NamedParameter> TrainableParameters(Network& net);
std::vector<std::span<const double>> TrainableParameters(const Network& net);

// Side of each axis on which divisibility zeros are inserted.  Padding the
// side facing the image keeps a flipped block's layout the mirror of the
// unflipped one.
struct PadPlacement {
  bool x_before = false;
  bool y_before = false;
};

PadPlacement PlacementFor(Side side);

struct NetCache {
  bool training = false;
  int height = 0;  // unpadded input extent
  int width = 0;
  int y_offset = 0;  // position of the input inside the padded frame
  int x_offset = 0;
  std::uint64_t fingerprint = 0;

  layers::Batch input;  // padded
  std::vector<layers::Batch> enc_input;
  std::vector<layers::BatchNormState> enc_bn;
  std::vector<layers::Batch> enc_relu_out;  // skip sources
  std::vector<std::vector<std::vector<int>>> enc_argmax;
  std::vector<layers::Batch> dec_input;      // per level, before upsampling
  std::vector<layers::Batch> dec_upsampled;
  std::vector<layers::Batch> dec_relu_out;
  layers::Batch head_input;
};

struct NetOutput {
  std::vector<DisplacementField> fields;
  NetCache cache;
};

// Runs the network on a batch of equally shaped (C, h, w) tensors.  Inputs
// whose extent is not a multiple of config.divisor() are zero-padded per
// `placement` and the output is cropped back.  Training mode normalizes with
// batch statistics.
NetOutput NetForward(const Network& net, std::span<const Tensor> batch,
                     bool training, PadPlacement placement = {});

// Inference on a single tensor.
DisplacementField Predict(const Network& net, const Tensor& input,
                          PadPlacement placement = {});

struct NetGradients {
  Network params;  // same structure as the network, holding gradients
  layers::Batch input;
};

// Reverse-mode gradients for a training-mode forward.  Throws if the cache
// came from inference mode or the parameters changed since the forward.
NetGradients NetBackward(const Network& net, const NetCache& cache,
                         std::span<const DisplacementField> grad_fields);

// Folds the batch statistics of a training-mode forward into the running
// statistics (momentum 0.1, unbiased variance).
void UpdateRunningStatistics(Network& net, const NetCache& cache);

// Hash of the trainable parameters.
std::uint64_t ParameterFingerprint(const Network& net);

// Networks computing the mirrored field on a mirrored input: kernels are
// flipped along the axis and the matching displacement component negated.
Network FlipNetworkHorizontal(const Network& net);
Network FlipNetworkVertical(const Network& net);

}  // namespace capad

#endif  // CAPAD_NET_HPP_
