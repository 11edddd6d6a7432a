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
#ifndef CAPAD_LAYERS_HPP_
#define CAPAD_LAYERS_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "capad/conv.hpp"
#include "capad/tensor.hpp"

// Batched layer primitives with their reverse-mode counterparts.  A batch is a
// list of equally shaped tensors.
namespace capad::layers {

using Batch = std::vector<Tensor>;

void CheckBatch(std::span<const Tensor> batch);

// Stride-1 convolution with `padding` zeros on every side.
Batch ConvForward(std::span<const Tensor> input, const ConvKernel& kernel,
                  std::span<const double> bias, int padding);

struct ConvGrads {
  Batch input;
  ConvKernel weights;
  std::vector<double> bias;
};

ConvGrads ConvBackward(std::span<const Tensor> input, const ConvKernel& kernel,
                       std::span<const Tensor> grad_out, int padding);

struct BatchNormState {
  Batch normalized;             // x_hat
  std::vector<double> mean;     // per channel, batch statistics
  std::vector<double> variance; // biased
  std::vector<double> inv_std;
  std::size_t count = 0;        // N * H * W
};

struct BatchNormParams {
  std::span<const double> gamma;
  std::span<const double> beta;
  std::span<const double> running_mean;
  std::span<const double> running_var;
  double eps = 1e-5;
};

// Training mode normalizes with batch statistics (returned in `state`),
// inference mode with the running statistics.
Batch BatchNormForward(std::span<const Tensor> input, const BatchNormParams& p,
                       bool training, BatchNormState* state);

struct BatchNormGrads {
  Batch input;
  std::vector<double> gamma;
  std::vector<double> beta;
};

BatchNormGrads BatchNormBackward(const BatchNormState& state,
                                 std::span<const double> gamma,
                                 std::span<const Tensor> grad_out);

Batch ReluForward(std::span<const Tensor> input);
// Gradient passes where the forward *output* is positive.
Batch ReluBackward(std::span<const Tensor> output, std::span<const Tensor> grad_out);

// 2x2 max pooling, stride 2.  `argmax` receives, for each output element, the
// flat index of the winning input element within its plane; ties keep the
// first element in row-major window order.
Batch MaxPoolForward(std::span<const Tensor> input,
                     std::vector<std::vector<int>>* argmax);
Batch MaxPoolBackward(std::span<const Tensor> input_shape_source,
                      const std::vector<std::vector<int>>& argmax,
                      std::span<const Tensor> grad_out);

// x2 bilinear upsampling, half-pixel centres, edge clamp.
Batch UpsampleForward(std::span<const Tensor> input);
Batch UpsampleBackward(std::span<const Tensor> input_shape_source,
                       std::span<const Tensor> grad_out);

}  // namespace capad::layers

#endif  // CAPAD_LAYERS_HPP_
