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
#ifndef CAPAD_CONV_HPP_
#define CAPAD_CONV_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "capad/tensor.hpp"

namespace capad {

// Square convolution kernel laid out as (out_channels, in_channels, k, k).
struct ConvKernel {
  int out_channels = 0;
  int in_channels = 0;
  int size = 0;
  std::vector<double> weights;

  ConvKernel() = default;
  ConvKernel(int out_ch, int in_ch, int k, double fill = 0.0);

  double& at(int o, int i, int ky, int kx) {
    return weights[((static_cast<std::size_t>(o) * in_channels + i) * size + ky) *
                       size + kx];
  }
  double at(int o, int i, int ky, int kx) const {
    return weights[((static_cast<std::size_t>(o) * in_channels + i) * size + ky) *
                       size + kx];
  }
  const double* filter(int o, int i) const {
    return weights.data() +
           (static_cast<std::size_t>(o) * in_channels + i) * size * size;
  }

  friend bool operator==(const ConvKernel&, const ConvKernel&) = default;
};

int ConvOutputExtent(int in, int kernel, int stride, int padding);

// Sum of filter taps times the input window whose top-left tap sits at
// (y0, x0); taps outside the plane read as zero.  Taps are combined in
// mirror-symmetric pairs (outermost first, centre last) along both axes, so
// a flipped filter over a flipped input produces bitwise-identical sums.
double WindowDot(const double* plane, int height, int width, int y0, int x0,
                 const double* filter, int k);

// Cross-correlation with implicit zero padding; `bias` may be empty.
Tensor Conv2d(const Tensor& input, const ConvKernel& kernel,
              std::span<const double> bias, int stride, int padding);

}  // namespace capad

#endif  // CAPAD_CONV_HPP_
