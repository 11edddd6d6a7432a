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
#ifndef CAPAD_RESAMPLE_HPP_
#define CAPAD_RESAMPLE_HPP_

#include <vector>

#include "capad/tensor.hpp"

namespace capad {

// Source taps of one destination index along an axis.
struct LinearTap {
  int lo = 0;
  int hi = 0;
  double frac = 0.0;  // weight of `hi`
};

// Half-pixel-centre taps mapping `in` samples onto `out`; source positions
// are clamped to [0, in - 1].
std::vector<LinearTap> HalfPixelTaps(int in, int out);

// Half-pixel-center (align_corners = false) bilinear resize with edge clamp.
Tensor ResizeBilinear(const Tensor& t, int height, int width);
// Nearest-neighbour resize using the same pixel-center mapping.
Tensor ResizeNearest(const Tensor& t, int height, int width);

enum class Interpolation { kBilinear, kNearest };

// Rotates about the image center by `degrees` (counter-clockwise), keeping
// the frame size.  Samples landing outside the source take `fill`.
Tensor Rotate(const Tensor& t, double degrees, Interpolation interpolation,
              double fill);

// Separable Gaussian blur, kernel radius ceil(3 * sigma), edge clamp.
Tensor GaussianBlur(const Tensor& t, double sigma);

}  // namespace capad

#endif  // CAPAD_RESAMPLE_HPP_
