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
#ifndef CAPAD_WARP_HPP_
#define CAPAD_WARP_HPP_

#include "capad/tensor.hpp"

namespace capad {

// Per-pixel displacement in pixels; each is a (1, h, w) tensor.
struct DisplacementField {
  Tensor dx;
  Tensor dy;

  DisplacementField() = default;
  DisplacementField(int height, int width)
      : dx(1, height, width), dy(1, height, width) {}
  DisplacementField(Tensor dx_, Tensor dy_);

  // Splits a (2, h, w) tensor whose channels are (dx, dy).
  static DisplacementField FromChannels(const Tensor& two_channel);
  Tensor ToChannels() const;

  int height() const { return dx.height(); }
  int width() const { return dx.width(); }

  friend bool operator==(const DisplacementField&,
                         const DisplacementField&) = default;
};

// Bilinear warp.  Output pixel (xw, yw) samples the block at
// (xw - dx, yw - dy) from its 4-neighbourhood; the sample position is clamped
// to the block rectangle.  Throws on non-finite displacements.
Tensor WarpForward(const Tensor& block, const DisplacementField& field);

struct WarpGradients {
  Tensor block;
  DisplacementField field;
};

// Reverse-mode gradients of WarpForward.  At integer sample positions the
// derivative is taken from the right (towards larger coordinates); an axis
// whose sample position was clamped gets zero displacement gradient.
WarpGradients WarpBackward(const Tensor& grad_out, const Tensor& block,
                           const DisplacementField& field);

}  // namespace capad

#endif  // CAPAD_WARP_HPP_
