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
#ifndef CAPAD_BLOCKS_HPP_
#define CAPAD_BLOCKS_HPP_

#include <string_view>
#include <vector>

#include "capad/tensor.hpp"

namespace capad {

// Non-negative rational number, used for overlap and leave-out fractions.
struct Fraction {
  long numerator = 0;
  long denominator = 1;

  double value() const {
    return static_cast<double>(numerator) / static_cast<double>(denominator);
  }
};

// Accepts "a/b", integers and decimals such as "0.5".
Fraction ParseFraction(std::string_view text);

// Zero within `p` pixels of every side in `sides`, one elsewhere.
Mask MakeBorderMask(int height, int width, int p, SideSet sides);

// Strip of `m` context pixels taken from one side of an image, with `p`
// zero-initialized pixels appended on the outer edge.
struct Block {
  Tensor tensor;
  Side side = Side::kLeft;
  int p = 0;
  int m = 0;
};

Block ExtractBlock(const Tensor& image, Side side, int p, int m);

// Mask for a block: 0 on the p-wide band at the outer edge.
Mask BlockMask(const Block& block);

// The block with its pad band removed, i.e. the original context strip.
Tensor DropPadBand(const Block& block);

struct Origin {
  int x = 0;
  int y = 0;
  friend bool operator==(const Origin&, const Origin&) = default;
};

struct CropWindow {
  Tensor crop;
  Origin origin;
};

// Window origins along one axis: stride = crop - floor(crop * overlap), the
// last window shifted back so it ends at the edge.
std::vector<int> CropOrigins(int extent, int crop, Fraction overlap);

std::vector<CropWindow> SlidingCrops(const Tensor& image, int crop,
                                     Fraction overlap);

}  // namespace capad

#endif  // CAPAD_BLOCKS_HPP_
