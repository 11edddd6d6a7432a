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
#ifndef CAPAD_AUGMENT_HPP_
#define CAPAD_AUGMENT_HPP_

#include <cstdint>
#include <optional>
#include <random>
#include <utility>

#include "capad/tensor.hpp"

namespace capad {

inline constexpr double kIgnoreLabel = 255.0;

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

// Segmentation-style augmentation: mirror, resize, rotate, blur, crop.
struct AugmentConfig {
  double mirror_prob = 0.5;
  Range scale_range{0.5, 2.0};
  Range rotation_range{-10.0, 10.0};  // degrees
  double blur_prob = 0.5;
  Range blur_sigma_range{0.5, 1.5};
  int crop_size = 713;  // 0 keeps the transformed frame
  std::uint64_t seed = 0;

  // Disables every stochastic step; crops are still applied.
  static AugmentConfig Identity(int crop_size = 0);
  void Validate() const;
};

struct Augmented {
  Tensor image;
  std::optional<Tensor> label;
};

// Applies, in order: horizontal mirror, uniform scale (bilinear for the
// image, nearest for the label), rotation (out-of-frame image pixels are 0,
// label pixels kIgnoreLabel), Gaussian blur on the image only, and a random
// crop.  Frames smaller than the crop are padded symmetrically first.  The
// result is a pure function of the inputs and the generator state.
Augmented Augment(const Tensor& image, const std::optional<Tensor>& label,
                  const AugmentConfig& cfg, std::mt19937_64& rng);

}  // namespace capad

#endif  // CAPAD_AUGMENT_HPP_
