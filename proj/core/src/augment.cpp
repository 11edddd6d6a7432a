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
#include "capad/augment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "capad/resample.hpp"

namespace capad {
namespace {

double Uniform(std::mt19937_64& rng, Range r) {
  // 53 random bits mapped to [0, 1); independent of the standard library's
  // distribution implementations.
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return r.lo + u * (r.hi - r.lo);
}

Tensor PadTo(const Tensor& t, int height, int width, double fill) {
  if (t.height() >= height && t.width() >= width) return t;
  const int H = std::max(height, t.height()), W = std::max(width, t.width());
  Tensor out(t.channels(), H, W, fill);
  Paste(t, (H - t.height()) / 2, (W - t.width()) / 2, out);
  return out;
}

}  // namespace

AugmentConfig AugmentConfig::Identity(int crop_size) {
  AugmentConfig cfg;
  cfg.mirror_prob = 0.0;
  cfg.scale_range = {1.0, 1.0};
  cfg.rotation_range = {0.0, 0.0};
  cfg.blur_prob = 0.0;
  cfg.crop_size = crop_size;
  return cfg;
}

void AugmentConfig::Validate() const {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(mirror_prob) || !prob(blur_prob)) {
    throw std::invalid_argument("augmentation probabilities must be in [0, 1]");
  }
  if (!(scale_range.lo > 0.0) || scale_range.hi < scale_range.lo) {
    throw std::invalid_argument("scale range must be a positive interval");
  }
  if (rotation_range.hi < rotation_range.lo) {
    throw std::invalid_argument("rotation range is empty");
  }
  if (blur_prob > 0.0 &&
      (!(blur_sigma_range.lo > 0.0) || blur_sigma_range.hi < blur_sigma_range.lo)) {
    throw std::invalid_argument("blur sigma range must be a positive interval");
  }
  if (crop_size < 0) throw std::invalid_argument("crop size must be >= 0");
}

Augmented Augment(const Tensor& image, const std::optional<Tensor>& label,
                  const AugmentConfig& cfg, std::mt19937_64& rng) {
  cfg.Validate();
  if (label && (label->height() != image.height() ||
                label->width() != image.width())) {
    throw std::invalid_argument("label " + label->shape_string() +
                                " does not match image " + image.shape_string());
  }
  // Draw every random quantity up front so the stream consumption does not
  // depend on which steps fire.
  const bool mirror = Uniform(rng, {0.0, 1.0}) < cfg.mirror_prob;
  const double scale = Uniform(rng, cfg.scale_range);
  const double angle = Uniform(rng, cfg.rotation_range);
  const bool blur = Uniform(rng, {0.0, 1.0}) < cfg.blur_prob;
  const double sigma = Uniform(rng, cfg.blur_sigma_range);
  const double crop_u = Uniform(rng, {0.0, 1.0});
  const double crop_v = Uniform(rng, {0.0, 1.0});

  Augmented out{image, label};
  if (mirror) {
    out.image = FlipHorizontal(out.image);
    if (out.label) out.label = FlipHorizontal(*out.label);
  }
  if (scale != 1.0) {
    const int h = std::max(1, static_cast<int>(std::lround(image.height() * scale)));
    const int w = std::max(1, static_cast<int>(std::lround(image.width() * scale)));
    out.image = ResizeBilinear(out.image, h, w);
    if (out.label) out.label = ResizeNearest(*out.label, h, w);
  }
  if (angle != 0.0) {
    out.image = Rotate(out.image, angle, Interpolation::kBilinear, 0.0);
    if (out.label) {
      out.label = Rotate(*out.label, angle, Interpolation::kNearest, kIgnoreLabel);
    }
  }
  if (blur) out.image = GaussianBlur(out.image, sigma);

  if (cfg.crop_size > 0) {
    const int crop = cfg.crop_size;
    out.image = PadTo(out.image, crop, crop, 0.0);
    if (out.label) out.label = PadTo(*out.label, crop, crop, kIgnoreLabel);
    const int max_y = out.image.height() - crop, max_x = out.image.width() - crop;
    const int y0 = std::min(max_y, static_cast<int>(crop_u * (max_y + 1)));
    const int x0 = std::min(max_x, static_cast<int>(crop_v * (max_x + 1)));
    out.image = Crop(out.image, y0, x0, crop, crop);
    if (out.label) out.label = Crop(*out.label, y0, x0, crop, crop);
  }
  return out;
}

}  // namespace capad
