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
#include "capad/resample.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace capad {
namespace {

void CheckTarget(int height, int width) {
  if (height <= 0 || width <= 0) {
    throw std::invalid_argument("resize target must be positive");
  }
}

}  // namespace

std::vector<LinearTap> HalfPixelTaps(int in, int out) {
  std::vector<LinearTap> taps(out);
  const double scale = static_cast<double>(in) / out;
  for (int i = 0; i < out; ++i) {
    double src = (i + 0.5) * scale - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(in - 1));
    const int lo = static_cast<int>(std::floor(src));
    taps[i] = {lo, std::min(lo + 1, in - 1), src - lo};
  }
  return taps;
}

Tensor ResizeBilinear(const Tensor& t, int height, int width) {
  CheckTarget(height, width);
  const auto ty = HalfPixelTaps(t.height(), height);
  const auto tx = HalfPixelTaps(t.width(), width);
  Tensor out(t.channels(), height, width);
  for (int c = 0; c < t.channels(); ++c) {
    for (int y = 0; y < height; ++y) {
      const LinearTap& a = ty[y];
      for (int x = 0; x < width; ++x) {
        const LinearTap& b = tx[x];
        const double top =
            (1.0 - b.frac) * t.at(c, a.lo, b.lo) + b.frac * t.at(c, a.lo, b.hi);
        const double bottom =
            (1.0 - b.frac) * t.at(c, a.hi, b.lo) + b.frac * t.at(c, a.hi, b.hi);
        out.at(c, y, x) = (1.0 - a.frac) * top + a.frac * bottom;
      }
    }
  }
  return out;
}

Tensor ResizeNearest(const Tensor& t, int height, int width) {
  CheckTarget(height, width);
  auto index = [](int i, int in, int out) {
    const int src = static_cast<int>(std::floor((i + 0.5) * in / out));
    return std::min(src, in - 1);
  };
  Tensor out(t.channels(), height, width);
  for (int c = 0; c < t.channels(); ++c)
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x)
        out.at(c, y, x) = t.at(c, index(y, t.height(), height),
                               index(x, t.width(), width));
  return out;
}

Tensor Rotate(const Tensor& t, double degrees, Interpolation interpolation,
              double fill) {
  if (degrees == 0.0) return t;
  const double theta = degrees * std::numbers::pi / 180.0;
  const double cs = std::cos(theta), sn = std::sin(theta);
  const double cx = (t.width() - 1) / 2.0, cy = (t.height() - 1) / 2.0;
  const double max_x = t.width() - 1, max_y = t.height() - 1;
  Tensor out(t.channels(), t.height(), t.width(), fill);
  for (int y = 0; y < t.height(); ++y) {
    for (int x = 0; x < t.width(); ++x) {
      const double dx = x - cx, dy = y - cy;
      const double sx = cs * dx - sn * dy + cx;
      const double sy = sn * dx + cs * dy + cy;
      if (interpolation == Interpolation::kNearest) {
        const long nx = std::lround(sx), ny = std::lround(sy);
        if (nx < 0 || ny < 0 || nx > max_x || ny > max_y) continue;
        for (int c = 0; c < t.channels(); ++c)
          out.at(c, y, x) = t.at(c, static_cast<int>(ny), static_cast<int>(nx));
        continue;
      }
      if (sx < 0.0 || sy < 0.0 || sx > max_x || sy > max_y) continue;
      const int x0 = static_cast<int>(std::floor(sx));
      const int y0 = static_cast<int>(std::floor(sy));
      const int x1 = std::min(x0 + 1, t.width() - 1);
      const int y1 = std::min(y0 + 1, t.height() - 1);
      const double fx = sx - x0, fy = sy - y0;
      for (int c = 0; c < t.channels(); ++c) {
        const double top = (1 - fx) * t.at(c, y0, x0) + fx * t.at(c, y0, x1);
        const double bot = (1 - fx) * t.at(c, y1, x0) + fx * t.at(c, y1, x1);
        out.at(c, y, x) = (1 - fy) * top + fy * bot;
      }
    }
  }
  return out;
}

Tensor GaussianBlur(const Tensor& t, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("blur sigma must be > 0");
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    total += kernel[i + radius];
  }
  for (double& k : kernel) k /= total;

  const int H = t.height(), W = t.width();
  Tensor tmp(t.channels(), H, W), out(t.channels(), H, W);
  for (int c = 0; c < t.channels(); ++c) {
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        double s = 0.0;
        for (int i = -radius; i <= radius; ++i)
          s += kernel[i + radius] * t.at(c, y, std::clamp(x + i, 0, W - 1));
        tmp.at(c, y, x) = s;
      }
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        double s = 0.0;
        for (int i = -radius; i <= radius; ++i)
          s += kernel[i + radius] * tmp.at(c, std::clamp(y + i, 0, H - 1), x);
        out.at(c, y, x) = s;
      }
  }
  return out;
}

}  // namespace capad
