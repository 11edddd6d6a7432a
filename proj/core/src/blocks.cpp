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
#include "capad/blocks.hpp"

#include <charconv>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace capad {
namespace {

long ParseLong(std::string_view text) {
  long v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw std::invalid_argument("not an integer: '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

Fraction ParseFraction(std::string_view text) {
  if (text.empty() || text.front() == '-') {
    throw std::invalid_argument("invalid fraction '" + std::string(text) + "'");
  }
  Fraction f;
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    f.numerator = ParseLong(text.substr(0, slash));
    f.denominator = ParseLong(text.substr(slash + 1));
  } else if (auto dot = text.find('.'); dot != std::string_view::npos) {
    const std::string_view frac = text.substr(dot + 1);
    if (frac.size() > 9) throw std::invalid_argument("too many decimals");
    long scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    const long whole = dot == 0 ? 0 : ParseLong(text.substr(0, dot));
    f.numerator = whole * scale + (frac.empty() ? 0 : ParseLong(frac));
    f.denominator = scale;
  } else {
    f.numerator = ParseLong(text);
  }
  if (f.denominator <= 0 || f.numerator < 0) {
    throw std::invalid_argument("invalid fraction '" + std::string(text) + "'");
  }
  const long g = std::gcd(f.numerator, f.denominator);
  if (g > 1) {
    f.numerator /= g;
    f.denominator /= g;
  }
  return f;
}

Mask MakeBorderMask(int height, int width, int p, SideSet sides) {
  if (p < 1) throw std::invalid_argument("border width p must be >= 1");
  const int horizontal = sides.contains(Side::kLeft) + sides.contains(Side::kRight);
  const int vertical = sides.contains(Side::kTop) + sides.contains(Side::kBottom);
  if (horizontal * p >= width || vertical * p >= height) {
    throw std::invalid_argument("border width " + std::to_string(p) +
                                " too large for " + std::to_string(height) +
                                "x" + std::to_string(width) + " mask");
  }
  Mask mask(height, width, 1);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const bool pad = (sides.contains(Side::kLeft) && x < p) ||
                       (sides.contains(Side::kRight) && x >= width - p) ||
                       (sides.contains(Side::kTop) && y < p) ||
                       (sides.contains(Side::kBottom) && y >= height - p);
      if (pad) mask.at(y, x) = 0;
    }
  }
  return mask;
}

Block ExtractBlock(const Tensor& image, Side side, int p, int m) {
  if (p < 1 || m < 1) {
    throw std::invalid_argument("block requires p >= 1 and m >= 1");
  }
  const int extent = IsHorizontal(side) ? image.width() : image.height();
  if (p + m > extent) {
    throw std::invalid_argument(
        "block p + m = " + std::to_string(p + m) + " exceeds image " +
        std::string(IsHorizontal(side) ? "width " : "height ") +
        std::to_string(extent));
  }
  Block block;
  block.side = side;
  block.p = p;
  block.m = m;
  const int C = image.channels(), H = image.height(), W = image.width();
  switch (side) {
    case Side::kLeft:
      block.tensor = Tensor(C, H, p + m);
      Paste(Crop(image, 0, 0, H, m), 0, p, block.tensor);
      break;
    case Side::kRight:
      block.tensor = Tensor(C, H, p + m);
      Paste(Crop(image, 0, W - m, H, m), 0, 0, block.tensor);
      break;
    case Side::kTop:
      block.tensor = Tensor(C, p + m, W);
      Paste(Crop(image, 0, 0, m, W), p, 0, block.tensor);
      break;
    case Side::kBottom:
      block.tensor = Tensor(C, p + m, W);
      Paste(Crop(image, H - m, 0, m, W), 0, 0, block.tensor);
      break;
  }
  return block;
}

Mask BlockMask(const Block& block) {
  const Tensor& t = block.tensor;
  return MakeBorderMask(t.height(), t.width(), block.p, {block.side});
}

Tensor DropPadBand(const Block& block) {
  const Tensor& t = block.tensor;
  switch (block.side) {
    case Side::kLeft:
      return Crop(t, 0, block.p, t.height(), block.m);
    case Side::kRight:
      return Crop(t, 0, 0, t.height(), block.m);
    case Side::kTop:
      return Crop(t, block.p, 0, block.m, t.width());
    case Side::kBottom:
      return Crop(t, 0, 0, block.m, t.width());
  }
  throw std::logic_error("unreachable");
}

std::vector<int> CropOrigins(int extent, int crop, Fraction overlap) {
  if (crop < 1 || crop > extent) {
    throw std::invalid_argument("crop " + std::to_string(crop) +
                                " does not fit extent " + std::to_string(extent));
  }
  const long shared = (static_cast<long>(crop) * overlap.numerator) /
                      overlap.denominator;
  const int stride = crop - static_cast<int>(shared);
  if (stride < 1) throw std::invalid_argument("overlap must be below 1");
  std::vector<int> origins = {0};
  while (origins.back() + crop < extent) {
    origins.push_back(std::min(origins.back() + stride, extent - crop));
  }
  return origins;
}

std::vector<CropWindow> SlidingCrops(const Tensor& image, int crop,
                                     Fraction overlap) {
  const auto ys = CropOrigins(image.height(), crop, overlap);
  const auto xs = CropOrigins(image.width(), crop, overlap);
  std::vector<CropWindow> out;
  out.reserve(ys.size() * xs.size());
  for (int y : ys) {
    for (int x : xs) {
      out.push_back({Crop(image, y, x, crop, crop), {x, y}});
    }
  }
  return out;
}

}  // namespace capad
