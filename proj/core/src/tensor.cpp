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
#include "capad/tensor.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <string>

namespace capad {
namespace {

void CheckDims(int channels, int height, int width) {
  if (channels <= 0 || height <= 0 || width <= 0) {
    std::ostringstream os;
    os << "tensor dimensions must be positive, got (" << channels << ", "
       << height << ", " << width << ")";
    throw std::invalid_argument(os.str());
  }
}

}  // namespace

std::string_view SideName(Side side) {
  switch (side) {
    case Side::kLeft:
      return "left";
    case Side::kRight:
      return "right";
    case Side::kTop:
      return "top";
    case Side::kBottom:
      return "bottom";
  }
  return "?";
}

Side ParseSide(std::string_view name) {
  for (Side s : kAllSides) {
    if (SideName(s) == name) return s;
  }
  throw std::invalid_argument("unknown side '" + std::string(name) + "'");
}

Tensor::Tensor(int channels, int height, int width, double fill)
    : channels_(channels), height_(height), width_(width) {
  CheckDims(channels, height, width);
  values_.assign(static_cast<std::size_t>(channels) * height * width, fill);
}

Tensor::Tensor(int channels, int height, int width, std::vector<double> values)
    : channels_(channels),
      height_(height),
      width_(width),
      values_(std::move(values)) {
  CheckDims(channels, height, width);
  if (values_.size() != static_cast<std::size_t>(channels) * height * width) {
    throw std::invalid_argument("tensor value count " +
                                std::to_string(values_.size()) +
                                " does not match shape " + shape_string());
  }
}

std::string Tensor::shape_string() const {
  std::ostringstream os;
  os << "(" << channels_ << ", " << height_ << ", " << width_ << ")";
  return os.str();
}

Mask::Mask(int height, int width, std::uint8_t fill)
    : height_(height), width_(width) {
  if (height <= 0 || width <= 0) {
    throw std::invalid_argument("mask dimensions must be positive");
  }
  if (fill > 1) throw std::invalid_argument("mask values must be 0 or 1");
  values_.assign(static_cast<std::size_t>(height) * width, fill);
}

std::size_t Mask::count_zeros() const {
  return static_cast<std::size_t>(
      std::count(values_.begin(), values_.end(), std::uint8_t{0}));
}

Tensor FlipHorizontal(const Tensor& t) {
  Tensor out(t.channels(), t.height(), t.width());
  for (int c = 0; c < t.channels(); ++c)
    for (int y = 0; y < t.height(); ++y)
      for (int x = 0; x < t.width(); ++x)
        out.at(c, y, t.width() - 1 - x) = t.at(c, y, x);
  return out;
}

Tensor FlipVertical(const Tensor& t) {
  Tensor out(t.channels(), t.height(), t.width());
  for (int c = 0; c < t.channels(); ++c)
    for (int y = 0; y < t.height(); ++y)
      for (int x = 0; x < t.width(); ++x)
        out.at(c, t.height() - 1 - y, x) = t.at(c, y, x);
  return out;
}

void Paste(const Tensor& src, int y0, int x0, Tensor& dst) {
  if (src.channels() != dst.channels() || y0 < 0 || x0 < 0 ||
      y0 + src.height() > dst.height() || x0 + src.width() > dst.width()) {
    throw std::invalid_argument("paste of " + src.shape_string() +
                                " does not fit into " + dst.shape_string());
  }
  for (int c = 0; c < src.channels(); ++c)
    for (int y = 0; y < src.height(); ++y)
      std::copy_n(&src.values()[(static_cast<std::size_t>(c) * src.height() +
                                 y) * src.width()],
                  src.width(), &dst.at(c, y0 + y, x0));
}

Tensor Crop(const Tensor& src, int y0, int x0, int height, int width) {
  if (y0 < 0 || x0 < 0 || height <= 0 || width <= 0 ||
      y0 + height > src.height() || x0 + width > src.width()) {
    throw std::invalid_argument("crop window out of bounds for " +
                                src.shape_string());
  }
  Tensor out(src.channels(), height, width);
  for (int c = 0; c < src.channels(); ++c)
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x)
        out.at(c, y, x) = src.at(c, y0 + y, x0 + x);
  return out;
}

void CheckSameShape(const Tensor& a, const Tensor& b, std::string_view what) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch " +
                                a.shape_string() + " vs " + b.shape_string());
  }
}

}  // namespace capad
