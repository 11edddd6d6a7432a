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
#ifndef CAPAD_TENSOR_HPP_
#define CAPAD_TENSOR_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace capad {

// Image side a padding band or block is attached to.  The numeric values are
// part of the CAPM checkpoint format.
enum class Side : std::uint8_t { kLeft = 0, kRight = 1, kTop = 2, kBottom = 3 };

inline constexpr Side kAllSides[] = {Side::kLeft, Side::kRight, Side::kTop,
                                     Side::kBottom};

std::string_view SideName(Side side);
Side ParseSide(std::string_view name);

inline bool IsHorizontal(Side side) {
  return side == Side::kLeft || side == Side::kRight;
}

// Set of sides, stored as a bitmask over Side values.
class SideSet {
 public:
  constexpr SideSet() = default;
  constexpr SideSet(std::initializer_list<Side> sides) {
    for (Side s : sides) bits_ |= Bit(s);
  }
  static constexpr SideSet All() {
    return {Side::kLeft, Side::kRight, Side::kTop, Side::kBottom};
  }

  constexpr bool contains(Side s) const { return (bits_ & Bit(s)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }

 private:
  static constexpr std::uint8_t Bit(Side s) {
    return static_cast<std::uint8_t>(1u << static_cast<unsigned>(s));
  }
  std::uint8_t bits_ = 0;
};

// Dense (channels, height, width) array, channel-major then row-major.
//
// Images hold values in [0, 1]; gradients and feature maps are unbounded.
// Accessors are unchecked; shape agreement is validated by the operations.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int channels, int height, int width, double fill = 0.0);
  Tensor(int channels, int height, int width, std::vector<double> values);

  int channels() const { return channels_; }
  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  std::size_t plane_size() const {
    return static_cast<std::size_t>(height_) * width_;
  }

  double& at(int c, int y, int x) {
    return values_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x];
  }
  double at(int c, int y, int x) const {
    return values_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x];
  }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::span<double> plane(int c) {
    return std::span<double>(values_).subspan(c * plane_size(), plane_size());
  }
  std::span<const double> plane(int c) const {
    return std::span<const double>(values_).subspan(c * plane_size(),
                                                    plane_size());
  }

  bool same_shape(const Tensor& other) const {
    return channels_ == other.channels_ && height_ == other.height_ &&
           width_ == other.width_;
  }
  std::string shape_string() const;

  friend bool operator==(const Tensor& a, const Tensor& b) = default;

 private:
  int channels_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<double> values_;
};

// Single-channel 0/1 map; 1 marks known pixels, 0 marks padding.
class Mask {
 public:
  Mask() = default;
  Mask(int height, int width, std::uint8_t fill = 1);

  int height() const { return height_; }
  int width() const { return width_; }

  std::uint8_t& at(int y, int x) {
    return values_[static_cast<std::size_t>(y) * width_ + x];
  }
  std::uint8_t at(int y, int x) const {
    return values_[static_cast<std::size_t>(y) * width_ + x];
  }
  std::span<const std::uint8_t> values() const { return values_; }

  std::size_t count_zeros() const;

  friend bool operator==(const Mask& a, const Mask& b) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> values_;
};

Tensor FlipHorizontal(const Tensor& t);
Tensor FlipVertical(const Tensor& t);

// Copies `src` into `dst` with its top-left corner at (y0, x0).
void Paste(const Tensor& src, int y0, int x0, Tensor& dst);
Tensor Crop(const Tensor& src, int y0, int x0, int height, int width);

// Throws std::invalid_argument naming `what` unless a and b share a shape.
void CheckSameShape(const Tensor& a, const Tensor& b, std::string_view what);

}  // namespace capad

#endif  // CAPAD_TENSOR_HPP_
