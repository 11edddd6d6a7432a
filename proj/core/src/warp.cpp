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
#include "capad/warp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace capad {
namespace {

// Sample position along one axis, split into an integer base and an exact
// fractional part.  The split is computed from the displacement alone so a
// mirrored displacement produces the mirrored split (frac -> 1 - frac) with
// no rounding.
struct AxisSample {
  int lo = 0;
  int hi = 0;
  double frac = 0.0;
  bool clamped = false;
};

AxisSample SampleAxis(int index, double displacement, int extent) {
  const double shift = -displacement;
  const double whole = std::floor(shift);
  const double frac = shift - whole;
  const double base = index + whole;
  AxisSample s;
  if (base < 0.0) {
    s.clamped = true;
  } else if (base > extent - 1 || (base == extent - 1 && frac > 0.0)) {
    s.lo = extent - 1;
    s.clamped = true;
  } else {
    s.lo = static_cast<int>(base);
    s.frac = frac;
  }
  s.hi = std::min(s.lo + 1, extent - 1);
  return s;
}

void CheckField(const Tensor& block, const DisplacementField& field) {
  if (field.dx.channels() != 1 || field.dy.channels() != 1 ||
      !field.dx.same_shape(field.dy)) {
    throw std::invalid_argument("displacement field must be two (1, h, w) maps");
  }
  if (field.height() != block.height() || field.width() != block.width()) {
    throw std::invalid_argument("displacement field " + field.dx.shape_string() +
                                " does not match block " + block.shape_string());
  }
  for (std::size_t i = 0; i < field.dx.size(); ++i) {
    if (!std::isfinite(field.dx.values()[i]) ||
        !std::isfinite(field.dy.values()[i])) {
      throw std::invalid_argument("displacement field contains non-finite values");
    }
  }
}

}  // namespace

DisplacementField::DisplacementField(Tensor dx_, Tensor dy_)
    : dx(std::move(dx_)), dy(std::move(dy_)) {
  if (dx.channels() != 1 || !dx.same_shape(dy)) {
    throw std::invalid_argument("displacement field must be two (1, h, w) maps");
  }
}

DisplacementField DisplacementField::FromChannels(const Tensor& two_channel) {
  if (two_channel.channels() != 2) {
    throw std::invalid_argument("displacement tensor must have 2 channels, got " +
                                two_channel.shape_string());
  }
  const int h = two_channel.height(), w = two_channel.width();
  auto channel = [&](int c) {
    const auto plane = two_channel.plane(c);
    return Tensor(1, h, w, std::vector<double>(plane.begin(), plane.end()));
  };
  return DisplacementField(channel(0), channel(1));
}

Tensor DisplacementField::ToChannels() const {
  Tensor out(2, height(), width());
  std::copy(dx.values().begin(), dx.values().end(), out.plane(0).begin());
  std::copy(dy.values().begin(), dy.values().end(), out.plane(1).begin());
  return out;
}

Tensor WarpForward(const Tensor& block, const DisplacementField& field) {
  CheckField(block, field);
  const int H = block.height(), W = block.width();
  Tensor out(block.channels(), H, W);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const AxisSample sx = SampleAxis(x, field.dx.at(0, y, x), W);
      const AxisSample sy = SampleAxis(y, field.dy.at(0, y, x), H);
      const double wx0 = 1.0 - sx.frac, wy0 = 1.0 - sy.frac;
      for (int c = 0; c < block.channels(); ++c) {
        const double top = wx0 * block.at(c, sy.lo, sx.lo) +
                           sx.frac * block.at(c, sy.lo, sx.hi);
        const double bottom = wx0 * block.at(c, sy.hi, sx.lo) +
                              sx.frac * block.at(c, sy.hi, sx.hi);
        out.at(c, y, x) = wy0 * top + sy.frac * bottom;
      }
    }
  }
  return out;
}

WarpGradients WarpBackward(const Tensor& grad_out, const Tensor& block,
                           const DisplacementField& field) {
  CheckField(block, field);
  CheckSameShape(grad_out, block, "warp backward");
  const int H = block.height(), W = block.width();
  WarpGradients g{Tensor(block.channels(), H, W), DisplacementField(H, W)};
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const AxisSample sx = SampleAxis(x, field.dx.at(0, y, x), W);
      const AxisSample sy = SampleAxis(y, field.dy.at(0, y, x), H);
      const double wx0 = 1.0 - sx.frac, wy0 = 1.0 - sy.frac;
      double d_sample_x = 0.0, d_sample_y = 0.0;
      for (int c = 0; c < block.channels(); ++c) {
        const double go = grad_out.at(c, y, x);
        const double v00 = block.at(c, sy.lo, sx.lo);
        const double v01 = block.at(c, sy.lo, sx.hi);
        const double v10 = block.at(c, sy.hi, sx.lo);
        const double v11 = block.at(c, sy.hi, sx.hi);
        g.block.at(c, sy.lo, sx.lo) += go * wy0 * wx0;
        g.block.at(c, sy.lo, sx.hi) += go * wy0 * sx.frac;
        g.block.at(c, sy.hi, sx.lo) += go * sy.frac * wx0;
        g.block.at(c, sy.hi, sx.hi) += go * sy.frac * sx.frac;
        d_sample_x += go * (wy0 * (v01 - v00) + sy.frac * (v11 - v10));
        d_sample_y += go * (wx0 * (v10 - v00) + sx.frac * (v11 - v01));
      }
      // sample = index - displacement
      g.field.dx.at(0, y, x) = sx.clamped ? 0.0 : -d_sample_x;
      g.field.dy.at(0, y, x) = sy.clamped ? 0.0 : -d_sample_y;
    }
  }
  return g;
}

}  // namespace capad
