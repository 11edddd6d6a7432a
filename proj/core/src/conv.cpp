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
#include "capad/conv.hpp"

#include <stdexcept>
#include <string>

#include "capad/parallel.hpp"

namespace capad {
namespace {

// WindowDot for a 3x3 window that lies inside the plane; same summation order.
inline double WindowDot3(const double* plane, int width, int y0, int x0,
                         const double* f) {
  const double* r0 = plane + static_cast<std::size_t>(y0) * width + x0;
  const double* r1 = r0 + width;
  const double* r2 = r1 + width;
  const double s0 = (r0[0] * f[0] + r0[2] * f[2]) + r0[1] * f[1];
  const double s1 = (r1[0] * f[3] + r1[2] * f[5]) + r1[1] * f[4];
  const double s2 = (r2[0] * f[6] + r2[2] * f[8]) + r2[1] * f[7];
  return (s0 + s2) + s1;
}

}  // namespace

ConvKernel::ConvKernel(int out_ch, int in_ch, int k, double fill)
    : out_channels(out_ch), in_channels(in_ch), size(k) {
  if (out_ch <= 0 || in_ch <= 0 || k <= 0) {
    throw std::invalid_argument("kernel dimensions must be positive");
  }
  weights.assign(static_cast<std::size_t>(out_ch) * in_ch * k * k, fill);
}

int ConvOutputExtent(int in, int kernel, int stride, int padding) {
  if (stride < 1) throw std::invalid_argument("stride must be >= 1");
  const int span = in + 2 * padding - kernel;
  if (span < 0) {
    throw std::invalid_argument("kernel " + std::to_string(kernel) +
                                " larger than padded extent " +
                                std::to_string(in + 2 * padding));
  }
  return span / stride + 1;
}

double WindowDot(const double* plane, int height, int width, int y0, int x0,
                 const double* filter, int k) {
  auto row = [&](int r) {
    const int y = y0 + r;
    if (y < 0 || y >= height) return 0.0;
    const double* src = plane + static_cast<std::size_t>(y) * width;
    const double* f = filter + static_cast<std::size_t>(r) * k;
    auto tap = [&](int c) {
      const int x = x0 + c;
      return (x < 0 || x >= width) ? 0.0 : src[x] * f[c];
    };
    double s = 0.0;
    for (int c = 0; c < k / 2; ++c) s += tap(c) + tap(k - 1 - c);
    return s + tap(k / 2);
  };
  double s = 0.0;
  for (int r = 0; r < k / 2; ++r) s += row(r) + row(k - 1 - r);
  return s + row(k / 2);
}

Tensor Conv2d(const Tensor& input, const ConvKernel& kernel,
              std::span<const double> bias, int stride, int padding) {
  if (input.channels() != kernel.in_channels) {
    throw std::invalid_argument("conv input has " +
                                std::to_string(input.channels()) +
                                " channels, kernel expects " +
                                std::to_string(kernel.in_channels));
  }
  if (!bias.empty() && static_cast<int>(bias.size()) != kernel.out_channels) {
    throw std::invalid_argument("conv bias size does not match out channels");
  }
  const int oh = ConvOutputExtent(input.height(), kernel.size, stride, padding);
  const int ow = ConvOutputExtent(input.width(), kernel.size, stride, padding);
  Tensor out(kernel.out_channels, oh, ow);
  ParallelFor(kernel.out_channels, [&](int o) {
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        const int y0 = y * stride - padding, x0 = x * stride - padding;
        const bool inside = kernel.size == 3 && y0 >= 0 && x0 >= 0 &&
                            y0 + 3 <= input.height() && x0 + 3 <= input.width();
        double acc = 0.0;
        for (int i = 0; i < kernel.in_channels; ++i) {
          acc += inside ? WindowDot3(input.plane(i).data(), input.width(), y0,
                                     x0, kernel.filter(o, i))
                        : WindowDot(input.plane(i).data(), input.height(),
                                    input.width(), y0, x0, kernel.filter(o, i),
                                    kernel.size);
        }
        out.at(o, y, x) = bias.empty() ? acc : acc + bias[o];
      }
    }
  });
  return out;
}

}  // namespace capad
