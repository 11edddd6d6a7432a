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
#include "capad/padding.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "capad/resample.hpp"

namespace capad {
namespace {

constexpr int kUnmapped = -1;

int MapIndex(int i, int n, PadMethod method) {
  if (i >= 0 && i < n) return i;
  switch (method) {
    case PadMethod::kZero:
      return kUnmapped;
    case PadMethod::kCircular:
      return ((i % n) + n) % n;
    case PadMethod::kReflect:
      return i < 0 ? -i : 2 * (n - 1) - i;
    case PadMethod::kReplicate:
      return std::clamp(i, 0, n - 1);
    default:
      throw std::invalid_argument("not an index-mapped padding method");
  }
}

void CheckPad(int p) {
  if (p < 1) throw std::invalid_argument("padding width must be >= 1");
}

}  // namespace

std::string_view MethodName(PadMethod method) {
  switch (method) {
    case PadMethod::kZero:
      return "zero";
    case PadMethod::kCircular:
      return "circular";
    case PadMethod::kReflect:
      return "reflect";
    case PadMethod::kReplicate:
      return "replicate";
    case PadMethod::kBilinear:
      return "bilinear";
    case PadMethod::kDistribution:
      return "distribution";
    case PadMethod::kContextAware:
      return "ca";
  }
  return "?";
}

PadMethod ParseMethod(std::string_view name) {
  for (PadMethod m :
       {PadMethod::kZero, PadMethod::kCircular, PadMethod::kReflect,
        PadMethod::kReplicate, PadMethod::kBilinear, PadMethod::kDistribution,
        PadMethod::kContextAware}) {
    if (MethodName(m) == name) return m;
  }
  throw std::invalid_argument("unknown padding method '" + std::string(name) +
                              "'");
}

bool IsIndexMapped(PadMethod method) {
  return method == PadMethod::kZero || method == PadMethod::kCircular ||
         method == PadMethod::kReflect || method == PadMethod::kReplicate;
}

Tensor PadIndexMapped(const Tensor& t, PadMethod method, int p) {
  CheckPad(p);
  if (!IsIndexMapped(method)) {
    throw std::invalid_argument(std::string(MethodName(method)) +
                                " is not an index-mapped padding method");
  }
  const int H = t.height(), W = t.width();
  const int limit = std::min(H, W);
  if (method == PadMethod::kReflect && p > limit - 1) {
    throw std::invalid_argument("reflect padding needs p <= min(h, w) - 1");
  }
  if (method == PadMethod::kCircular && p > limit) {
    throw std::invalid_argument("circular padding needs p <= min(h, w)");
  }
  Tensor out(t.channels(), H + 2 * p, W + 2 * p);
  for (int y = 0; y < H + 2 * p; ++y) {
    const int sy = MapIndex(y - p, H, method);
    for (int x = 0; x < W + 2 * p; ++x) {
      const int sx = MapIndex(x - p, W, method);
      if (sy == kUnmapped || sx == kUnmapped) continue;
      for (int c = 0; c < t.channels(); ++c) out.at(c, y, x) = t.at(c, sy, sx);
    }
  }
  return out;
}

Tensor PadBilinearExtrapolation(const Tensor& t, int p, bool clamp_to_unit) {
  CheckPad(p);
  if (t.height() < 2 || t.width() < 2) {
    throw std::invalid_argument(
        "bilinear extrapolation needs at least 2 pixels per axis");
  }
  auto finish = [clamp_to_unit](double v) {
    return clamp_to_unit ? std::clamp(v, 0.0, 1.0) : v;
  };
  const int H = t.height(), W = t.width(), C = t.channels();
  Tensor rows(C, H, W + 2 * p);
  Paste(t, 0, p, rows);
  for (int c = 0; c < C; ++c) {
    for (int y = 0; y < H; ++y) {
      const double l0 = t.at(c, y, 0), l1 = t.at(c, y, 1);
      const double r0 = t.at(c, y, W - 1), r1 = t.at(c, y, W - 2);
      for (int d = 1; d <= p; ++d) {
        rows.at(c, y, p - d) = finish(l0 + d * (l0 - l1));
        rows.at(c, y, p + W - 1 + d) = finish(r0 + d * (r0 - r1));
      }
    }
  }
  const int Wp = W + 2 * p;
  Tensor out(C, H + 2 * p, Wp);
  Paste(rows, p, 0, out);
  for (int c = 0; c < C; ++c) {
    for (int x = 0; x < Wp; ++x) {
      const double t0 = rows.at(c, 0, x), t1 = rows.at(c, 1, x);
      const double b0 = rows.at(c, H - 1, x), b1 = rows.at(c, H - 2, x);
      for (int d = 1; d <= p; ++d) {
        out.at(c, p - d, x) = finish(t0 + d * (t0 - t1));
        out.at(c, p + H - 1 + d, x) = finish(b0 + d * (b0 - b1));
      }
    }
  }
  return out;
}

Tensor PadDistribution(const Tensor& t, int p) {
  CheckPad(p);
  Tensor out = ResizeBilinear(t, t.height() + 2 * p, t.width() + 2 * p);
  Paste(t, p, p, out);
  return out;
}

Tensor PadClassic(const Tensor& t, PadMethod method, int p) {
  switch (method) {
    case PadMethod::kBilinear:
      return PadBilinearExtrapolation(t, p);
    case PadMethod::kDistribution:
      return PadDistribution(t, p);
    case PadMethod::kContextAware:
      throw std::invalid_argument("context-aware padding requires a model");
    default:
      return PadIndexMapped(t, method, p);
  }
}

PartialConvOutput PartialConv2d(const Tensor& t, const Mask& mask,
                                const ConvKernel& kernel,
                                std::span<const double> bias, int stride) {
  if (kernel.size % 2 == 0) {
    throw std::invalid_argument("partial convolution needs an odd kernel");
  }
  if (mask.height() != t.height() || mask.width() != t.width()) {
    throw std::invalid_argument("mask dims do not match tensor " +
                                t.shape_string());
  }
  if (!bias.empty() && static_cast<int>(bias.size()) != kernel.out_channels) {
    throw std::invalid_argument("bias size does not match out channels");
  }
  Tensor masked = t;
  for (int c = 0; c < t.channels(); ++c)
    for (int y = 0; y < t.height(); ++y)
      for (int x = 0; x < t.width(); ++x)
        if (mask.at(y, x) == 0) masked.at(c, y, x) = 0.0;

  Tensor raw = Conv2d(masked, kernel, {}, stride, 0);
  const int k = kernel.size;
  const double window = static_cast<double>(k) * k;
  PartialConvOutput result{Tensor(raw.channels(), raw.height(), raw.width()),
                           Mask(raw.height(), raw.width(), 0)};
  for (int y = 0; y < raw.height(); ++y) {
    for (int x = 0; x < raw.width(); ++x) {
      int valid = 0;
      for (int ky = 0; ky < k; ++ky)
        for (int kx = 0; kx < k; ++kx)
          valid += mask.at(y * stride + ky, x * stride + kx);
      result.mask.at(y, x) = valid > 0 ? 1 : 0;
      const double ratio = valid > 0 ? window / valid : 0.0;
      for (int o = 0; o < raw.channels(); ++o) {
        const double b = bias.empty() ? 0.0 : bias[o];
        result.output.at(o, y, x) = valid > 0 ? raw.at(o, y, x) * ratio + b : b;
      }
    }
  }
  return result;
}

}  // namespace capad
