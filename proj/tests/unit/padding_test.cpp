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

#include <gtest/gtest.h>

#include <optional>
#include <random>
#include <stdexcept>

#include "capad/blocks.hpp"
#include "capad/conv.hpp"
#include "test_util.hpp"

namespace capad {
namespace {

using ::capad::testing::RandomTensor;
using ::capad::testing::Uniform;

// Source index for a padded coordinate, by walking the definition of each
// scheme; nullopt means the pixel is zero.
std::optional<int> OracleIndex(int i, int n, PadMethod method) {
  if (i >= 0 && i < n) return i;
  switch (method) {
    case PadMethod::kZero:
      return std::nullopt;
    case PadMethod::kReplicate:
      return i < 0 ? 0 : n - 1;
    case PadMethod::kCircular: {
      int j = i;
      while (j < 0) j += n;
      while (j >= n) j -= n;
      return j;
    }
    case PadMethod::kReflect: {
      // Step away from the edge, bouncing off the outermost pixels.
      int j = i < 0 ? 0 : n - 1;
      int dir = i < 0 ? 1 : -1;
      for (int steps = i < 0 ? -i : i - (n - 1); steps > 0; --steps) {
        if (j + dir < 0 || j + dir >= n) dir = -dir;
        j += dir;
      }
      return j;
    }
    default:
      return std::nullopt;
  }
}

Tensor OraclePad(const Tensor& t, PadMethod method, int p) {
  Tensor out(t.channels(), t.height() + 2 * p, t.width() + 2 * p);
  for (int c = 0; c < t.channels(); ++c)
    for (int y = 0; y < out.height(); ++y)
      for (int x = 0; x < out.width(); ++x) {
        const auto sy = OracleIndex(y - p, t.height(), method);
        const auto sx = OracleIndex(x - p, t.width(), method);
        out.at(c, y, x) = sy && sx ? t.at(c, *sy, *sx) : 0.0;
      }
  return out;
}

TEST(IndexMappedTest, ZeroFrame) {
  const Tensor t(1, 2, 2, {1, 2, 3, 4});
  EXPECT_EQ(PadIndexMapped(t, PadMethod::kZero, 1),
            Tensor(1, 4, 4, {0, 0, 0, 0, 0, 1, 2, 0, 0, 3, 4, 0, 0, 0, 0, 0}));
}

TEST(IndexMappedTest, CircularRow) {
  const Tensor row(1, 1, 3, {1, 2, 3});
  const Tensor out = PadIndexMapped(row, PadMethod::kCircular, 1);
  for (int y = 0; y < 3; ++y) {
    const double expected[] = {3, 1, 2, 3, 1};
    for (int x = 0; x < 5; ++x) EXPECT_EQ(out.at(0, y, x), expected[x]);
  }
}

TEST(IndexMappedTest, ReplicateAndReflect) {
  const Tensor t(1, 2, 2, {1, 2, 3, 4});
  EXPECT_EQ(PadIndexMapped(t, PadMethod::kReplicate, 1),
            Tensor(1, 4, 4, {1, 1, 2, 2, 1, 1, 2, 2, 3, 3, 4, 4, 3, 3, 4, 4}));
  EXPECT_EQ(PadIndexMapped(t, PadMethod::kReflect, 1),
            Tensor(1, 4, 4, {4, 3, 4, 3, 2, 1, 2, 1, 4, 3, 4, 3, 2, 1, 2, 1}));
}

TEST(IndexMappedTest, MatchesOracleForAllSmallShapes) {
  std::mt19937_64 rng(21);
  const PadMethod methods[] = {PadMethod::kZero, PadMethod::kCircular,
                               PadMethod::kReflect, PadMethod::kReplicate};
  int checked = 0;
  for (int h = 1; h <= 16; ++h)
    for (int w = 1; w <= 16; ++w) {
      const Tensor t = RandomTensor(rng, 2, h, w);
      for (PadMethod method : methods)
        for (int p = 1; p <= 3; ++p) {
          const int limit = std::min(h, w);
          const bool valid = method == PadMethod::kReflect    ? p <= limit - 1
                             : method == PadMethod::kCircular ? p <= limit
                                                              : true;
          if (!valid) {
            EXPECT_THROW(PadIndexMapped(t, method, p), std::invalid_argument);
            continue;
          }
          ASSERT_EQ(PadIndexMapped(t, method, p), OraclePad(t, method, p))
              << MethodName(method) << " " << h << "x" << w << " p=" << p;
          ++checked;
        }
    }
  // 3072 combinations minus 269 with p too large for reflect or circular.
  EXPECT_EQ(checked, 2803);
}

TEST(IndexMappedTest, InteriorIsUntouched) {
  std::mt19937_64 rng(2);
  const Tensor t = RandomTensor(rng, 3, 9, 6);
  for (PadMethod m : {PadMethod::kZero, PadMethod::kCircular, PadMethod::kReflect,
                      PadMethod::kReplicate, PadMethod::kBilinear,
                      PadMethod::kDistribution}) {
    EXPECT_EQ(Crop(PadClassic(t, m, 3), 3, 3, 9, 6), t) << MethodName(m);
  }
}

TEST(IndexMappedTest, RejectsBadArguments) {
  const Tensor t(1, 4, 4);
  EXPECT_THROW(PadIndexMapped(t, PadMethod::kZero, 0), std::invalid_argument);
  EXPECT_THROW(PadIndexMapped(t, PadMethod::kBilinear, 1), std::invalid_argument);
  EXPECT_THROW(PadClassic(t, PadMethod::kContextAware, 1), std::invalid_argument);
  EXPECT_THROW(ParseMethod("mirror"), std::invalid_argument);
}

TEST(MethodNameTest, RoundTrips) {
  for (const char* name :
       {"zero", "circular", "reflect", "replicate", "bilinear", "distribution", "ca"}) {
    EXPECT_EQ(MethodName(ParseMethod(name)), name);
  }
}

TEST(BilinearExtrapolationTest, ContinuesSlope) {
  const Tensor t(1, 2, 2, {0.1, 0.2, 0.1, 0.2});
  const Tensor out = PadBilinearExtrapolation(t, 1);
  EXPECT_NEAR(out.at(0, 1, 3), 0.3, 1e-15);
  EXPECT_NEAR(out.at(0, 1, 0), 0.0, 1e-15);
}

TEST(BilinearExtrapolationTest, ClampsToUnitRange) {
  const Tensor t(1, 2, 2, {0.2, 0.9, 0.2, 0.9});
  EXPECT_EQ(PadBilinearExtrapolation(t, 1).at(0, 1, 3), 1.0);
  EXPECT_NEAR(PadBilinearExtrapolation(t, 1, false).at(0, 1, 3), 1.6, 1e-15);
}

TEST(BilinearExtrapolationTest, ConstantAndPlanarInputs) {
  const Tensor c(2, 3, 4, 0.35);
  const Tensor cp = PadBilinearExtrapolation(c, 2);
  for (double v : cp.values()) EXPECT_EQ(v, 0.35);
  // A plane a + b y + d x is reproduced exactly, corners included.
  Tensor plane(1, 4, 5);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 5; ++x) plane.at(0, y, x) = 0.5 + 0.03 * y - 0.02 * x;
  const Tensor out = PadBilinearExtrapolation(plane, 3);
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x)
      EXPECT_NEAR(out.at(0, y, x), 0.5 + 0.03 * (y - 3) - 0.02 * (x - 3), 1e-14);
  EXPECT_THROW(PadBilinearExtrapolation(Tensor(1, 1, 4), 1), std::invalid_argument);
}

TEST(DistributionPadTest, ConstantStaysConstant) {
  const Tensor c(3, 5, 7, 0.6);
  const Tensor out = PadDistribution(c, 3);
  ASSERT_EQ(out.height(), 11);
  ASSERT_EQ(out.width(), 13);
  for (double v : out.values()) EXPECT_NEAR(v, 0.6, 1e-15);
}

TEST(DistributionPadTest, FrameComesFromResizedImage) {
  std::mt19937_64 rng(8);
  const Tensor t = RandomTensor(rng, 1, 6, 6);
  const Tensor out = PadDistribution(t, 2);
  double lo = 1.0, hi = 0.0;
  for (double v : t.values()) lo = std::min(lo, v), hi = std::max(hi, v);
  for (double v : out.values()) {
    EXPECT_GE(v, lo);
    EXPECT_LE(v, hi);
  }
}

// Direct sum over kernel taps, with zero padding.
Tensor NaiveConv(const Tensor& in, const ConvKernel& k, std::span<const double> bias,
                 int stride, int padding) {
  const int oh = (in.height() + 2 * padding - k.size) / stride + 1;
  const int ow = (in.width() + 2 * padding - k.size) / stride + 1;
  Tensor out(k.out_channels, oh, ow);
  for (int o = 0; o < k.out_channels; ++o)
    for (int y = 0; y < oh; ++y)
      for (int x = 0; x < ow; ++x) {
        double s = bias.empty() ? 0.0 : bias[o];
        for (int i = 0; i < k.in_channels; ++i)
          for (int ky = 0; ky < k.size; ++ky)
            for (int kx = 0; kx < k.size; ++kx) {
              const int sy = y * stride + ky - padding, sx = x * stride + kx - padding;
              if (sy < 0 || sx < 0 || sy >= in.height() || sx >= in.width()) continue;
              s += k.at(o, i, ky, kx) * in.at(i, sy, sx);
            }
        out.at(o, y, x) = s;
      }
  return out;
}

ConvKernel RandomConvKernel(std::mt19937_64& rng, int out, int in, int k) {
  ConvKernel kernel(out, in, k);
  for (double& w : kernel.weights) w = Uniform(rng, -1.0, 1.0);
  return kernel;
}

TEST(ConvTest, MatchesNaiveSum) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const int k = 1 + 2 * (trial % 3);
    const int stride = 1 + trial % 2;
    const int padding = trial % 3;
    const Tensor in = RandomTensor(rng, 2, 4 + trial % 7, 5 + trial % 5, -1.0, 1.0);
    const ConvKernel kernel = RandomConvKernel(rng, 3, 2, k);
    const std::vector<double> bias = {0.1, -0.2, 0.3};
    const Tensor got = Conv2d(in, kernel, bias, stride, padding);
    const Tensor want = NaiveConv(in, kernel, bias, stride, padding);
    ASSERT_TRUE(got.same_shape(want));
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_NEAR(got.values()[i], want.values()[i], 1e-12);
    }
  }
  EXPECT_EQ(ConvOutputExtent(7, 3, 2, 1), 4);
}

TEST(ConvTest, FlippedFilterOverFlippedInputIsBitwiseEqual) {
  std::mt19937_64 rng(5);
  const Tensor in = RandomTensor(rng, 2, 9, 8, -1.0, 1.0);
  const ConvKernel kernel = RandomConvKernel(rng, 2, 2, 3);
  ConvKernel flipped = kernel;
  for (int o = 0; o < 2; ++o)
    for (int i = 0; i < 2; ++i)
      for (int ky = 0; ky < 3; ++ky)
        for (int kx = 0; kx < 3; ++kx) flipped.at(o, i, ky, kx) = kernel.at(o, i, ky, 2 - kx);
  EXPECT_EQ(FlipHorizontal(Conv2d(in, kernel, {}, 1, 1)),
            Conv2d(FlipHorizontal(in), flipped, {}, 1, 1));
}

TEST(PartialConvTest, AllOnesMaskEqualsConvolution) {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 20; ++trial) {
    const int k = trial % 2 == 0 ? 3 : 5;
    const Tensor in = RandomTensor(rng, 3, 6 + trial % 5, 7 + trial % 4);
    const ConvKernel kernel = RandomConvKernel(rng, 2, 3, k);
    const std::vector<double> bias = {Uniform(rng, -1, 1), Uniform(rng, -1, 1)};
    const int stride = 1 + trial % 2;
    const auto result =
        PartialConv2d(in, Mask(in.height(), in.width(), 1), kernel, bias, stride);
    const Tensor want = NaiveConv(in, kernel, bias, stride, 0);
    ASSERT_TRUE(result.output.same_shape(want));
    for (std::size_t i = 0; i < want.size(); ++i) {
      EXPECT_NEAR(result.output.values()[i], want.values()[i], 1e-6);
    }
    for (std::uint8_t m : result.mask.values()) EXPECT_EQ(m, 1);
  }
}

TEST(PartialConvTest, CornerWindowIsScaledByNineQuarters) {
  std::mt19937_64 rng(6);
  const Tensor img = RandomTensor(rng, 1, 5, 5);
  const Tensor padded = PadIndexMapped(img, PadMethod::kZero, 1);
  const Mask mask = MakeBorderMask(7, 7, 1, SideSet::All());
  const ConvKernel ones(1, 1, 3, 1.0);
  const auto result = PartialConv2d(padded, mask, ones, {}, 1);
  const double valid_sum =
      img.at(0, 0, 0) + img.at(0, 0, 1) + img.at(0, 1, 0) + img.at(0, 1, 1);
  EXPECT_DOUBLE_EQ(result.output.at(0, 0, 0), valid_sum * 9.0 / 4.0);
  // Ratio of a corner window is exactly 9/4 on a constant image.
  const Tensor ones_img = PadIndexMapped(Tensor(1, 5, 5, 1.0), PadMethod::kZero, 1);
  const auto flat = PartialConv2d(ones_img, mask, ones, {}, 1);
  EXPECT_EQ(flat.output.at(0, 0, 0), 9.0);
  EXPECT_EQ(flat.output.at(0, 0, 2), 9.0);
  EXPECT_EQ(flat.output.at(0, 2, 2), 9.0);
}

TEST(PartialConvTest, EmptyMaskGivesBias) {
  std::mt19937_64 rng(7);
  const Tensor in = RandomTensor(rng, 2, 5, 5);
  const ConvKernel kernel = RandomConvKernel(rng, 2, 2, 3);
  const std::vector<double> bias = {0.25, -0.5};
  const auto result = PartialConv2d(in, Mask(5, 5, 0), kernel, bias, 1);
  for (int o = 0; o < 2; ++o)
    for (int y = 0; y < 3; ++y)
      for (int x = 0; x < 3; ++x) EXPECT_EQ(result.output.at(o, y, x), bias[o]);
  for (std::uint8_t m : result.mask.values()) EXPECT_EQ(m, 0);
}

TEST(PartialConvTest, RejectsMismatchedMask) {
  const ConvKernel kernel(1, 1, 3, 1.0);
  EXPECT_THROW(PartialConv2d(Tensor(1, 5, 5), Mask(4, 5), kernel, {}, 1),
               std::invalid_argument);
  EXPECT_THROW(PartialConv2d(Tensor(1, 5, 5), Mask(5, 5), ConvKernel(1, 1, 2), {}, 1),
               std::invalid_argument);
}

}  // namespace
}  // namespace capad
