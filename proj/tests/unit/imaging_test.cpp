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
#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <stdexcept>

#include <unistd.h>

#include "capad/augment.hpp"
#include "capad/blocks.hpp"
#include "capad/image_io.hpp"
#include "capad/resample.hpp"
#include "capad/tensor.hpp"
#include "test_util.hpp"

namespace capad {
namespace {

namespace fs = std::filesystem;
using ::capad::testing::RandomTensor;

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("capad_imaging_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

using ImageIoTest = TempDir;

Raster RgbRaster(int w, int h, std::vector<std::uint8_t> samples) {
  Raster r;
  r.width = w;
  r.height = h;
  r.channels = 3;
  r.samples = std::move(samples);
  return r;
}

TEST_F(ImageIoTest, WhitePixelLoadsAsOnes) {
  WriteRaster(RgbRaster(1, 1, {255, 255, 255}), dir_ / "w.png");
  EXPECT_EQ(LoadImage(dir_ / "w.png"), Tensor(3, 1, 1, 1.0));
}

TEST_F(ImageIoTest, BlackPixelLoadsAsZeros) {
  WriteRaster(RgbRaster(1, 1, {0, 0, 0}), dir_ / "b.png");
  EXPECT_EQ(LoadImage(dir_ / "b.png"), Tensor(3, 1, 1, 0.0));
}

TEST_F(ImageIoTest, SamplesAreDividedBy255) {
  WriteRaster(RgbRaster(2, 1, {51, 51, 51, 255, 0, 0}), dir_ / "s.png");
  const Tensor t = LoadImage(dir_ / "s.png");
  ASSERT_EQ(t.shape_string(), Tensor(3, 1, 2).shape_string());
  for (int c = 0; c < 3; ++c) EXPECT_DOUBLE_EQ(t.at(c, 0, 0), 51.0 / 255.0);
  EXPECT_DOUBLE_EQ(t.at(0, 0, 1), 1.0);
  EXPECT_DOUBLE_EQ(t.at(1, 0, 1), 0.0);
  EXPECT_DOUBLE_EQ(t.at(2, 0, 1), 0.0);
}

TEST_F(ImageIoTest, GrayIsReplicatedToThreeChannels) {
  Raster g;
  g.width = 2;
  g.height = 1;
  g.channels = 1;
  g.samples = {0, 255};
  WriteRaster(g, dir_ / "g.pgm");
  const Tensor t = LoadImage(dir_ / "g.pgm");
  ASSERT_EQ(t.channels(), 3);
  for (int c = 0; c < 3; ++c) {
    EXPECT_EQ(t.at(c, 0, 0), 0.0);
    EXPECT_EQ(t.at(c, 0, 1), 1.0);
  }
}

TEST_F(ImageIoTest, ZeroTensorSavesBlack) {
  SaveImage(Tensor(3, 2, 2), dir_ / "z.png");
  const Raster r = ReadRaster(dir_ / "z.png");
  EXPECT_EQ(r.width, 2);
  EXPECT_EQ(r.height, 2);
  EXPECT_EQ(r.samples, std::vector<std::uint8_t>(12, 0));
}

TEST_F(ImageIoTest, HalfQuantizesUpTo128) {
  EXPECT_EQ(QuantizeUnit(0.5), 128);
  EXPECT_EQ(QuantizeUnit(-0.2), 0);
  EXPECT_EQ(QuantizeUnit(1.7), 255);
  SaveImage(Tensor(1, 1, 1, 0.5), dir_ / "h.png");
  EXPECT_EQ(ReadRaster(dir_ / "h.png").samples, std::vector<std::uint8_t>{128});
}

TEST_F(ImageIoTest, PngAndPpmRoundTripWithinOneLevel) {
  std::mt19937_64 rng(3);
  const Tensor t = RandomTensor(rng, 3, 7, 5);
  for (const char* name : {"r.png", "r.ppm"}) {
    SaveImage(t, dir_ / name);
    const Tensor back = LoadImage(dir_ / name);
    ASSERT_TRUE(back.same_shape(t));
    for (std::size_t i = 0; i < t.size(); ++i) {
      EXPECT_LE(std::abs(back.values()[i] - t.values()[i]), 1.0 / 255.0);
    }
    SaveImage(back, dir_ / name);
    EXPECT_EQ(LoadImage(dir_ / name), back);
  }
}

TEST_F(ImageIoTest, FixtureRoundTripsExactly) {
  const fs::path fixture = fs::path(CAPAD_FIXTURE_DIR) / "photos/eval/eval_000.png";
  const Tensor t = LoadImage(fixture);
  SaveImage(t, dir_ / "copy.png");
  EXPECT_EQ(LoadImage(dir_ / "copy.png"), t);
}

TEST_F(ImageIoTest, MissingAndCorruptFilesFail) {
  EXPECT_THROW(LoadImage(dir_ / "missing.png"), std::runtime_error);
  WriteFileAtomic(dir_ / "bad.png", {0x89, 'P', 'N', 'G', 1, 2, 3});
  EXPECT_THROW(LoadImage(dir_ / "bad.png"), std::runtime_error);
  EXPECT_THROW(SaveImage(Tensor(2, 1, 1), dir_ / "two.png"), std::invalid_argument);
}

TEST_F(ImageIoTest, TensorFileRoundTrip) {
  std::mt19937_64 rng(9);
  const Tensor t = RandomTensor(rng, 2, 3, 4, -5.0, 5.0);
  WriteTensorFile(t, dir_ / "t.capt");
  const Tensor back = ReadTensorFile(dir_ / "t.capt");
  ASSERT_TRUE(back.same_shape(t));
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(back.values()[i], static_cast<double>(static_cast<float>(t.values()[i])));
  }
  auto bytes = ReadFileBytes(dir_ / "t.capt");
  bytes.pop_back();
  WriteFileAtomic(dir_ / "short.capt", bytes);
  EXPECT_THROW(ReadTensorFile(dir_ / "short.capt"), std::runtime_error);
}

TEST(TensorTest, FlipsAndCrop) {
  Tensor t(1, 2, 3, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(FlipHorizontal(t), Tensor(1, 2, 3, {3, 2, 1, 6, 5, 4}));
  EXPECT_EQ(FlipVertical(t), Tensor(1, 2, 3, {4, 5, 6, 1, 2, 3}));
  EXPECT_EQ(Crop(t, 1, 1, 1, 2), Tensor(1, 1, 2, {5, 6}));
  Tensor dst(1, 3, 4);
  Paste(Crop(t, 0, 0, 2, 2), 1, 2, dst);
  EXPECT_EQ(dst, Tensor(1, 3, 4, {0, 0, 0, 0, 0, 0, 1, 2, 0, 0, 4, 5}));
  EXPECT_THROW(Crop(t, 1, 1, 2, 2), std::invalid_argument);
}

TEST(BorderMaskTest, FrameOfOneLeavesInteriorBlock) {
  const Mask m = MakeBorderMask(4, 4, 1, SideSet::All());
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) {
      const bool inside = y >= 1 && y <= 2 && x >= 1 && x <= 2;
      EXPECT_EQ(m.at(y, x), inside ? 1 : 0) << y << "," << x;
    }
}

TEST(BorderMaskTest, LeftOnlyZeroesFirstColumn) {
  const Mask m = MakeBorderMask(3, 5, 1, {Side::kLeft});
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 5; ++x) EXPECT_EQ(m.at(y, x), x == 0 ? 0 : 1);
}

TEST(BorderMaskTest, ZeroCountMatchesEnumeration) {
  for (int h = 1; h <= 7; ++h)
    for (int w = 1; w <= 7; ++w)
      for (int p = 1; p <= 3; ++p) {
        if (2 * p >= h || 2 * p >= w) {
          EXPECT_THROW(MakeBorderMask(h, w, p, SideSet::All()), std::invalid_argument);
          continue;
        }
        std::size_t expected = 0;
        for (int y = 0; y < h; ++y)
          for (int x = 0; x < w; ++x)
            if (y < p || x < p || y >= h - p || x >= w - p) ++expected;
        EXPECT_EQ(MakeBorderMask(h, w, p, SideSet::All()).count_zeros(), expected);
      }
  EXPECT_EQ(MakeBorderMask(6, 6, 2, SideSet::All()).count_zeros(), 32u);
}

TEST(BlockTest, LeftAndRightBlocks) {
  const Tensor img(1, 2, 3, {1, 2, 3, 4, 5, 6});
  const Block left = ExtractBlock(img, Side::kLeft, 1, 2);
  EXPECT_EQ(left.tensor, Tensor(1, 2, 3, {0, 1, 2, 0, 4, 5}));
  const Block right = ExtractBlock(img, Side::kRight, 1, 2);
  EXPECT_EQ(right.tensor, Tensor(1, 2, 3, {2, 3, 0, 5, 6, 0}));
  EXPECT_EQ(DropPadBand(right), Tensor(1, 2, 2, {2, 3, 5, 6}));
  const Mask mask = BlockMask(right);
  EXPECT_EQ(mask.at(0, 2), 0);
  EXPECT_EQ(mask.at(1, 1), 1);
}

TEST(BlockTest, TopAndBottomBlocks) {
  const Tensor img(1, 3, 2, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(ExtractBlock(img, Side::kTop, 1, 2).tensor,
            Tensor(1, 3, 2, {0, 0, 1, 2, 3, 4}));
  EXPECT_EQ(ExtractBlock(img, Side::kBottom, 2, 1).tensor,
            Tensor(1, 3, 2, {5, 6, 0, 0, 0, 0}));
}

TEST(BlockTest, ConstantImageGivesConstantContext) {
  const Tensor img(3, 6, 8, 0.4);
  for (Side side : kAllSides) {
    const Block b = ExtractBlock(img, side, 2, 3);
    const Mask mask = BlockMask(b);
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < b.tensor.height(); ++y)
        for (int x = 0; x < b.tensor.width(); ++x)
          EXPECT_EQ(b.tensor.at(c, y, x), mask.at(y, x) ? 0.4 : 0.0);
  }
}

TEST(BlockTest, RejectsOversizedContext) {
  EXPECT_THROW(ExtractBlock(Tensor(1, 4, 4), Side::kLeft, 1, 5), std::invalid_argument);
}

TEST(FractionTest, Parses) {
  EXPECT_DOUBLE_EQ(ParseFraction("1/3").value(), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(ParseFraction("0").value(), 0.0);
  EXPECT_DOUBLE_EQ(ParseFraction("0.5").value(), 0.5);
  EXPECT_THROW(ParseFraction("1/0"), std::invalid_argument);
  EXPECT_THROW(ParseFraction("abc"), std::invalid_argument);
}

TEST(SlidingCropsTest, Origins) {
  EXPECT_EQ(CropOrigins(10, 6, {1, 3}), (std::vector<int>{0, 4}));
  EXPECT_EQ(CropOrigins(6, 6, {1, 3}), (std::vector<int>{0}));
  EXPECT_EQ(CropOrigins(11, 6, {1, 3}), (std::vector<int>{0, 4, 5}));
}

TEST(SlidingCropsTest, CropsCoverImage) {
  std::mt19937_64 rng(1);
  const Tensor img = RandomTensor(rng, 1, 11, 10);
  const auto crops = SlidingCrops(img, 6, {1, 3});
  ASSERT_EQ(crops.size(), 6u);
  Tensor covered(1, 11, 10, -1.0);
  for (const auto& w : crops) {
    EXPECT_EQ(w.crop, Crop(img, w.origin.y, w.origin.x, 6, 6));
    Paste(w.crop, w.origin.y, w.origin.x, covered);
  }
  EXPECT_EQ(covered, img);
}

TEST(AugmentTest, IdentityConfigIsIdentity) {
  std::mt19937_64 rng(4);
  const Tensor img = RandomTensor(rng, 3, 9, 7);
  AugmentConfig cfg = AugmentConfig::Identity(0);
  EXPECT_EQ(cfg.mirror_prob, 0.0);
  EXPECT_EQ(cfg.scale_range.lo, 1.0);
  EXPECT_EQ(cfg.rotation_range.hi, 0.0);
  std::mt19937_64 aug_rng(11);
  EXPECT_EQ(Augment(img, std::nullopt, cfg, aug_rng).image, img);
  cfg.crop_size = 7;
  const Augmented cropped = Augment(img, img, cfg, aug_rng);
  EXPECT_EQ(cropped.image.height(), 7);
  EXPECT_EQ(cropped.image.width(), 7);
}

TEST(AugmentTest, MirrorReversesRows) {
  AugmentConfig cfg = AugmentConfig::Identity(0);
  cfg.mirror_prob = 1.0;
  std::mt19937_64 rng(0);
  EXPECT_EQ(Augment(Tensor(1, 1, 3, {1, 2, 3}), std::nullopt, cfg, rng).image,
            Tensor(1, 1, 3, {3, 2, 1}));
}

TEST(AugmentTest, SameSeedSameOutput) {
  std::mt19937_64 rng(5);
  const Tensor img = RandomTensor(rng, 3, 20, 24);
  Tensor label(1, 20, 24);
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 24; ++x) label.at(0, y, x) = (x / 6 + y / 5) % 4;
  AugmentConfig cfg;
  cfg.crop_size = 16;
  std::mt19937_64 a(77), b(77);
  const Augmented ra = Augment(img, label, cfg, a);
  const Augmented rb = Augment(img, label, cfg, b);
  EXPECT_EQ(ra.image, rb.image);
  EXPECT_EQ(*ra.label, *rb.label);
  for (double v : ra.label->values()) {
    EXPECT_TRUE(v == kIgnoreLabel || (v >= 0 && v <= 3 && v == std::floor(v)));
  }
}

TEST(AugmentTest, SmallFramesArePaddedBeforeCropping) {
  AugmentConfig cfg = AugmentConfig::Identity(6);
  std::mt19937_64 rng(1);
  const Augmented r = Augment(Tensor(1, 2, 2, 1.0), Tensor(1, 2, 2, 1.0), cfg, rng);
  ASSERT_EQ(r.image.height(), 6);
  double image_sum = 0.0;
  int ignored = 0;
  for (double v : r.image.values()) image_sum += v;
  for (double v : r.label->values()) ignored += v == kIgnoreLabel;
  EXPECT_EQ(image_sum, 4.0);
  EXPECT_EQ(ignored, 32);
}

TEST(AugmentTest, RejectsBadRanges) {
  AugmentConfig cfg;
  cfg.scale_range = {2.0, 1.0};
  EXPECT_THROW(cfg.Validate(), std::invalid_argument);
  cfg = AugmentConfig{};
  cfg.mirror_prob = 1.5;
  EXPECT_THROW(cfg.Validate(), std::invalid_argument);
}

TEST(ResampleTest, SameSizeIsIdentity) {
  std::mt19937_64 rng(2);
  const Tensor t = RandomTensor(rng, 2, 5, 6);
  EXPECT_EQ(ResizeBilinear(t, 5, 6), t);
  EXPECT_EQ(ResizeNearest(t, 5, 6), t);
  EXPECT_EQ(Rotate(t, 0.0, Interpolation::kBilinear, 0.0), t);
}

TEST(ResampleTest, HalfPixelUpsampleByTwo) {
  // Output x samples source position (x + 0.5) / 2 - 0.5, clamped.
  const Tensor row(1, 1, 2, {0.0, 1.0});
  const Tensor up = ResizeBilinear(row, 1, 4);
  EXPECT_EQ(up, Tensor(1, 1, 4, {0.0, 0.25, 0.75, 1.0}));
  const auto taps = HalfPixelTaps(2, 4);
  ASSERT_EQ(taps.size(), 4u);
  EXPECT_EQ(taps[1].lo, 0);
  EXPECT_EQ(taps[1].hi, 1);
  EXPECT_DOUBLE_EQ(taps[1].frac, 0.25);
}

TEST(ResampleTest, ConstantIsPreserved) {
  const Tensor c(1, 6, 5, 0.3);
  const Tensor resized = ResizeBilinear(c, 11, 3);
  for (double v : resized.values()) EXPECT_NEAR(v, 0.3, 1e-15);
  const Tensor blurred = GaussianBlur(c, 1.2);
  for (double v : blurred.values()) EXPECT_NEAR(v, 0.3, 1e-15);
}

TEST(ResampleTest, RotateQuarterTurnOfSquare) {
  const Tensor t(1, 3, 3, {1, 2, 3, 4, 5, 6, 7, 8, 9});
  const Tensor r = Rotate(t, 90.0, Interpolation::kNearest, -1.0);
  // Counter-clockwise: the right column becomes the top row.
  EXPECT_EQ(r, Tensor(1, 3, 3, {3, 6, 9, 2, 5, 8, 1, 4, 7}));
}

TEST(ResampleTest, BlurKeepsMassAwayFromEdges) {
  Tensor t(1, 21, 21);
  t.at(0, 10, 10) = 1.0;
  const Tensor b = GaussianBlur(t, 1.0);
  double sum = 0.0;
  for (double v : b.values()) sum += v;
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_NEAR(b.at(0, 10, 9), b.at(0, 10, 11), 1e-15);
  EXPECT_GT(b.at(0, 10, 10), b.at(0, 10, 11));
}

}  // namespace
}  // namespace capad
