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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "test_util.hpp"

namespace capad {
namespace {

using ::capad::testing::Dot;
using ::capad::testing::RandomTensor;
using ::capad::testing::RelClose;
using ::capad::testing::Uniform;

// Displacement whose sample position x - d stays at least `margin` away from
// every integer.
double OffGridDisplacement(std::mt19937_64& rng, double range, double margin) {
  const double whole = std::floor(Uniform(rng, -range, range));
  return whole + Uniform(rng, margin, 1.0 - margin);
}

DisplacementField RandomField(std::mt19937_64& rng, int h, int w, double range) {
  DisplacementField f(h, w);
  for (double& v : f.dx.values()) v = OffGridDisplacement(rng, range, 0.05);
  for (double& v : f.dy.values()) v = OffGridDisplacement(rng, range, 0.05);
  return f;
}

TEST(WarpForwardTest, ZeroFieldIsIdentity) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    const Tensor b = RandomTensor(rng, 1 + i % 3, 2 + i % 7, 3 + i % 5);
    EXPECT_EQ(WarpForward(b, DisplacementField(b.height(), b.width())), b);
  }
}

TEST(WarpForwardTest, IntegerShiftClampsAtEdge) {
  const Tensor row(1, 1, 3, {0.1, 0.2, 0.3});
  DisplacementField f(1, 3);
  for (double& v : f.dx.values()) v = 1.0;
  EXPECT_EQ(WarpForward(row, f), Tensor(1, 1, 3, {0.1, 0.1, 0.2}));
}

TEST(WarpForwardTest, HalfPixelSample) {
  const Tensor row(1, 1, 2, {0.0, 1.0});
  DisplacementField f(1, 2);
  f.dx.at(0, 0, 1) = 0.5;
  EXPECT_DOUBLE_EQ(WarpForward(row, f).at(0, 0, 1), 0.5);
}

TEST(WarpForwardTest, ConstantInputStaysConstant) {
  std::mt19937_64 rng(2);
  const Tensor c(2, 6, 4, 0.7);
  DisplacementField f(6, 4);
  for (double& v : f.dx.values()) v = Uniform(rng, -20.0, 20.0);
  for (double& v : f.dy.values()) v = Uniform(rng, -20.0, 20.0);
  const Tensor out = WarpForward(c, f);
  for (double v : out.values()) EXPECT_NEAR(v, 0.7, 1e-15);
}

TEST(WarpForwardTest, OutputStaysWithinInputRange) {
  std::mt19937_64 rng(3);
  const Tensor b = RandomTensor(rng, 3, 7, 7, 0.2, 0.6);
  const Tensor out = WarpForward(b, RandomField(rng, 7, 7, 4.0));
  for (double v : out.values()) {
    EXPECT_GE(v, 0.2 - 1e-15);
    EXPECT_LE(v, 0.6 + 1e-15);
  }
}

TEST(WarpForwardTest, RejectsBadFields) {
  const Tensor b(1, 3, 3);
  DisplacementField f(3, 3);
  f.dx.at(0, 1, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(WarpForward(b, f), std::invalid_argument);
  EXPECT_THROW(WarpForward(b, DisplacementField(3, 4)), std::invalid_argument);
  EXPECT_THROW(DisplacementField::FromChannels(Tensor(3, 2, 2)), std::invalid_argument);
}

TEST(WarpBackwardTest, ZeroFieldPassesGradientThrough) {
  std::mt19937_64 rng(4);
  const Tensor b = RandomTensor(rng, 2, 5, 6);
  const Tensor g = RandomTensor(rng, 2, 5, 6, -1.0, 1.0);
  EXPECT_EQ(WarpBackward(g, b, DisplacementField(5, 6)).block, g);
}

TEST(WarpBackwardTest, ConstantBlockHasZeroFieldGradient) {
  std::mt19937_64 rng(5);
  const Tensor b(3, 5, 5, 0.4);
  const Tensor g = RandomTensor(rng, 3, 5, 5, -1.0, 1.0);
  const WarpGradients grads = WarpBackward(g, b, RandomField(rng, 5, 5, 2.0));
  for (double v : grads.field.dx.values()) EXPECT_EQ(v, 0.0);
  for (double v : grads.field.dy.values()) EXPECT_EQ(v, 0.0);
}

TEST(WarpBackwardTest, BlockGradientIsTheAdjoint) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor b = RandomTensor(rng, 2, 6, 5, -1.0, 1.0);
    const Tensor g = RandomTensor(rng, 2, 6, 5, -1.0, 1.0);
    const DisplacementField f = RandomField(rng, 6, 5, 3.0);
    const double lhs = Dot(WarpForward(b, f), g);
    const double rhs = Dot(b, WarpBackward(g, b, f).block);
    EXPECT_NEAR(lhs, rhs, 1e-12);
  }
}

TEST(WarpBackwardTest, MatchesCentralDifferences) {
  std::mt19937_64 rng(7);
  const double step = 1e-4;
  for (int trial = 0; trial < 100; ++trial) {
    const Tensor b = RandomTensor(rng, 2, 5, 5);
    const Tensor g = RandomTensor(rng, 2, 5, 5, -1.0, 1.0);
    DisplacementField f = RandomField(rng, 5, 5, 2.0);
    const WarpGradients grads = WarpBackward(g, b, f);
    auto loss = [&](const DisplacementField& field) { return Dot(WarpForward(b, field), g); };
    for (Tensor* comp : {&f.dx, &f.dy}) {
      const Tensor& analytic = comp == &f.dx ? grads.field.dx : grads.field.dy;
      for (std::size_t i = 0; i < comp->size(); ++i) {
        const double saved = comp->values()[i];
        comp->values()[i] = saved + step;
        const double up = loss(f);
        comp->values()[i] = saved - step;
        const double down = loss(f);
        comp->values()[i] = saved;
        const double numeric = (up - down) / (2 * step);
        EXPECT_TRUE(RelClose(analytic.values()[i], numeric, 1e-4, 1e-9))
            << "trial " << trial << " index " << i << ": " << analytic.values()[i]
            << " vs " << numeric;
      }
    }
  }
}

TEST(WarpBackwardTest, ClampedAxisGetsNoGradient) {
  const Tensor row(1, 1, 3, {0.1, 0.5, 0.9});
  DisplacementField f(1, 3);
  f.dx.at(0, 0, 0) = 2.5;  // samples x = -2.5
  const WarpGradients g = WarpBackward(Tensor(1, 1, 3, 1.0), row, f);
  EXPECT_EQ(g.field.dx.at(0, 0, 0), 0.0);
  EXPECT_EQ(g.block, Tensor(1, 1, 3, 1.0));
}

TEST(DisplacementFieldTest, ChannelsRoundTrip) {
  std::mt19937_64 rng(8);
  const Tensor two = RandomTensor(rng, 2, 3, 4, -1.0, 1.0);
  const DisplacementField f = DisplacementField::FromChannels(two);
  EXPECT_EQ(f.dx.at(0, 2, 3), two.at(0, 2, 3));
  EXPECT_EQ(f.dy.at(0, 1, 0), two.at(1, 1, 0));
  EXPECT_EQ(f.ToChannels(), two);
}

}  // namespace
}  // namespace capad
