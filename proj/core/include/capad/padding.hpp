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
#ifndef CAPAD_PADDING_HPP_
#define CAPAD_PADDING_HPP_

#include <span>
#include <string_view>

#include "capad/conv.hpp"
#include "capad/tensor.hpp"

namespace capad {

// Padding schemes compared in the evaluation tables.  The CLI spellings are
// zero|circular|reflect|replicate|bilinear|distribution|ca.
enum class PadMethod {
  kZero,
  kCircular,
  kReflect,
  kReplicate,
  kBilinear,
  kDistribution,
  kContextAware,
};

std::string_view MethodName(PadMethod method);
PadMethod ParseMethod(std::string_view name);
bool IsIndexMapped(PadMethod method);

// zero / circular / reflect / replicate.  Every output pixel copies the input
// at (row_map(y), col_map(x)); reflect mirrors about the edge pixel without
// repeating it (-1 -> 1, n -> n - 2).
Tensor PadIndexMapped(const Tensor& t, PadMethod method, int p);

// Two-point linear extrapolation per axis, rows first, then columns over the
// widened rows.  Results are clamped to [0, 1] unless `clamp_to_unit` is off.
Tensor PadBilinearExtrapolation(const Tensor& t, int p,
                                bool clamp_to_unit = true);

// Bilinear resize to (h + 2p, w + 2p) with the original restored in the
// interior, so the frame carries the border's local statistics.
Tensor PadDistribution(const Tensor& t, int p);

// Any non-learned method; throws for kContextAware.
Tensor PadClassic(const Tensor& t, PadMethod method, int p);

struct PartialConvOutput {
  Tensor output;
  Mask mask;
};

// Partial convolution without implicit padding: callers pad `t` and mark the
// padded pixels 0 in `mask`.  Each window is rescaled by k*k / sum(mask) and
// windows with no valid pixel output the bias alone; the updated mask is 1
// where the window saw at least one valid pixel.
PartialConvOutput PartialConv2d(const Tensor& t, const Mask& mask,
                                const ConvKernel& kernel,
                                std::span<const double> bias, int stride = 1);

}  // namespace capad

#endif  // CAPAD_PADDING_HPP_
