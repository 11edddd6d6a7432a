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
#ifndef CAPAD_BENCH_HPP_
#define CAPAD_BENCH_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "capad/blocks.hpp"
#include "capad/conv.hpp"
#include "capad/image_io.hpp"
#include "capad/padding.hpp"
#include "capad/tensor.hpp"
#include "capad/train.hpp"

namespace capad {

inline constexpr double kPsnrCapDb = 99.0;

struct PsnrMse {
  double psnr_db = 0.0;
  double mse = 0.0;
};

// 10 log10(1 / mse) for unit-range data, capped at 99 dB below 1e-10.
double PsnrFromMse(double mse);

// Mean squared error over the pixels where the mask is 0, all channels.
PsnrMse MaskedPsnrMse(const Tensor& truth, const Tensor& pred, const Mask& mask);

// Pads by any method; kContextAware needs `model`.
Tensor ApplyPadding(const Tensor& t, PadMethod method, int p,
                    const PadModel* model = nullptr);

struct MetricsRecord {
  std::string method;
  int p = 0;
  double psnr_db = 0.0;  // mean of per-image PSNR
  double mse = 0.0;      // mean of per-image MSE
  int n_images = 0;

  friend bool operator==(const MetricsRecord&, const MetricsRecord&) = default;
};

struct EvalOptions {
  int crop = 719;
  Fraction overlap{1, 3};
  int m = 20;  // context width the CA method needs inside each crop
};

// Sliding crops of each image; the outer p band of a crop is the truth and
// each method pads the crop's interior back out to it.  Squared errors are
// pooled over all crops of an image; PSNR and MSE are then averaged over
// images independently.  One record per method, in the given order.
std::vector<MetricsRecord> EvalPadding(std::span<const Tensor> corpus,
                                       std::span<const PadMethod> methods, int p,
                                       const EvalOptions& options,
                                       const PadModel* model = nullptr);

// Records for every (method, p) pair, method-major in the given orders.
std::vector<MetricsRecord> EvalPaddingTable(std::span<const Tensor> corpus,
                                            std::span<const PadMethod> methods,
                                            std::span<const int> p_list,
                                            const EvalOptions& options,
                                            const PadModel* model = nullptr);

inline constexpr std::uint8_t kIgnoreIndex = 255;

struct LabelMap {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> labels;

  LabelMap() = default;
  LabelMap(int h, int w, std::uint8_t fill = 0);

  std::uint8_t& at(int y, int x) {
    return labels[static_cast<std::size_t>(y) * width + x];
  }
  std::uint8_t at(int y, int x) const {
    return labels[static_cast<std::size_t>(y) * width + x];
  }
  friend bool operator==(const LabelMap&, const LabelMap&) = default;
};

struct MiouResult {
  // Empty for classes absent from both maps; those are left out of the mean.
  std::vector<std::optional<double>> per_class;
  double mean = 0.0;
};

// Class-wise TP / (TP + FP + FN) over pixels whose ground truth is not the
// ignore index.  Throws if every pixel is ignored.
MiouResult Miou(const LabelMap& pred, const LabelMap& gt, int num_classes);
// Confusion counts pooled over every pair before the ratios are taken.
MiouResult Miou(std::span<const LabelMap> pred, std::span<const LabelMap> gt,
                int num_classes);

// Centred round(f h) x round(f w) rectangle, as (y0, x0, height, width).
std::array<int, 4> CenterRect(int height, int width, Fraction leave_out);

// `gt` with the centred rectangle set to the ignore index.
LabelMap LeaveOutCenter(const LabelMap& gt, Fraction leave_out);

// mIoU after excluding the centred rectangle; leave_out must be < 1.
double BorderMiou(const LabelMap& pred, const LabelMap& gt, Fraction leave_out,
                  int num_classes);
double BorderMiou(std::span<const LabelMap> pred, std::span<const LabelMap> gt,
                  Fraction leave_out, int num_classes);

struct Histogram {
  double bin_width = 10.0;
  std::vector<double> centers;
  std::vector<long> counts;
};

// Mislabelled, non-ignored pixels binned by Euclidean distance from the map
// centre ((w - 1) / 2, (h - 1) / 2).  Bins cover [0, corner distance].
Histogram ErrorDistanceHistogram(const LabelMap& pred, const LabelMap& gt,
                                 double bin_width = 10.0);
// Per-pair histograms summed bin by bin.
Histogram ErrorDistanceHistogram(std::span<const LabelMap> pred,
                                 std::span<const LabelMap> gt,
                                 double bin_width = 10.0);

// Summed |activation| over output channels of a stride-1 convolution of the
// image padded by (k - 1) / 2, min-max normalized to [0, 1].  A constant map
// normalizes to all zeros.
Tensor SummedActivationMap(const Tensor& image, const ConvKernel& kernel,
                           PadMethod method, const PadModel* model = nullptr);
// Same with partial convolution over a zero-padded image.
Tensor SummedActivationMapPartial(const Tensor& image, const ConvKernel& kernel);

// Kernel with weights uniform in [-1, 1].
ConvKernel RandomKernel(int out_channels, int in_channels, int size,
                        std::uint64_t seed);

struct PaletteEntry {
  std::array<std::uint8_t, 3> rgb;
  std::uint8_t label;
  std::string_view name;
};

// urban, agriculture, rangeland, forest, water, barren; unknown -> ignore.
std::span<const PaletteEntry> DeepGlobePalette();

// Single-channel rasters hold class indices; RGB rasters need a palette.
// Colours missing from the palette are an error.
LabelMap LabelMapFromRaster(const Raster& raster,
                            std::span<const PaletteEntry> palette = {});
LabelMap LoadLabelMap(const std::filesystem::path& path,
                      std::span<const PaletteEntry> palette = {});

std::string MetricsCsv(std::span<const MetricsRecord> records);
std::string HistogramCsv(const Histogram& histogram);
// Bar chart of the histogram as standalone SVG markup.
std::string HistogramSvg(const Histogram& histogram, std::string_view title);

}  // namespace capad

#endif  // CAPAD_BENCH_HPP_
