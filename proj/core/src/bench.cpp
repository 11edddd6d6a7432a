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
#include "capad/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <stdexcept>

#include "capad/parallel.hpp"

namespace capad {
namespace {

struct ErrorSum {
  double sum = 0.0;
  std::size_t count = 0;
};

// Squared error over the p-wide frame of a crop.
ErrorSum FrameError(const Tensor& truth, const Tensor& pred, int p) {
  ErrorSum e;
  const int H = truth.height(), W = truth.width();
  for (int c = 0; c < truth.channels(); ++c)
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        if (y >= p && y < H - p && x >= p && x < W - p) continue;
        const double d = pred.at(c, y, x) - truth.at(c, y, x);
        e.sum += d * d;
        ++e.count;
      }
  return e;
}

void CheckLabels(const LabelMap& map, int num_classes, const char* what) {
  for (std::uint8_t v : map.labels) {
    if (v != kIgnoreIndex && v >= num_classes) {
      throw std::invalid_argument(std::string(what) + " label " + std::to_string(v) +
                                  " outside [0, " + std::to_string(num_classes) + ")");
    }
  }
}

void CheckSameDims(const LabelMap& a, const LabelMap& b) {
  if (a.height != b.height || a.width != b.width) {
    throw std::invalid_argument("label maps differ in size");
  }
}

std::string Escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string Format(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

constexpr PaletteEntry kDeepGlobe[] = {
    {{0, 255, 255}, 0, "urban"},
    {{255, 255, 0}, 1, "agriculture"},
    {{255, 0, 255}, 2, "rangeland"},
    {{0, 255, 0}, 3, "forest"},
    {{0, 0, 255}, 4, "water"},
    {{255, 255, 255}, 5, "barren"},
    {{0, 0, 0}, kIgnoreIndex, "unknown"},
};

}  // namespace

double PsnrFromMse(double mse) {
  if (!(mse >= 0.0)) throw std::invalid_argument("mse must be non-negative");
  if (mse < 1e-10) return kPsnrCapDb;
  return 10.0 * std::log10(1.0 / mse);
}

PsnrMse MaskedPsnrMse(const Tensor& truth, const Tensor& pred, const Mask& mask) {
  CheckSameShape(truth, pred, "psnr");
  if (mask.height() != truth.height() || mask.width() != truth.width()) {
    throw std::invalid_argument("psnr: mask shape mismatch");
  }
  double sum = 0.0;
  std::size_t count = 0;
  for (int c = 0; c < truth.channels(); ++c)
    for (int y = 0; y < truth.height(); ++y)
      for (int x = 0; x < truth.width(); ++x) {
        if (mask.at(y, x) != 0) continue;
        const double d = pred.at(c, y, x) - truth.at(c, y, x);
        sum += d * d;
        ++count;
      }
  if (count == 0) throw std::invalid_argument("psnr: empty evaluation region");
  const double mse = sum / static_cast<double>(count);
  return {PsnrFromMse(mse), mse};
}

Tensor ApplyPadding(const Tensor& t, PadMethod method, int p, const PadModel* model) {
  if (method != PadMethod::kContextAware) return PadClassic(t, method, p);
  if (model == nullptr) {
    throw std::invalid_argument("context-aware padding needs a trained model");
  }
  return CaPad(t, *model, p);
}

std::vector<MetricsRecord> EvalPadding(std::span<const Tensor> corpus,
                                       std::span<const PadMethod> methods, int p,
                                       const EvalOptions& options,
                                       const PadModel* model) {
  if (corpus.empty()) throw std::invalid_argument("evaluation corpus is empty");
  if (methods.empty()) throw std::invalid_argument("no padding methods given");
  if (p < 1) throw std::invalid_argument("p must be >= 1");
  int context = options.m;
  for (PadMethod method : methods) {
    if (method != PadMethod::kContextAware) continue;
    if (model == nullptr) {
      throw std::invalid_argument("method ca needs a trained model");
    }
    context = std::max(context, model->m);
  }
  if (options.crop < 2 * p + context) {
    throw std::invalid_argument("crop " + std::to_string(options.crop) +
                                " smaller than 2p + m = " +
                                std::to_string(2 * p + context));
  }

  const int n = static_cast<int>(corpus.size());
  const std::size_t k = methods.size();
  std::vector<std::vector<double>> mse(k, std::vector<double>(n));
  ParallelFor(n, [&](int i) {
    const auto windows = SlidingCrops(corpus[i], options.crop, options.overlap);
    for (std::size_t j = 0; j < k; ++j) {
      ErrorSum total;
      for (const CropWindow& w : windows) {
        const int inner = options.crop - 2 * p;
        const Tensor interior = Crop(w.crop, p, p, inner, inner);
        const ErrorSum e = FrameError(w.crop, ApplyPadding(interior, methods[j], p, model), p);
        total.sum += e.sum;
        total.count += e.count;
      }
      mse[j][i] = total.sum / static_cast<double>(total.count);
    }
  });

  std::vector<MetricsRecord> records;
  for (std::size_t j = 0; j < k; ++j) {
    MetricsRecord r{std::string(MethodName(methods[j])), p, 0.0, 0.0, n};
    for (int i = 0; i < n; ++i) {
      r.psnr_db += PsnrFromMse(mse[j][i]);
      r.mse += mse[j][i];
    }
    r.psnr_db /= n;
    r.mse /= n;
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<MetricsRecord> EvalPaddingTable(std::span<const Tensor> corpus,
                                            std::span<const PadMethod> methods,
                                            std::span<const int> p_list,
                                            const EvalOptions& options,
                                            const PadModel* model) {
  std::vector<std::vector<MetricsRecord>> by_p;
  for (int p : p_list) by_p.push_back(EvalPadding(corpus, methods, p, options, model));
  std::vector<MetricsRecord> out;
  for (std::size_t j = 0; j < methods.size(); ++j)
    for (const auto& records : by_p) out.push_back(records[j]);
  return out;
}

LabelMap::LabelMap(int h, int w, std::uint8_t fill)
    : height(h), width(w), labels(static_cast<std::size_t>(h) * w, fill) {
  if (h < 0 || w < 0) throw std::invalid_argument("label map dims must be >= 0");
}

MiouResult Miou(const LabelMap& pred, const LabelMap& gt, int num_classes) {
  return Miou(std::span<const LabelMap>(&pred, 1), std::span<const LabelMap>(&gt, 1),
              num_classes);
}

MiouResult Miou(std::span<const LabelMap> pred, std::span<const LabelMap> gt,
                int num_classes) {
  if (pred.size() != gt.size()) {
    throw std::invalid_argument("prediction and ground-truth counts differ");
  }
  if (num_classes < 1 || num_classes > kIgnoreIndex) {
    throw std::invalid_argument("num_classes must lie in [1, 255)");
  }
  std::vector<long> tp(num_classes), fp(num_classes), fn(num_classes);
  std::size_t counted = 0;
  for (std::size_t k = 0; k < gt.size(); ++k) {
    CheckSameDims(pred[k], gt[k]);
    CheckLabels(pred[k], num_classes, "prediction");
    CheckLabels(gt[k], num_classes, "ground truth");
    for (std::size_t i = 0; i < gt[k].labels.size(); ++i) {
      const std::uint8_t g = gt[k].labels[i], q = pred[k].labels[i];
      if (g == kIgnoreIndex) continue;
      ++counted;
      if (q == g) {
        ++tp[g];
      } else {
        ++fn[g];
        if (q != kIgnoreIndex) ++fp[q];
      }
    }
  }
  if (counted == 0) throw std::invalid_argument("every ground-truth pixel is ignored");
  MiouResult r;
  double sum = 0.0;
  int present = 0;
  for (int c = 0; c < num_classes; ++c) {
    const long denom = tp[c] + fp[c] + fn[c];
    if (denom == 0) {
      r.per_class.emplace_back();
      continue;
    }
    const double iou = static_cast<double>(tp[c]) / static_cast<double>(denom);
    r.per_class.emplace_back(iou);
    sum += iou;
    ++present;
  }
  r.mean = sum / present;
  return r;
}

std::array<int, 4> CenterRect(int height, int width, Fraction f) {
  if (f.numerator < 0 || f.denominator <= 0 || f.numerator >= f.denominator) {
    throw std::invalid_argument("leave-out fraction must lie in [0, 1)");
  }
  auto round_scaled = [&f](int extent) {
    return static_cast<int>((2 * f.numerator * extent + f.denominator) /
                            (2 * f.denominator));
  };
  const int rh = round_scaled(height), rw = round_scaled(width);
  return {(height - rh) / 2, (width - rw) / 2, rh, rw};
}

LabelMap LeaveOutCenter(const LabelMap& gt, Fraction leave_out) {
  const auto [y0, x0, rh, rw] = CenterRect(gt.height, gt.width, leave_out);
  LabelMap out = gt;
  for (int y = y0; y < y0 + rh; ++y)
    for (int x = x0; x < x0 + rw; ++x) out.at(y, x) = kIgnoreIndex;
  return out;
}

double BorderMiou(const LabelMap& pred, const LabelMap& gt, Fraction leave_out,
                  int num_classes) {
  CheckSameDims(pred, gt);
  return Miou(pred, LeaveOutCenter(gt, leave_out), num_classes).mean;
}

double BorderMiou(std::span<const LabelMap> pred, std::span<const LabelMap> gt,
                  Fraction leave_out, int num_classes) {
  std::vector<LabelMap> masked;
  for (const LabelMap& g : gt) masked.push_back(LeaveOutCenter(g, leave_out));
  return Miou(pred, masked, num_classes).mean;
}

Histogram ErrorDistanceHistogram(const LabelMap& pred, const LabelMap& gt,
                                 double bin_width) {
  CheckSameDims(pred, gt);
  if (!(bin_width > 0.0)) throw std::invalid_argument("bin width must be > 0");
  const double cx = (gt.width - 1) / 2.0, cy = (gt.height - 1) / 2.0;
  const int bins = static_cast<int>(std::floor(std::hypot(cx, cy) / bin_width)) + 1;
  Histogram h;
  h.bin_width = bin_width;
  h.counts.assign(bins, 0);
  for (int i = 0; i < bins; ++i) h.centers.push_back((i + 0.5) * bin_width);
  for (int y = 0; y < gt.height; ++y)
    for (int x = 0; x < gt.width; ++x) {
      const std::uint8_t g = gt.at(y, x);
      if (g == kIgnoreIndex || pred.at(y, x) == g) continue;
      const double d = std::hypot(x - cx, y - cy);
      ++h.counts[std::min(bins - 1, static_cast<int>(std::floor(d / bin_width)))];
    }
  return h;
}

Histogram ErrorDistanceHistogram(std::span<const LabelMap> pred,
                                 std::span<const LabelMap> gt, double bin_width) {
  if (pred.size() != gt.size()) {
    throw std::invalid_argument("prediction and ground-truth counts differ");
  }
  Histogram total;
  total.bin_width = bin_width;
  for (std::size_t k = 0; k < gt.size(); ++k) {
    const Histogram h = ErrorDistanceHistogram(pred[k], gt[k], bin_width);
    if (h.counts.size() > total.counts.size()) {
      total.counts.resize(h.counts.size(), 0);
      total.centers = h.centers;
    }
    for (std::size_t i = 0; i < h.counts.size(); ++i) total.counts[i] += h.counts[i];
  }
  return total;
}

namespace {

Tensor SumAbsNormalized(const Tensor& activations) {
  Tensor out(1, activations.height(), activations.width());
  for (int c = 0; c < activations.channels(); ++c) {
    auto src = activations.plane(c);
    auto dst = out.plane(0);
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] += std::abs(src[i]);
  }
  const auto [lo, hi] = std::minmax_element(out.values().begin(), out.values().end());
  const double min = *lo, range = *hi - *lo;
  for (double& v : out.values()) v = range > 0.0 ? (v - min) / range : 0.0;
  return out;
}

int HalfKernel(const ConvKernel& kernel, const Tensor& image) {
  if (kernel.size % 2 == 0) throw std::invalid_argument("kernel size must be odd");
  if (kernel.in_channels != image.channels()) {
    throw std::invalid_argument("kernel expects " + std::to_string(kernel.in_channels) +
                                " channels, image has " + std::to_string(image.channels()));
  }
  return (kernel.size - 1) / 2;
}

}  // namespace

Tensor SummedActivationMap(const Tensor& image, const ConvKernel& kernel,
                           PadMethod method, const PadModel* model) {
  const int p = HalfKernel(kernel, image);
  const Tensor padded = p == 0 ? image : ApplyPadding(image, method, p, model);
  return SumAbsNormalized(Conv2d(padded, kernel, {}, 1, 0));
}

Tensor SummedActivationMapPartial(const Tensor& image, const ConvKernel& kernel) {
  const int p = HalfKernel(kernel, image);
  if (p == 0) return SumAbsNormalized(Conv2d(image, kernel, {}, 1, 0));
  const Tensor padded = PadIndexMapped(image, PadMethod::kZero, p);
  const Mask mask = MakeBorderMask(padded.height(), padded.width(), p, SideSet::All());
  return SumAbsNormalized(PartialConv2d(padded, mask, kernel, {}).output);
}

ConvKernel RandomKernel(int out_channels, int in_channels, int size,
                        std::uint64_t seed) {
  ConvKernel k(out_channels, in_channels, size);
  std::mt19937_64 rng(seed);
  for (double& w : k.weights) {
    w = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
  }
  return k;
}

std::span<const PaletteEntry> DeepGlobePalette() { return kDeepGlobe; }

LabelMap LabelMapFromRaster(const Raster& raster, std::span<const PaletteEntry> palette) {
  LabelMap map(raster.height, raster.width);
  const std::size_t n = map.labels.size();
  if (raster.channels == 1) {
    std::copy(raster.samples.begin(), raster.samples.begin() + n, map.labels.begin());
    return map;
  }
  if (raster.channels != 3) {
    throw std::invalid_argument("label maps must be gray or RGB");
  }
  if (palette.empty()) {
    throw std::invalid_argument("RGB label map needs a palette");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t* px = &raster.samples[3 * i];
    auto it = std::find_if(palette.begin(), palette.end(), [px](const PaletteEntry& e) {
      return e.rgb[0] == px[0] && e.rgb[1] == px[1] && e.rgb[2] == px[2];
    });
    if (it == palette.end()) {
      throw std::invalid_argument("colour (" + std::to_string(px[0]) + "," +
                                  std::to_string(px[1]) + "," + std::to_string(px[2]) +
                                  ") not in palette");
    }
    map.labels[i] = it->label;
  }
  return map;
}

LabelMap LoadLabelMap(const std::filesystem::path& path,
                      std::span<const PaletteEntry> palette) {
  try {
    return LabelMapFromRaster(ReadRaster(path), palette);
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

std::string MetricsCsv(std::span<const MetricsRecord> records) {
  std::string out = "method,p,psnr_db,mse,n_images\n";
  for (const MetricsRecord& r : records) {
    out += r.method + "," + std::to_string(r.p) + "," + Format("%.6f", r.psnr_db) +
           "," + Format("%.6e", r.mse) + "," + std::to_string(r.n_images) + "\n";
  }
  return out;
}

std::string HistogramCsv(const Histogram& histogram) {
  std::string out = "bin_center,count\n";
  for (std::size_t i = 0; i < histogram.counts.size(); ++i) {
    out += Format("%g", histogram.centers[i]) + "," +
           std::to_string(histogram.counts[i]) + "\n";
  }
  return out;
}

std::string HistogramSvg(const Histogram& histogram, std::string_view title) {
  const double width = 640, height = 360, left = 60, right = 20, top = 40,
               bottom = 50;
  const double plot_w = width - left - right, plot_h = height - top - bottom;
  const std::size_t bins = histogram.counts.size();
  long max_count = 0;
  for (long c : histogram.counts) max_count = std::max(max_count, c);
  const double scale = max_count > 0 ? plot_h / max_count : 0.0;
  const double bar_w = bins > 0 ? plot_w / bins : plot_w;

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
    << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height
    << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
       "font-family=\"sans-serif\" font-size=\"16\">"
    << Escape(title) << "</text>\n";
  for (std::size_t i = 0; i < bins; ++i) {
    const double h = histogram.counts[i] * scale;
    s << "<rect x=\"" << Format("%.2f", left + i * bar_w) << "\" y=\""
      << Format("%.2f", top + plot_h - h) << "\" width=\""
      << Format("%.2f", std::max(bar_w - 1.0, 0.5)) << "\" height=\""
      << Format("%.2f", h) << "\" fill=\"steelblue\"/>\n";
  }
  s << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\""
    << left + plot_w << "\" y2=\"" << top + plot_h << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left
    << "\" y2=\"" << top + plot_h << "\" stroke=\"black\"/>\n";
  const std::size_t step = std::max<std::size_t>(1, bins / 8);
  for (std::size_t i = 0; i < bins; i += step) {
    s << "<text x=\"" << Format("%.2f", left + (i + 0.5) * bar_w) << "\" y=\""
      << top + plot_h + 16 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"11\">" << Format("%g", histogram.centers[i]) << "</text>\n";
  }
  s << "<text x=\"" << left - 6 << "\" y=\"" << top + 4 << "\" text-anchor=\"end\" "
    << "font-family=\"sans-serif\" font-size=\"11\">" << max_count << "</text>\n";
  s << "<text x=\"" << left - 6 << "\" y=\"" << top + plot_h << "\" text-anchor=\"end\" "
    << "font-family=\"sans-serif\" font-size=\"11\">0</text>\n";
  s << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 10
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
    << "distance to image centre (px)</text>\n";
  s << "<text x=\"16\" y=\"" << top + plot_h / 2 << "\" text-anchor=\"middle\" "
    << "font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 "
    << top + plot_h / 2 << ")\">errors</text>\n";
  s << "</svg>\n";
  return s.str();
}

}  // namespace capad
