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
#include "capad/layers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "capad/parallel.hpp"
#include "capad/resample.hpp"

namespace capad::layers {
namespace {

void CheckGradShape(std::span<const Tensor> ref, std::span<const Tensor> grad,
                    const char* what) {
  if (ref.size() != grad.size()) {
    throw std::invalid_argument(std::string(what) + ": batch size mismatch");
  }
  for (std::size_t n = 0; n < ref.size(); ++n) {
    CheckSameShape(ref[n], grad[n], what);
  }
}

}  // namespace

void CheckBatch(std::span<const Tensor> batch) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  for (const Tensor& t : batch) {
    if (!t.same_shape(batch.front())) {
      throw std::invalid_argument("batch members differ in shape: " +
                                  t.shape_string() + " vs " +
                                  batch.front().shape_string());
    }
  }
}

Batch ConvForward(std::span<const Tensor> input, const ConvKernel& kernel,
                  std::span<const double> bias, int padding) {
  CheckBatch(input);
  Batch out;
  out.reserve(input.size());
  for (const Tensor& t : input) out.push_back(Conv2d(t, kernel, bias, 1, padding));
  return out;
}

ConvGrads ConvBackward(std::span<const Tensor> input, const ConvKernel& kernel,
                       std::span<const Tensor> grad_out, int padding) {
  CheckBatch(input);
  CheckBatch(grad_out);
  const int N = static_cast<int>(input.size());
  const int C = kernel.in_channels, O = kernel.out_channels, k = kernel.size;
  const int H = input[0].height(), W = input[0].width();
  const int OH = grad_out[0].height(), OW = grad_out[0].width();
  if (input[0].channels() != C || grad_out[0].channels() != O ||
      static_cast<int>(grad_out.size()) != N) {
    throw std::invalid_argument("conv backward: shape mismatch");
  }

  ConvGrads g{Batch(), ConvKernel(O, C, k), std::vector<double>(O, 0.0)};
  for (int n = 0; n < N; ++n) g.input.emplace_back(C, H, W);

  // For tap (ky, kx) the output pixel (y, x) reads input (y + ky - pad,
  // x + kx - pad); these are the output ranges keeping that read in bounds.
  auto range = [padding](int tap, int in, int out) {
    const int lo = std::max(0, padding - tap);
    const int hi = std::min(out, in + padding - tap);
    return std::pair<int, int>(lo, hi);
  };

  ParallelFor(O, [&](int o) {
    double bias_sum = 0.0;
    for (int n = 0; n < N; ++n)
      for (double v : grad_out[n].plane(o)) bias_sum += v;
    g.bias[o] = bias_sum;
    for (int i = 0; i < C; ++i) {
      for (int ky = 0; ky < k; ++ky) {
        const auto [y_lo, y_hi] = range(ky, H, OH);
        for (int kx = 0; kx < k; ++kx) {
          const auto [x_lo, x_hi] = range(kx, W, OW);
          double acc = 0.0;
          for (int n = 0; n < N; ++n) {
            for (int y = y_lo; y < y_hi; ++y) {
              const double* go = grad_out[n].plane(o).data() +
                                 static_cast<std::size_t>(y) * OW;
              const double* in = input[n].plane(i).data() +
                                 static_cast<std::size_t>(y + ky - padding) * W;
              for (int x = x_lo; x < x_hi; ++x) acc += go[x] * in[x + kx - padding];
            }
          }
          g.weights.at(o, i, ky, kx) = acc;
        }
      }
    }
  });

  ParallelFor(N * C, [&](int job) {
    const int n = job / C, i = job % C;
    Tensor& gi = g.input[n];
    for (int o = 0; o < O; ++o) {
      for (int ky = 0; ky < k; ++ky) {
        const auto [y_lo, y_hi] = range(ky, H, OH);
        for (int kx = 0; kx < k; ++kx) {
          const auto [x_lo, x_hi] = range(kx, W, OW);
          const double w = kernel.at(o, i, ky, kx);
          for (int y = y_lo; y < y_hi; ++y) {
            const double* go = grad_out[n].plane(o).data() +
                               static_cast<std::size_t>(y) * OW;
            double* dst = &gi.at(i, y + ky - padding, 0);
            for (int x = x_lo; x < x_hi; ++x) dst[x + kx - padding] += go[x] * w;
          }
        }
      }
    }
  });
  return g;
}

Batch BatchNormForward(std::span<const Tensor> input, const BatchNormParams& p,
                       bool training, BatchNormState* state) {
  CheckBatch(input);
  const int C = input[0].channels();
  if (static_cast<int>(p.gamma.size()) != C || static_cast<int>(p.beta.size()) != C ||
      static_cast<int>(p.running_mean.size()) != C ||
      static_cast<int>(p.running_var.size()) != C) {
    throw std::invalid_argument("batchnorm parameter size does not match " +
                                std::to_string(C) + " channels");
  }
  const std::size_t count = input.size() * input[0].plane_size();
  std::vector<double> mean(C), var(C), inv_std(C);
  for (int c = 0; c < C; ++c) {
    if (training) {
      double s = 0.0;
      for (const Tensor& t : input)
        for (double v : t.plane(c)) s += v;
      mean[c] = s / count;
      double sq = 0.0;
      for (const Tensor& t : input)
        for (double v : t.plane(c)) sq += (v - mean[c]) * (v - mean[c]);
      var[c] = sq / count;
    } else {
      mean[c] = p.running_mean[c];
      var[c] = p.running_var[c];
    }
    inv_std[c] = 1.0 / std::sqrt(var[c] + p.eps);
  }

  Batch out;
  out.reserve(input.size());
  Batch normalized;
  for (const Tensor& t : input) {
    Tensor xh(t.channels(), t.height(), t.width());
    Tensor y(t.channels(), t.height(), t.width());
    for (int c = 0; c < C; ++c) {
      auto src = t.plane(c);
      auto xp = xh.plane(c);
      auto yp = y.plane(c);
      for (std::size_t j = 0; j < src.size(); ++j) {
        xp[j] = (src[j] - mean[c]) * inv_std[c];
        yp[j] = xp[j] * p.gamma[c] + p.beta[c];
      }
    }
    if (state) normalized.push_back(std::move(xh));
    out.push_back(std::move(y));
  }
  if (state) {
    *state = {std::move(normalized), std::move(mean), std::move(var),
              std::move(inv_std), count};
  }
  return out;
}

BatchNormGrads BatchNormBackward(const BatchNormState& state,
                                 std::span<const double> gamma,
                                 std::span<const Tensor> grad_out) {
  CheckGradShape(state.normalized, grad_out, "batchnorm backward");
  const int C = static_cast<int>(gamma.size());
  BatchNormGrads g{Batch(), std::vector<double>(C, 0.0),
                   std::vector<double>(C, 0.0)};
  for (int c = 0; c < C; ++c) {
    double sum_dy = 0.0, sum_dy_xh = 0.0;
    for (std::size_t n = 0; n < grad_out.size(); ++n) {
      auto dy = grad_out[n].plane(c);
      auto xh = state.normalized[n].plane(c);
      for (std::size_t j = 0; j < dy.size(); ++j) {
        sum_dy += dy[j];
        sum_dy_xh += dy[j] * xh[j];
      }
    }
    g.beta[c] = sum_dy;
    g.gamma[c] = sum_dy_xh;
  }
  const double count = static_cast<double>(state.count);
  for (std::size_t n = 0; n < grad_out.size(); ++n) {
    Tensor dx(grad_out[n].channels(), grad_out[n].height(), grad_out[n].width());
    for (int c = 0; c < C; ++c) {
      const double scale = gamma[c] * state.inv_std[c] / count;
      auto dy = grad_out[n].plane(c);
      auto xh = state.normalized[n].plane(c);
      auto dp = dx.plane(c);
      for (std::size_t j = 0; j < dy.size(); ++j) {
        dp[j] = scale * (count * dy[j] - g.beta[c] - xh[j] * g.gamma[c]);
      }
    }
    g.input.push_back(std::move(dx));
  }
  return g;
}

Batch ReluForward(std::span<const Tensor> input) {
  Batch out(input.begin(), input.end());
  for (Tensor& t : out)
    for (double& v : t.values()) v = v > 0.0 ? v : 0.0;
  return out;
}

Batch ReluBackward(std::span<const Tensor> output,
                   std::span<const Tensor> grad_out) {
  CheckGradShape(output, grad_out, "relu backward");
  Batch g(grad_out.begin(), grad_out.end());
  for (std::size_t n = 0; n < g.size(); ++n) {
    auto out = output[n].values();
    auto gv = g[n].values();
    for (std::size_t j = 0; j < gv.size(); ++j)
      if (!(out[j] > 0.0)) gv[j] = 0.0;
  }
  return g;
}

Batch MaxPoolForward(std::span<const Tensor> input,
                     std::vector<std::vector<int>>* argmax) {
  CheckBatch(input);
  const int H = input[0].height(), W = input[0].width();
  if (H % 2 != 0 || W % 2 != 0) {
    throw std::invalid_argument("max pooling needs even dimensions, got " +
                                input[0].shape_string());
  }
  Batch out;
  if (argmax) argmax->clear();
  for (const Tensor& t : input) {
    Tensor o(t.channels(), H / 2, W / 2);
    std::vector<int> idx(o.size());
    std::size_t k = 0;
    for (int c = 0; c < t.channels(); ++c) {
      for (int y = 0; y < H / 2; ++y) {
        for (int x = 0; x < W / 2; ++x, ++k) {
          int best_y = 2 * y, best_x = 2 * x;
          double best = t.at(c, best_y, best_x);
          for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx) {
              const double v = t.at(c, 2 * y + dy, 2 * x + dx);
              if (v > best) {
                best = v;
                best_y = 2 * y + dy;
                best_x = 2 * x + dx;
              }
            }
          o.at(c, y, x) = best;
          idx[k] = best_y * W + best_x;
        }
      }
    }
    if (argmax) argmax->push_back(std::move(idx));
    out.push_back(std::move(o));
  }
  return out;
}

Batch MaxPoolBackward(std::span<const Tensor> input_shape_source,
                      const std::vector<std::vector<int>>& argmax,
                      std::span<const Tensor> grad_out) {
  if (argmax.size() != grad_out.size() ||
      input_shape_source.size() != grad_out.size()) {
    throw std::invalid_argument("max pool backward: batch size mismatch");
  }
  Batch g;
  for (std::size_t n = 0; n < grad_out.size(); ++n) {
    const Tensor& ref = input_shape_source[n];
    Tensor gi(ref.channels(), ref.height(), ref.width());
    const std::size_t out_plane = grad_out[n].plane_size();
    for (int c = 0; c < ref.channels(); ++c) {
      auto go = grad_out[n].plane(c);
      auto dst = gi.plane(c);
      for (std::size_t j = 0; j < out_plane; ++j) {
        dst[argmax[n][c * out_plane + j]] += go[j];
      }
    }
    g.push_back(std::move(gi));
  }
  return g;
}

Batch UpsampleForward(std::span<const Tensor> input) {
  CheckBatch(input);
  Batch out;
  for (const Tensor& t : input) {
    out.push_back(ResizeBilinear(t, 2 * t.height(), 2 * t.width()));
  }
  return out;
}

Batch UpsampleBackward(std::span<const Tensor> input_shape_source,
                       std::span<const Tensor> grad_out) {
  CheckBatch(input_shape_source);
  const int H = input_shape_source[0].height(), W = input_shape_source[0].width();
  const auto ty = HalfPixelTaps(H, 2 * H);
  const auto tx = HalfPixelTaps(W, 2 * W);
  Batch g;
  for (std::size_t n = 0; n < grad_out.size(); ++n) {
    const Tensor& go = grad_out[n];
    Tensor gi(go.channels(), H, W);
    for (int c = 0; c < go.channels(); ++c) {
      for (int y = 0; y < 2 * H; ++y) {
        const LinearTap& a = ty[y];
        for (int x = 0; x < 2 * W; ++x) {
          const LinearTap& b = tx[x];
          const double v = go.at(c, y, x);
          gi.at(c, a.lo, b.lo) += v * (1.0 - a.frac) * (1.0 - b.frac);
          gi.at(c, a.lo, b.hi) += v * (1.0 - a.frac) * b.frac;
          gi.at(c, a.hi, b.lo) += v * a.frac * (1.0 - b.frac);
          gi.at(c, a.hi, b.hi) += v * a.frac * b.frac;
        }
      }
    }
    g.push_back(std::move(gi));
  }
  return g;
}

}  // namespace capad::layers
