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
#include "capad/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include "capad/checkpoint.hpp"
#include "capad/image_io.hpp"
#include "capad/parallel.hpp"
#include "capad/warp.hpp"

namespace capad {
namespace {

// Uniform integer in [0, n) from the top 53 bits of the generator, so the
// sequence does not depend on the standard library's distributions.
int UniformIndex(std::mt19937_64& rng, int n) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return std::min(static_cast<int>(u * n), n - 1);
}

std::uint64_t SideSalt(Side side) {
  return 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(side) + 1);
}

int AcrossExtent(const Tensor& t, Side side) {
  return IsHorizontal(side) ? t.width() : t.height();
}
int AlongExtent(const Tensor& t, Side side) {
  return IsHorizontal(side) ? t.height() : t.width();
}

Side Opposite(Side side) {
  switch (side) {
    case Side::kLeft: return Side::kRight;
    case Side::kRight: return Side::kLeft;
    case Side::kTop: return Side::kBottom;
    case Side::kBottom: return Side::kTop;
  }
  return side;
}

Tensor Mirror(const Tensor& t, Side side) {
  return IsHorizontal(side) ? FlipHorizontal(t) : FlipVertical(t);
}

// Block with m context pixels from `side` and P zeros beyond them.  Only the
// context band has to fit in the image.
Tensor BuildBlock(const Tensor& image, Side side, int P, int m) {
  const int C = image.channels(), H = image.height(), W = image.width();
  if (m > AcrossExtent(image, side)) {
    throw std::invalid_argument("context width " + std::to_string(m) +
                                " exceeds image extent " +
                                std::to_string(AcrossExtent(image, side)));
  }
  switch (side) {
    case Side::kLeft: {
      Tensor b(C, H, P + m);
      Paste(Crop(image, 0, 0, H, m), 0, P, b);
      return b;
    }
    case Side::kRight: {
      Tensor b(C, H, P + m);
      Paste(Crop(image, 0, W - m, H, m), 0, 0, b);
      return b;
    }
    case Side::kTop: {
      Tensor b(C, P + m, W);
      Paste(Crop(image, 0, 0, m, W), P, 0, b);
      return b;
    }
    case Side::kBottom: {
      Tensor b(C, P + m, W);
      Paste(Crop(image, H - m, 0, m, W), 0, 0, b);
      return b;
    }
  }
  throw std::invalid_argument("bad side");
}

// The p pixels of a warped block adjacent to the image.
Tensor BandOf(const Tensor& warped, Side side, int P, int m, int p) {
  const int H = warped.height(), W = warped.width();
  switch (side) {
    case Side::kLeft: return Crop(warped, 0, P - p, H, p);
    case Side::kRight: return Crop(warped, 0, m, H, p);
    case Side::kTop: return Crop(warped, P - p, 0, p, W);
    case Side::kBottom: return Crop(warped, m, 0, p, W);
  }
  throw std::invalid_argument("bad side");
}

std::string DirectionFile(Side side) {
  return std::string(SideName(side)) + ".capm";
}

std::vector<Side> StoredSides(bool two_model_mode) {
  if (two_model_mode) return {Side::kLeft, Side::kTop};
  return {std::begin(kAllSides), std::end(kAllSides)};
}

}  // namespace

std::string_view LossNormName(LossNorm norm) {
  return norm == LossNorm::kL1 ? "l1" : "l2";
}

LossNorm ParseLossNorm(std::string_view name) {
  if (name == "l1" || name == "L1") return LossNorm::kL1;
  if (name == "l2" || name == "L2") return LossNorm::kL2;
  throw std::invalid_argument("unknown loss norm '" + std::string(name) +
                              "' (expected l1 or l2)");
}

LossResult ReconstructionLoss(const Tensor& truth, const Mask& mask,
                              const Tensor& pred, LossNorm norm) {
  CheckSameShape(truth, pred, "reconstruction loss");
  if (mask.height() != truth.height() || mask.width() != truth.width()) {
    throw std::invalid_argument("reconstruction loss: mask shape mismatch");
  }
  const std::size_t zeros = mask.count_zeros();
  if (zeros == 0) {
    throw std::invalid_argument("reconstruction loss: mask has no pad pixels");
  }
  const double count = static_cast<double>(zeros) * truth.channels();
  LossResult r{0.0, Tensor(truth.channels(), truth.height(), truth.width())};
  for (int c = 0; c < truth.channels(); ++c)
    for (int y = 0; y < truth.height(); ++y)
      for (int x = 0; x < truth.width(); ++x) {
        if (mask.at(y, x) != 0) continue;
        const double d = pred.at(c, y, x) - truth.at(c, y, x);
        if (norm == LossNorm::kL1) {
          r.loss += std::abs(d);
          r.grad.at(c, y, x) = d > 0 ? 1.0 / count : (d < 0 ? -1.0 / count : 0.0);
        } else {
          r.loss += d * d;
          r.grad.at(c, y, x) = 2.0 * d / count;
        }
      }
  r.loss /= count;
  return r;
}

void TrainConfig::Validate() const {
  if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("Adam betas must lie in [0, 1)");
  }
  if (!(eps > 0.0)) throw std::invalid_argument("Adam eps must be > 0");
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  augment.Validate();
}

void AdamStep(std::span<const NamedParameter> params,
              std::span<const std::span<const double>> grads, AdamState& state,
              const TrainConfig& cfg) {
  if (params.size() != grads.size()) {
    throw std::invalid_argument("adam: parameter and gradient counts differ");
  }
  for (std::size_t j = 0; j < params.size(); ++j) {
    if (params[j].values.size() != grads[j].size()) {
      throw std::invalid_argument("adam: gradient shape mismatch for " + params[j].name);
    }
    for (double g : grads[j]) {
      if (!std::isfinite(g)) {
        throw std::runtime_error("non-finite gradient for parameter " + params[j].name);
      }
    }
  }
  if (state.m.empty()) {
    for (const NamedParameter& p : params) {
      state.m.emplace_back(p.values.size(), 0.0);
      state.v.emplace_back(p.values.size(), 0.0);
    }
  }
  if (state.m.size() != params.size()) {
    throw std::invalid_argument("adam: state does not match parameters");
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t j = 0; j < params.size(); ++j) {
    auto values = params[j].values;
    auto& m = state.m[j];
    auto& v = state.v[j];
    if (m.size() != values.size()) {
      throw std::invalid_argument("adam: state shape mismatch for " + params[j].name);
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = grads[j][i];
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
      values[i] -= cfg.lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + cfg.eps);
    }
  }
}

TrainingPair MakeTrainingPair(const Tensor& image, Side side, int p, int m,
                              std::mt19937_64& rng, StripSampling sampling,
                              int length) {
  if (p < 1 || m < 1) throw std::invalid_argument("p and m must be >= 1");
  const int across = AcrossExtent(image, side), along = AlongExtent(image, side);
  if (length == 0) length = along;
  if (p + m > across || length < 1 || length > along) {
    throw std::invalid_argument("image " + image.shape_string() +
                                " too small for a " + std::to_string(p + m) +
                                "-wide strip of length " + std::to_string(length));
  }
  const int width = p + m;
  int offset;
  if (sampling == StripSampling::kInterior) {
    offset = UniformIndex(rng, across - width + 1);
  } else {
    offset = (side == Side::kLeft || side == Side::kTop) ? 0 : across - width;
  }
  const int shift = UniformIndex(rng, along - length + 1);

  TrainingPair pair;
  if (IsHorizontal(side)) {
    pair.target = Crop(image, shift, offset, length, width);
  } else {
    pair.target = Crop(image, offset, shift, width, length);
  }
  pair.input = pair.target;
  pair.mask = Mask(pair.target.height(), pair.target.width(), 1);
  const int band0 = (side == Side::kLeft || side == Side::kTop) ? 0 : m;
  for (int c = 0; c < image.channels(); ++c)
    for (int y = 0; y < pair.target.height(); ++y)
      for (int x = 0; x < pair.target.width(); ++x) {
        const int a = IsHorizontal(side) ? x : y;
        if (a >= band0 && a < band0 + p) {
          pair.input.at(c, y, x) = 0.0;
          pair.mask.at(y, x) = 0;
        }
      }
  return pair;
}

TrainResult TrainDirection(std::span<const Tensor> corpus, Side side,
                           const TrainConfig& cfg, const NetConfig& net_cfg,
                           int p, int m, const ProgressFn& progress) {
  cfg.Validate();
  net_cfg.Validate();
  if (corpus.empty()) throw std::invalid_argument("training corpus is empty");
  if (p < 1 || m < 1) throw std::invalid_argument("p and m must be >= 1");

  std::mt19937_64 rng(cfg.seed ^ SideSalt(side));
  std::mt19937_64 aug_rng(cfg.augment.seed ^ SideSalt(side) ^ 0xa5a5a5a5a5a5a5a5ULL);
  TrainResult result{NetInit(net_cfg), {}};
  Network& net = result.net;
  AdamState adam;
  const PadPlacement placement = PlacementFor(side);

  std::vector<int> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (int i = static_cast<int>(order.size()) - 1; i > 0; --i) {
      std::swap(order[i], order[UniformIndex(rng, i + 1)]);
    }
    double loss_sum = 0.0;
    std::size_t samples = 0;
    for (std::size_t b0 = 0; b0 < order.size(); b0 += cfg.batch_size) {
      const std::size_t b1 = std::min(order.size(), b0 + cfg.batch_size);
      std::vector<Tensor> images;
      for (std::size_t k = b0; k < b1; ++k) {
        images.push_back(Augment(corpus[order[k]], std::nullopt, cfg.augment, aug_rng).image);
      }
      int length = AlongExtent(images[0], side);
      for (const Tensor& t : images) length = std::min(length, AlongExtent(t, side));

      std::vector<TrainingPair> pairs;
      std::vector<Tensor> inputs;
      for (const Tensor& t : images) {
        pairs.push_back(MakeTrainingPair(t, side, p, m, rng, cfg.sampling, length));
        inputs.push_back(pairs.back().input);
      }
      const NetOutput out = NetForward(net, inputs, true, placement);
      const double n = static_cast<double>(pairs.size());
      double batch_loss = 0.0;
      std::vector<DisplacementField> field_grads;
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        const Tensor warped = WarpForward(pairs[k].input, out.fields[k]);
        LossResult loss = ReconstructionLoss(pairs[k].target, pairs[k].mask,
                                             warped, cfg.loss_norm);
        batch_loss += loss.loss;
        for (double& g : loss.grad.values()) g /= n;
        field_grads.push_back(
            WarpBackward(loss.grad, pairs[k].input, out.fields[k]).field);
      }
      if (!std::isfinite(batch_loss)) {
        throw std::runtime_error("non-finite training loss in epoch " +
                                 std::to_string(epoch + 1));
      }
      loss_sum += batch_loss;
      samples += pairs.size();

      NetGradients g = NetBackward(net, out.cache, field_grads);
      const auto params = TrainableParameters(net);
      const auto grads = TrainableParameters(std::as_const(g.params));
      AdamStep(params, grads, adam, cfg);
      UpdateRunningStatistics(net, out.cache);
    }
    result.loss_history.push_back(loss_sum / static_cast<double>(samples));
    if (progress) progress(side, epoch + 1, result.loss_history.back());
  }
  return result;
}

const Network& PadModel::net(Side side) const {
  auto it = nets.find(side);
  if (it == nets.end()) {
    throw std::invalid_argument("pad model has no " + std::string(SideName(side)) +
                                " network");
  }
  return it->second;
}

void PadModel::Validate() const {
  if (p < 1 || m < 1) throw std::invalid_argument("pad model p and m must be >= 1");
  config.Validate();
  for (Side side : StoredSides(two_model_mode)) {
    const Network& n = net(side);
    CheckStructure(n);
    if (!(n.config == config)) {
      throw std::invalid_argument(std::string(SideName(side)) +
                                  " network config differs from the model");
    }
  }
}

PadModelTraining TrainPadModel(std::span<const Tensor> corpus,
                               const TrainConfig& cfg, const NetConfig& net_cfg,
                               int p, int m, bool two_model_mode,
                               const ProgressFn& progress) {
  const std::vector<Side> sides = StoredSides(two_model_mode);
  std::vector<TrainResult> results(sides.size());
  ParallelFor(static_cast<int>(sides.size()), [&](int i) {
    results[i] = TrainDirection(corpus, sides[i], cfg, net_cfg, p, m, progress);
  });
  PadModelTraining out;
  out.model.p = p;
  out.model.m = m;
  out.model.config = net_cfg;
  out.model.two_model_mode = two_model_mode;
  for (std::size_t i = 0; i < sides.size(); ++i) {
    out.model.nets[sides[i]] = std::move(results[i].net);
    out.loss_history[sides[i]] = std::move(results[i].loss_history);
  }
  return out;
}

Tensor PredictBand(const Tensor& image, const PadModel& model, Side side, int p) {
  if (p < 1 || p > model.p) {
    throw std::invalid_argument("requested p = " + std::to_string(p) +
                                " outside [1, " + std::to_string(model.p) + "]");
  }
  if (image.channels() != model.config.in_channels) {
    throw std::invalid_argument("image has " + std::to_string(image.channels()) +
                                " channels, model expects " +
                                std::to_string(model.config.in_channels));
  }
  const bool mirrored =
      model.two_model_mode && (side == Side::kRight || side == Side::kBottom);
  const Side net_side = mirrored ? Opposite(side) : side;
  const Tensor source = mirrored ? Mirror(image, side) : image;
  const Tensor block = BuildBlock(source, net_side, model.p, model.m);
  const DisplacementField field =
      Predict(model.net(net_side), block, PlacementFor(net_side));
  Tensor band = BandOf(WarpForward(block, field), net_side, model.p, model.m, p);
  return mirrored ? Mirror(band, side) : band;
}

Tensor CaPad(const Tensor& image, const PadModel& model, int p) {
  model.Validate();
  const int C = image.channels(), h = image.height(), w = image.width();
  Tensor wide(C, h, w + 2 * p);
  Paste(PredictBand(image, model, Side::kLeft, p), 0, 0, wide);
  Paste(image, 0, p, wide);
  Paste(PredictBand(image, model, Side::kRight, p), 0, p + w, wide);

  Tensor out(C, h + 2 * p, w + 2 * p);
  Paste(PredictBand(wide, model, Side::kTop, p), 0, 0, out);
  Paste(wide, p, 0, out);
  Paste(PredictBand(wide, model, Side::kBottom, p), p + h, 0, out);
  return out;
}

void SavePadModel(const PadModel& model, const std::filesystem::path& dir) {
  model.Validate();
  std::filesystem::create_directories(dir);
  for (Side side : StoredSides(model.two_model_mode)) {
    SaveCheckpoint(model.net(side), side, dir / DirectionFile(side));
  }
  std::ostringstream manifest;
  manifest << "format=capad-padmodel\n"
           << "version=1\n"
           << "p=" << model.p << "\n"
           << "m=" << model.m << "\n"
           << "two_model_mode=" << (model.two_model_mode ? 1 : 0) << "\n"
           << "depth=" << model.config.depth << "\n"
           << "base_channels=" << model.config.base_channels << "\n"
           << "in_channels=" << model.config.in_channels << "\n"
           << "skip_connections=" << (model.config.skip_connections ? 1 : 0) << "\n"
           << "seed=" << model.config.seed << "\n";
  const std::string text = manifest.str();
  WriteFileAtomic(dir / "manifest.txt",
                  std::vector<std::uint8_t>(text.begin(), text.end()));
}

PadModel LoadPadModel(const std::filesystem::path& dir) {
  const auto bytes = ReadFileBytes(dir / "manifest.txt");
  std::istringstream in(std::string(bytes.begin(), bytes.end()));
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(dir.string() + "/manifest.txt: malformed line '" + line + "'");
    }
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) {
      throw std::runtime_error(dir.string() + "/manifest.txt: missing key '" + key + "'");
    }
    return it->second;
  };
  auto get_int = [&](const std::string& key) {
    try {
      return std::stoi(get(key));
    } catch (const std::logic_error&) {
      throw std::runtime_error(dir.string() + "/manifest.txt: bad value for '" + key + "'");
    }
  };
  if (get("format") != "capad-padmodel" || get("version") != "1") {
    throw std::runtime_error(dir.string() + ": not a version 1 pad model bundle");
  }
  PadModel model;
  model.p = get_int("p");
  model.m = get_int("m");
  model.two_model_mode = get_int("two_model_mode") != 0;
  model.config.depth = get_int("depth");
  model.config.base_channels = get_int("base_channels");
  model.config.in_channels = get_int("in_channels");
  model.config.skip_connections = get_int("skip_connections") != 0;
  try {
    model.config.seed = std::stoull(get("seed"));
  } catch (const std::logic_error&) {
    throw std::runtime_error(dir.string() + "/manifest.txt: bad value for 'seed'");
  }
  for (Side side : StoredSides(model.two_model_mode)) {
    Checkpoint ck = LoadCheckpoint(dir / DirectionFile(side));
    if (ck.direction != side) {
      throw std::runtime_error(DirectionFile(side) + " holds a " +
                               std::string(SideName(ck.direction)) + " network");
    }
    model.nets[side] = std::move(ck.net);
  }
  try {
    model.Validate();
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(dir.string() + ": " + e.what());
  }
  return model;
}

}  // namespace capad
