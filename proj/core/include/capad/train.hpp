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
#ifndef CAPAD_TRAIN_HPP_
#define CAPAD_TRAIN_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "capad/augment.hpp"
#include "capad/net.hpp"
#include "capad/tensor.hpp"

namespace capad {

enum class LossNorm { kL1, kL2 };

std::string_view LossNormName(LossNorm norm);
LossNorm ParseLossNorm(std::string_view name);

struct LossResult {
  double loss = 0.0;
  Tensor grad;  // d loss / d prediction
};

// Mean absolute (L1) or squared (L2) error over the pixels where the mask is
// 0, across all channels.  Throws if the mask has no zero pixel.
LossResult ReconstructionLoss(const Tensor& truth, const Mask& mask,
                              const Tensor& pred, LossNorm norm);

// Where training strips are taken from.
enum class StripSampling {
  kInterior,  // any offset inside the image
  kBorder,    // only the true image border on the trained side
};

struct TrainConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int batch_size = 8;
  int epochs = 150;
  LossNorm loss_norm = LossNorm::kL1;
  StripSampling sampling = StripSampling::kInterior;
  std::uint64_t seed = 0;
  AugmentConfig augment;

  void Validate() const;
};

struct AdamState {
  long step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
};

// One bias-corrected Adam update.  State buffers are created on the first
// call.  Throws, naming the parameter, on a non-finite gradient; parameters
// are left untouched in that case.
void AdamStep(std::span<const NamedParameter> params,
              std::span<const std::span<const double>> grads, AdamState& state,
              const TrainConfig& cfg);

struct TrainingPair {
  Tensor input;   // strip with the outer p band zeroed
  Tensor target;  // full strip
  Mask mask;      // 0 on the outer band
};

// Cuts a (p + m)-wide strip spanning `length` pixels along the side.  The
// strip's outer p band (towards `side`) is real image content.  A length of
// 0 takes the full image extent along the side.
TrainingPair MakeTrainingPair(const Tensor& image, Side side, int p, int m,
                              std::mt19937_64& rng,
                              StripSampling sampling = StripSampling::kInterior,
                              int length = 0);

struct TrainResult {
  Network net;
  std::vector<double> loss_history;  // mean loss per epoch
};

using ProgressFn = std::function<void(Side side, int epoch, double loss)>;

// Trains one direction network.  Each epoch shuffles the corpus, augments
// every image, cuts one strip per image and takes an Adam step per batch.
// Strips in a batch share the shortest along-side extent of the batch.
TrainResult TrainDirection(std::span<const Tensor> corpus, Side side,
                           const TrainConfig& cfg, const NetConfig& net_cfg,
                           int p, int m, const ProgressFn& progress = {});

// Four direction networks sharing a configuration.  In two-model mode only
// left and top are stored; right and bottom inputs are mirrored, run through
// them and mirrored back.
struct PadModel {
  int p = 3;
  int m = 20;
  NetConfig config;
  bool two_model_mode = false;
  std::map<Side, Network> nets;

  const Network& net(Side side) const;
  void Validate() const;
};

struct PadModelTraining {
  PadModel model;
  std::map<Side, std::vector<double>> loss_history;
};

PadModelTraining TrainPadModel(std::span<const Tensor> corpus,
                               const TrainConfig& cfg, const NetConfig& net_cfg,
                               int p, int m, bool two_model_mode,
                               const ProgressFn& progress = {});

// Predicts the p-wide band beyond `side` of `image` (p <= model.p).  The
// result is (C, h, p) for left/right and (C, p, w) for top/bottom.
Tensor PredictBand(const Tensor& image, const PadModel& model, Side side, int p);

// Context-aware padding to (C, h + 2p, w + 2p).  Left and right bands come
// first; top and bottom are then predicted on the horizontally extended
// image, which fills the corners.
Tensor CaPad(const Tensor& image, const PadModel& model, int p);

// Bundle directory: one CAPM file per stored direction plus manifest.txt.
void SavePadModel(const PadModel& model, const std::filesystem::path& dir);
PadModel LoadPadModel(const std::filesystem::path& dir);

}  // namespace capad

#endif  // CAPAD_TRAIN_HPP_
