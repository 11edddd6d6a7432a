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
#ifndef CAPAD_CHECKPOINT_HPP_
#define CAPAD_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "capad/net.hpp"
#include "capad/tensor.hpp"

namespace capad {

// CAPM checkpoint: magic "CAPM", u8 version, u8 direction, u32 depth,
// u32 base channels, u32 input channels, u8 skip flag, u64 seed, u32 layer
// count, then per layer a u8 kind followed by
//   conv:       u32 out, u32 in, u32 k, weights, bias
//   batchnorm:  u32 channels, gamma, beta, running mean, running variance
//   maxpool, upsample:  u32 factor
// Integers and binary32 values are little-endian.
inline constexpr std::uint8_t kCheckpointVersion = 1;

struct Checkpoint {
  Network net;
  Side direction = Side::kLeft;
};

std::vector<std::uint8_t> SerializeNetwork(const Network& net, Side direction);
Checkpoint DeserializeNetwork(std::span<const std::uint8_t> bytes);

void SaveCheckpoint(const Network& net, Side direction,
                    const std::filesystem::path& path);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

// Rounds every stored value to binary32, i.e. the state a checkpoint round
// trip reproduces.
Network RoundToStorage(const Network& net);

}  // namespace capad

#endif  // CAPAD_CHECKPOINT_HPP_
