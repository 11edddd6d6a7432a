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
#ifndef CAPAD_IMAGE_IO_HPP_
#define CAPAD_IMAGE_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "capad/tensor.hpp"

namespace capad {

// Raw 8-bit raster, interleaved samples (1 = gray, 3 = RGB).
struct Raster {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> samples;
};

// Reads an 8-bit PNG or binary PPM/PGM.  16-bit data is rejected.
Raster ReadRaster(const std::filesystem::path& path);
// Format is chosen from the extension: .png, .ppm or .pgm.
void WriteRaster(const Raster& raster, const std::filesystem::path& path);

// Loads an image as a (3, H, W) tensor with samples divided by 255.  Gray
// images are replicated to three channels.
Tensor LoadImage(const std::filesystem::path& path);

// Saves a 1- or 3-channel tensor.  Values are clamped to [0, 1] and quantized
// with round-half-up, so 0.5 is stored as 128.
void SaveImage(const Tensor& tensor, const std::filesystem::path& path);

std::uint8_t QuantizeUnit(double value);
Raster ToRaster(const Tensor& tensor);
Tensor FromRaster(const Raster& raster);

// CAPT tensor files: "CAPT", u8 version 1, u32 LE C, H, W, then C*H*W
// little-endian binary32 values in channel-major row-major order.
void WriteTensorFile(const Tensor& tensor, const std::filesystem::path& path);
Tensor ReadTensorFile(const std::filesystem::path& path);

// Writes `bytes` to a sibling temporary file and renames it over `path`.
void WriteFileAtomic(const std::filesystem::path& path,
                     const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path);

}  // namespace capad

#endif  // CAPAD_IMAGE_IO_HPP_
