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
#include "capad/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>

namespace capad {
namespace {

std::string Lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

Raster DecodePng(const std::vector<std::uint8_t>& bytes,
                 const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw std::runtime_error("cannot decode PNG " + path.string() + ": " +
                             image.message);
  }
  if (image.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&image);
    throw std::runtime_error("unsupported bit depth in " + path.string() +
                             ": only 8-bit samples are supported");
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  Raster raster;
  raster.width = static_cast<int>(image.width);
  raster.height = static_cast<int>(image.height);
  raster.channels = color ? 3 : 1;
  raster.samples.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, raster.samples.data(), 0,
                             nullptr)) {
    std::string message = image.message;
    png_image_free(&image);
    throw std::runtime_error("cannot decode PNG " + path.string() + ": " +
                             message);
  }
  return raster;
}

std::vector<std::uint8_t> EncodePng(const Raster& raster) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(raster.width);
  image.height = static_cast<png_uint_32>(raster.height);
  image.format = raster.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0,
                                 raster.samples.data(), 0, nullptr)) {
    throw std::runtime_error(std::string("PNG encode failed: ") +
                             image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0,
                                 raster.samples.data(), 0, nullptr)) {
    throw std::runtime_error(std::string("PNG encode failed: ") +
                             image.message);
  }
  out.resize(size);
  return out;
}

// Netpbm header token, skipping whitespace and '#' comments.
std::string NextToken(const std::vector<std::uint8_t>& bytes, std::size_t& pos) {
  for (;;) {
    while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
    if (pos < bytes.size() && bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  std::string token;
  while (pos < bytes.size() && !std::isspace(bytes[pos])) {
    token.push_back(static_cast<char>(bytes[pos++]));
  }
  return token;
}

Raster DecodeNetpbm(const std::vector<std::uint8_t>& bytes,
                    const std::filesystem::path& path) {
  std::size_t pos = 0;
  const std::string magic = NextToken(bytes, pos);
  if (magic != "P5" && magic != "P6") {
    throw std::runtime_error("unsupported netpbm variant in " + path.string() +
                             " (binary P5/P6 only)");
  }
  Raster raster;
  try {
    raster.width = std::stoi(NextToken(bytes, pos));
    raster.height = std::stoi(NextToken(bytes, pos));
    const int maxval = std::stoi(NextToken(bytes, pos));
    if (maxval != 255) {
      throw std::runtime_error("unsupported bit depth in " + path.string() +
                               ": maxval " + std::to_string(maxval));
    }
  } catch (const std::logic_error&) {
    throw std::runtime_error("malformed netpbm header in " + path.string());
  }
  ++pos;  // single whitespace byte after maxval
  raster.channels = magic == "P6" ? 3 : 1;
  const std::size_t n = static_cast<std::size_t>(raster.width) *
                        raster.height * raster.channels;
  if (raster.width <= 0 || raster.height <= 0 || pos + n > bytes.size()) {
    throw std::runtime_error("truncated netpbm data in " + path.string());
  }
  raster.samples.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                        bytes.begin() + static_cast<std::ptrdiff_t>(pos + n));
  return raster;
}

std::vector<std::uint8_t> EncodeNetpbm(const Raster& raster) {
  const std::string header = (raster.channels == 3 ? "P6\n" : "P5\n") +
                             std::to_string(raster.width) + " " +
                             std::to_string(raster.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), raster.samples.begin(), raster.samples.end());
  return out;
}

void AppendU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t ReadU32(const std::vector<std::uint8_t>& in, std::size_t pos) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[pos + i]) << (8 * i);
  return v;
}

}  // namespace

std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

void WriteFileAtomic(const std::filesystem::path& path,
                     const std::vector<std::uint8_t>& bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      std::filesystem::remove(tmp);
      throw std::runtime_error("write failed for " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot move " + tmp.string() + " to " +
                             path.string() + ": " + ec.message());
  }
}

Raster ReadRaster(const std::filesystem::path& path) {
  const auto bytes = ReadFileBytes(path);
  static constexpr std::uint8_t kPngSignature[] = {0x89, 'P', 'N', 'G'};
  if (bytes.size() >= 4 && std::equal(std::begin(kPngSignature),
                                      std::end(kPngSignature), bytes.begin())) {
    return DecodePng(bytes, path);
  }
  if (bytes.size() >= 2 && bytes[0] == 'P') return DecodeNetpbm(bytes, path);
  throw std::runtime_error("unsupported raster format: " + path.string());
}

void WriteRaster(const Raster& raster, const std::filesystem::path& path) {
  if (raster.channels != 1 && raster.channels != 3) {
    throw std::invalid_argument("rasters must have 1 or 3 channels");
  }
  const std::string ext = Lower(path.extension().string());
  if (ext == ".png") {
    WriteFileAtomic(path, EncodePng(raster));
  } else if (ext == ".ppm" || ext == ".pgm") {
    if ((ext == ".ppm") != (raster.channels == 3)) {
      throw std::invalid_argument(path.string() +
                                  ": extension does not match channel count");
    }
    WriteFileAtomic(path, EncodeNetpbm(raster));
  } else {
    throw std::invalid_argument("unsupported output extension: " +
                                path.string());
  }
}

std::uint8_t QuantizeUnit(double value) {
  const double v = std::clamp(value, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::floor(v * 255.0 + 0.5));
}

Raster ToRaster(const Tensor& tensor) {
  if (tensor.channels() != 1 && tensor.channels() != 3) {
    throw std::invalid_argument("only 1- or 3-channel tensors can be saved, got " +
                                tensor.shape_string());
  }
  Raster r;
  r.width = tensor.width();
  r.height = tensor.height();
  r.channels = tensor.channels();
  r.samples.resize(static_cast<std::size_t>(r.width) * r.height * r.channels);
  for (int y = 0; y < r.height; ++y)
    for (int x = 0; x < r.width; ++x)
      for (int c = 0; c < r.channels; ++c)
        r.samples[(static_cast<std::size_t>(y) * r.width + x) * r.channels + c] =
            QuantizeUnit(tensor.at(c, y, x));
  return r;
}

Tensor FromRaster(const Raster& raster) {
  Tensor t(3, raster.height, raster.width);
  for (int y = 0; y < raster.height; ++y)
    for (int x = 0; x < raster.width; ++x)
      for (int c = 0; c < 3; ++c) {
        const int src_c = raster.channels == 3 ? c : 0;
        t.at(c, y, x) =
            raster.samples[(static_cast<std::size_t>(y) * raster.width + x) *
                               raster.channels +
                           src_c] /
            255.0;
      }
  return t;
}

Tensor LoadImage(const std::filesystem::path& path) {
  return FromRaster(ReadRaster(path));
}

void SaveImage(const Tensor& tensor, const std::filesystem::path& path) {
  WriteRaster(ToRaster(tensor), path);
}

void WriteTensorFile(const Tensor& tensor, const std::filesystem::path& path) {
  static_assert(std::endian::native == std::endian::little,
                "CAPT writer assumes a little-endian host");
  std::vector<std::uint8_t> out = {'C', 'A', 'P', 'T', 1};
  AppendU32(out, static_cast<std::uint32_t>(tensor.channels()));
  AppendU32(out, static_cast<std::uint32_t>(tensor.height()));
  AppendU32(out, static_cast<std::uint32_t>(tensor.width()));
  for (double v : tensor.values()) {
    AppendU32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  WriteFileAtomic(path, out);
}

Tensor ReadTensorFile(const std::filesystem::path& path) {
  const auto bytes = ReadFileBytes(path);
  if (bytes.size() < 17 || std::memcmp(bytes.data(), "CAPT", 4) != 0) {
    throw std::runtime_error(path.string() + " is not a CAPT tensor file");
  }
  if (bytes[4] != 1) {
    throw std::runtime_error(path.string() + ": unsupported CAPT version " +
                             std::to_string(bytes[4]));
  }
  const auto c = ReadU32(bytes, 5), h = ReadU32(bytes, 9), w = ReadU32(bytes, 13);
  const std::size_t n = static_cast<std::size_t>(c) * h * w;
  if (bytes.size() != 17 + 4 * n) {
    throw std::runtime_error(path.string() + ": CAPT payload size mismatch");
  }
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    values[i] = std::bit_cast<float>(ReadU32(bytes, 17 + 4 * i));
  }
  return Tensor(static_cast<int>(c), static_cast<int>(h), static_cast<int>(w),
                std::move(values));
}

}  // namespace capad
