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
#ifndef CAPAD_TOOLS_CLI_HPP_
#define CAPAD_TOOLS_CLI_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace capad::cli {

inline constexpr const char* kToolVersion = "0.1.0";

struct TrainOptions {
  std::filesystem::path corpus_dir;
  std::filesystem::path out_dir;
  int p = 3;
  int m = 20;
  int epochs = 150;
  int batch = 8;
  double lr = 1e-4;
  std::uint64_t seed = 0;
  bool two_model = false;
  std::string loss = "l1";
  std::string sampling = "interior";
  int crop_size = 713;
  bool augment = true;
  int depth = 2;
  int base_channels = 16;
};

struct PadOptions {
  std::filesystem::path image;
  std::string method;
  int p = 3;
  std::filesystem::path model_dir;
  std::filesystem::path out;
};

struct EvalPadOptions {
  std::filesystem::path corpus_dir;
  std::vector<std::string> methods = {"zero", "circular", "reflect",
                                      "replicate", "bilinear", "distribution"};
  std::vector<int> p_list = {1, 3};
  int crop = 719;
  std::string overlap = "1/3";
  int m = 20;
  std::filesystem::path model_dir;
  std::filesystem::path out;
};

struct SegAnalyzeOptions {
  std::filesystem::path pred_dir;
  std::filesystem::path gt_dir;
  int num_classes = 19;
  std::vector<std::string> leave_out = {"0", "1/3", "1/2", "2/3", "3/4"};
  double bin_width = 10.0;
  std::string palette;  // empty: single-channel index maps
  std::filesystem::path out_dir;
};

struct InspectOptions {
  std::filesystem::path image;
  std::string method;
  std::string kernel = "random:0";
  std::filesystem::path model_dir;
  std::filesystem::path out;
  int crop_corner = 0;
};

// Each command validates its options, writes its artifacts atomically next
// to a run manifest, and throws on failure.
void RunTrain(const TrainOptions& o, std::ostream& log);
void RunPad(const PadOptions& o);
void RunEvalPad(const EvalPadOptions& o);
void RunSegAnalyze(const SegAnalyzeOptions& o);
void RunInspectActivations(const InspectOptions& o);

// Image files (.png, .ppm, .pgm) of a directory, sorted by name.
std::vector<std::filesystem::path> ListImages(const std::filesystem::path& dir);

// FNV-1a over the names and contents of the files, in order.
std::string CorpusDigest(const std::vector<std::filesystem::path>& files);

// Parses arguments and dispatches; returns the process exit code.
int Main(int argc, char** argv);

}  // namespace capad::cli

#endif  // CAPAD_TOOLS_CLI_HPP_
