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
#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "capad/bench.hpp"
#include "capad/blocks.hpp"
#include "capad/hash.hpp"
#include "capad/image_io.hpp"
#include "capad/padding.hpp"
#include "capad/parallel.hpp"
#include "capad/train.hpp"

namespace capad::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

void WriteText(const fs::path& path, const std::string& text) {
  WriteFileAtomic(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

void WriteManifest(const fs::path& path, const std::string& command,
                   Json flags, std::uint64_t seed, const std::string& digest) {
  Json manifest;
  manifest["command"] = command;
  manifest["flags"] = std::move(flags);
  manifest["seed"] = seed;
  manifest["corpus_digest"] = digest;
  manifest["tool_version"] = kToolVersion;
  WriteText(path, manifest.dump(2) + "\n");
}

fs::path SidecarManifest(const fs::path& out) {
  return fs::path(out.string() + ".manifest.json");
}

std::vector<Tensor> LoadCorpus(const std::vector<fs::path>& files) {
  std::vector<Tensor> corpus;
  for (const fs::path& f : files) corpus.push_back(LoadImage(f));
  return corpus;
}

std::string Fixed(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

// Loss history table: one row per epoch, one column per trained direction.
std::string LossCsv(const std::map<Side, std::vector<double>>& history) {
  std::string out = "epoch";
  std::size_t epochs = 0;
  for (const auto& [side, losses] : history) {
    out += "," + std::string(SideName(side));
    epochs = std::max(epochs, losses.size());
  }
  out += "\n";
  for (std::size_t e = 0; e < epochs; ++e) {
    out += std::to_string(e + 1);
    for (const auto& [side, losses] : history) {
      out += "," + (e < losses.size() ? Fixed("%.8f", losses[e]) : std::string());
    }
    out += "\n";
  }
  return out;
}

void RequireEmptyOrMissing(const fs::path& dir) {
  if (fs::exists(dir) && (!fs::is_directory(dir) || !fs::is_empty(dir))) {
    throw std::invalid_argument("output directory " + dir.string() +
                                " exists and is not empty");
  }
}

// Builds a directory next to `target` and moves it into place on success.
class StagingDir {
 public:
  explicit StagingDir(const fs::path& target)
      : target_(target), path_(target.string() + ".partial") {
    RequireEmptyOrMissing(target_);
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~StagingDir() {
    if (!committed_) {
      std::error_code ec;
      fs::remove_all(path_, ec);
    }
  }
  StagingDir(const StagingDir&) = delete;
  StagingDir& operator=(const StagingDir&) = delete;

  const fs::path& path() const { return path_; }
  void Commit() {
    if (fs::exists(target_)) fs::remove(target_);
    fs::rename(path_, target_);
    committed_ = true;
  }

 private:
  fs::path target_;
  fs::path path_;
  bool committed_ = false;
};

std::optional<PadModel> MaybeLoadModel(const fs::path& dir) {
  if (dir.empty()) return std::nullopt;
  return LoadPadModel(dir);
}

ConvKernel KernelFromSpec(const std::string& spec, int in_channels) {
  if (spec.rfind("random:", 0) == 0) {
    const std::string digits = spec.substr(7);
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
      throw std::invalid_argument("bad kernel spec '" + spec + "'");
    }
    return RandomKernel(8, in_channels, 3, std::stoull(digits));
  }
  const Tensor t = ReadTensorFile(spec);
  if (t.height() != t.width() || t.height() % 2 == 0 ||
      t.channels() % in_channels != 0) {
    throw std::invalid_argument("kernel tensor " + t.shape_string() +
                                " is not (out * " + std::to_string(in_channels) +
                                ", k, k) with odd k");
  }
  ConvKernel k(t.channels() / in_channels, in_channels, t.height());
  std::copy(t.values().begin(), t.values().end(), k.weights.begin());
  return k;
}

std::string JoinStrings(const std::vector<std::string>& items) {
  std::string out;
  for (const std::string& s : items) out += (out.empty() ? "" : ",") + s;
  return out;
}

}  // namespace

std::vector<fs::path> ListImages(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw std::runtime_error(dir.string() + " is not a directory");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".png" || ext == ".ppm" || ext == ".pgm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::string CorpusDigest(const std::vector<fs::path>& files) {
  std::uint64_t h = kFnvOffset;
  for (const fs::path& f : files) {
    const std::string name = f.filename().string();
    h = Fnv1a(name.data(), name.size() + 1, h);
    const auto bytes = ReadFileBytes(f);
    h = Fnv1a(bytes.data(), bytes.size(), h);
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void RunTrain(const TrainOptions& o, std::ostream& log) {
  TrainConfig cfg;
  cfg.lr = o.lr;
  cfg.batch_size = o.batch;
  cfg.epochs = o.epochs;
  cfg.loss_norm = ParseLossNorm(o.loss);
  if (o.sampling == "interior") {
    cfg.sampling = StripSampling::kInterior;
  } else if (o.sampling == "border") {
    cfg.sampling = StripSampling::kBorder;
  } else {
    throw std::invalid_argument("sampling must be interior or border");
  }
  cfg.seed = o.seed;
  cfg.augment = o.augment ? AugmentConfig{} : AugmentConfig::Identity(0);
  cfg.augment.crop_size = o.crop_size;
  cfg.augment.seed = o.seed;
  cfg.Validate();
  NetConfig net_cfg;
  net_cfg.depth = o.depth;
  net_cfg.base_channels = o.base_channels;
  net_cfg.in_channels = 3;
  net_cfg.seed = o.seed;
  net_cfg.Validate();
  if (o.p < 1 || o.m < 1) throw std::invalid_argument("p and m must be >= 1");

  const auto files = ListImages(o.corpus_dir);
  if (files.empty()) throw std::runtime_error("no images in " + o.corpus_dir.string());
  const std::vector<Tensor> corpus = LoadCorpus(files);

  StagingDir staging(o.out_dir);
  std::mutex log_mutex;
  const PadModelTraining trained = TrainPadModel(
      corpus, cfg, net_cfg, o.p, o.m, o.two_model,
      [&](Side side, int epoch, double loss) {
        std::lock_guard<std::mutex> lock(log_mutex);
        log << SideName(side) << " epoch " << epoch << "/" << o.epochs
            << " loss " << Fixed("%.6f", loss) << "\n";
      });
  SavePadModel(trained.model, staging.path());
  WriteText(staging.path() / "loss.csv", LossCsv(trained.loss_history));

  Json flags;
  flags["corpus"] = o.corpus_dir.string();
  flags["out"] = o.out_dir.string();
  flags["p"] = o.p;
  flags["m"] = o.m;
  flags["epochs"] = o.epochs;
  flags["batch"] = o.batch;
  flags["lr"] = o.lr;
  flags["seed"] = o.seed;
  flags["two_model"] = o.two_model;
  flags["loss"] = o.loss;
  flags["sampling"] = o.sampling;
  flags["crop_size"] = o.crop_size;
  flags["augment"] = o.augment;
  flags["depth"] = o.depth;
  flags["base_channels"] = o.base_channels;
  WriteManifest(staging.path() / "run_manifest.json", "train", flags, o.seed,
                CorpusDigest(files));
  staging.Commit();
}

void RunPad(const PadOptions& o) {
  const PadMethod method = ParseMethod(o.method);
  if (method == PadMethod::kContextAware && o.model_dir.empty()) {
    throw std::invalid_argument("method ca requires --model");
  }
  if (o.p < 1) throw std::invalid_argument("p must be >= 1");
  const auto model = MaybeLoadModel(o.model_dir);
  const Tensor image = LoadImage(o.image);
  SaveImage(ApplyPadding(image, method, o.p, model ? &*model : nullptr), o.out);

  Json flags;
  flags["image"] = o.image.string();
  flags["method"] = o.method;
  flags["p"] = o.p;
  flags["model"] = o.model_dir.string();
  flags["out"] = o.out.string();
  WriteManifest(SidecarManifest(o.out), "pad", flags, model ? model->config.seed : 0,
                CorpusDigest({o.image}));
}

void RunEvalPad(const EvalPadOptions& o) {
  std::vector<PadMethod> methods;
  for (const std::string& name : o.methods) methods.push_back(ParseMethod(name));
  if (methods.empty()) throw std::invalid_argument("no methods given");
  if (o.p_list.empty()) throw std::invalid_argument("no padding sizes given");
  const bool needs_model =
      std::find(methods.begin(), methods.end(), PadMethod::kContextAware) != methods.end();
  if (needs_model && o.model_dir.empty()) {
    throw std::invalid_argument("method ca requires --model");
  }
  EvalOptions options;
  options.crop = o.crop;
  options.overlap = ParseFraction(o.overlap);
  options.m = o.m;
  const auto model = MaybeLoadModel(o.model_dir);
  const auto files = ListImages(o.corpus_dir);
  if (files.empty()) throw std::runtime_error("no images in " + o.corpus_dir.string());
  const std::vector<Tensor> corpus = LoadCorpus(files);

  const auto records = EvalPaddingTable(corpus, methods, o.p_list, options,
                                        model ? &*model : nullptr);
  WriteText(o.out, MetricsCsv(records));

  Json flags;
  flags["corpus"] = o.corpus_dir.string();
  flags["methods"] = JoinStrings(o.methods);
  Json p_list = Json::array();
  for (int p : o.p_list) p_list.push_back(p);
  flags["p_list"] = p_list;
  flags["crop"] = o.crop;
  flags["overlap"] = o.overlap;
  flags["m"] = o.m;
  flags["model"] = o.model_dir.string();
  flags["out"] = o.out.string();
  WriteManifest(SidecarManifest(o.out), "eval-pad", flags,
                model ? model->config.seed : 0, CorpusDigest(files));
}

void RunSegAnalyze(const SegAnalyzeOptions& o) {
  std::span<const PaletteEntry> palette;
  if (o.palette == "deepglobe") {
    palette = DeepGlobePalette();
  } else if (!o.palette.empty()) {
    throw std::invalid_argument("unknown palette '" + o.palette + "'");
  }
  std::vector<Fraction> fractions;
  for (const std::string& f : o.leave_out) {
    fractions.push_back(ParseFraction(f));
    if (fractions.back().numerator >= fractions.back().denominator) {
      throw std::invalid_argument("leave-out fraction " + f + " must be < 1");
    }
  }
  const auto pred_files = ListImages(o.pred_dir);
  const auto gt_files = ListImages(o.gt_dir);
  std::set<std::string> pred_names, gt_names;
  for (const auto& f : pred_files) pred_names.insert(f.filename().string());
  for (const auto& f : gt_files) gt_names.insert(f.filename().string());
  std::vector<std::string> unmatched;
  for (const auto& n : pred_names)
    if (!gt_names.count(n)) unmatched.push_back(o.pred_dir.string() + "/" + n);
  for (const auto& n : gt_names)
    if (!pred_names.count(n)) unmatched.push_back(o.gt_dir.string() + "/" + n);
  if (!unmatched.empty()) {
    std::string msg = "unmatched label maps:";
    for (const auto& u : unmatched) msg += "\n  " + u;
    throw std::runtime_error(msg);
  }
  if (gt_files.empty()) throw std::runtime_error("no label maps in " + o.gt_dir.string());

  std::vector<LabelMap> pred, gt;
  for (std::size_t i = 0; i < gt_files.size(); ++i) {
    pred.push_back(LoadLabelMap(pred_files[i], palette));
    gt.push_back(LoadLabelMap(gt_files[i], palette));
  }

  std::string table = "leave_out,miou\n";
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    table += o.leave_out[i] + "," +
             Fixed("%.6f", BorderMiou(pred, gt, fractions[i], o.num_classes)) + "\n";
  }
  const Histogram hist = ErrorDistanceHistogram(pred, gt, o.bin_width);

  StagingDir staging(o.out_dir);
  WriteText(staging.path() / "border_miou.csv", table);
  WriteText(staging.path() / "error_histogram.csv", HistogramCsv(hist));
  WriteText(staging.path() / "error_histogram.svg",
            HistogramSvg(hist, "Errors by distance to image centre"));
  Json flags;
  flags["pred"] = o.pred_dir.string();
  flags["gt"] = o.gt_dir.string();
  flags["num_classes"] = o.num_classes;
  flags["leave_out"] = JoinStrings(o.leave_out);
  flags["bin_width"] = o.bin_width;
  flags["palette"] = o.palette;
  flags["out"] = o.out_dir.string();
  std::vector<fs::path> all = pred_files;
  all.insert(all.end(), gt_files.begin(), gt_files.end());
  WriteManifest(staging.path() / "run_manifest.json", "seg-analyze", flags, 0,
                CorpusDigest(all));
  staging.Commit();
}

void RunInspectActivations(const InspectOptions& o) {
  const bool partial = o.method == "partial";
  const PadMethod method = partial ? PadMethod::kZero : ParseMethod(o.method);
  if (method == PadMethod::kContextAware && o.model_dir.empty()) {
    throw std::invalid_argument("method ca requires --model");
  }
  const auto model = MaybeLoadModel(o.model_dir);
  const Tensor image = LoadImage(o.image);
  const ConvKernel kernel = KernelFromSpec(o.kernel, image.channels());
  Tensor map = partial ? SummedActivationMapPartial(image, kernel)
                       : SummedActivationMap(image, kernel, method,
                                             model ? &*model : nullptr);
  if (o.crop_corner < 0) throw std::invalid_argument("crop corner must be >= 0");
  if (o.crop_corner > 0) {
    if (o.crop_corner > map.height() || o.crop_corner > map.width()) {
      throw std::invalid_argument("crop corner larger than the image");
    }
    map = Crop(map, 0, 0, o.crop_corner, o.crop_corner);
  }
  SaveImage(map, o.out);

  Json flags;
  flags["image"] = o.image.string();
  flags["method"] = o.method;
  flags["kernel"] = o.kernel;
  flags["model"] = o.model_dir.string();
  flags["out"] = o.out.string();
  flags["crop_corner"] = o.crop_corner;
  WriteManifest(SidecarManifest(o.out), "inspect-activations", flags, 0,
                CorpusDigest({o.image}));
}

int Main(int argc, char** argv) {
  CLI::App app{"Context-aware padding: training, padding and evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  int threads = ThreadCount();
  app.add_option("--threads", threads, "Worker threads (CAPAD_THREADS overrides)")
      ->check(CLI::PositiveNumber);

  TrainOptions train;
  auto* t = app.add_subcommand("train", "Train the direction networks");
  t->add_option("--corpus", train.corpus_dir, "Directory of training images")->required();
  t->add_option("--out", train.out_dir, "Output bundle directory")->required();
  t->add_option("--p", train.p, "Padding width")->capture_default_str();
  t->add_option("--m", train.m, "Context width")->capture_default_str();
  t->add_option("--epochs", train.epochs)->capture_default_str();
  t->add_option("--batch", train.batch)->capture_default_str();
  t->add_option("--lr", train.lr)->capture_default_str();
  t->add_option("--seed", train.seed)->capture_default_str();
  t->add_flag("--two-model", train.two_model, "Train left/top only; mirror for right/bottom");
  t->add_option("--loss", train.loss, "l1 or l2")->capture_default_str();
  t->add_option("--sampling", train.sampling, "interior or border strips")
      ->capture_default_str();
  t->add_option("--crop-size", train.crop_size, "Augmentation crop, 0 keeps the frame")
      ->capture_default_str();
  t->add_flag("!--no-augment", train.augment, "Disable augmentation");
  t->add_option("--depth", train.depth)->capture_default_str();
  t->add_option("--base-channels", train.base_channels)->capture_default_str();

  PadOptions pad;
  auto* pd = app.add_subcommand("pad", "Pad a single image");
  pd->add_option("--image", pad.image)->required();
  pd->add_option("--method", pad.method, "zero|circular|reflect|replicate|bilinear|distribution|ca")
      ->required();
  pd->add_option("--p", pad.p)->capture_default_str();
  pd->add_option("--model", pad.model_dir, "Model bundle for ca");
  pd->add_option("--out", pad.out)->required();

  EvalPadOptions eval;
  auto* ev = app.add_subcommand("eval-pad", "Padding PSNR/MSE over a corpus");
  ev->add_option("--corpus", eval.corpus_dir)->required();
  ev->add_option("--methods", eval.methods)->delimiter(',')->capture_default_str();
  ev->add_option("--p-list", eval.p_list)->delimiter(',')->capture_default_str();
  ev->add_option("--crop", eval.crop)->capture_default_str();
  ev->add_option("--overlap", eval.overlap)->capture_default_str();
  ev->add_option("--m", eval.m)->capture_default_str();
  ev->add_option("--model", eval.model_dir);
  ev->add_option("--out", eval.out)->required();

  SegAnalyzeOptions seg;
  auto* sg = app.add_subcommand("seg-analyze", "Border mIoU and error-distance histogram");
  sg->add_option("--pred", seg.pred_dir)->required();
  sg->add_option("--gt", seg.gt_dir)->required();
  sg->add_option("--num-classes", seg.num_classes)->capture_default_str();
  sg->add_option("--leave-out", seg.leave_out)->delimiter(',')->capture_default_str();
  sg->add_option("--bin-width", seg.bin_width)->capture_default_str();
  sg->add_option("--palette", seg.palette, "deepglobe for RGB label maps");
  sg->add_option("--out", seg.out_dir)->required();

  InspectOptions inspect;
  auto* in = app.add_subcommand("inspect-activations", "Summed activation heatmap");
  in->add_option("--image", inspect.image)->required();
  in->add_option("--method", inspect.method, "padding method or partial")->required();
  in->add_option("--kernel", inspect.kernel, "random:<seed> or a CAPT tensor file")
      ->capture_default_str();
  in->add_option("--model", inspect.model_dir);
  in->add_option("--out", inspect.out)->required();
  in->add_option("--crop-corner", inspect.crop_corner, "Keep the top-left NxN crop");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (const char* env = std::getenv("CAPAD_THREADS"); env && *env) {
      threads = std::stoi(env);
      if (threads < 1) throw std::invalid_argument("");
    }
  } catch (const std::exception&) {
    std::cerr << "capad: error: CAPAD_THREADS must be a positive integer\n";
    return 2;
  }
  SetThreadCount(threads);

  try {
    if (*t) RunTrain(train, std::cerr);
    if (*pd) RunPad(pad);
    if (*ev) RunEvalPad(eval);
    if (*sg) RunSegAnalyze(seg);
    if (*in) RunInspectActivations(inspect);
  } catch (const std::exception& e) {
    std::cerr << "capad: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace capad::cli
