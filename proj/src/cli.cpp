// Copyright (c) 2026 The nvsr Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "nvsr/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "nvsr/checkpoint.hpp"
#include "nvsr/config.hpp"
#include "nvsr/error.hpp"
#include "nvsr/synthetic.hpp"
#include "nvsr/train.hpp"

namespace nvsr {

namespace {

namespace fs = std::filesystem;

constexpr double kMatchedTolerance = 0.02;
constexpr int kSyntheticCorpusSize = 12;
constexpr int kHeldOutImages = 4;
constexpr int kHeldOutCrops = 32;
constexpr std::uint64_t kCorpusSeedOffset = 100;
constexpr std::uint64_t kHeldOutSeedOffset = 500;

struct Flags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string checkpoint;  // eval
  std::string input;       // degrade
};

struct Run {
  ExperimentConfig config;
  fs::path out;
  std::ostream& log;
};

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) throw Error("cannot write " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read config file " + path.string());
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

void require_exists(const std::string& path, const char* what) {
  if (!path.empty() && !fs::exists(path)) throw ConfigError(std::string(what) + " '" + path + "' does not exist");
}

TrainSchedule schedule_of(const ExperimentConfig& c) {
  TrainSchedule s = c.schedule;
  s.seed = c.experiment.seed;
  return s;
}

PretrainOptions pretrain_options(const ExperimentConfig& c) {
  PretrainOptions o;
  o.epochs = c.pretrain.epochs;
  o.crops_per_epoch = c.pretrain.crops_per_epoch;
  o.crop_size = c.pretrain.crop_size;
  o.lr = c.pretrain.lr;
  o.seed = c.experiment.seed;
  o.degradation = c.degradation;
  return o;
}

VideoClip load_clip(const ExperimentConfig& c) {
  if (!c.paths.video.empty()) return load_video(c.paths.video);
  return make_synthetic_video(parse_synthetic_kind(c.synthetic.kind), c.synthetic.frames, c.synthetic.height,
                              c.synthetic.width, c.synthetic.seed);
}

std::vector<Frame> load_corpus_dir(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".ppm") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ConfigError("corpus directory " + dir.string() + " holds no .ppm images");
  std::vector<Frame> out;
  for (const auto& f : files) out.push_back(load_frame(f));
  return out;
}

/// Training images and a set to compare against nearest-neighbour on. A
/// corpus directory is compared on fresh crops of itself; the synthetic
/// corpus gets separately seeded held-out images.
std::pair<std::vector<Frame>, std::vector<Frame>> corpus_of(const ExperimentConfig& c) {
  if (!c.paths.corpus.empty()) {
    auto images = load_corpus_dir(c.paths.corpus);
    return {images, images};
  }
  const auto& s = c.synthetic;
  return {make_texture_corpus(kSyntheticCorpusSize, s.height, s.width, s.seed + kCorpusSeedOffset),
          make_texture_corpus(kHeldOutImages, s.height, s.width, s.seed + kHeldOutSeedOffset)};
}

SRModel<float> pretrain(const Run& run) {
  const auto [train, held_out] = corpus_of(run.config);
  const auto options = pretrain_options(run.config);
  run.log << "pre-training SR block on " << train.size() << " images, " << options.epochs << " epochs\n";
  auto result = pretrain_sr(train, run.config.model.srb, options);

  std::string loss = "epoch,l1\n";
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e)
    loss += std::to_string(e) + fmt(",%.9g", result.epoch_loss[e]) + "\n";
  write_text(run.out / "pretrain_loss.csv", loss);

  const auto cmp = compare_with_nearest(result.model, held_out, kHeldOutCrops, options.crop_size,
                                        options.degradation, options.seed + kHeldOutSeedOffset);
  write_text(run.out / "srb_vs_nearest.csv", "upsampler,psnr_db\nsrb" + fmt(",%.6f", cmp.sr_psnr) + "\nnearest" +
                                                 fmt(",%.6f", cmp.nearest_psnr) + "\n");
  save_checkpoint(srb_checkpoint(result.model), run.out / "srb.nvck");
  run.log << "SR block " << fmt("%.2f", cmp.sr_psnr) << " dB vs nearest " << fmt("%.2f", cmp.nearest_psnr)
          << " dB over " << cmp.crops << " crops\n";
  return std::move(result.model);
}

/// paths.srb when set, otherwise a fresh pre-training run into --out.
SRModel<float> obtain_srb(const Run& run) {
  if (!run.config.paths.srb.empty()) {
    auto srb = srb_from_checkpoint(load_checkpoint(run.config.paths.srb));
    if (srb.config() != run.config.model.srb)
      throw ConfigError("SR block in " + run.config.paths.srb + " does not match model.srb_* settings");
    return srb;
  }
  return pretrain(run);
}

FitResult fit_one(const Run& run, const VideoClip& clip, const ModelConfig& model, const TrainSchedule& schedule,
                  const SRModel<float>* srb, const fs::path& dir) {
  FitOptions options;
  options.out_dir = dir;
  auto result = fit_video(clip, model, schedule, is_sr(model.variant) ? srb : nullptr, options);
  run.log << variant_name(model.variant) << " seed " << schedule.seed << ": "
          << fmt("%.4f", result.record.final_psnr()) << " dB, MS-SSIM " << fmt("%.6f", result.record.final_ms_ssim())
          << (result.record.diverged() ? " (diverged)" : "") << "\n";
  return result;
}

int cmd_make_synthetic(const Run& run) {
  const auto& s = run.config.synthetic;
  const auto clip =
      make_synthetic_video(parse_synthetic_kind(s.kind), s.frames, s.height, s.width, s.seed);
  save_clip_raw(clip, run.out / "clip.nvsr");
  save_video(clip, run.out / "frames");
  run.log << "wrote " << clip.size() << " " << s.kind << " frames to " << run.out.string() << "\n";
  return 0;
}

int cmd_pretrain(const Run& run) {
  require_exists(run.config.paths.corpus, "paths.corpus");
  pretrain(run);
  return 0;
}

int cmd_fit(const Run& run) {
  const auto clip = load_clip(run.config);
  std::optional<SRModel<float>> srb;
  if (is_sr(run.config.model.variant)) srb.emplace(obtain_srb(run));
  const auto result = fit_one(run, clip, run.config.model, schedule_of(run.config), srb ? &*srb : nullptr, run.out);
  save_video(VideoClip([&] {
               std::vector<Frame> frames;
               for (std::size_t k = 0; k < clip.size(); ++k) frames.push_back(reconstruct_frame(result.model, clip, k));
               return frames;
             }()),
             run.out / "reconstruction");
  return 0;
}

int cmd_eval(const Run& run, const std::string& checkpoint) {
  const auto model = model_from_checkpoint(load_checkpoint(checkpoint));
  const auto report = evaluate_video(model, load_clip(run.config));
  write_text(run.out / "metrics.csv", report.to_csv());
  run.log << "mean " << fmt("%.4f", report.mean_psnr()) << " dB, MS-SSIM " << fmt("%.6f", report.mean_ms_ssim())
          << " over " << report.size() << " frames\n";
  return 0;
}

int cmd_ablate(const Run& run) {
  const auto& c = run.config;
  if (!is_sr(c.model.variant)) throw ConfigError("ablate needs an SR variant (sr-nerv or sr-hnerv)");
  std::vector<int> starts = c.experiment.ablate_starts;
  const int total = c.schedule.total_epochs;
  if (starts.empty()) starts = {0, total / 6, total / 2, total};
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < c.experiment.seeds; ++i) seeds.push_back(c.experiment.seed + std::uint64_t(i));
  const auto clip = load_clip(c);
  const auto srb = obtain_srb(run);
  run.log << "ablating " << starts.size() << " start epochs x " << seeds.size() << " seeds\n";
  const auto table = ablate_finetune_start(clip, c.model, srb, starts, schedule_of(c), seeds);
  write_text(run.out / "ablation.csv", table.to_csv());
  write_text(run.out / "ablation_runs.csv", table.runs_csv());
  run.log << table.to_csv();
  return 0;
}

int cmd_degrade(const Run& run, const std::string& input) {
  if (input.empty()) throw ConfigError("degrade needs --input IMAGE.ppm");
  const Frame image = load_frame(input);
  if (image.height() % 2 || image.width() % 2) throw ConfigError("degrade needs even image dimensions");
  DegradationSampler sampler(derive_seed(run.config.experiment.seed, 0));
  const auto params = sampler.sample(run.config.degradation);
  const Frame lr = downsample_area(image, 2);
  const Frame degraded = degrade(lr, params);
  save_frame(lr, run.out / "lr.ppm");
  save_frame(degraded, run.out / "degraded.ppm");
  save_frame(upsample_nearest(degraded, 2), run.out / "degraded_nearest.ppm");
  std::string text = "kernel_size = " + std::to_string(params.blur.kernel_size) + "\nsigma = " +
                     fmt("%.9g", params.blur.sigma) + "\nsaturation = " + fmt("%.9g", params.color.saturation) + "\n";
  for (int ch = 0; ch < 3; ++ch)
    text += "gain_" + std::to_string(ch) + " = " + fmt("%.9g", params.color.gain[std::size_t(ch)]) + "\nbias_" +
            std::to_string(ch) + " = " + fmt("%.9g", params.color.bias[std::size_t(ch)]) + "\n";
  write_text(run.out / "degradation.txt", text);
  run.log << "degraded " << input << " (" << image.height() << "x" << image.width() << ")\n";
  return 0;
}

int cmd_compare(const Run& run) {
  const auto& c = run.config;
  ModelConfig sr = is_sr(c.model.variant) ? c.model : matched_counterpart(c.model);
  ModelConfig baseline = matched_counterpart(sr);
  if (c.experiment.budget > 0) {
    baseline = fit_to_budget(baseline, c.experiment.budget);
    sr = fit_to_budget(sr, c.experiment.budget);
  }
  check_matched_pair(baseline, sr);
  const auto nb = estimate_params(baseline), ns = estimate_params(sr);
  const double a = double(nb.total()), b = double(ns.total());
  if (std::abs(a - b) > kMatchedTolerance * std::max(a, b))
    throw ConfigError("compare: " + std::to_string(nb.total()) + " vs " + std::to_string(ns.total()) +
                      " parameters differ by more than 2%");

  const auto clip = load_clip(c);
  const auto srb = obtain_srb(run);
  std::string table = "model,params,srb_params,size_m,psnr_db,ms_ssim\n";
  for (const auto& [model, count] : {std::pair{baseline, nb}, std::pair{sr, ns}}) {
    double psnr_sum = 0, ssim_sum = 0;
    for (int i = 0; i < c.experiment.seeds; ++i) {
      TrainSchedule s = schedule_of(c);
      s.seed += std::uint64_t(i);
      const fs::path dir = run.out / std::string(variant_name(model.variant)) / ("seed_" + std::to_string(s.seed));
      const auto result = fit_one(run, clip, model, s, &srb, dir);
      psnr_sum += result.record.final_psnr();
      ssim_sum += result.record.final_ms_ssim();
    }
    table += std::string(variant_name(model.variant)) + "," + std::to_string(count.total()) + "," +
             std::to_string(count.srb) + fmt(",%.6f", double(count.total()) / 1e6) +
             fmt(",%.4f", psnr_sum / c.experiment.seeds) + fmt(",%.6f", ssim_sum / c.experiment.seeds) + "\n";
  }
  write_text(run.out / "compare.csv", table);
  run.log << table;
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Neural video representations with a super-resolution block"};
  app.name("nvsr");
  app.require_subcommand(1, 1);
  Flags flags;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "Experiment config file (key = value lines)");
    sub->add_option("--out", flags.out, "Output directory");
    sub->add_option("--seed", flags.seed, "Overrides experiment.seed");
    sub->add_option("--threads", flags.threads, "Worker threads; 0 runs single-threaded and bit-reproducible")
        ->check(CLI::NonNegativeNumber);
    return sub;
  };
  common(app.add_subcommand("pretrain-sr", "Pre-train the SR block on degraded crops"));
  common(app.add_subcommand("fit", "Fit one clip"));
  common(app.add_subcommand("eval", "Evaluate a checkpoint on a clip"))
      ->add_option("--checkpoint", flags.checkpoint, "Checkpoint written by fit")
      ->required();
  common(app.add_subcommand("ablate", "Sweep the SR block fine-tuning start epoch"));
  common(app.add_subcommand("degrade", "Downsample and degrade one image"))
      ->add_option("--input", flags.input, "PPM image")
      ->required();
  common(app.add_subcommand("make-synthetic", "Write a synthetic clip"));
  common(app.add_subcommand("compare", "Fit a matched-budget baseline and SR pair"));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "nvsr: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    ExperimentConfig config = flags.config.empty() ? ExperimentConfig{} : parse_config(read_text(flags.config));
    if (flags.seed) config.experiment.seed = *flags.seed;
    // Validate inputs before any work starts.
    require_exists(config.paths.video, "paths.video");
    require_exists(config.paths.corpus, "paths.corpus");
    require_exists(config.paths.srb, "paths.srb");
    require_exists(flags.checkpoint, "--checkpoint");
    require_exists(flags.input, "--input");
    set_num_threads(flags.threads);
    const fs::path dir = !flags.out.empty() ? fs::path(flags.out)
                         : !config.paths.output.empty() ? fs::path(config.paths.output)
                                                        : fs::path("nvsr-out");
    fs::create_directories(dir);
    write_text(dir / "experiment.txt", serialize_config(config));
    const Run run{config, dir, out};

    const std::string name = sub->get_name();
    if (name == "make-synthetic") return cmd_make_synthetic(run);
    if (name == "pretrain-sr") return cmd_pretrain(run);
    if (name == "fit") return cmd_fit(run);
    if (name == "eval") return cmd_eval(run, flags.checkpoint);
    if (name == "ablate") return cmd_ablate(run);
    if (name == "degrade") return cmd_degrade(run, flags.input);
    if (name == "compare") return cmd_compare(run);
  } catch (const std::exception& e) {
    err << "nvsr " << sub->get_name() << ": " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace nvsr
